/** Scenario spread chart: scenario index on the x-axis, predicted cost on
 * the y-axis, and a horizontal line at the service-reported mean.  Pure
 * string rendering so identical inputs yield identical markup. */

export interface ChartLayout {
  width: number;
  height: number;
  pad: number;
}

export const DEFAULT_LAYOUT: ChartLayout = { width: 640, height: 260, pad: 36 };

export interface ChartGeometry {
  points: { x: number; y: number }[];
  meanY: number;
  lo: number;
  hi: number;
}

export function chartGeometry(
  values: number[],
  mean: number,
  layout: ChartLayout = DEFAULT_LAYOUT,
): ChartGeometry {
  if (values.length === 0) {
    throw new RangeError("chart needs at least one scenario value");
  }
  let lo = Math.min(mean, ...values);
  let hi = Math.max(mean, ...values);
  if (lo === hi) {
    lo -= 1;
    hi += 1;
  }
  const innerWidth = layout.width - 2 * layout.pad;
  const innerHeight = layout.height - 2 * layout.pad;
  const toY = (v: number) =>
    layout.height - layout.pad - ((v - lo) / (hi - lo)) * innerHeight;
  const points = values.map((v, i) => ({
    x:
      values.length === 1
        ? layout.width / 2
        : layout.pad + (i * innerWidth) / (values.length - 1),
    y: toY(v),
  }));
  return { points, meanY: toY(mean), lo, hi };
}

function fmt(n: number): string {
  return Number(n.toFixed(2)).toString();
}

export function renderChart(
  values: number[],
  mean: number,
  layout: ChartLayout = DEFAULT_LAYOUT,
): string {
  const geometry = chartGeometry(values, mean, layout);
  const circles = geometry.points
    .map(
      (p) =>
        `<circle class="scenario-point" cx="${fmt(p.x)}" cy="${fmt(p.y)}" r="3"></circle>`,
    )
    .join("");
  const meanLine =
    `<line class="mean-line" x1="${fmt(layout.pad)}" y1="${fmt(geometry.meanY)}" ` +
    `x2="${fmt(layout.width - layout.pad)}" y2="${fmt(geometry.meanY)}"></line>`;
  const axis =
    `<line class="axis" x1="${fmt(layout.pad)}" y1="${fmt(layout.height - layout.pad)}" ` +
    `x2="${fmt(layout.width - layout.pad)}" y2="${fmt(layout.height - layout.pad)}"></line>`;
  const labels =
    `<text class="axis-label lo" x="4" y="${fmt(layout.height - layout.pad)}">${fmt(geometry.lo)}</text>` +
    `<text class="axis-label hi" x="4" y="${fmt(layout.pad)}">${fmt(geometry.hi)}</text>`;
  return (
    `<svg class="scenario-chart" viewBox="0 0 ${layout.width} ${layout.height}" ` +
    `role="img" aria-label="scenario spread">` +
    axis +
    meanLine +
    circles +
    labels +
    `</svg>`
  );
}
