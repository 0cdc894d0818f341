/** Display formatting.  Currency renders as whole Egyptian pounds; the
 * exact service value always travels alongside in a data attribute. */

export function formatLE(value: number): string {
  return `${Math.round(value).toLocaleString("en-US")} LE`;
}

export function formatLEPerHectare(value: number): string {
  return `${Math.round(value).toLocaleString("en-US")} LE/ha`;
}

/** Escape text destined for an HTML attribute or text node. */
export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}
