"""Fuzzy rule systems for cost estimation.

Membership functions and level sets, pointwise set algebra, shouldered
uniform partitions, Mamdani min/max inference with centre-of-gravity or
weighted-average defuzzification, data-driven rule generation, a combined
error/size fitness measure, and a seeded genetic search that prunes a
candidate rule pool.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .data import DRIVER_NAMES, Dataset

__all__ = [
    "RESOLUTION",
    "MembershipFunction",
    "FuzzySet",
    "LevelSets",
    "Partition",
    "FuzzyRule",
    "RuleBase",
    "GaConfig",
    "InferenceResult",
    "membership",
    "level_sets",
    "combine",
    "complement",
    "alpha_cut",
    "uniform_partition",
    "default_partitions",
    "infer",
    "defuzzify",
    "predict_fuzzy",
    "generate_rules_wm",
    "generate_grid_pool",
    "fitness",
    "penalized_mape",
    "ga_select_rules",
    "to_listing",
    "save_rule_base",
    "load_rule_base",
]

RESOLUTION = 1001


# --------------------------------------------------------------------------
# membership functions and fuzzy sets


@dataclass(frozen=True)
class MembershipFunction:
    """Parametric membership curve: triangular, trapezoidal, or gaussian."""

    shape: Literal["triangular", "trapezoidal", "gaussian"]
    params: tuple[float, ...]

    def __post_init__(self) -> None:
        p = self.params
        if self.shape == "triangular":
            if len(p) != 3 or not p[0] <= p[1] <= p[2]:
                raise ValueError("triangular needs ascending (a1, a2, a3)")
        elif self.shape == "trapezoidal":
            if len(p) != 4 or not p[0] <= p[1] <= p[2] <= p[3]:
                raise ValueError("trapezoidal needs ascending (a1, a2, a3, a4)")
        elif self.shape == "gaussian":
            if len(p) != 2 or p[1] <= 0:
                raise ValueError("gaussian needs (center, width > 0)")
        else:
            raise ValueError(f"unknown shape {self.shape!r}")

    @property
    def peak(self) -> float:
        """Representative point of full membership."""
        p = self.params
        if self.shape == "triangular":
            return p[1]
        if self.shape == "trapezoidal":
            return (p[1] + p[2]) / 2.0
        return p[0]

    def evaluate(self, x: float) -> float:
        p = self.params
        if self.shape == "triangular":
            a1, a2, a3 = p
            if x < a1 or x > a3:
                return 0.0
            if x == a2:
                return 1.0
            if x < a2:
                return (x - a1) / (a2 - a1)
            return (a3 - x) / (a3 - a2)
        if self.shape == "trapezoidal":
            a1, a2, a3, a4 = p
            if x < a1 or x > a4:
                return 0.0
            if a2 <= x <= a3:
                return 1.0
            if x < a2:
                return (x - a1) / (a2 - a1)
            return (a4 - x) / (a4 - a3)
        center, width = p
        return math.exp(-((x - center) ** 2) / (2.0 * width**2))

    def evaluate_array(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        p = self.params
        out = np.zeros_like(xs)
        if self.shape == "triangular":
            a1, a2, a3 = p
            if a2 > a1:
                rising = (xs >= a1) & (xs < a2)
                out[rising] = (xs[rising] - a1) / (a2 - a1)
            if a3 > a2:
                falling = (xs > a2) & (xs <= a3)
                out[falling] = (a3 - xs[falling]) / (a3 - a2)
            out[xs == a2] = 1.0
            return out
        if self.shape == "trapezoidal":
            a1, a2, a3, a4 = p
            if a2 > a1:
                rising = (xs >= a1) & (xs < a2)
                out[rising] = (xs[rising] - a1) / (a2 - a1)
            if a4 > a3:
                falling = (xs > a3) & (xs <= a4)
                out[falling] = (a4 - xs[falling]) / (a4 - a3)
            out[(xs >= a2) & (xs <= a3)] = 1.0
            return out
        center, width = p
        return np.exp(-((xs - center) ** 2) / (2.0 * width**2))


def membership(mf: MembershipFunction, x: float) -> float:
    """Degree of membership of ``x`` in the set described by ``mf``."""
    return mf.evaluate(float(x))


@dataclass(frozen=True)
class FuzzySet:
    """A fuzzy set over a bounded universe.

    Holds either a parametric membership function or a membership curve
    sampled on an even grid spanning the bounds.
    """

    bounds: tuple[float, float]
    mf: MembershipFunction | None = None
    samples: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        lo, hi = self.bounds
        if not lo < hi:
            raise ValueError("universe bounds must satisfy lo < hi")
        if (self.mf is None) == (self.samples is None):
            raise ValueError("provide exactly one of mf or samples")
        if self.samples is not None:
            if len(self.samples) < 2:
                raise ValueError("sampled curve needs at least 2 points")
            if any(not 0.0 <= v <= 1.0 + 1e-12 for v in self.samples):
                raise ValueError("membership values must lie in [0, 1]")

    def grid(self) -> np.ndarray:
        n = len(self.samples) if self.samples is not None else RESOLUTION
        return np.linspace(self.bounds[0], self.bounds[1], n)

    def sampled(self, resolution: int = RESOLUTION) -> np.ndarray:
        """Membership values on an even grid over the universe."""
        if self.samples is not None:
            return np.asarray(self.samples, dtype=float)
        return self.mf.evaluate_array(np.linspace(*self.bounds, resolution))

    def evaluate(self, x: float) -> float:
        if self.mf is not None:
            return self.mf.evaluate(float(x))
        lo, hi = self.bounds
        if x < lo or x > hi:
            return 0.0
        return float(np.interp(x, self.grid(), np.asarray(self.samples)))


@dataclass(frozen=True)
class LevelSets:
    """Support and core intervals plus the half-membership points."""

    support: tuple[float, float]
    core: tuple[float, float]
    crossovers: tuple[float, ...]


def _numeric_level_sets(fs: FuzzySet) -> LevelSets:
    xs = fs.grid()
    mus = fs.sampled(len(xs))
    positive = np.flatnonzero(mus > 1e-12)
    if positive.size == 0:
        raise ValueError("set is identically zero")
    support = (float(xs[positive[0]]), float(xs[positive[-1]]))
    full = np.flatnonzero(mus >= 1.0 - 1e-9)
    core = (
        (float(xs[full[0]]), float(xs[full[-1]]))
        if full.size
        else (float("nan"), float("nan"))
    )
    crossings: list[float] = []
    for i in range(len(xs) - 1):
        lo_mu, hi_mu = mus[i] - 0.5, mus[i + 1] - 0.5
        if lo_mu == 0.0:
            crossings.append(float(xs[i]))
        elif lo_mu * hi_mu < 0:
            t = -lo_mu / (hi_mu - lo_mu)
            crossings.append(float(xs[i] + t * (xs[i + 1] - xs[i])))
    if len(xs) and mus[-1] == 0.5:
        crossings.append(float(xs[-1]))
    deduped: list[float] = []
    for c in crossings:
        if not deduped or abs(c - deduped[-1]) > 1e-9:
            deduped.append(c)
    return LevelSets(support=support, core=core, crossovers=tuple(deduped))


def level_sets(fs: FuzzySet) -> LevelSets:
    """Support, core, and half-membership crossover points of a set."""
    if fs.mf is None:
        return _numeric_level_sets(fs)
    p = fs.mf.params
    if fs.mf.shape == "triangular":
        a1, a2, a3 = p
        crossings = []
        if a2 > a1:
            crossings.append(a1 + 0.5 * (a2 - a1))
        if a3 > a2:
            crossings.append(a2 + 0.5 * (a3 - a2))
        return LevelSets((a1, a3), (a2, a2), tuple(crossings))
    if fs.mf.shape == "trapezoidal":
        a1, a2, a3, a4 = p
        crossings = []
        if a2 > a1:
            crossings.append(a1 + 0.5 * (a2 - a1))
        if a4 > a3:
            crossings.append(a3 + 0.5 * (a4 - a3))
        return LevelSets((a1, a4), (a2, a3), tuple(crossings))
    center, width = p
    offset = width * math.sqrt(2.0 * math.log(2.0))
    return LevelSets(
        support=fs.bounds,
        core=(center, center),
        crossovers=(center - offset, center + offset),
    )


CombineMode = Literal["union-max", "union-product", "intersect-min", "intersect-product"]


def combine(a: FuzzySet, b: FuzzySet, mode: CombineMode = "union-max") -> FuzzySet:
    """Pointwise union or intersection of two sets on the same universe."""
    if a.bounds != b.bounds:
        raise ValueError("universe mismatch")
    resolution = max(
        len(a.samples) if a.samples else RESOLUTION,
        len(b.samples) if b.samples else RESOLUTION,
    )
    mu_a = a.sampled(resolution)
    mu_b = b.sampled(resolution)
    if len(mu_a) != len(mu_b):
        grid = np.linspace(*a.bounds, resolution)
        mu_a = np.array([a.evaluate(x) for x in grid])
        mu_b = np.array([b.evaluate(x) for x in grid])
    if mode == "union-max":
        mu = np.maximum(mu_a, mu_b)
    elif mode == "union-product":
        mu = mu_a + mu_b - mu_a * mu_b
    elif mode == "intersect-min":
        mu = np.minimum(mu_a, mu_b)
    elif mode == "intersect-product":
        mu = mu_a * mu_b
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return FuzzySet(bounds=a.bounds, samples=tuple(float(v) for v in mu))


def complement(a: FuzzySet) -> FuzzySet:
    """Pointwise complement 1 - membership."""
    mu = 1.0 - a.sampled()
    return FuzzySet(bounds=a.bounds, samples=tuple(float(v) for v in mu))


def alpha_cut(a: FuzzySet, alpha: float) -> tuple[tuple[float, float], ...]:
    """Closed intervals where membership reaches at least ``alpha``."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if alpha == 0.0:
        return (a.bounds,)
    xs = a.grid()
    mus = a.sampled(len(xs))
    hit = mus >= alpha - 1e-12
    intervals: list[tuple[float, float]] = []
    i = 0
    n = len(xs)
    while i < n:
        if not hit[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and hit[j + 1]:
            j += 1
        left = xs[i]
        if i > 0 and mus[i] != mus[i - 1]:
            t = (alpha - mus[i - 1]) / (mus[i] - mus[i - 1])
            left = xs[i - 1] + t * (xs[i] - xs[i - 1])
        right = xs[j]
        if j + 1 < n and mus[j] != mus[j + 1]:
            t = (mus[j] - alpha) / (mus[j] - mus[j + 1])
            right = xs[j] + t * (xs[j + 1] - xs[j])
        intervals.append((float(left), float(right)))
        i = j + 1
    return tuple(intervals)


# --------------------------------------------------------------------------
# partitions


@dataclass(frozen=True)
class Partition:
    """Ordered labeled fuzzy sets covering one variable's universe."""

    name: str
    bounds: tuple[float, float]
    labels: tuple[str, ...]
    sets: tuple[FuzzySet, ...]

    def __post_init__(self) -> None:
        if len(self.labels) != len(self.sets) or not self.labels:
            raise ValueError("labels and sets must align and be non-empty")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("labels must be unique")
        probe = np.linspace(self.bounds[0], self.bounds[1], 257)
        total = np.zeros_like(probe)
        for fs in self.sets:
            if fs.bounds != self.bounds:
                raise ValueError("every set must share the partition bounds")
            total += fs.sampled(len(probe)) if fs.samples else fs.mf.evaluate_array(probe)
        if np.any(total <= 1e-12):
            raise ValueError("partition leaves part of the universe uncovered")

    def __len__(self) -> int:
        return len(self.labels)

    def peaks(self) -> np.ndarray:
        return np.array(
            [fs.mf.peak if fs.mf else fs.grid()[int(np.argmax(fs.sampled()))] for fs in self.sets]
        )

    def membership_matrix(self, values: Sequence[float]) -> np.ndarray:
        """(n, labels) membership degrees with inputs clamped to the bounds."""
        clamped = np.clip(np.asarray(values, dtype=float), *self.bounds)
        return np.column_stack([fs.mf.evaluate_array(clamped) if fs.mf
                                else np.interp(clamped, fs.grid(), np.asarray(fs.samples))
                                for fs in self.sets])


def uniform_partition(
    bounds: tuple[float, float], labels: int, name: str = "x"
) -> Partition:
    """Evenly spaced triangular terms with half-overlap, shouldered ends.

    Peaks sit on an even grid from min to max; each peak coincides with
    its neighbors' feet, so adjacent terms cross at membership 0.5 and
    memberships sum to one everywhere.
    """
    if labels < 2:
        raise ValueError("labels must be at least 2")
    lo, hi = float(bounds[0]), float(bounds[1])
    if not lo < hi:
        raise ValueError("bounds must satisfy min < max")
    peaks = np.linspace(lo, hi, labels)
    sets = []
    for k in range(labels):
        a1 = peaks[max(k - 1, 0)]
        a2 = peaks[k]
        a3 = peaks[min(k + 1, labels - 1)]
        sets.append(
            FuzzySet(
                bounds=(lo, hi),
                mf=MembershipFunction("triangular", (float(a1), float(a2), float(a3))),
            )
        )
    return Partition(
        name=name,
        bounds=(lo, hi),
        labels=tuple(f"t{k + 1}" for k in range(labels)),
        sets=tuple(sets),
    )


def default_partitions(
    train: Dataset, labels: int = 7
) -> tuple[tuple[Partition, ...], Partition]:
    """Uniform input partitions over training ranges plus the cost partition."""
    X = train.driver_matrix()
    y = train.costs()
    inputs = tuple(
        uniform_partition((float(X[:, j].min()), float(X[:, j].max())), labels, name)
        for j, name in enumerate(DRIVER_NAMES)
    )
    output = uniform_partition((float(y.min()), float(y.max())), labels, "cost_le")
    return inputs, output


# --------------------------------------------------------------------------
# rules and inference


@dataclass(frozen=True)
class FuzzyRule:
    """Antecedent label index per input variable plus an output label index."""

    antecedents: tuple[int, ...]
    consequent: int


@dataclass(frozen=True)
class RuleBase:
    """Input/output partitions and a conflict-free list of rules."""

    inputs: tuple[Partition, ...]
    output: Partition
    rules: tuple[FuzzyRule, ...]

    def __post_init__(self) -> None:
        seen: set[tuple[int, ...]] = set()
        for rule in self.rules:
            if len(rule.antecedents) != len(self.inputs):
                raise ValueError("rule arity must match input partitions")
            for idx, partition in zip(rule.antecedents, self.inputs):
                if not 0 <= idx < len(partition):
                    raise ValueError(f"antecedent index {idx} out of range")
            if not 0 <= rule.consequent < len(self.output):
                raise ValueError(f"consequent index {rule.consequent} out of range")
            if rule.antecedents in seen:
                raise ValueError("duplicate antecedents in rule base")
            seen.add(rule.antecedents)

    def __len__(self) -> int:
        return len(self.rules)

    def predict_case(self, case: Sequence[float]) -> float:
        return predict_fuzzy(self, case)


@dataclass(frozen=True)
class InferenceResult:
    """Aggregated output set plus the per-rule firing record behind it."""

    aggregated: FuzzySet
    firings: tuple[tuple[FuzzyRule, float], ...]
    output: Partition


def infer(base: RuleBase, inputs: Sequence[float]) -> InferenceResult:
    """Mamdani inference: min implication per rule, max aggregation.

    Inputs are clamped to their universes so boundary cases still fire.
    """
    if not base.rules:
        raise ValueError("no rules")
    values = [float(v) for v in inputs]
    if len(values) != len(base.inputs):
        raise ValueError(f"expected {len(base.inputs)} inputs")
    member = [
        partition.membership_matrix([value])[0]
        for partition, value in zip(base.inputs, values)
    ]
    grid = np.linspace(*base.output.bounds, RESOLUTION)
    consequent_curves = [fs.mf.evaluate_array(grid) for fs in base.output.sets]
    aggregated = np.zeros(RESOLUTION)
    firings = []
    for rule in base.rules:
        strength = min(member[j][idx] for j, idx in enumerate(rule.antecedents))
        firings.append((rule, float(strength)))
        if strength > 0:
            clipped = np.minimum(consequent_curves[rule.consequent], strength)
            aggregated = np.maximum(aggregated, clipped)
    return InferenceResult(
        aggregated=FuzzySet(
            bounds=base.output.bounds,
            samples=tuple(float(v) for v in aggregated),
        ),
        firings=tuple(firings),
        output=base.output,
    )


def defuzzify(
    target: InferenceResult | FuzzySet, method: Literal["cog", "wam"] = "wam"
) -> float:
    """Crisp value of an inference result (or bare set, centre-of-gravity only).

    ``cog`` integrates x·mu / mu by the trapezoid rule on the sampled
    universe; ``wam`` averages the consequent peaks weighted by rule
    firing strengths.
    """
    if method == "wam":
        if not isinstance(target, InferenceResult):
            raise ValueError("weighted average needs rule firings; pass an inference result")
        peaks = target.output.peaks()
        total = sum(strength for _, strength in target.firings)
        if total <= 0:
            raise ValueError("no firing")
        weighted = sum(
            peaks[rule.consequent] * strength for rule, strength in target.firings
        )
        return float(weighted / total)
    if method != "cog":
        raise ValueError(f"unknown defuzzification method {method!r}")
    fs = target.aggregated if isinstance(target, InferenceResult) else target
    xs = fs.grid()
    mus = fs.sampled(len(xs))
    mass = float(np.trapezoid(mus, xs))
    if mass <= 0:
        raise ValueError("no firing")
    return float(np.trapezoid(xs * mus, xs) / mass)


def predict_fuzzy(
    base: RuleBase, case: Sequence[float], method: Literal["cog", "wam"] = "wam"
) -> float:
    """Crisp cost for a driver vector through the rule base."""
    return defuzzify(infer(base, case), method)


# --------------------------------------------------------------------------
# rule generation


def generate_rules_wm(
    train: Dataset, inputs: Sequence[Partition], output: Partition
) -> RuleBase:
    """One best-membership rule per training case, conflicts resolved.

    Each case contributes the rule formed by the strongest label of every
    variable; its degree is the product of those five memberships. Among
    rules sharing an antecedent the highest degree wins, earlier cases
    winning ties. Rules are returned sorted by antecedent indices.
    """
    X = train.driver_matrix()
    y = train.costs()
    input_mu = [p.membership_matrix(X[:, j]) for j, p in enumerate(inputs)]
    output_mu = output.membership_matrix(y)
    input_labels = [mu.argmax(axis=1) for mu in input_mu]
    output_labels = output_mu.argmax(axis=1)
    n = len(y)
    degree = output_mu[np.arange(n), output_labels].copy()
    for j, mu in enumerate(input_mu):
        degree *= mu[np.arange(n), input_labels[j]]
    chosen: dict[tuple[int, ...], tuple[int, float]] = {}
    for i in range(n):
        key = tuple(int(lab[i]) for lab in input_labels)
        if key not in chosen or degree[i] > chosen[key][1]:
            chosen[key] = (int(output_labels[i]), float(degree[i]))
    rules = tuple(
        FuzzyRule(antecedents=key, consequent=chosen[key][0])
        for key in sorted(chosen)
    )
    return RuleBase(inputs=tuple(inputs), output=output, rules=rules)


def generate_grid_pool(
    train: Dataset, inputs: Sequence[Partition], output: Partition
) -> RuleBase:
    """Every antecedent combination, consequent chosen by best-fitting case.

    The case weighting for an antecedent is the product of its label
    memberships times its best output membership; the winning case's
    output label becomes the consequent (earlier case wins ties).
    """
    X = train.driver_matrix()
    y = train.costs()
    input_mu = [p.membership_matrix(X[:, j]) for j, p in enumerate(inputs)]
    output_mu = output.membership_matrix(y)
    output_labels = output_mu.argmax(axis=1)
    n = len(y)
    best_output_mu = output_mu[np.arange(n), output_labels]
    sizes = [len(p) for p in inputs]
    grid = np.stack(
        np.meshgrid(*[np.arange(s) for s in sizes], indexing="ij"), axis=-1
    ).reshape(-1, len(sizes))
    weights = np.ones((n, len(grid)))
    for j, mu in enumerate(input_mu):
        weights *= mu[:, grid[:, j]]
    weights *= best_output_mu[:, None]
    winners = weights.argmax(axis=0)
    rules = tuple(
        FuzzyRule(
            antecedents=tuple(int(v) for v in grid[r]),
            consequent=int(output_labels[winners[r]]),
        )
        for r in range(len(grid))
    )
    return RuleBase(inputs=tuple(inputs), output=output, rules=rules)


# --------------------------------------------------------------------------
# fitness and genetic selection


def _firing_matrix(base: RuleBase, X: np.ndarray) -> np.ndarray:
    """(cases, rules) firing strengths under min implication."""
    input_mu = [p.membership_matrix(X[:, j]) for j, p in enumerate(base.inputs)]
    columns = np.array([r.antecedents for r in base.rules], dtype=int)
    return np.minimum.reduce(
        [input_mu[j][:, columns[:, j]] for j in range(len(base.inputs))]
    )


def _wam_outputs(
    firing: np.ndarray, consequents: np.ndarray, peaks: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Weighted-average predictions; second value flags covered cases."""
    denominator = firing.sum(axis=1)
    covered = denominator > 0
    numerator = firing @ peaks[consequents]
    predictions = np.zeros(len(denominator))
    predictions[covered] = numerator[covered] / denominator[covered]
    return predictions, covered


def penalized_mape(
    base: RuleBase, data: Dataset, penalty: float = 100.0
) -> tuple[float, int]:
    """Coverage-penalized error: mean covered APE plus penalty per miss.

    Covered cases contribute |actual - predicted| / predicted percentage
    errors averaged over all cases; every non-firing case adds ``penalty``
    percentage points to the statistic. Returns (value, uncovered count).
    """
    X = data.driver_matrix()
    y = data.costs()
    if not base.rules:
        return penalty * len(y), len(y)
    firing = _firing_matrix(base, X)
    consequents = np.array([r.consequent for r in base.rules], dtype=int)
    peaks = base.output.peaks()
    predictions, covered = _wam_outputs(firing, consequents, peaks)
    ape = np.abs(y[covered] - predictions[covered]) / predictions[covered] * 100.0
    uncovered = int(np.sum(~covered))
    return float(ape.sum() / len(y) + penalty * uncovered), uncovered


def fitness(base: RuleBase, data: Dataset, penalty: float = 100.0) -> float:
    """Joint quality of a rule base: 1 / (penalized error + rule count)."""
    value, _ = penalized_mape(base, data, penalty)
    return 1.0 / (value + len(base.rules))


@dataclass(frozen=True)
class GaConfig:
    """Search settings for genetic rule selection."""

    population: int = 60
    generations: int = 200
    crossover: float = 0.8
    mutation: float | None = None
    tournament: int = 2
    seed: int = 0
    init_probability: float = 0.9

    def __post_init__(self) -> None:
        if self.population < 2:
            raise ValueError("population must be at least 2")
        if self.generations < 1:
            raise ValueError("generations must be at least 1")
        for name in ("crossover", "init_probability"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.mutation is not None and not 0.0 <= self.mutation <= 1.0:
            raise ValueError("mutation must lie in [0, 1]")
        if self.tournament < 1:
            raise ValueError("tournament must be at least 1")


def ga_select_rules(
    candidates: RuleBase,
    train: Dataset,
    config: GaConfig = GaConfig(),
    penalty: float = 100.0,
) -> RuleBase:
    """Prune a candidate pool to the fittest rule subset.

    Binary chromosomes mark rule inclusion; parents come from tournament
    draws, children from one-point crossover and per-gene bit flips, and
    the best chromosome survives each generation unchanged. Deterministic
    for a given seed.
    """
    if not candidates.rules:
        raise ValueError("candidate pool is empty")
    n = len(candidates.rules)
    X = train.driver_matrix()
    y = train.costs()
    firing = _firing_matrix(candidates, X)
    consequents = np.array([r.consequent for r in candidates.rules], dtype=int)
    peaks = candidates.output.peaks()

    def evaluate(mask: np.ndarray) -> float:
        count = int(mask.sum())
        if count == 0:
            return 1.0 / (penalty * len(y))
        sub = firing[:, mask]
        denominator = sub.sum(axis=1)
        covered = denominator > 0
        numerator = sub @ peaks[consequents[mask]]
        predictions = numerator[covered] / denominator[covered]
        ape = np.abs(y[covered] - predictions) / predictions * 100.0
        uncovered = int(np.sum(~covered))
        value = float(ape.sum() / len(y) + penalty * uncovered)
        return 1.0 / (value + count)

    rng = np.random.default_rng(config.seed)
    pop = config.population
    p_mut = config.mutation if config.mutation is not None else 1.0 / n
    population = rng.random((pop, n)) < config.init_probability
    scores = np.array([evaluate(population[i]) for i in range(pop)])

    def pick_parent() -> np.ndarray:
        idx = rng.integers(0, pop, config.tournament)
        return population[idx[int(np.argmax(scores[idx]))]]

    for _ in range(config.generations):
        next_population = [population[int(np.argmax(scores))].copy()]
        while len(next_population) < pop:
            parent_a = pick_parent()
            parent_b = pick_parent()
            child_a, child_b = parent_a.copy(), parent_b.copy()
            if rng.random() < config.crossover and n >= 2:
                cut = int(rng.integers(1, n))
                child_a = np.concatenate([parent_a[:cut], parent_b[cut:]])
                child_b = np.concatenate([parent_b[:cut], parent_a[cut:]])
            for child in (child_a, child_b):
                if len(next_population) < pop:
                    next_population.append(child ^ (rng.random(n) < p_mut))
        population = np.array(next_population)
        scores = np.array([evaluate(population[i]) for i in range(pop)])

    best = population[int(np.argmax(scores))]
    if not best.any():
        raise ValueError("empty rule base selected")
    selected = tuple(rule for rule, keep in zip(candidates.rules, best) if keep)
    return RuleBase(inputs=candidates.inputs, output=candidates.output, rules=selected)


# --------------------------------------------------------------------------
# serialization


def to_listing(base: RuleBase) -> str:
    """Human-readable rule listing, one IF/THEN line per rule.

    Input terms print as ``v.<variable>_a.<label>`` and output terms as
    ``c.<label>``, both 1-based, after the variable's own name.
    """
    lines = []
    for rule in base.rules:
        clauses = [
            f"{partition.name} is v.{j + 1}_a.{idx + 1}"
            for j, (partition, idx) in enumerate(zip(base.inputs, rule.antecedents))
        ]
        lines.append(
            f"IF {' and '.join(clauses)} THEN {base.output.name} is c.{rule.consequent + 1}"
        )
    return "\n".join(lines)


def _partition_payload(partition: Partition) -> dict:
    return {
        "name": partition.name,
        "bounds": list(partition.bounds),
        "labels": list(partition.labels),
        "sets": [
            {"shape": fs.mf.shape, "params": list(fs.mf.params)}
            for fs in partition.sets
        ],
    }


def _partition_from_payload(payload: dict) -> Partition:
    bounds = (float(payload["bounds"][0]), float(payload["bounds"][1]))
    sets = tuple(
        FuzzySet(
            bounds=bounds,
            mf=MembershipFunction(s["shape"], tuple(float(v) for v in s["params"])),
        )
        for s in payload["sets"]
    )
    return Partition(
        name=str(payload["name"]),
        bounds=bounds,
        labels=tuple(str(v) for v in payload["labels"]),
        sets=sets,
    )


def save_rule_base(base: RuleBase, path: str) -> None:
    """Serialize a rule base (partitions included) to JSON."""
    payload = {
        "kind": "fuzzy-rules",
        "inputs": [_partition_payload(p) for p in base.inputs],
        "output": _partition_payload(base.output),
        "rules": [
            {"antecedents": list(r.antecedents), "consequent": r.consequent}
            for r in base.rules
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_rule_base(path: str) -> RuleBase:
    """Load a rule base saved by :func:`save_rule_base`."""
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("kind") != "fuzzy-rules":
        raise ValueError(f"unknown model kind {payload.get('kind')!r}")
    return RuleBase(
        inputs=tuple(_partition_from_payload(p) for p in payload["inputs"]),
        output=_partition_from_payload(payload["output"]),
        rules=tuple(
            FuzzyRule(
                antecedents=tuple(int(v) for v in r["antecedents"]),
                consequent=int(r["consequent"]),
            )
            for r in payload["rules"]
        ),
    )
