"""Expert-survey aggregation and screening.

Three layers of survey arithmetic: Likert mean score and standard error
for coarse ranking, fuzzy Delphi aggregation of triangular opinions with
centroid defuzzification against a threshold, and fuzzy pairwise-matrix
weighting by extent analysis with a Saaty-style consistency check.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

__all__ = [
    "TriangularFuzzyNumber",
    "LikertResponses",
    "FuzzyLikertScale",
    "FuzzyPairwiseMatrix",
    "SyntheticExtent",
    "WeightVector",
    "Survey",
    "DEFAULT_LIKERT_SCALE",
    "mean_score",
    "standard_error",
    "screen_by_mean",
    "likert_to_fuzzy",
    "fdm_aggregate",
    "defuzzify_centroid",
    "fdm_screen",
    "fahp_aggregate",
    "synthetic_extents",
    "degree_of_possibility",
    "fahp_weights",
    "consistency_ratio",
    "final_priorities",
    "load_surveys",
]


@dataclass(frozen=True)
class TriangularFuzzyNumber:
    """Triangular fuzzy number (l, m, u) with l <= m <= u."""

    l: float
    m: float
    u: float

    def __post_init__(self) -> None:
        if not self.l <= self.m <= self.u:
            raise ValueError(f"invalid triangular number ({self.l}, {self.m}, {self.u})")

    def __iter__(self):
        return iter((self.l, self.m, self.u))


TFN = TriangularFuzzyNumber


@dataclass(frozen=True)
class LikertResponses:
    """Scores in {1..5} collected for one parameter."""

    parameter_id: str
    scores: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.scores:
            raise ValueError("scores must be non-empty")
        if any(s not in (1, 2, 3, 4, 5) for s in self.scores):
            raise ValueError(f"{self.parameter_id}: scores must lie in 1..5")


@dataclass(frozen=True)
class FuzzyLikertScale:
    """Five linguistic terms mapped to triangular numbers within [0, 1]."""

    terms: tuple[str, ...]
    numbers: tuple[TFN, ...]

    def __post_init__(self) -> None:
        if len(self.terms) != 5 or len(self.numbers) != 5:
            raise ValueError("a five-point scale requires exactly five entries")
        for t in self.numbers:
            if not (0 <= t.l and t.u <= 1):
                raise ValueError("scale numbers must lie within [0, 1]")

    def for_score(self, score: int) -> TFN:
        if score not in (1, 2, 3, 4, 5):
            raise ValueError(f"score must lie in 1..5, got {score}")
        return self.numbers[score - 1]


DEFAULT_LIKERT_SCALE = FuzzyLikertScale(
    terms=(
        "extremely unimportant",
        "unimportant",
        "moderately important",
        "important",
        "extremely important",
    ),
    numbers=(
        TFN(0.00, 0.00, 0.25),
        TFN(0.00, 0.25, 0.50),
        TFN(0.25, 0.50, 0.75),
        TFN(0.50, 0.75, 1.00),
        TFN(0.75, 1.00, 1.00),
    ),
)


@dataclass(frozen=True)
class FuzzyPairwiseMatrix:
    """Square grid of triangular numbers over named criteria, unit diagonal."""

    criteria: tuple[str, ...]
    entries: tuple[tuple[TFN, ...], ...]

    def __post_init__(self) -> None:
        n = len(self.criteria)
        if n < 2:
            raise ValueError("pairwise comparison needs at least two criteria")
        if len(self.entries) != n or any(len(r) != n for r in self.entries):
            raise ValueError("entries must form a square grid matching criteria")
        for i in range(n):
            d = self.entries[i][i]
            if (d.l, d.m, d.u) != (1.0, 1.0, 1.0):
                raise ValueError(f"diagonal entry {i} must be (1, 1, 1)")

    @property
    def n(self) -> int:
        return len(self.criteria)


@dataclass(frozen=True)
class SyntheticExtent:
    criterion: str
    value: TFN


@dataclass(frozen=True)
class WeightVector:
    """Raw minima and their normalization over named criteria."""

    criteria: tuple[str, ...]
    raw: tuple[float, ...]
    normalized: tuple[float, ...]

    def __post_init__(self) -> None:
        if not (len(self.criteria) == len(self.raw) == len(self.normalized)):
            raise ValueError("weight vector lengths must agree")
        total = sum(self.normalized)
        if self.normalized and abs(total - 1.0) > 1e-9:
            raise ValueError(f"normalized weights must sum to 1, got {total}")


@dataclass(frozen=True)
class Survey:
    """One expert's survey document: Likert scores and optional pairwise block."""

    expert: str
    likert: dict[str, int]
    pairwise: FuzzyPairwiseMatrix | None = None


def mean_score(responses: LikertResponses) -> float:
    """Average rating, the sum of frequency-weighted scores over n."""
    return sum(responses.scores) / len(responses.scores)


def standard_error(responses: LikertResponses) -> float:
    """Sample standard deviation of the scores divided by sqrt(n)."""
    n = len(responses.scores)
    if n < 2:
        raise ValueError("standard error needs at least two scores")
    mu = mean_score(responses)
    variance = sum((s - mu) ** 2 for s in responses.scores) / (n - 1)
    return math.sqrt(variance) / math.sqrt(n)


def screen_by_mean(
    scored: Sequence[tuple[str, float]], threshold: float = 3.0
) -> list[str]:
    """Ids whose mean score meets the threshold, input order preserved."""
    return [pid for pid, ms in scored if ms >= threshold]


def likert_to_fuzzy(
    scores: Iterable[int], scale: FuzzyLikertScale = DEFAULT_LIKERT_SCALE
) -> list[TFN]:
    return [scale.for_score(s) for s in scores]


def fdm_aggregate(opinions: Sequence[TFN]) -> TFN:
    """Pool triangular opinions: min of lowers, geometric mean of modes, max of uppers."""
    if not opinions:
        raise ValueError("at least one opinion required")
    lo = min(t.l for t in opinions)
    hi = max(t.u for t in opinions)
    product = 1.0
    for t in opinions:
        product *= t.m
    mid = product ** (1.0 / len(opinions))
    return TFN(lo, mid, hi)


def defuzzify_centroid(w: TFN) -> float:
    """Crisp value of a triangular number, the mean of its three points."""
    return (w.l + w.m + w.u) / 3.0


def fdm_screen(
    crisp: Sequence[tuple[str, float]],
    alpha: float = 0.6,
    exclude: Sequence[str] = (),
) -> tuple[list[str], list[str]]:
    """Partition parameters into (retained, deleted) at threshold alpha.

    ``exclude`` names parameters removed by policy regardless of score.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    retained: list[str] = []
    deleted: list[str] = []
    banned = set(exclude)
    for pid, value in crisp:
        if value >= alpha and pid not in banned:
            retained.append(pid)
        else:
            deleted.append(pid)
    return retained, deleted


def fahp_aggregate(matrices: Sequence[FuzzyPairwiseMatrix]) -> FuzzyPairwiseMatrix:
    """Pool experts' pairwise matrices by entrywise component geometric means."""
    if not matrices:
        raise ValueError("at least one matrix required")
    first = matrices[0]
    for m in matrices[1:]:
        if m.criteria != first.criteria:
            raise ValueError("matrices disagree on criteria")
    n = first.n
    k = len(matrices)
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            l = m_ = u = 1.0
            for mat in matrices:
                t = mat.entries[i][j]
                l *= t.l
                m_ *= t.m
                u *= t.u
            row.append(TFN(l ** (1 / k), m_ ** (1 / k), u ** (1 / k)))
        rows.append(tuple(row))
    return FuzzyPairwiseMatrix(first.criteria, tuple(rows))


def _tfn_sum(values: Iterable[TFN]) -> tuple[float, float, float]:
    l = m = u = 0.0
    for t in values:
        l += t.l
        m += t.m
        u += t.u
    return l, m, u


def synthetic_extents(matrix: FuzzyPairwiseMatrix) -> list[SyntheticExtent]:
    """Row sums scaled by the fuzzy inverse of the grand sum."""
    grand_l, grand_m, grand_u = _tfn_sum(t for row in matrix.entries for t in row)
    if min(grand_l, grand_m, grand_u) <= 0:
        raise ValueError("grand sum components must be positive")
    extents = []
    for name, row in zip(matrix.criteria, matrix.entries):
        l, m, u = _tfn_sum(row)
        extents.append(
            SyntheticExtent(name, TFN(l / grand_u, m / grand_m, u / grand_l))
        )
    return extents


def degree_of_possibility(sb: SyntheticExtent, sa: SyntheticExtent) -> float:
    """How strongly extent b can exceed extent a, in [0, 1]."""
    b, a = sb.value, sa.value
    if b.m >= a.m:
        return 1.0
    if a.l >= b.u:
        return 0.0
    return (a.l - b.u) / ((b.m - b.u) - (a.m - a.l))


def fahp_weights(extents: Sequence[SyntheticExtent]) -> WeightVector:
    """Raw weight of each criterion is its worst pairwise possibility degree."""
    if len(extents) < 2:
        raise ValueError("at least two extents required")
    raw = []
    for i, si in enumerate(extents):
        degrees = [
            degree_of_possibility(si, sj) for j, sj in enumerate(extents) if j != i
        ]
        raw.append(min(degrees))
    total = sum(raw)
    if total <= 0:
        raise ValueError("degenerate comparison: all raw weights are zero")
    return WeightVector(
        criteria=tuple(e.criterion for e in extents),
        raw=tuple(raw),
        normalized=tuple(w / total for w in raw),
    )


_RANDOM_INDEX = {3: 0.58, 4: 0.90, 5: 1.12, 6: 1.24, 7: 1.32, 8: 1.41, 9: 1.45}


def _principal_eigenvalue(matrix: list[list[float]], tol: float = 1e-12) -> float:
    """Dominant eigenvalue by power iteration on a positive matrix."""
    n = len(matrix)
    v = [1.0] * n
    value = 0.0
    for _ in range(10000):
        w = [sum(matrix[i][j] * v[j] for j in range(n)) for i in range(n)]
        norm = max(abs(x) for x in w)
        if norm == 0:
            raise ValueError("eigen iteration collapsed to zero vector")
        w = [x / norm for x in w]
        new_value = sum(
            sum(matrix[i][j] * w[j] for j in range(n)) / w[i]
            for i in range(n)
            if w[i] != 0
        ) / n
        if abs(new_value - value) < tol:
            return new_value
        value, v = new_value, w
    raise ValueError("eigen iteration did not converge")


def consistency_ratio(matrix: FuzzyPairwiseMatrix) -> float:
    """Coherence of the defuzzified matrix; at most 0.1 counts as acceptable."""
    n = matrix.n
    if n <= 2:
        return 0.0
    if n not in _RANDOM_INDEX:
        raise ValueError(f"no random index for a matrix of size {n}")
    # Geometric-mean defuzzification: it maps the reciprocal of a triangular
    # number to the reciprocal crisp value, so a reciprocal fuzzy matrix stays
    # reciprocal after defuzzification — the premise of the CI/RI framework.
    # Arithmetic-mean defuzzification breaks reciprocity and inflates lambda.
    crisp = [
        [(t.l * t.m * t.u) ** (1.0 / 3.0) for t in row] for row in matrix.entries
    ]
    lam = _principal_eigenvalue(crisp)
    ci = (lam - n) / (n - 1)
    return ci / _RANDOM_INDEX[n]


def final_priorities(
    criterion_weights: WeightVector,
    parameter_weights: Mapping[str, Sequence[tuple[str, float]]],
) -> list[tuple[str, float]]:
    """Global parameter priorities: criterion weight times local weight, descending."""
    seen: set[str] = set()
    order: list[tuple[str, float]] = []
    lookup = dict(zip(criterion_weights.criteria, criterion_weights.normalized))
    for criterion, params in parameter_weights.items():
        if criterion not in lookup:
            raise ValueError(f"unknown criterion {criterion!r}")
        for pid, local in params:
            if pid in seen:
                raise ValueError(f"parameter {pid!r} listed under two criteria")
            seen.add(pid)
            order.append((pid, lookup[criterion] * local))
    ranked = sorted(order, key=lambda kv: -kv[1])
    return ranked


def _parse_pairwise(block: Mapping) -> FuzzyPairwiseMatrix:
    criteria = tuple(block["criteria"])
    entries = tuple(
        tuple(TFN(*map(float, cell)) for cell in row) for row in block["entries"]
    )
    return FuzzyPairwiseMatrix(criteria, entries)


def load_surveys(directory: str) -> list[Survey]:
    """Read every ``*.json`` survey document in a directory, sorted by name."""
    names = sorted(f for f in os.listdir(directory) if f.endswith(".json"))
    if not names:
        raise ValueError(f"no survey documents found in {directory}")
    surveys = []
    for name in names:
        with open(os.path.join(directory, name), encoding="utf-8") as fh:
            doc = json.load(fh)
        expert = str(doc.get("expert", name))
        likert = {str(k): int(v) for k, v in doc.get("likert", {}).items()}
        pairwise = _parse_pairwise(doc["pairwise"]) if "pairwise" in doc else None
        surveys.append(Survey(expert=expert, likert=likert, pairwise=pairwise))
    return surveys


def likert_responses(surveys: Sequence[Survey]) -> list[LikertResponses]:
    """Collect per-parameter score tuples across surveys, in first-seen order."""
    order: list[str] = []
    scores: dict[str, list[int]] = {}
    for survey in surveys:
        for pid, score in survey.likert.items():
            if pid not in scores:
                scores[pid] = []
                order.append(pid)
            scores[pid].append(score)
    return [LikertResponses(pid, tuple(scores[pid])) for pid in order]


def fdm_from_surveys(
    surveys: Sequence[Survey],
    scale: FuzzyLikertScale = DEFAULT_LIKERT_SCALE,
    alpha: float = 0.6,
    exclude: Sequence[str] = (),
) -> dict:
    """Full fuzzy Delphi pass over survey documents.

    Returns per-parameter aggregates, crisp values, and the screen outcome.
    """
    responses = likert_responses(surveys)
    aggregates = {
        r.parameter_id: fdm_aggregate(likert_to_fuzzy(r.scores, scale))
        for r in responses
    }
    crisp = [(pid, defuzzify_centroid(t)) for pid, t in aggregates.items()]
    retained, deleted = fdm_screen(crisp, alpha, exclude)
    return {
        "aggregates": aggregates,
        "crisp": dict(crisp),
        "retained": retained,
        "deleted": deleted,
        "alpha": alpha,
        "excluded": list(exclude),
    }


def fahp_from_surveys(surveys: Sequence[Survey]) -> dict:
    """Aggregate pairwise blocks, derive weights, and check consistency."""
    matrices = [s.pairwise for s in surveys if s.pairwise is not None]
    if not matrices:
        raise ValueError("no pairwise blocks present in surveys")
    pooled = fahp_aggregate(matrices)
    extents = synthetic_extents(pooled)
    weights = fahp_weights(extents)
    return {
        "matrix": pooled,
        "extents": extents,
        "weights": weights,
        "consistency_ratio": consistency_ratio(pooled),
    }
