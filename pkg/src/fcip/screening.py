"""Data-driven cost-driver identification.

Correlation measures and filters, least-squares fitting with forward /
backward / stepwise selection, hybrid filter-then-stepwise pipelines, and
exploratory factor analysis: sampling-adequacy statistics, principal
component extraction, retention rules, and varimax rotation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from ._special import chi_square_sf, f_sf
from .data import Table

__all__ = [
    "CorrelationMatrix",
    "SelectionStep",
    "SelectionTrace",
    "FactorSolution",
    "AdequacyReport",
    "OlsFit",
    "correlate",
    "correlation_matrix",
    "correlation_filter",
    "ols_fit",
    "select_variables",
    "hybrid_select",
    "adequacy",
    "pca",
    "retain_components",
    "varimax",
]


# --------------------------------------------------------------------------
# correlation


@dataclass(frozen=True)
class CorrelationMatrix:
    """Symmetric grid of pairwise coefficients over named variables."""

    names: tuple[str, ...]
    grid: tuple[tuple[float, ...], ...]
    method: str

    def __post_init__(self) -> None:
        p = len(self.names)
        if len(self.grid) != p or any(len(row) != p for row in self.grid):
            raise ValueError("grid must be square and match names")
        for i in range(p):
            if abs(self.grid[i][i] - 1.0) > 1e-12:
                raise ValueError("diagonal entries must equal 1")
            for j in range(i):
                if abs(self.grid[i][j] - self.grid[j][i]) > 1e-12:
                    raise ValueError("grid must be symmetric")
                if not -1.0 - 1e-12 <= self.grid[i][j] <= 1.0 + 1e-12:
                    raise ValueError("coefficients must lie in [-1, 1]")
        if self.method not in ("pearson", "spearman"):
            raise ValueError(f"unknown method {self.method!r}")

    def value(self, a: str, b: str) -> float:
        i, j = self.names.index(a), self.names.index(b)
        return self.grid[i][j]

    def as_array(self) -> np.ndarray:
        return np.array(self.grid, dtype=float)


def _rank_with_ties(values: np.ndarray) -> np.ndarray:
    """Average ranks (1-based); tied values share the mean of their ranks."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=float)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def correlate(
    x: Sequence[float], y: Sequence[float], method: str = "pearson"
) -> float:
    """Pearson product-moment or Spearman rank coefficient in [-1, 1]."""
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.shape != ya.shape or xa.ndim != 1:
        raise ValueError("series must be one-dimensional and equally long")
    if len(xa) < 3:
        raise ValueError("series must have length at least 3")
    if method == "spearman":
        xa, ya = _rank_with_ties(xa), _rank_with_ties(ya)
    elif method != "pearson":
        raise ValueError(f"unknown method {method!r}")
    xd = xa - xa.mean()
    yd = ya - ya.mean()
    sx = float(np.sqrt(np.sum(xd * xd)))
    sy = float(np.sqrt(np.sum(yd * yd)))
    if sx == 0.0 or sy == 0.0:
        raise ValueError("zero variance")
    r = float(np.dot(xd, yd) / (sx * sy))
    return max(-1.0, min(1.0, r))


def correlation_matrix(
    names: Sequence[str], columns: Sequence[Sequence[float]], method: str = "pearson"
) -> CorrelationMatrix:
    """Pairwise coefficients among equally long value columns."""
    if len(names) != len(columns):
        raise ValueError("one name per column required")
    p = len(names)
    grid = [[1.0] * p for _ in range(p)]
    for i in range(p):
        for j in range(i + 1, p):
            r = correlate(columns[i], columns[j], method)
            grid[i][j] = grid[j][i] = r
    return CorrelationMatrix(tuple(names), tuple(map(tuple, grid)), method)


def correlation_filter(
    table: Table,
    hi: float = 0.8,
    lo: float = 0.3,
    use_lo: bool = True,
    method: str = "pearson",
) -> list[str]:
    """Drop redundant and (optionally) irrelevant predictors.

    A predictor is dropped when |r| >= hi against an already-retained
    predictor (the earlier-listed one wins) or, with ``use_lo``, when
    |r| <= lo against the response.
    """
    if not hi > lo:
        raise ValueError("hi must exceed lo")
    retained: list[str] = []
    kept_columns: list[np.ndarray] = []
    for idx, name in enumerate(table.names):
        col = table.X[:, idx]
        if use_lo and abs(correlate(col, table.y, method)) <= lo:
            continue
        if any(abs(correlate(col, kept, method)) >= hi for kept in kept_columns):
            continue
        retained.append(name)
        kept_columns.append(col)
    return retained


# --------------------------------------------------------------------------
# least squares


@dataclass(frozen=True)
class OlsFit:
    """Least-squares solution with summary statistics.

    ``coefficients`` holds the intercept first, then one slope per column
    of the design matrix in input order.
    """

    names: tuple[str, ...]
    coefficients: tuple[float, ...]
    fitted: tuple[float, ...]
    residuals: tuple[float, ...]
    r: float
    r2: float
    adjusted_r2: float
    f_statistic: float
    f_pvalue: float
    rss: float
    tss: float
    n: int
    k: int

    def predict(self, X: Sequence[Sequence[float]]) -> np.ndarray:
        arr = np.asarray(X, dtype=float)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        if arr.shape[1] != self.k:
            raise ValueError(f"expected {self.k} columns, got {arr.shape[1]}")
        beta = np.asarray(self.coefficients)
        return beta[0] + arr @ beta[1:]


def _design(X: np.ndarray) -> np.ndarray:
    return np.column_stack([np.ones(len(X)), X])


def _first_dependent_column(X: np.ndarray, names: Sequence[str]) -> str:
    design = _design(X)
    rank = 1
    for j in range(1, design.shape[1]):
        new_rank = np.linalg.matrix_rank(design[:, : j + 1])
        if new_rank == rank:
            return str(names[j - 1])
        rank = new_rank
    return str(names[-1])


def ols_fit(
    X: Sequence[Sequence[float]],
    y: Sequence[float],
    names: Sequence[str] | None = None,
) -> OlsFit:
    """Ordinary least squares with an always-included intercept."""
    Xa = np.asarray(X, dtype=float)
    if Xa.ndim == 1:
        Xa = Xa.reshape(-1, 1)
    ya = np.asarray(y, dtype=float)
    n, k = Xa.shape
    if names is None:
        names = tuple(f"x{j + 1}" for j in range(k))
    if len(names) != k:
        raise ValueError("one name per design column required")
    if n <= k + 1:
        raise ValueError("need more rows than columns plus one")
    design = _design(Xa)
    beta, _, rank, _ = np.linalg.lstsq(design, ya, rcond=None)
    if rank < k + 1:
        offender = _first_dependent_column(Xa, names)
        raise ValueError(f"rank deficiency: column {offender!r} is collinear")
    fitted = design @ beta
    residuals = ya - fitted
    rss = float(residuals @ residuals)
    tss = float(np.sum((ya - ya.mean()) ** 2))
    r2 = 1.0 - rss / tss if tss > 0 else 0.0
    dof = n - k - 1
    adjusted = 1.0 - (1.0 - r2) * (n - 1) / dof
    if rss > 0 and 0.0 < r2 < 1.0:
        f_stat = (r2 / k) / ((1.0 - r2) / dof)
        f_p = f_sf(f_stat, k, dof)
    else:
        f_stat = float("inf")
        f_p = 0.0
    return OlsFit(
        names=tuple(names),
        coefficients=tuple(float(b) for b in beta),
        fitted=tuple(float(v) for v in fitted),
        residuals=tuple(float(v) for v in residuals),
        r=float(np.sqrt(max(r2, 0.0))),
        r2=float(r2),
        adjusted_r2=float(adjusted),
        f_statistic=float(f_stat),
        f_pvalue=float(f_p),
        rss=rss,
        tss=tss,
        n=n,
        k=k,
    )


# --------------------------------------------------------------------------
# variable selection


@dataclass(frozen=True)
class SelectionStep:
    action: Literal["enter", "remove"]
    variable: str
    r: float
    r2: float
    adjusted_r2: float


@dataclass(frozen=True)
class SelectionTrace:
    """Ordered enter/remove decisions starting from ``initial`` members.

    Forward and stepwise searches start empty; backward elimination starts
    from the full predictor set and only ever records removals.
    """

    steps: tuple[SelectionStep, ...]
    initial: tuple[str, ...] = ()

    @property
    def selected(self) -> list[str]:
        current: list[str] = list(self.initial)
        for step in self.steps:
            if step.action == "enter":
                current.append(step.variable)
            else:
                current.remove(step.variable)
        return current

    def __post_init__(self) -> None:
        members: set[str] = set(self.initial)
        for step in self.steps:
            if step.action == "enter":
                if step.variable in members:
                    raise ValueError(f"{step.variable!r} entered twice")
                members.add(step.variable)
            elif step.variable in members:
                members.remove(step.variable)
            else:
                raise ValueError(f"{step.variable!r} removed before entry")


def _rss_of(X: np.ndarray, y: np.ndarray, cols: Sequence[int]) -> float:
    if not cols:
        return float(np.sum((y - y.mean()) ** 2))
    design = _design(X[:, list(cols)])
    beta, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
    res = y - design @ beta
    return float(res @ res)


def _partial_f_pvalue(
    rss_small: float, rss_big: float, n: int, k_big: int
) -> tuple[float, float]:
    """Significance of the one extra column in the bigger model."""
    dof = n - k_big - 1
    if dof <= 0:
        return 0.0, 1.0
    if rss_big <= 0.0:
        return float("inf"), 0.0
    f_stat = (rss_small - rss_big) / (rss_big / dof)
    if f_stat <= 0:
        return 0.0, 1.0
    return f_stat, f_sf(f_stat, 1, dof)


def _step_stats(X: np.ndarray, y: np.ndarray, cols: Sequence[int]) -> tuple[float, float, float]:
    tss = float(np.sum((y - y.mean()) ** 2))
    rss = _rss_of(X, y, cols)
    n, k = len(y), len(cols)
    r2 = 1.0 - rss / tss if tss > 0 else 0.0
    adj = 1.0 - (1.0 - r2) * (n - 1) / (n - k - 1) if n - k - 1 > 0 else float("nan")
    return float(np.sqrt(max(r2, 0.0))), float(r2), float(adj)


def select_variables(
    table: Table,
    method: Literal["forward", "backward", "stepwise"] = "stepwise",
    p_enter: float = 0.05,
    p_remove: float = 0.10,
) -> SelectionTrace:
    """Greedy significance-driven subset search over the table's predictors.

    Entry and removal decisions use the partial-F statistic of the single
    variable in question; a variable enters when its p-value is at most
    ``p_enter`` and leaves when it reaches ``p_remove``.
    """
    if p_enter > p_remove:
        raise ValueError("p_enter must not exceed p_remove")
    if method not in ("forward", "backward", "stepwise"):
        raise ValueError(f"unknown method {method!r}")
    X = table.X
    y = table.y
    n, p = X.shape
    steps: list[SelectionStep] = []
    current: list[int] = list(range(p)) if method == "backward" else []

    def record(action: str, idx: int) -> None:
        r, r2, adj = _step_stats(X, y, current)
        steps.append(
            SelectionStep(action, table.names[idx], r, r2, adj)  # type: ignore[arg-type]
        )

    def best_entry() -> tuple[int, float] | None:
        rss_now = _rss_of(X, y, current)
        best: tuple[int, float, float] | None = None
        for j in range(p):
            if j in current:
                continue
            rss_with = _rss_of(X, y, current + [j])
            f_stat, pval = _partial_f_pvalue(rss_now, rss_with, n, len(current) + 1)
            if pval <= p_enter and (best is None or f_stat > best[2]):
                best = (j, pval, f_stat)
        return None if best is None else (best[0], best[1])

    def worst_member() -> tuple[int, float] | None:
        rss_now = _rss_of(X, y, current)
        worst: tuple[int, float, float] | None = None
        for j in current:
            rss_without = _rss_of(X, y, [c for c in current if c != j])
            f_stat, pval = _partial_f_pvalue(rss_without, rss_now, n, len(current))
            if pval >= p_remove and (worst is None or f_stat < worst[2]):
                worst = (j, pval, f_stat)
        return None if worst is None else (worst[0], worst[1])

    if method == "backward":
        while current:
            hit = worst_member()
            if hit is None:
                break
            current.remove(hit[0])
            record("remove", hit[0])
        return SelectionTrace(tuple(steps), initial=tuple(table.names))

    for _ in range(4 * p + 4):
        hit = best_entry()
        if hit is None:
            break
        current.append(hit[0])
        record("enter", hit[0])
        if method == "stepwise":
            while True:
                out = worst_member()
                if out is None:
                    break
                current.remove(out[0])
                record("remove", out[0])
    return SelectionTrace(tuple(steps))


def hybrid_select(table: Table, mode: Literal[1, 2] = 2) -> list[str]:
    """Correlation filter followed by stepwise selection.

    Mode 1 applies both filter rules (redundancy and low relevance);
    mode 2 applies the redundancy rule only.
    """
    if mode not in (1, 2):
        raise ValueError(f"unknown hybrid mode {mode!r}")
    kept = correlation_filter(table, use_lo=(mode == 1))
    idx = [table.names.index(name) for name in kept]
    sub = Table(
        names=tuple(kept),
        X=table.X[:, idx],
        y=table.y,
        ids=table.ids,
    )
    return select_variables(sub, "stepwise").selected


# --------------------------------------------------------------------------
# exploratory factor analysis


@dataclass(frozen=True)
class AdequacyReport:
    """Sampling-adequacy summary of a correlation matrix."""

    determinant: float
    kmo: float
    msa: tuple[float, ...]
    bartlett_statistic: float
    bartlett_df: int
    bartlett_pvalue: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.kmo <= 1.0:
            raise ValueError("KMO must lie in [0, 1]")
        if any(not 0.0 <= v <= 1.0 for v in self.msa):
            raise ValueError("MSA values must lie in [0, 1]")
        if self.bartlett_statistic < -1e-9:
            raise ValueError("Bartlett statistic must be non-negative")


@dataclass(frozen=True)
class FactorSolution:
    """Eigen structure of a correlation matrix with component loadings."""

    names: tuple[str, ...]
    eigenvalues: tuple[float, ...]
    loadings: tuple[tuple[float, ...], ...]
    communalities: tuple[float, ...]
    percent_variance: tuple[float, ...]

    def __post_init__(self) -> None:
        if list(self.eigenvalues) != sorted(self.eigenvalues, reverse=True):
            raise ValueError("eigenvalues must be in descending order")
        if any(c > 1.0 + 1e-9 or c < -1e-9 for c in self.communalities):
            raise ValueError("communalities must lie in [0, 1]")

    @property
    def retained(self) -> int:
        return len(self.loadings[0]) if self.loadings else 0

    def loadings_array(self) -> np.ndarray:
        return np.array(self.loadings, dtype=float)


def adequacy(data: Sequence[Sequence[float]], names: Sequence[str] | None = None) -> AdequacyReport:
    """Determinant, KMO/MSA, and sphericity test for a data matrix."""
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 2:
        raise ValueError("data must be a two-dimensional matrix")
    n, p = arr.shape
    if p < 2:
        raise ValueError("need at least 2 variables")
    if n <= p:
        raise ValueError("need more observations than variables")
    if names is None:
        names = tuple(f"x{j + 1}" for j in range(p))
    corr = correlation_matrix(names, [arr[:, j] for j in range(p)]).as_array()
    det = float(np.linalg.det(corr))
    if det < 1e-12:
        raise ValueError("singular correlation matrix")
    inv = np.linalg.inv(corr)
    scale = np.sqrt(np.outer(np.diag(inv), np.diag(inv)))
    partial = -inv / scale
    off = ~np.eye(p, dtype=bool)
    r2_sum = float(np.sum(corr[off] ** 2))
    q2_sum = float(np.sum(partial[off] ** 2))
    # With two variables the only partial correlation equals the raw one,
    # so the ratio is exactly one half; computing it through the matrix
    # inverse would miss that identity by rounding. Wholly uncorrelated
    # data leaves nothing to factor, reported as adequacy zero.
    if r2_sum + q2_sum == 0.0:
        kmo = 0.0
        msa = [0.0] * p
    elif p == 2:
        kmo = 0.5
        msa = [0.5, 0.5]
    else:
        kmo = r2_sum / (r2_sum + q2_sum)
        msa = []
        for i in range(p):
            mask = np.arange(p) != i
            ri = float(np.sum(corr[i, mask] ** 2))
            qi = float(np.sum(partial[i, mask] ** 2))
            msa.append(ri / (ri + qi) if ri + qi > 0 else 0.0)
    statistic = -(n - 1 - (2 * p + 5) / 6.0) * math.log(det)
    if statistic <= 0.0:
        statistic = 0.0
    df = p * (p - 1) // 2
    pvalue = chi_square_sf(statistic, df) if statistic > 0 else 1.0
    return AdequacyReport(
        determinant=det,
        kmo=float(kmo),
        msa=tuple(msa),
        bartlett_statistic=float(statistic),
        bartlett_df=df,
        bartlett_pvalue=float(pvalue),
    )


def pca(matrix: CorrelationMatrix, retain: int | None = None) -> FactorSolution:
    """Principal components of a correlation matrix.

    Loadings are eigenvectors scaled by the square roots of their
    eigenvalues, columns ordered by descending eigenvalue; ``retain``
    limits the number of loading columns (default: all).
    """
    R = matrix.as_array()
    if not np.allclose(R, R.T, atol=1e-12):
        raise ValueError("matrix must be symmetric")
    eigenvalues, eigenvectors = np.linalg.eigh(R)
    if eigenvalues.min() < -1e-8:
        raise ValueError("matrix must be positive semidefinite")
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues = eigenvalues[order]
    eigenvectors = eigenvectors[:, order]
    p = len(eigenvalues)
    count = p if retain is None else retain
    if not 1 <= count <= p:
        raise ValueError(f"retain must lie in 1..{p}")
    clipped = np.clip(eigenvalues, 0.0, None)
    loadings = eigenvectors * np.sqrt(clipped)
    # Deterministic sign: the largest-magnitude loading in each column is
    # made positive (eigenvector sign is otherwise arbitrary).
    for j in range(p):
        pivot = np.argmax(np.abs(loadings[:, j]))
        if loadings[pivot, j] < 0:
            loadings[:, j] = -loadings[:, j]
    kept = loadings[:, :count]
    communalities = np.sum(kept**2, axis=1)
    return FactorSolution(
        names=matrix.names,
        eigenvalues=tuple(float(v) for v in eigenvalues),
        loadings=tuple(tuple(float(v) for v in row) for row in kept),
        communalities=tuple(float(min(c, 1.0 + 1e-12)) for c in communalities),
        percent_variance=tuple(float(100.0 * v / p) for v in eigenvalues[:count]),
    )


def retain_components(
    eigenvalues: Sequence[float],
    rule: Literal["kaiser", "jolliffe", "threshold"] = "kaiser",
    threshold: float | None = None,
) -> int:
    """How many leading components pass the chosen eigenvalue cutoff."""
    values = list(eigenvalues)
    if values != sorted(values, reverse=True):
        raise ValueError("eigenvalues must be in descending order")
    if rule == "kaiser":
        cut = 1.0
    elif rule == "jolliffe":
        cut = 0.7
    elif rule == "threshold":
        if threshold is None:
            raise ValueError("threshold rule requires a threshold value")
        cut = threshold
    else:
        raise ValueError(f"unknown retention rule {rule!r}")
    return sum(1 for v in values if v > cut)


def _varimax_criterion(L: np.ndarray) -> float:
    sq = L**2
    p = L.shape[0]
    return float(np.sum(sq**2) - np.sum(sq.sum(axis=0) ** 2) / p)


def varimax(
    loadings: Sequence[Sequence[float]],
    tol: float = 1e-9,
    max_sweeps: int = 1000,
) -> np.ndarray:
    """Orthogonal rotation toward simple structure.

    Rows are Kaiser-normalized, column pairs are rotated until the varimax
    criterion stops improving by more than ``tol``, then the normalization
    is undone.
    """
    L = np.array(loadings, dtype=float)
    if L.ndim != 2:
        raise ValueError("loadings must be a matrix")
    p, m = L.shape
    if m < 2:
        return L
    h = np.sqrt(np.sum(L**2, axis=1))
    h_safe = np.where(h > 0, h, 1.0)
    W = L / h_safe[:, None]
    previous = _varimax_criterion(W)
    for _ in range(max_sweeps):
        for i in range(m - 1):
            for j in range(i + 1, m):
                a, b = W[:, i], W[:, j]
                u = a**2 - b**2
                v = 2.0 * a * b
                A, B = u.sum(), v.sum()
                C = float(np.sum(u**2 - v**2))
                D = float(np.sum(2.0 * u * v))
                numerator = D - 2.0 * A * B / p
                denominator = C - (A**2 - B**2) / p
                angle = 0.25 * math.atan2(numerator, denominator)
                if abs(angle) < 1e-15:
                    continue
                cos, sin = math.cos(angle), math.sin(angle)
                W[:, i], W[:, j] = a * cos + b * sin, -a * sin + b * cos
        value = _varimax_criterion(W)
        if value - previous < tol:
            break
        previous = value
    else:
        raise ArithmeticError("varimax rotation did not converge")
    rotated = W * h_safe[:, None]
    for j in range(m):
        pivot = np.argmax(np.abs(rotated[:, j]))
        if rotated[pivot, j] < 0:
            rotated[:, j] = -rotated[:, j]
    return rotated
