"""Cost models and model-level analysis.

Transformed-response regression with influence/collinearity/autocorrelation
diagnostics, a small fully-connected neural network, case-based retrieval,
inflation adjustment, random-scenario sensitivity analysis, driver-importance
ranking, and the shared error metrics.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Literal, Mapping, Sequence

import numpy as np

from .data import DRIVER_NAMES, Dataset, ProjectCase, driver_bounds
from .screening import OlsFit, ols_fit

__all__ = [
    "TRANSFORMATIONS",
    "FittedCostModel",
    "RegressionDiagnostics",
    "MlpModel",
    "CbrConfig",
    "RetrievedCase",
    "CbrPrediction",
    "CbrEvaluation",
    "ScenarioSet",
    "fit_parametric",
    "predict_cost",
    "diagnostics",
    "mape",
    "mape_conventional",
    "mlp_train",
    "mlp_predict",
    "gradient_check",
    "attribute_similarity",
    "case_similarity",
    "cbr_predict",
    "cbr_evaluate_holdout",
    "cbr_evaluate_loo",
    "adjust_inflation",
    "sensitivity_scenarios",
    "importance_ranking",
    "predict_any",
    "save_model",
    "load_model",
]

Transformation = Literal["none", "sqrt", "reciprocal", "semilog", "power"]
TRANSFORMATIONS: tuple[str, ...] = ("none", "sqrt", "reciprocal", "semilog", "power")


def _apply_transformation(tag: str, y: np.ndarray) -> np.ndarray:
    if tag == "none":
        return y.copy()
    if tag == "sqrt":
        return np.sqrt(y)
    if tag == "reciprocal":
        return 1.0 / y
    if tag == "semilog":
        return np.log(y)
    if tag == "power":
        return y**2
    raise ValueError(f"unknown transformation {tag!r}")


def _invert_transformation(tag: str, z: float) -> float:
    if tag == "none":
        return z
    if tag == "sqrt":
        if z < 0:
            raise ValueError("out-of-range prediction")
        return z * z
    if tag == "reciprocal":
        if z <= 0:
            raise ValueError("out-of-range prediction")
        return 1.0 / z
    if tag == "semilog":
        return math.exp(z)
    if tag == "power":
        if z < 0:
            raise ValueError("out-of-range prediction")
        return math.sqrt(z)
    raise ValueError(f"unknown transformation {tag!r}")


# --------------------------------------------------------------------------
# error metrics


def mape(predictions: Sequence[float], actuals: Sequence[float]) -> float:
    """Mean absolute percentage error with the prediction as denominator."""
    preds = np.asarray(predictions, dtype=float)
    acts = np.asarray(actuals, dtype=float)
    if preds.shape != acts.shape or preds.size == 0:
        raise ValueError("series must be non-empty and equally long")
    if np.any(preds == 0):
        raise ValueError("zero prediction")
    return float(np.mean(np.abs((acts - preds) / preds)) * 100.0)


def mape_conventional(predictions: Sequence[float], actuals: Sequence[float]) -> float:
    """Mean absolute percentage error with the actual value as denominator."""
    preds = np.asarray(predictions, dtype=float)
    acts = np.asarray(actuals, dtype=float)
    if preds.shape != acts.shape or preds.size == 0:
        raise ValueError("series must be non-empty and equally long")
    if np.any(acts == 0):
        raise ValueError("zero actual value")
    return float(np.mean(np.abs((acts - preds) / acts)) * 100.0)


# --------------------------------------------------------------------------
# transformed regression


@dataclass(frozen=True)
class FittedCostModel:
    """Least-squares cost model in a transformed response space.

    ``coefficients`` holds the intercept first, then one slope per driver
    in :data:`fcip.data.DRIVER_NAMES` order, all in transformed-response
    units. Metrics R/R²/adjusted R²/F are measured in the transformed
    space; both MAPE variants are measured in cost (LE) space.
    """

    transformation: str
    names: tuple[str, ...]
    coefficients: tuple[float, ...]
    r: float
    r2: float
    adjusted_r2: float
    f_statistic: float
    mape: float
    mape_conventional: float
    n: int

    def __post_init__(self) -> None:
        if self.transformation not in TRANSFORMATIONS:
            raise ValueError(f"unknown transformation {self.transformation!r}")
        if any(not math.isfinite(c) for c in self.coefficients):
            raise ValueError("coefficients must be finite")

    def predict(self, case: Sequence[float]) -> float:
        return predict_cost(self, case)


def fit_parametric(
    train: Dataset, transformation: Transformation = "sqrt"
) -> FittedCostModel:
    """Fit the four-driver regression under a response transformation."""
    X = train.driver_matrix()
    y = train.costs()
    if len(train) < X.shape[1] + 2:
        raise ValueError("need at least two more cases than drivers")
    z = _apply_transformation(transformation, y)
    fit = ols_fit(X, z, DRIVER_NAMES)
    predictions = [
        _invert_transformation(transformation, value) for value in fit.fitted
    ]
    return FittedCostModel(
        transformation=transformation,
        names=DRIVER_NAMES,
        coefficients=fit.coefficients,
        r=fit.r,
        r2=fit.r2,
        adjusted_r2=fit.adjusted_r2,
        f_statistic=fit.f_statistic,
        mape=mape(predictions, y),
        mape_conventional=mape_conventional(predictions, y),
        n=fit.n,
    )


def predict_cost(model: FittedCostModel, case: Sequence[float]) -> float:
    """Cost in LE for a (area, length, valves, year) driver vector."""
    values = [float(v) for v in case]
    if len(values) != len(model.names):
        raise ValueError(f"expected {len(model.names)} drivers, got {len(values)}")
    if values[0] <= 0 or values[1] <= 0 or values[2] <= 0:
        raise ValueError("drivers must be positive")
    z = model.coefficients[0] + sum(
        b * v for b, v in zip(model.coefficients[1:], values)
    )
    return _invert_transformation(model.transformation, z)


@dataclass(frozen=True)
class RegressionDiagnostics:
    """Influence, collinearity, and autocorrelation summary of a fit."""

    names: tuple[str, ...]
    max_cooks_distance: float
    cooks_distances: tuple[float, ...]
    vif: tuple[float, ...]
    tolerance: tuple[float, ...]
    durbin_watson: float

    def __post_init__(self) -> None:
        if any(v < 1.0 - 1e-9 for v in self.vif):
            raise ValueError("VIF must be at least 1")
        for v, t in zip(self.vif, self.tolerance):
            if abs(t - 1.0 / v) > 1e-9:
                raise ValueError("tolerance must be the reciprocal of VIF")
        if not 0.0 <= self.durbin_watson <= 4.0:
            raise ValueError("Durbin-Watson lies in [0, 4]")


def diagnostics(model: FittedCostModel, train: Dataset) -> RegressionDiagnostics:
    """Cook's distances, VIF/tolerance, and Durbin-Watson for a fit.

    Residuals are taken in the transformed response space, in dataset
    order (the order also used for the Durbin-Watson statistic).
    """
    X = train.driver_matrix()
    y = train.costs()
    z = _apply_transformation(model.transformation, y)
    design = np.column_stack([np.ones(len(X)), X])
    beta = np.asarray(model.coefficients)
    residuals = z - design @ beta
    n, p = design.shape
    # hat diagonal via the thin QR of the design matrix
    q, _ = np.linalg.qr(design)
    leverage = np.sum(q * q, axis=1)
    mse = float(residuals @ residuals) / (n - p)
    cooks = (residuals**2 / (p * mse)) * (leverage / (1.0 - leverage) ** 2)
    vif = []
    for j in range(X.shape[1]):
        others = np.delete(X, j, axis=1)
        sub = ols_fit(others, X[:, j])
        vif.append(1.0 / (1.0 - sub.r2) if sub.r2 < 1.0 else float("inf"))
    diffs = np.diff(residuals)
    dw = float((diffs @ diffs) / (residuals @ residuals))
    return RegressionDiagnostics(
        names=model.names,
        max_cooks_distance=float(np.max(cooks)),
        cooks_distances=tuple(float(c) for c in cooks),
        vif=tuple(float(v) for v in vif),
        tolerance=tuple(1.0 / float(v) for v in vif),
        durbin_watson=dw,
    )


# --------------------------------------------------------------------------
# neural network


@dataclass(frozen=True)
class MlpModel:
    """Fully connected 4-H-1 network with tanh hidden units.

    Inputs and the (transformed) target are min-max normalized to [-1, 1]
    using the stored training bounds; the output unit is linear.
    """

    hidden: int
    w1: tuple[tuple[float, ...], ...]
    b1: tuple[float, ...]
    w2: tuple[float, ...]
    b2: float
    input_bounds: tuple[tuple[float, float], ...]
    target_bounds: tuple[float, float]
    transformation: str
    seed: int
    epochs_run: int
    final_loss: float
    training_mape: float
    training_mape_conventional: float

    def predict(self, case: Sequence[float]) -> float:
        return mlp_predict(self, case)


def _normalize(values: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    return 2.0 * (values - lo) / (hi - lo) - 1.0


def _denormalize(values: np.ndarray, lo: float, hi: float) -> np.ndarray:
    return (values + 1.0) / 2.0 * (hi - lo) + lo


def _mlp_loss_and_gradients(
    Xn: np.ndarray,
    tn: np.ndarray,
    w1: np.ndarray,
    b1: np.ndarray,
    w2: np.ndarray,
    b2: float,
) -> tuple[float, tuple[np.ndarray, np.ndarray, np.ndarray, float]]:
    hidden = np.tanh(Xn @ w1 + b1)
    out = hidden @ w2 + b2
    err = out - tn
    loss = float(np.mean(err**2))
    g_out = 2.0 * err / len(tn)
    g_w2 = hidden.T @ g_out
    g_b2 = float(np.sum(g_out))
    g_hidden = np.outer(g_out, w2) * (1.0 - hidden**2)
    g_w1 = Xn.T @ g_hidden
    g_b1 = g_hidden.sum(axis=0)
    return loss, (g_w1, g_b1, g_w2, g_b2)


def mlp_train(
    train: Dataset,
    hidden: int = 5,
    transformation: Transformation = "sqrt",
    seed: int = 0,
    epochs: int = 5000,
    tolerance: float = 1e-8,
) -> MlpModel:
    """Train the network by full-batch gradient descent with line search.

    The step length backtracks until the Armijo decrease condition holds
    and is allowed to grow again between epochs; training stops at the
    epoch cap or when one epoch improves the normalized mean squared
    error by less than ``tolerance``. Deterministic for a given seed.
    """
    if hidden < 1:
        raise ValueError("hidden must be at least 1")
    X = train.driver_matrix()
    y = train.costs()
    t = _apply_transformation(transformation, y)
    x_lo, x_hi = X.min(axis=0), X.max(axis=0)
    if np.any(x_hi == x_lo):
        flat = DRIVER_NAMES[int(np.argmax(x_hi == x_lo))]
        raise ValueError(f"driver {flat!r} is constant; cannot normalize")
    t_lo, t_hi = float(t.min()), float(t.max())
    if t_hi == t_lo:
        t_hi = t_lo + 1.0
    Xn = _normalize(X, x_lo, x_hi)
    tn = _normalize(t, t_lo, t_hi)

    rng = np.random.default_rng(seed)
    w1 = rng.uniform(-0.5, 0.5, (X.shape[1], hidden))
    b1 = rng.uniform(-0.5, 0.5, hidden)
    w2 = rng.uniform(-0.5, 0.5, hidden)
    b2 = float(rng.uniform(-0.5, 0.5))

    step = 1.0
    loss, _ = _mlp_loss_and_gradients(Xn, tn, w1, b1, w2, b2)
    epochs_run = 0
    for epoch in range(epochs):
        loss, (g_w1, g_b1, g_w2, g_b2) = _mlp_loss_and_gradients(
            Xn, tn, w1, b1, w2, b2
        )
        if not math.isfinite(loss):
            raise ArithmeticError("training diverged")
        grad_norm2 = float(
            np.sum(g_w1**2) + np.sum(g_b1**2) + np.sum(g_w2**2) + g_b2**2
        )
        if grad_norm2 < 1e-18:
            break
        s = step * 2.0
        accepted = None
        for _ in range(60):
            cand = (w1 - s * g_w1, b1 - s * g_b1, w2 - s * g_w2, b2 - s * g_b2)
            cand_loss, _ = _mlp_loss_and_gradients(Xn, tn, *cand)
            if cand_loss < loss - 1e-4 * s * grad_norm2:
                accepted = (cand, cand_loss)
                break
            s /= 2.0
        if accepted is None:
            break
        (w1, b1, w2, b2), new_loss = accepted
        step = s
        epochs_run = epoch + 1
        if loss - new_loss < tolerance:
            loss = new_loss
            break
        loss = new_loss

    hidden_out = np.tanh(Xn @ w1 + b1)
    outputs = hidden_out @ w2 + b2
    z_values = _denormalize(outputs, t_lo, t_hi)
    predictions = [
        _invert_transformation(transformation, float(z)) for z in z_values
    ]
    return MlpModel(
        hidden=hidden,
        w1=tuple(map(tuple, w1.tolist())),
        b1=tuple(b1.tolist()),
        w2=tuple(w2.tolist()),
        b2=float(b2),
        input_bounds=tuple((float(lo), float(hi)) for lo, hi in zip(x_lo, x_hi)),
        target_bounds=(t_lo, t_hi),
        transformation=transformation,
        seed=seed,
        epochs_run=epochs_run,
        final_loss=float(loss),
        training_mape=mape(predictions, y),
        training_mape_conventional=mape_conventional(predictions, y),
    )


def mlp_predict(model: MlpModel, case: Sequence[float]) -> float:
    """Cost in LE from a normalized forward pass through the network."""
    values = np.asarray([float(v) for v in case], dtype=float)
    if values.shape != (len(model.input_bounds),):
        raise ValueError(f"expected {len(model.input_bounds)} drivers")
    lo = np.array([b[0] for b in model.input_bounds])
    hi = np.array([b[1] for b in model.input_bounds])
    xn = _normalize(values, lo, hi)
    hidden = np.tanh(xn @ np.asarray(model.w1) + np.asarray(model.b1))
    out = float(hidden @ np.asarray(model.w2) + model.b2)
    z = float(_denormalize(np.asarray(out), *model.target_bounds))
    return _invert_transformation(model.transformation, z)


def gradient_check(
    model: MlpModel, sample: Dataset | Sequence[ProjectCase], h: float = 1e-5
) -> float:
    """Max relative disagreement between analytic and numeric gradients.

    Central finite differences with step ``h`` over every weight and bias,
    evaluated on the sample's normalized training loss.
    """
    cases = list(sample)
    if not cases:
        raise ValueError("need at least one case")
    X = np.array([c.drivers for c in cases], dtype=float)
    y = np.array([c.cost_le for c in cases], dtype=float)
    t = _apply_transformation(model.transformation, y)
    lo = np.array([b[0] for b in model.input_bounds])
    hi = np.array([b[1] for b in model.input_bounds])
    Xn = _normalize(X, lo, hi)
    t_lo, t_hi = model.target_bounds
    tn = 2.0 * (t - t_lo) / (t_hi - t_lo) - 1.0

    w1 = np.asarray(model.w1, dtype=float)
    b1 = np.asarray(model.b1, dtype=float)
    w2 = np.asarray(model.w2, dtype=float)
    b2 = float(model.b2)
    _, (g_w1, g_b1, g_w2, g_b2) = _mlp_loss_and_gradients(Xn, tn, w1, b1, w2, b2)
    analytic = np.concatenate([g_w1.ravel(), g_b1, g_w2, [g_b2]])

    flat = np.concatenate([w1.ravel(), b1, w2, [b2]])
    sizes = (w1.size, b1.size, w2.size, 1)

    def unpack(vec: np.ndarray):
        i = 0
        a = vec[i : i + sizes[0]].reshape(w1.shape); i += sizes[0]
        b = vec[i : i + sizes[1]]; i += sizes[1]
        c = vec[i : i + sizes[2]]; i += sizes[2]
        d = float(vec[i])
        return a, b, c, d

    numeric = np.empty_like(flat)
    for i in range(len(flat)):
        plus = flat.copy(); plus[i] += h
        minus = flat.copy(); minus[i] -= h
        lp, _ = _mlp_loss_and_gradients(Xn, tn, *unpack(plus))
        lm, _ = _mlp_loss_and_gradients(Xn, tn, *unpack(minus))
        numeric[i] = (lp - lm) / (2.0 * h)
    scale = np.maximum(np.abs(analytic) + np.abs(numeric), 1e-8)
    return float(np.max(np.abs(analytic - numeric) / scale))


# --------------------------------------------------------------------------
# case-based retrieval


@dataclass(frozen=True)
class CbrConfig:
    """Retrieval settings: weighted similarity over a stored case base."""

    case_base: Dataset
    weights: tuple[float, float, float, float] = (0.2, 0.2, 0.2, 0.4)

    def __post_init__(self) -> None:
        if len(self.case_base) == 0:
            raise ValueError("case base must be non-empty")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be non-negative")
        if sum(self.weights) <= 0:
            raise ValueError("weight sum must be positive")


@dataclass(frozen=True)
class RetrievedCase:
    case: ProjectCase
    attribute_similarities: tuple[float, float, float, float]
    case_similarity: float


@dataclass(frozen=True)
class CbrPrediction:
    cost_le: float
    retrieved: tuple[RetrievedCase, ...]


@dataclass(frozen=True)
class CbrEvaluation:
    mape: float
    mape_conventional: float
    predictions: tuple[float, ...]
    actuals: tuple[float, ...]


def attribute_similarity(a: float, b: float) -> float:
    """Ratio similarity min(a, b) / max(a, b) for positive scalars."""
    if a <= 0 or b <= 0:
        raise ValueError("attribute values must be positive")
    return min(a, b) / max(a, b)


def case_similarity(
    similarities: Sequence[float], weights: Sequence[float]
) -> float:
    """Weighted mean of attribute similarities."""
    if len(similarities) != len(weights):
        raise ValueError("similarities and weights must align")
    total = float(sum(weights))
    if total <= 0:
        raise ValueError("weight sum must be positive")
    return float(sum(s * w for s, w in zip(similarities, weights)) / total)


def cbr_predict(
    config: CbrConfig, query: Sequence[float], k: int = 1
) -> CbrPrediction:
    """Retrieve the k most similar cases; the top case's cost is the answer.

    Ties in similarity break toward the case appearing earlier in the base.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    values = [float(v) for v in query]
    if len(values) != 4:
        raise ValueError("query must have 4 drivers")
    scored: list[RetrievedCase] = []
    for case in config.case_base:
        sims = tuple(
            attribute_similarity(q, c) for q, c in zip(values, case.drivers)
        )
        scored.append(RetrievedCase(case, sims, case_similarity(sims, config.weights)))
    order = sorted(
        range(len(scored)), key=lambda i: (-scored[i].case_similarity, i)
    )
    ranked = tuple(scored[i] for i in order[: min(k, len(scored))])
    return CbrPrediction(cost_le=ranked[0].case.cost_le, retrieved=ranked)


def cbr_evaluate_holdout(
    config: CbrConfig, queries: Dataset | Sequence[ProjectCase]
) -> CbrEvaluation:
    """Retrieve each query case against the full base and score the errors."""
    cases = list(queries)
    if not cases:
        raise ValueError("need at least one query case")
    predictions = [
        cbr_predict(config, case.drivers).cost_le for case in cases
    ]
    actuals = [case.cost_le for case in cases]
    return CbrEvaluation(
        mape=mape(predictions, actuals),
        mape_conventional=mape_conventional(predictions, actuals),
        predictions=tuple(predictions),
        actuals=tuple(actuals),
    )


def cbr_evaluate_loo(
    base: Dataset, weights: tuple[float, float, float, float] = (0.2, 0.2, 0.2, 0.4)
) -> CbrEvaluation:
    """Leave-one-out retrieval over the base: each case queries the rest."""
    cases = list(base)
    if len(cases) < 2:
        raise ValueError("need at least two cases")
    predictions = []
    for i, case in enumerate(cases):
        rest = Dataset(
            cases=tuple(c for j, c in enumerate(cases) if j != i), role=base.role
        )
        predictions.append(
            cbr_predict(CbrConfig(rest, weights), case.drivers).cost_le
        )
    actuals = [case.cost_le for case in cases]
    return CbrEvaluation(
        mape=mape(predictions, actuals),
        mape_conventional=mape_conventional(predictions, actuals),
        predictions=tuple(predictions),
        actuals=tuple(actuals),
    )


# --------------------------------------------------------------------------
# inflation, scenarios, importance


def adjust_inflation(cost: float, rate_percent: float, years: int) -> float:
    """Compound a cost forward: cost x (1 + rate/100)^years."""
    if years < 0:
        raise ValueError("years must be non-negative")
    if rate_percent <= -100:
        raise ValueError("rate must exceed -100 percent")
    return cost * (1.0 + rate_percent / 100.0) ** years


def predict_any(model: object, case: Sequence[float]) -> float:
    """Evaluate any supported cost model on a driver 4-vector."""
    if isinstance(model, FittedCostModel):
        return predict_cost(model, case)
    if isinstance(model, MlpModel):
        return mlp_predict(model, case)
    if isinstance(model, CbrConfig):
        return cbr_predict(model, case).cost_le
    if callable(model):
        return float(model(case))
    predictor = getattr(model, "predict_case", None) or getattr(model, "predict", None)
    if predictor is not None:
        return float(predictor(case))
    raise TypeError(f"cannot predict with object of type {type(model).__name__}")


@dataclass(frozen=True)
class ScenarioSet:
    """Monte-Carlo spread of predictions around a base case."""

    base_prediction: float
    scenarios: tuple[float, ...]
    cases: tuple[tuple[float, float, float, float], ...]
    mean: float
    sd: float
    seed: int
    toggled: tuple[str, ...]
    band: float

    def __post_init__(self) -> None:
        if len(self.scenarios) != len(self.cases) or not self.scenarios:
            raise ValueError("scenario predictions and cases must align")


def sensitivity_scenarios(
    model: object,
    base_case: Sequence[float],
    toggled: Sequence[str] = (),
    n: int = 30,
    band: float = 0.25,
    bounds: Mapping[str, tuple[float, float]] | None = None,
    seed: int = 0,
) -> ScenarioSet:
    """Random what-if scenarios for a prediction.

    Each toggled driver is drawn uniformly within ``band`` of its base
    value, then clamped to ``bounds`` when given; untoggled drivers stay
    fixed. The year, when toggled, is rounded to a whole year. The draw
    sequence is fixed by the seed.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0.0 < band <= 1.0:
        raise ValueError("band must lie in (0, 1]")
    values = [float(v) for v in base_case]
    if len(values) != len(DRIVER_NAMES):
        raise ValueError(f"base case must have {len(DRIVER_NAMES)} drivers")
    unknown = set(toggled) - set(DRIVER_NAMES)
    if unknown:
        raise ValueError(f"unknown drivers: {sorted(unknown)}")
    toggled_set = tuple(name for name in DRIVER_NAMES if name in set(toggled))
    rng = np.random.default_rng(seed)
    base_prediction = predict_any(model, values)
    cases = []
    predictions = []
    for _ in range(n):
        scenario = list(values)
        for idx, name in enumerate(DRIVER_NAMES):
            if name not in toggled_set:
                continue
            value = values[idx]
            low, high = value * (1.0 - band), value * (1.0 + band)
            drawn = float(rng.uniform(low, high))
            if bounds is not None and name in bounds:
                b_lo, b_hi = bounds[name]
                drawn = min(max(drawn, b_lo), b_hi)
            if name == "year":
                drawn = float(round(drawn))
            scenario[idx] = drawn
        cases.append(tuple(scenario))
        predictions.append(predict_any(model, scenario))
    arr = np.asarray(predictions)
    # identical scenarios must give sd exactly 0 and mean exactly the
    # repeated value (averaging otherwise leaves an ulp-sized residue)
    if n > 1 and len(set(predictions)) > 1:
        mean = float(arr.mean())
        sd = float(arr.std(ddof=1))
    else:
        mean = float(predictions[0])
        sd = 0.0
    return ScenarioSet(
        base_prediction=base_prediction,
        scenarios=tuple(float(p) for p in predictions),
        cases=tuple(cases),
        mean=mean,
        sd=sd,
        seed=seed,
        toggled=toggled_set,
        band=band,
    )


def importance_ranking(
    model: object, train: Dataset, fraction: float = 0.25
) -> list[tuple[str, float]]:
    """Drivers ordered by mean one-at-a-time perturbation impact.

    Each driver is shifted up and down by ``fraction`` of its training
    range (clamped to the training bounds) while the others stay fixed;
    the importance score is the mean absolute prediction change over the
    training cases, normalized so the scores sum to 1.
    """
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must lie in (0, 1]")
    bounds = driver_bounds(train)
    deltas = {
        name: fraction * (hi - lo) for name, (lo, hi) in bounds.items()
    }
    raw: dict[str, float] = {}
    for idx, name in enumerate(DRIVER_NAMES):
        lo, hi = bounds[name]
        delta = deltas[name]
        total = 0.0
        for case in train:
            values = list(case.drivers)
            up = list(values)
            down = list(values)
            up[idx] = min(values[idx] + delta, hi)
            down[idx] = max(values[idx] - delta, lo)
            total += abs(predict_any(model, up) - predict_any(model, down))
        raw[name] = total / len(train)
    scale = sum(raw.values())
    if scale <= 0:
        scores = {name: 0.0 for name in DRIVER_NAMES}
    else:
        scores = {name: value / scale for name, value in raw.items()}
    return sorted(scores.items(), key=lambda kv: -kv[1])


# --------------------------------------------------------------------------
# persistence


def _dataset_to_payload(dataset: Dataset) -> dict:
    return {
        "role": dataset.role,
        "cases": [
            {
                "id": c.id,
                "area_ha": c.area_ha,
                "length_m": c.length_m,
                "valves": c.valves,
                "year": c.year,
                "cost_le": c.cost_le,
            }
            for c in dataset
        ],
    }


def _dataset_from_payload(payload: Mapping) -> Dataset:
    cases = tuple(
        ProjectCase(
            id=str(c["id"]),
            area_ha=float(c["area_ha"]),
            length_m=float(c["length_m"]),
            valves=int(c["valves"]),
            year=int(c["year"]),
            cost_le=float(c["cost_le"]),
        )
        for c in payload["cases"]
    )
    return Dataset(cases=cases, role=str(payload["role"]))


def save_model(model: object, path: str) -> None:
    """Serialize a regression, network, or retrieval model to JSON."""
    if isinstance(model, FittedCostModel):
        payload = {
            "kind": "regression",
            "transformation": model.transformation,
            "names": list(model.names),
            "coefficients": list(model.coefficients),
            "metrics": {
                "r": model.r,
                "r2": model.r2,
                "adjusted_r2": model.adjusted_r2,
                "f_statistic": model.f_statistic,
                "mape": model.mape,
                "mape_conventional": model.mape_conventional,
                "n": model.n,
            },
        }
    elif isinstance(model, MlpModel):
        payload = {
            "kind": "mlp",
            "transformation": model.transformation,
            "hidden": model.hidden,
            "weights": {
                "w1": [list(r) for r in model.w1],
                "b1": list(model.b1),
                "w2": list(model.w2),
                "b2": model.b2,
            },
            "input_bounds": [list(b) for b in model.input_bounds],
            "target_bounds": list(model.target_bounds),
            "seed": model.seed,
            "metrics": {
                "epochs_run": model.epochs_run,
                "final_loss": model.final_loss,
                "mape": model.training_mape,
                "mape_conventional": model.training_mape_conventional,
            },
        }
    elif isinstance(model, CbrConfig):
        payload = {
            "kind": "cbr",
            "weights": list(model.weights),
            "case_base": _dataset_to_payload(model.case_base),
        }
    else:
        raise TypeError(f"cannot serialize object of type {type(model).__name__}")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path: str) -> FittedCostModel | MlpModel | CbrConfig:
    """Load a model saved by :func:`save_model`."""
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    kind = payload.get("kind")
    if kind == "regression":
        metrics = payload["metrics"]
        return FittedCostModel(
            transformation=payload["transformation"],
            names=tuple(payload["names"]),
            coefficients=tuple(float(c) for c in payload["coefficients"]),
            r=float(metrics["r"]),
            r2=float(metrics["r2"]),
            adjusted_r2=float(metrics["adjusted_r2"]),
            f_statistic=float(metrics["f_statistic"]),
            mape=float(metrics["mape"]),
            mape_conventional=float(metrics["mape_conventional"]),
            n=int(metrics["n"]),
        )
    if kind == "mlp":
        weights = payload["weights"]
        metrics = payload["metrics"]
        return MlpModel(
            hidden=int(payload["hidden"]),
            w1=tuple(tuple(float(v) for v in row) for row in weights["w1"]),
            b1=tuple(float(v) for v in weights["b1"]),
            w2=tuple(float(v) for v in weights["w2"]),
            b2=float(weights["b2"]),
            input_bounds=tuple(
                (float(lo), float(hi)) for lo, hi in payload["input_bounds"]
            ),
            target_bounds=tuple(float(v) for v in payload["target_bounds"]),
            transformation=payload["transformation"],
            seed=int(payload["seed"]),
            epochs_run=int(metrics["epochs_run"]),
            final_loss=float(metrics["final_loss"]),
            training_mape=float(metrics["mape"]),
            training_mape_conventional=float(metrics["mape_conventional"]),
        )
    if kind == "cbr":
        return CbrConfig(
            case_base=_dataset_from_payload(payload["case_base"]),
            weights=tuple(float(w) for w in payload["weights"]),
        )
    raise ValueError(f"unknown model kind {kind!r}")
