"""Command-line pipelines and the JSON-over-HTTP serve mode.

One binary with subcommands: ``screen`` runs survey aggregation or
driver-selection reports, ``fit`` trains and saves cost models, ``predict``
prices a project from a saved model, ``serve`` exposes the same prediction
path over HTTP, and ``bench`` replays the numeric checks against the
bundled data. Exit codes: 0 success, 1 internal error, 2 usage or input
error, 3 domain error.
"""

from __future__ import annotations

import argparse
import functools
import hashlib
import json
import math
import os
import sys
import time
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any, Callable, Mapping, Sequence

from . import __version__, fuzzy, mcdm, models, screening
from .data import (
    DRIVER_NAMES,
    Dataset,
    ParseError,
    Table,
    bundled_data_dir,
    driver_bounds,
    load_training,
    load_validation,
    parse_dataset,
    parse_extended,
    table_from_dataset,
)

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_DOMAIN = 3

_INPUT_ERRORS = (
    FileNotFoundError,
    IsADirectoryError,
    NotADirectoryError,
    PermissionError,
    ParseError,
    json.JSONDecodeError,
    UnicodeDecodeError,
    KeyError,
)


# --------------------------------------------------------------------------
# shared plumbing


def _dump_json(payload: Any) -> bytes:
    """Canonical JSON used by both the CLI and the HTTP server."""
    return json.dumps(payload, separators=(",", ":"), allow_nan=False).encode("utf-8")


def _digest(path: str) -> str:
    hasher = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            hasher.update(chunk)
    return hasher.hexdigest()


@dataclass(frozen=True)
class RunManifest:
    """Everything needed to re-run a command bit-identically."""

    command: str
    inputs: tuple[str, ...]
    seed: int | None
    overrides: dict
    version: str
    digests: dict

    def payload(self) -> dict:
        return {
            "command": self.command,
            "inputs": list(self.inputs),
            "seed": self.seed,
            "overrides": self.overrides,
            "version": self.version,
            "digests": self.digests,
        }


def _write_json(path: str, payload: Any) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_manifest(
    out_dir: str,
    prefix: str,
    command: str,
    inputs: Sequence[str],
    seed: int | None,
    overrides: Mapping,
    outputs: Sequence[str],
) -> str:
    manifest = RunManifest(
        command=command,
        inputs=tuple(inputs),
        seed=seed,
        overrides=dict(overrides),
        version=__version__,
        digests={os.path.basename(p): _digest(p) for p in outputs},
    )
    path = os.path.join(out_dir, f"{prefix}_manifest.json")
    _write_json(path, manifest.payload())
    return path


def _format_table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)),
        "  ".join("-" * w for w in widths),
    ]
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)))
    return "\n".join(lines)


def _resolve_driver(token: str) -> str:
    """Match a driver by full name or unique prefix (e.g. ``length``)."""
    key = token.strip().lower()
    matches = [name for name in DRIVER_NAMES if name == key or name.startswith(key)]
    if len(matches) != 1:
        raise ValueError(
            f"unknown driver {token!r}; choose from {', '.join(DRIVER_NAMES)}"
        )
    return matches[0]


def _load_table(path: str) -> Table:
    """Read either the standard project CSV or the extended screening CSV."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    header = text.splitlines()[0].strip() if text.strip() else ""
    if header.startswith("id,area_ha"):
        return table_from_dataset(parse_dataset(text))
    return parse_extended(text)


def _load_dataset(path: str | None, role: str, loader) -> Dataset:
    if path is None:
        return loader()
    with open(path, encoding="utf-8") as fh:
        return parse_dataset(fh.read(), role)


@functools.lru_cache(maxsize=1)
def _bundled_training() -> Dataset:
    return load_training()


@dataclass(frozen=True)
class LoadedModel:
    """A model file plus the metadata the prediction pipeline needs."""

    path: str
    kind: str
    model: object
    transformation: str | None
    metrics: dict
    year_horizon: float
    bounds: dict


def _load_model_file(path: str) -> LoadedModel:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    kind = payload.get("kind")
    if kind == "fuzzy-rules":
        model: object = fuzzy.load_rule_base(path)
        kind = "fuzzy"
        metrics = dict(payload.get("metrics") or {"rules": len(model.rules)})
    elif kind in ("regression", "mlp", "cbr"):
        model = models.load_model(path)
        metrics = dict(payload.get("metrics") or {})
        if kind == "cbr":
            metrics.setdefault("cases", len(model.case_base))
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    horizon = payload.get("year_horizon")
    bounds = payload.get("driver_bounds")
    if horizon is None or bounds is None:
        fallback = driver_bounds(_bundled_training())
        bounds = bounds or {k: list(v) for k, v in fallback.items()}
        horizon = horizon if horizon is not None else fallback["year"][1]
    return LoadedModel(
        path=path,
        kind=kind,
        model=model,
        transformation=payload.get("transformation"),
        metrics=metrics,
        year_horizon=float(horizon),
        bounds={k: (float(v[0]), float(v[1])) for k, v in bounds.items()},
    )


def _attach_metadata(path: str, train: Dataset) -> None:
    """Record the training year horizon and driver ranges in a model file."""
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    bounds = driver_bounds(train)
    payload["year_horizon"] = bounds["year"][1]
    payload["driver_bounds"] = {k: list(v) for k, v in bounds.items()}
    _write_json(path, payload)


# --------------------------------------------------------------------------
# prediction pipeline (single code path for the CLI and the server)


def _pipeline_predictor(entry: LoadedModel, inflation_rate: float | None) -> Callable:
    """Price a case: the model sees the year capped at its training horizon;
    costs are compounded forward only when the requested year lies beyond
    the horizon and a rate was supplied."""
    horizon = entry.year_horizon

    def predict(case: Sequence[float]) -> float:
        area, length, valves, year = (float(v) for v in case)
        cost = models.predict_any(entry.model, (area, length, valves, min(year, horizon)))
        if year > horizon and inflation_rate is not None:
            cost = models.adjust_inflation(cost, inflation_rate, int(round(year - horizon)))
        return cost

    return predict


def _check_case_fields(area: float, length: float, valves: float, year: float) -> None:
    for name, value in zip(DRIVER_NAMES, (area, length, valves, year)):
        if not math.isfinite(value):
            raise ValueError(f"{name} must be finite")
    if area <= 0:
        raise ValueError("area_ha must be positive")
    if length <= 0:
        raise ValueError("length_m must be positive")
    if valves <= 0:
        raise ValueError("valves must be positive")


def _prediction_payload(
    entry: LoadedModel,
    area: float,
    length: float,
    valves: float,
    year: float,
    inflation_rate: float | None,
    toggles: Sequence[str],
    scenario_count: int | None,
    seed: int,
    band: float = 0.25,
) -> dict:
    _check_case_fields(area, length, valves, year)
    predictor = _pipeline_predictor(entry, inflation_rate)
    case = (area, length, valves, year)
    cost = predictor(case)
    payload: dict = {"cost_le": cost, "cost_per_hectare": cost / area}
    if scenario_count is not None or toggles:
        spread = models.sensitivity_scenarios(
            predictor,
            case,
            toggled=tuple(toggles),
            n=scenario_count if scenario_count is not None else 30,
            band=band,
            bounds=entry.bounds,
            seed=seed,
        )
        payload["scenarios"] = {
            "values": list(spread.scenarios),
            "mean": spread.mean,
            "sd": spread.sd,
        }
    return payload


# --------------------------------------------------------------------------
# screen


def _screen_fdm(args: argparse.Namespace) -> tuple[dict, str, list[str]]:
    surveys = mcdm.load_surveys(args.surveys)
    result = mcdm.fdm_from_surveys(
        surveys, alpha=args.alpha, exclude=tuple(args.exclude)
    )
    retained = set(result["retained"])
    parameters = [
        {
            "id": pid,
            "lower": tfn.l,
            "middle": tfn.m,
            "upper": tfn.u,
            "crisp": result["crisp"][pid],
            "decision": "retain" if pid in retained else "delete",
        }
        for pid, tfn in result["aggregates"].items()
    ]
    report = {
        "alpha": result["alpha"],
        "excluded": result["excluded"],
        "parameters": parameters,
        "retained": result["retained"],
        "deleted": result["deleted"],
    }
    rows = [
        [
            p["id"],
            f"{p['lower']:.4f}",
            f"{p['middle']:.4f}",
            f"{p['upper']:.4f}",
            f"{p['crisp']:.4f}",
            p["decision"],
        ]
        for p in parameters
    ]
    text = _format_table(
        ["parameter", "lower", "middle", "upper", "crisp", "decision"], rows
    )
    return report, text, [args.surveys]


def _screen_fahp(args: argparse.Namespace) -> tuple[dict, str, list[str]]:
    surveys = mcdm.load_surveys(args.surveys)
    result = mcdm.fahp_from_surveys(surveys)
    matrix = result["matrix"]
    weights = result["weights"]
    report = {
        "criteria": list(matrix.criteria),
        "matrix": [[[e.l, e.m, e.u] for e in row] for row in matrix.entries],
        "extents": {
            ext.criterion: [ext.value.l, ext.value.m, ext.value.u]
            for ext in result["extents"]
        },
        "weights_raw": dict(zip(weights.criteria, weights.raw)),
        "weights_normalized": dict(zip(weights.criteria, weights.normalized)),
        "consistency_ratio": result["consistency_ratio"],
    }
    rows = [
        [
            criterion,
            f"{raw:.4f}",
            f"{normalized:.4f}",
        ]
        for criterion, raw, normalized in zip(
            weights.criteria, weights.raw, weights.normalized
        )
    ]
    text = _format_table(["criterion", "raw_weight", "normalized_weight"], rows)
    text += f"\nconsistency ratio: {report['consistency_ratio']:.4f}"
    return report, text, [args.surveys]


def _screen_selection(args: argparse.Namespace) -> tuple[dict, str, list[str]]:
    table = _load_table(args.data)
    trace = screening.select_variables(
        table, method=args.mode, p_enter=args.p_enter, p_remove=args.p_remove
    )
    report = {
        "method": args.mode,
        "p_enter": args.p_enter,
        "p_remove": args.p_remove,
        "steps": [
            {
                "action": s.action,
                "variable": s.variable,
                "r": s.r,
                "r2": s.r2,
                "adjusted_r2": s.adjusted_r2,
            }
            for s in trace.steps
        ],
        "selected": list(trace.selected),
    }
    rows = [
        [s.action, s.variable, f"{s.r:.4f}", f"{s.r2:.4f}", f"{s.adjusted_r2:.4f}"]
        for s in trace.steps
    ]
    text = _format_table(["action", "variable", "r", "r2", "adjusted_r2"], rows)
    text += f"\nselected: {', '.join(trace.selected) or '(none)'}"
    return report, text, [args.data]


def _screen_hybrid(args: argparse.Namespace) -> tuple[dict, str, list[str]]:
    table = _load_table(args.data)
    selected = screening.hybrid_select(table, mode=args.filter_mode)
    report = {"filter_mode": args.filter_mode, "selected": selected}
    text = f"selected: {', '.join(selected) or '(none)'}"
    return report, text, [args.data]


def _screen_adequacy(args: argparse.Namespace) -> tuple[dict, str, list[str]]:
    table = _load_table(args.data)
    summary = screening.adequacy(table.X, table.names)
    corr = screening.correlation_matrix(
        table.names, [table.X[:, j] for j in range(table.X.shape[1])]
    )
    solution = screening.pca(corr)
    retained = screening.retain_components(
        solution.eigenvalues, rule=args.retain_rule, threshold=args.retain_threshold
    )
    loadings = solution.loadings_array()[:, :retained]
    rotated = screening.varimax(loadings) if retained >= 2 else loadings
    report = {
        "determinant": summary.determinant,
        "kmo": summary.kmo,
        "msa": dict(zip(table.names, summary.msa)),
        "bartlett": {
            "statistic": summary.bartlett_statistic,
            "df": summary.bartlett_df,
            "pvalue": summary.bartlett_pvalue,
        },
        "eigenvalues": list(solution.eigenvalues),
        "percent_variance": list(solution.percent_variance),
        "retain_rule": args.retain_rule,
        "retained": retained,
        "loadings": [list(row) for row in loadings],
        "rotated_loadings": [list(row) for row in rotated],
    }
    lines = [
        f"determinant: {summary.determinant:.6g}",
        f"kmo: {summary.kmo:.4f}",
        "bartlett: statistic "
        f"{summary.bartlett_statistic:.4f}, df {summary.bartlett_df}, "
        f"p {summary.bartlett_pvalue:.4g}",
        "eigenvalues: " + ", ".join(f"{v:.4f}" for v in solution.eigenvalues),
        f"retained components ({args.retain_rule}): {retained}",
    ]
    return report, "\n".join(lines), [args.data]


_SCREEN_MODES = {
    "fdm": _screen_fdm,
    "fahp": _screen_fahp,
    "forward": _screen_selection,
    "backward": _screen_selection,
    "stepwise": _screen_selection,
    "hybrid": _screen_hybrid,
    "adequacy": _screen_adequacy,
}


def cmd_screen(args: argparse.Namespace) -> int:
    try:
        report, text, inputs = _SCREEN_MODES[args.mode](args)
    except (*_INPUT_ERRORS, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    os.makedirs(args.out_dir, exist_ok=True)
    report_path = os.path.join(args.out_dir, f"{args.mode}_report.json")
    text_path = os.path.join(args.out_dir, f"{args.mode}_report.txt")
    _write_json(report_path, report)
    with open(text_path, "w", encoding="utf-8") as fh:
        fh.write(text + "\n")
    overrides = {
        key: value
        for key, value in vars(args).items()
        if key not in ("func", "command", "mode", "out_dir") and value is not None
    }
    _write_manifest(
        args.out_dir,
        args.mode,
        f"screen {args.mode}",
        inputs,
        None,
        overrides,
        [report_path, text_path],
    )
    print(text)
    return EXIT_OK


# --------------------------------------------------------------------------
# fit


def _safe_mape(predictor: Callable, data: Dataset) -> tuple[float | None, str | None]:
    try:
        predictions = [predictor(case.drivers) for case in data]
        return models.mape(predictions, data.costs()), None
    except ValueError as exc:
        return None, str(exc)


def _fit_regression(args, train: Dataset, valid: Dataset):
    model = models.fit_parametric(train, transformation=args.transform)
    diag = models.diagnostics(model, train)
    valid_mape, note = _safe_mape(lambda case: model.predict(case), valid)
    metrics = {
        "kind": "regression",
        "transformation": model.transformation,
        "r": model.r,
        "r2": model.r2,
        "adjusted_r2": model.adjusted_r2,
        "f_statistic": model.f_statistic,
        "mape_train": model.mape,
        "mape_train_conventional": model.mape_conventional,
        "mape_valid": valid_mape,
        "diagnostics": {
            "durbin_watson": diag.durbin_watson,
            "max_cooks_distance": diag.max_cooks_distance,
            "vif": dict(zip(diag.names, diag.vif)),
            "tolerance": dict(zip(diag.names, diag.tolerance)),
        },
    }
    if note:
        metrics["note"] = note
    return model, metrics


def _fit_mlp(args, train: Dataset, valid: Dataset):
    model = models.mlp_train(
        train,
        hidden=args.hidden,
        transformation=args.transform,
        seed=args.seed,
        epochs=args.epochs,
    )
    valid_mape, note = _safe_mape(lambda case: model.predict(case), valid)
    metrics = {
        "kind": "mlp",
        "transformation": model.transformation,
        "hidden": model.hidden,
        "seed": model.seed,
        "epochs_run": model.epochs_run,
        "final_loss": model.final_loss,
        "mape_train": model.training_mape,
        "mape_train_conventional": model.training_mape_conventional,
        "mape_valid": valid_mape,
    }
    if note:
        metrics["note"] = note
    return model, metrics


def _fit_cbr(args, train: Dataset, valid: Dataset):
    model = models.CbrConfig(case_base=train, weights=args.weights)
    evaluation = models.cbr_evaluate_holdout(model, valid)
    metrics = {
        "kind": "cbr",
        "cases": len(train),
        "weights": list(args.weights),
        "mape_valid": evaluation.mape,
        "mape_valid_conventional": evaluation.mape_conventional,
    }
    return model, metrics


def _fit_fuzzy(args, train: Dataset, valid: Dataset):
    inputs, output = fuzzy.default_partitions(train, args.labels)
    wm_rules = fuzzy.generate_rules_wm(train, inputs, output)
    if args.pool == "wm":
        pool = wm_rules
    else:
        pool = fuzzy.generate_grid_pool(train, inputs, output)
    init_probability = args.init_probability
    if init_probability is None:
        init_probability = 0.9 if args.pool == "wm" else len(wm_rules) / len(pool)
    config = fuzzy.GaConfig(
        population=args.population,
        generations=args.generations,
        crossover=args.crossover,
        mutation=args.mutation,
        tournament=args.tournament,
        seed=args.seed,
        init_probability=init_probability,
    )
    model = fuzzy.ga_select_rules(pool, train, config)
    train_error, train_uncovered = fuzzy.penalized_mape(model, train)
    valid_error, valid_uncovered = fuzzy.penalized_mape(model, valid)
    metrics = {
        "kind": "fuzzy",
        "labels": args.labels,
        "pool": args.pool,
        "candidate_rules": len(pool),
        "rules": len(model),
        "seed": args.seed,
        "fitness": fuzzy.fitness(model, train),
        "mape_train_penalized": train_error,
        "uncovered_train": train_uncovered,
        "mape_valid_penalized": valid_error,
        "uncovered_valid": valid_uncovered,
    }
    return model, metrics


_FIT_KINDS = {
    "regression": _fit_regression,
    "mlp": _fit_mlp,
    "cbr": _fit_cbr,
    "fuzzy": _fit_fuzzy,
}


def cmd_fit(args: argparse.Namespace) -> int:
    try:
        train = _load_dataset(args.data, "training", load_training)
        valid = _load_dataset(args.valid, "validation", load_validation)
        model, metrics = _FIT_KINDS[args.kind](args, train, valid)
    except (*_INPUT_ERRORS, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = args.out or f"{args.kind}_model.json"
    out_dir = os.path.dirname(out)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    if args.kind == "fuzzy":
        fuzzy.save_rule_base(model, out)
    else:
        models.save_model(model, out)
    _attach_metadata(out, train)
    stem = out[:-5] if out.endswith(".json") else out
    metrics_path = f"{stem}_metrics.json"
    _write_json(metrics_path, metrics)
    inputs = [
        args.data or os.path.join(bundled_data_dir(), "train.csv"),
        args.valid or os.path.join(bundled_data_dir(), "valid.csv"),
    ]
    overrides = {
        key: value
        for key, value in vars(args).items()
        if key not in ("func", "command", "kind", "data", "valid", "out")
        and value is not None
    }
    _write_manifest(
        os.path.dirname(out) or ".",
        os.path.basename(stem),
        f"fit {args.kind}",
        inputs,
        getattr(args, "seed", None),
        overrides,
        [out, metrics_path],
    )
    print(json.dumps(metrics, indent=2, sort_keys=True))
    return EXIT_OK


# --------------------------------------------------------------------------
# predict


def cmd_predict(args: argparse.Namespace) -> int:
    try:
        entry = _load_model_file(args.model)
        toggles = tuple(_resolve_driver(t) for t in args.toggle)
    except (*_INPUT_ERRORS, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        payload = _prediction_payload(
            entry,
            area=args.area_ha,
            length=args.length_m,
            valves=args.valves,
            year=args.year,
            inflation_rate=args.inflation_rate,
            toggles=toggles,
            scenario_count=args.scenarios,
            seed=args.seed,
            band=args.band,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    sys.stdout.buffer.write(_dump_json(payload) + b"\n")
    sys.stdout.buffer.flush()
    return EXIT_OK


# --------------------------------------------------------------------------
# serve


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def _validate_predict_body(body: Any, loaded: Mapping[str, LoadedModel]):
    if not isinstance(body, dict):
        return None, {"body": "must be a JSON object"}
    errors: dict[str, str] = {}
    fields: dict[str, Any] = {}
    model_key = body.get("model")
    if not isinstance(model_key, str) or model_key not in loaded:
        errors["model"] = f"must be one of: {', '.join(sorted(loaded))}"
    else:
        fields["model"] = model_key
    for name in ("area_ha", "length_m", "valves"):
        value = body.get(name)
        if not _is_number(value) or value <= 0:
            errors[name] = "must be a positive number"
        else:
            fields[name] = float(value)
    year = body.get("year")
    if not _is_number(year):
        errors["year"] = "must be a number"
    else:
        fields["year"] = float(year)
    rate = body.get("inflation_rate")
    if rate is not None and (not _is_number(rate) or rate <= -100):
        errors["inflation_rate"] = "must be a number greater than -100"
    else:
        fields["inflation_rate"] = float(rate) if rate is not None else None
    toggles = body.get("toggles", [])
    if not isinstance(toggles, list) or not all(isinstance(t, str) for t in toggles):
        errors["toggles"] = "must be a list of driver names"
    else:
        try:
            fields["toggles"] = tuple(_resolve_driver(t) for t in toggles)
        except ValueError as exc:
            errors["toggles"] = str(exc)
    scenarios = body.get("scenarios")
    if scenarios is not None and (
        isinstance(scenarios, bool)
        or not isinstance(scenarios, int)
        or not 1 <= scenarios <= 10000
    ):
        errors["scenarios"] = "must be an integer between 1 and 10000"
    else:
        fields["scenarios"] = scenarios
    seed = body.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        errors["seed"] = "must be an integer"
    else:
        fields["seed"] = seed
    return fields, errors


def _validate_retrieve_body(body: Any):
    if not isinstance(body, dict):
        return None, {"body": "must be a JSON object"}
    errors: dict[str, str] = {}
    fields: dict[str, Any] = {}
    for name in ("area_ha", "length_m", "valves"):
        value = body.get(name)
        if not _is_number(value) or value <= 0:
            errors[name] = "must be a positive number"
        else:
            fields[name] = float(value)
    year = body.get("year")
    if not _is_number(year):
        errors["year"] = "must be a number"
    else:
        fields["year"] = float(year)
    k = body.get("k", 1)
    if isinstance(k, bool) or not isinstance(k, int) or k < 1:
        errors["k"] = "must be a positive integer"
    else:
        fields["k"] = k
    return fields, errors


def _models_payload(loaded: Mapping[str, LoadedModel]) -> list[dict]:
    return [
        {
            "kind": key,
            "transformation": loaded[key].transformation,
            "metrics": loaded[key].metrics,
        }
        for key in sorted(loaded)
    ]


def _make_handler(loaded: Mapping[str, LoadedModel]):
    class Handler(BaseHTTPRequestHandler):
        server_version = f"fcip/{__version__}"
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # keep test and console output clean
            pass

        def _send(self, status: int, payload: Any) -> None:
            body = _dump_json(payload)
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_GET(self) -> None:
            if self.path == "/models":
                self._send(200, _models_payload(loaded))
            else:
                self._send(404, {"error": "not found"})

        def do_POST(self) -> None:
            if self.path not in ("/predict", "/cbr/retrieve"):
                self._send(404, {"error": "not found"})
                return
            try:
                length = int(self.headers.get("Content-Length") or 0)
                body = json.loads(self.rfile.read(length).decode("utf-8"))
            except (json.JSONDecodeError, UnicodeDecodeError, ValueError):
                self._send(400, {"error": "invalid JSON body"})
                return
            if self.path == "/predict":
                self._predict(body)
            else:
                self._retrieve(body)

        def _predict(self, body: Any) -> None:
            fields, errors = _validate_predict_body(body, loaded)
            if errors:
                self._send(400, {"errors": errors})
                return
            try:
                payload = _prediction_payload(
                    loaded[fields["model"]],
                    area=fields["area_ha"],
                    length=fields["length_m"],
                    valves=fields["valves"],
                    year=fields["year"],
                    inflation_rate=fields["inflation_rate"],
                    toggles=fields["toggles"],
                    scenario_count=fields["scenarios"],
                    seed=fields["seed"],
                )
            except ValueError as exc:
                self._send(400, {"error": str(exc)})
                return
            self._send(200, payload)

        def _retrieve(self, body: Any) -> None:
            entry = loaded.get("cbr")
            if entry is None:
                self._send(400, {"error": "no cbr model loaded"})
                return
            fields, errors = _validate_retrieve_body(body)
            if errors:
                self._send(400, {"errors": errors})
                return
            query = (
                fields["area_ha"],
                fields["length_m"],
                fields["valves"],
                fields["year"],
            )
            try:
                k = min(fields["k"], len(entry.model.case_base))
                result = models.cbr_predict(entry.model, query, k=k)
            except ValueError as exc:
                self._send(400, {"error": str(exc)})
                return
            cases = [
                {
                    "rank": rank + 1,
                    "id": retrieved.case.id,
                    "area_ha": retrieved.case.area_ha,
                    "length_m": retrieved.case.length_m,
                    "valves": retrieved.case.valves,
                    "year": retrieved.case.year,
                    "cost_le": retrieved.case.cost_le,
                    "attribute_similarities": dict(
                        zip(DRIVER_NAMES, retrieved.attribute_similarities)
                    ),
                    "case_similarity": retrieved.case_similarity,
                }
                for rank, retrieved in enumerate(result.retrieved)
            ]
            self._send(200, {"cost_le": result.cost_le, "cases": cases})

    return Handler


def cmd_serve(args: argparse.Namespace) -> int:
    loaded: dict[str, LoadedModel] = {}
    try:
        for path in args.model:
            entry = _load_model_file(path)
            if entry.kind in loaded:
                raise ValueError(f"duplicate model kind {entry.kind!r}")
            loaded[entry.kind] = entry
    except (*_INPUT_ERRORS, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        server = ThreadingHTTPServer((args.host, args.port), _make_handler(loaded))
    except OSError as exc:
        print(f"error: cannot bind {args.host}:{args.port}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(
        f"serving {', '.join(sorted(loaded))} on http://{args.host}:{server.server_address[1]}",
        file=sys.stderr,
    )
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


# --------------------------------------------------------------------------
# bench


def cmd_bench(args: argparse.Namespace) -> int:
    train = load_training()
    valid = load_validation()
    checks: list[tuple[bool, str, str]] = []

    def check(name: str, value: float, ok: bool) -> None:
        checks.append((ok, name, f"{value:.4f}" if isinstance(value, float) else str(value)))

    started = time.perf_counter()
    sqrt_model = models.fit_parametric(train, "sqrt")
    fit_seconds = time.perf_counter() - started
    check("sqrt fit under 1 s", fit_seconds, fit_seconds < 1.0)
    check("sqrt r2 in 0.863+-0.02", sqrt_model.r2, abs(sqrt_model.r2 - 0.863) <= 0.02)
    check(
        "sqrt training mape in 9.13+-1.0",
        sqrt_model.mape,
        abs(sqrt_model.mape - 9.13) <= 1.0,
    )
    sqrt_valid = models.mape([sqrt_model.predict(c.drivers) for c in valid], valid.costs())
    check("sqrt validation mape in 7.82+-1.5", sqrt_valid, abs(sqrt_valid - 7.82) <= 1.5)

    transform_targets = {
        "none": (0.857, 9.13, "mape"),
        "reciprocal": (0.803, 11.20, "mape"),
        "semilog": (0.857, 9.30, "mape"),
        "power": (0.814, 11.79, "mape_conventional"),
    }
    for name, (r2_target, mape_target, attribute) in transform_targets.items():
        fitted = models.fit_parametric(train, name)
        value = getattr(fitted, attribute)
        check(
            f"{name} r2 in {r2_target}+-0.03 and mape in {mape_target}+-1.5",
            value,
            abs(fitted.r2 - r2_target) <= 0.03 and abs(value - mape_target) <= 1.5,
        )

    diag = models.diagnostics(sqrt_model, train)
    check(
        "durbin-watson in 2.224+-0.15",
        diag.durbin_watson,
        abs(diag.durbin_watson - 2.224) <= 0.15,
    )
    check(
        "max cook's distance < 1 and in 0.249+-0.08",
        diag.max_cooks_distance,
        diag.max_cooks_distance < 1.0 and abs(diag.max_cooks_distance - 0.249) <= 0.08,
    )
    tolerance_targets = (0.576, 0.567, 0.607, 0.977)
    tolerance_ok = all(
        abs(measured - target) <= 0.05
        for measured, target in zip(diag.tolerance, tolerance_targets)
    )
    check("tolerances within +-0.05 of targets", min(diag.tolerance), tolerance_ok)

    trace = screening.select_variables(table_from_dataset(train), method="stepwise")
    entered = [s.variable for s in trace.steps if s.action == "enter"]
    expected_order = ["length_m", "year", "valves", "area_ha"]
    cumulative_r = [s.r for s in trace.steps if s.action == "enter"]
    r_targets = (0.85, 0.89, 0.92, 0.93)
    order_ok = entered == expected_order and all(
        abs(r - target) <= 0.02 for r, target in zip(cumulative_r, r_targets)
    )
    check("stepwise order and cumulative r", cumulative_r[-1] if cumulative_r else 0.0, order_ok)
    single_r = screening.correlate(
        table_from_dataset(train).column("length_m"), train.costs()
    )
    check("r(cost, length) in 0.85+-0.02", single_r, abs(single_r - 0.85) <= 0.02)

    surveys = mcdm.load_surveys(os.path.join(bundled_data_dir(), "surveys"))
    fahp = mcdm.fahp_from_surveys(surveys)
    weight_targets = (0.7544, 0.2456, 0.0)
    weights_ok = all(
        abs(w - target) <= 0.01
        for w, target in zip(fahp["weights"].normalized, weight_targets)
    )
    cr = fahp["consistency_ratio"]
    check("pairwise weights within +-0.01 and cr <= 0.1", cr, weights_ok and cr <= 0.1)

    loo = models.cbr_evaluate_loo(train)
    check("cbr leave-one-out mape in 17.3+-3.0", loo.mape, abs(loo.mape - 17.3) <= 3.0)

    mlp = models.mlp_train(train, seed=args.seed)
    check("mlp training mape <= 12", mlp.training_mape, mlp.training_mape <= 12.0)
    grad_error = models.gradient_check(mlp, train.cases[:8])
    check("mlp gradient check < 1e-4", grad_error, grad_error < 1e-4)

    inputs, output = fuzzy.default_partitions(train, args.labels)
    pool = fuzzy.generate_rules_wm(train, inputs, output)
    selected = fuzzy.ga_select_rules(pool, train, fuzzy.GaConfig(seed=args.seed))
    valid_error, valid_uncovered = fuzzy.penalized_mape(selected, valid)
    check(
        "fuzzy rule count <= 100 and validation error <= 20",
        valid_error,
        len(selected) <= 100 and valid_uncovered == 0 and valid_error <= 20.0,
    )

    inflated = models.adjust_inflation(100000.0, 10.0, 2)
    check("two years at 10% compounds to 121000", inflated, abs(inflated - 121000.0) <= 1e-6)

    rows = [
        ["PASS" if ok else "FAIL", name, value] for ok, name, value in checks
    ]
    print(_format_table(["status", "check", "measured"], rows))
    failures = sum(1 for ok, _, _ in checks if not ok)
    print(f"{len(checks) - failures}/{len(checks)} checks passed")
    return EXIT_OK if failures == 0 else EXIT_INTERNAL


# --------------------------------------------------------------------------
# argument parsing


def _weights_argument(raw: str) -> tuple[float, float, float, float]:
    parts = raw.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("weights must be four comma-separated numbers")
    try:
        values = tuple(float(p) for p in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fcip",
        description="Conceptual cost estimation toolkit for field-canal improvement projects.",
    )
    parser.add_argument("--version", action="version", version=f"fcip {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    screen = subparsers.add_parser("screen", help="survey aggregation and driver selection reports")
    modes = screen.add_subparsers(dest="mode", required=True)
    for mode in ("fdm", "fahp"):
        mode_parser = modes.add_parser(mode, help=f"{mode} survey analysis")
        mode_parser.add_argument("--surveys", required=True, help="directory of survey JSON files")
        if mode == "fdm":
            mode_parser.add_argument("--alpha", type=float, default=0.6)
            mode_parser.add_argument(
                "--exclude", action="append", default=[], metavar="PARAMETER",
                help="parameter kept out of the screen regardless of its score",
            )
        mode_parser.add_argument("--out-dir", default=".")
        mode_parser.set_defaults(func=cmd_screen)
    for mode in ("forward", "backward", "stepwise"):
        mode_parser = modes.add_parser(mode, help=f"{mode} variable selection")
        mode_parser.add_argument("--data", required=True, help="project or extended screening CSV")
        mode_parser.add_argument("--p-enter", type=float, default=0.05)
        mode_parser.add_argument("--p-remove", type=float, default=0.10)
        mode_parser.add_argument("--out-dir", default=".")
        mode_parser.set_defaults(func=cmd_screen)
    hybrid = modes.add_parser("hybrid", help="correlation filter plus stepwise selection")
    hybrid.add_argument("--data", required=True)
    hybrid.add_argument(
        "--filter-mode", type=int, choices=(1, 2), default=2,
        help="1 drops low-relevance drivers too; 2 drops redundant drivers only",
    )
    hybrid.add_argument("--out-dir", default=".")
    hybrid.set_defaults(func=cmd_screen)
    adequacy = modes.add_parser("adequacy", help="sampling adequacy and factor structure")
    adequacy.add_argument("--data", required=True)
    adequacy.add_argument(
        "--retain-rule", choices=("kaiser", "jolliffe", "threshold"), default="kaiser"
    )
    adequacy.add_argument("--retain-threshold", type=float, default=None)
    adequacy.add_argument("--out-dir", default=".")
    adequacy.set_defaults(func=cmd_screen)

    fit = subparsers.add_parser("fit", help="train and save a cost model")
    kinds = fit.add_subparsers(dest="kind", required=True)
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--data", default=None, help="training CSV (default: bundled)")
    shared.add_argument("--valid", default=None, help="validation CSV (default: bundled)")
    shared.add_argument("--out", default=None, help="model output path")
    regression = kinds.add_parser("regression", parents=[shared])
    regression.add_argument(
        "--transform", choices=sorted(models.TRANSFORMATIONS), default="sqrt"
    )
    regression.set_defaults(func=cmd_fit)
    mlp = kinds.add_parser("mlp", parents=[shared])
    mlp.add_argument("--hidden", type=int, default=5)
    mlp.add_argument("--transform", choices=sorted(models.TRANSFORMATIONS), default="sqrt")
    mlp.add_argument("--seed", type=int, default=0)
    mlp.add_argument("--epochs", type=int, default=5000)
    mlp.set_defaults(func=cmd_fit)
    cbr = kinds.add_parser("cbr", parents=[shared])
    cbr.add_argument("--weights", type=_weights_argument, default=(0.2, 0.2, 0.2, 0.4))
    cbr.set_defaults(func=cmd_fit)
    fuzzy_fit = kinds.add_parser("fuzzy", parents=[shared])
    fuzzy_fit.add_argument("--labels", type=int, default=7)
    fuzzy_fit.add_argument("--pool", choices=("wm", "grid"), default="wm")
    fuzzy_fit.add_argument("--seed", type=int, default=0)
    fuzzy_fit.add_argument("--population", type=int, default=60)
    fuzzy_fit.add_argument("--generations", type=int, default=200)
    fuzzy_fit.add_argument("--crossover", type=float, default=0.8)
    fuzzy_fit.add_argument("--mutation", type=float, default=None)
    fuzzy_fit.add_argument("--tournament", type=int, default=2)
    fuzzy_fit.add_argument("--init-probability", type=float, default=None)
    fuzzy_fit.set_defaults(func=cmd_fit)

    predict = subparsers.add_parser("predict", help="price a project from a saved model")
    predict.add_argument("--model", required=True, help="model JSON path")
    predict.add_argument("--area-ha", type=float, required=True)
    predict.add_argument("--length-m", type=float, required=True)
    predict.add_argument("--valves", type=float, required=True)
    predict.add_argument("--year", type=float, required=True)
    predict.add_argument("--inflation-rate", type=float, default=None)
    predict.add_argument(
        "--toggle", action="append", default=[], metavar="DRIVER",
        help="driver varied in the scenario spread (repeatable)",
    )
    predict.add_argument("--scenarios", type=int, default=None)
    predict.add_argument("--band", type=float, default=0.25)
    predict.add_argument("--seed", type=int, default=0)
    predict.set_defaults(func=cmd_predict)

    serve = subparsers.add_parser("serve", help="serve predictions over HTTP")
    serve.add_argument(
        "--model", action="append", required=True, metavar="PATH",
        help="model JSON to load (repeatable, one per kind)",
    )
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8765)
    serve.set_defaults(func=cmd_serve)

    bench = subparsers.add_parser("bench", help="replay the numeric checks on bundled data")
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--labels", type=int, default=7)
    bench.set_defaults(func=cmd_bench)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit:
        raise
    except KeyboardInterrupt:
        return EXIT_INTERNAL
    except Exception as exc:  # pragma: no cover - defensive catch-all
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
