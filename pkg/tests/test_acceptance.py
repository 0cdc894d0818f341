"""Headline reproduction gates: one pass/fail line per target.

Each test pins an externally stated benchmark for the toolkit — model
accuracy windows, screening outcomes, similarity tables, and invariants —
at its stated tolerance.  Everything here is deterministic.
"""

from __future__ import annotations

import itertools
import time
from pathlib import Path

import numpy as np
import pytest

from fcip.data import Dataset, ProjectCase
from fcip.fuzzy import (
    FuzzyRule,
    FuzzySet,
    GaConfig,
    MembershipFunction,
    RuleBase,
    alpha_cut,
    complement,
    default_partitions,
    fitness,
    ga_select_rules,
    generate_rules_wm,
    penalized_mape,
    uniform_partition,
)
from fcip.mcdm import (
    TriangularFuzzyNumber,
    consistency_ratio,
    defuzzify_centroid,
    fahp_aggregate,
    fahp_weights,
    fdm_screen,
    load_surveys,
    synthetic_extents,
)
from fcip.models import (
    CbrConfig,
    attribute_similarity,
    case_similarity,
    cbr_evaluate_loo,
    cbr_predict,
    diagnostics,
    fit_parametric,
    gradient_check,
    mape,
    mlp_train,
    sensitivity_scenarios,
)
from fcip.screening import (
    adequacy,
    correlate,
    correlation_matrix,
    pca,
    select_variables,
    varimax,
)

SURVEYS_DIR = Path(__file__).resolve().parent.parent / "data" / "surveys"

# Expert-panel consensus table: parameter id, aggregated (low, middle,
# upper), the crisp score both sides agree on, and the final decision.
CONSENSUS_ROWS = [
    ("P1", 0.75, 1.00, 1.00, 0.92, "select"),
    ("P2", 0.50, 0.94, 1.00, 0.81, "select"),
    ("P3", 0.50, 0.84, 1.00, 0.78, "select"),
    ("P4", 0.50, 0.84, 1.00, 0.78, "select"),
    ("P5", 0.25, 0.59, 1.00, 0.61, "select"),
    ("P6", 0.00, 0.54, 1.00, 0.51, "delete"),
    ("P7", 0.25, 0.68, 1.00, 0.64, "select"),
    ("P8", 0.00, 0.33, 0.75, 0.36, "delete"),
    ("P9", 0.00, 0.00, 0.75, 0.25, "delete"),
    ("P10", 0.00, 0.41, 1.00, 0.47, "delete"),
    ("P11", 0.00, 0.00, 0.50, 0.17, "delete"),
    ("P12", 0.00, 0.00, 0.75, 0.25, "delete"),
    ("P13", 0.00, 0.00, 1.00, 0.33, "delete"),
    ("P14", 0.00, 0.00, 0.50, 0.17, "delete"),
    ("P15", 0.00, 0.33, 0.75, 0.36, "delete"),
    ("P16", 0.00, 0.00, 0.50, 0.17, "delete"),
    ("P17", 0.00, 0.00, 0.50, 0.17, "delete"),
    ("P18", 0.00, 0.00, 0.50, 0.17, "delete"),
    ("P19", 0.00, 0.00, 0.50, 0.17, "delete"),
    ("P20", 0.00, 0.00, 0.75, 0.25, "delete"),
    ("P21", 0.00, 0.00, 0.25, 0.08, "delete"),
    ("P22", 0.25, 0.62, 1.00, 0.62, "delete"),  # scores well, struck by panel
    ("P23", 0.00, 0.00, 0.75, 0.25, "delete"),
    *[
        (f"P{i}", 0.00, 0.00, 0.50, 0.17, "delete")
        for i in range(24, 35)
    ],
    ("P35", 0.00, 0.00, 0.50, 0.17, "delete"),
]

# Reference retrieval table: stored case drivers and cost, the expected
# per-attribute similarities to the probe case (24 ha, 779 m, 4 valves,
# year 2014), and the expected weighted case similarity.
RETRIEVAL_ROWS = [
    (25.00, 530.00, 4, 2014, 303024.42, (0.96, 0.68, 1.00, 1.00), 0.93),
    (30.00, 779.00, 3, 2014, 321716.52, (0.80, 1.00, 0.75, 1.00), 0.91),
    (30.00, 655.00, 5, 2013, 324865.50, (0.80, 0.84, 0.80, 1.00), 0.89),
    (26.20, 588.00, 3, 2014, 352094.48, (0.92, 0.75, 0.75, 1.00), 0.88),
    (24.00, 482.00, 5, 2014, 343826.61, (1.00, 0.62, 0.80, 1.00), 0.88),
    (27.00, 477.00, 5, 2010, 225198.20, (0.89, 0.61, 0.80, 1.00), 0.86),
    (27.00, 470.00, 5, 2014, 282934.27, (0.89, 0.60, 0.80, 1.00), 0.86),
    (25.00, 644.00, 8, 2014, 331075.61, (0.96, 0.83, 0.50, 1.00), 0.86),
    (37.00, 750.00, 6, 2011, 269103.14, (0.65, 0.96, 0.67, 1.00), 0.86),
    (32.00, 765.00, 8, 2011, 276584.04, (0.75, 0.98, 0.50, 1.00), 0.85),
    (32.00, 630.00, 6, 2014, 353089.18, (0.75, 0.81, 0.67, 1.00), 0.85),
    (34.00, 400.00, 4, 2014, 365774.75, (0.71, 0.51, 1.00, 1.00), 0.84),
    (32.00, 600.00, 6, 2010, 288882.06, (0.75, 0.77, 0.67, 1.00), 0.84),
    (20.00, 390.00, 5, 2014, 226870.10, (0.83, 0.50, 0.80, 1.00), 0.83),
    (40.00, 1000.00, 3, 2014, 427421.32, (0.60, 0.78, 0.75, 1.00), 0.83),
    (31.00, 774.00, 11, 2011, 382644.52, (0.77, 0.99, 0.36, 1.00), 0.83),
    (30.00, 400.00, 5, 2014, 317470.28, (0.80, 0.51, 0.80, 1.00), 0.82),
    (34.00, 468.00, 5, 2014, 39058.72, (0.71, 0.60, 0.80, 1.00), 0.82),
]
RETRIEVAL_QUERY = (24.0, 779.0, 4.0, 2014.0)
RETRIEVAL_WEIGHTS = (0.2, 0.2, 0.2, 0.4)


def test_01_sqrt_regression_accuracy(train, valid):
    started = time.perf_counter()
    model = fit_parametric(train, "sqrt")
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0
    assert len(train) == 111
    assert len(valid) == 33
    assert model.r2 == pytest.approx(0.863, abs=0.02)
    assert model.mape == pytest.approx(9.13, abs=1.0)
    valid_mape = mape([model.predict(c.drivers) for c in valid.cases], valid.costs())
    assert valid_mape == pytest.approx(7.82, abs=1.5)


def test_02_transformation_accuracy_table(train):
    # The power fit's error is scored against actual costs, whereas the
    # other rows use the prediction-denominator convention.
    targets = {
        "none": (0.857, 9.13, "mape"),
        "sqrt": (0.863, 9.13, "mape"),
        "reciprocal": (0.803, 11.20, "mape"),
        "semilog": (0.857, 9.30, "mape"),
        "power": (0.814, 11.79, "mape_conventional"),
    }
    for name, (r2, error, attribute) in targets.items():
        model = fit_parametric(train, name)
        assert model.r2 == pytest.approx(r2, abs=0.03), name
        assert getattr(model, attribute) == pytest.approx(error, abs=1.5), name


def test_03_sqrt_model_diagnostics(train):
    diag = diagnostics(fit_parametric(train, "sqrt"), train)
    assert diag.durbin_watson == pytest.approx(2.224, abs=0.15)
    assert diag.max_cooks_distance < 1.0
    assert diag.max_cooks_distance == pytest.approx(0.249, abs=0.08)
    targets = {"area_ha": 0.567, "length_m": 0.576, "valves": 0.607, "year": 0.977}
    for name, value in zip(("area_ha", "length_m", "valves", "year"), diag.tolerance):
        assert value == pytest.approx(targets[name], abs=0.05), name


def test_04_stepwise_driver_entry_order(train_table):
    trace = select_variables(train_table, method="stepwise")
    entered = [s.variable for s in trace.steps if s.action == "enter"]
    assert entered == ["length_m", "year", "valves", "area_ha"]
    cumulative_r = [s.r for s in trace.steps if s.action == "enter"]
    assert cumulative_r == pytest.approx((0.85, 0.89, 0.92, 0.93), abs=0.02)
    X = np.asarray(train_table.X)
    length = X[:, train_table.names.index("length_m")]
    assert correlate(length, train_table.y) == pytest.approx(0.85, abs=0.02)


def test_05_consensus_screen_reproduced():
    crisp_pairs = []
    for pid, low, mid, up, crisp_expected, _ in CONSENSUS_ROWS:
        crisp = defuzzify_centroid(TriangularFuzzyNumber(low, mid, up))
        assert crisp == pytest.approx(crisp_expected, abs=0.01), pid
        crisp_pairs.append((pid, crisp))
    retained, deleted = fdm_screen(crisp_pairs, alpha=0.6, exclude=("P22",))
    expected_select = [r[0] for r in CONSENSUS_ROWS if r[5] == "select"]
    expected_delete = [r[0] for r in CONSENSUS_ROWS if r[5] == "delete"]
    assert retained == expected_select
    assert sorted(deleted) == sorted(expected_delete)


def test_06_pairwise_weighting_reproduced():
    surveys = load_surveys(str(SURVEYS_DIR))
    matrix = fahp_aggregate([s.pairwise for s in surveys if s.pairwise is not None])
    extents = {e.criterion: e.value for e in synthetic_extents(matrix)}
    targets = {
        "civil": (0.292, 0.695, 1.458),
        "mechanical": (0.097, 0.193, 0.535),
        "electrical": (0.062, 0.113, 0.222),
    }
    for criterion, expected in targets.items():
        assert tuple(extents[criterion]) == pytest.approx(expected, abs=0.02), criterion
    weights = fahp_weights(synthetic_extents(matrix))
    assert dict(zip(weights.criteria, weights.raw)) == pytest.approx(
        {"civil": 1.00, "mechanical": 0.33, "electrical": 0.00}, abs=0.01
    )
    assert dict(zip(weights.criteria, weights.normalized)) == pytest.approx(
        {"civil": 0.75, "mechanical": 0.25, "electrical": 0.00}, abs=0.01
    )
    assert consistency_ratio(matrix) <= 0.1


def test_07_case_retrieval_reproduced(train):
    for index, row in enumerate(RETRIEVAL_ROWS):
        drivers = row[:4]
        expected_similarities, expected_cs = row[5], row[6]
        similarities = [
            attribute_similarity(q, float(v))
            for q, v in zip(RETRIEVAL_QUERY, drivers)
        ]
        for got, want in zip(similarities, expected_similarities):
            assert got == pytest.approx(want, abs=0.005), f"row {index + 1}"
        cs = case_similarity(similarities, RETRIEVAL_WEIGHTS)
        assert cs == pytest.approx(expected_cs, abs=0.005), f"row {index + 1}"

    base = Dataset(
        tuple(
            ProjectCase(
                id=f"case{i + 1:02d}",
                area_ha=row[0],
                length_m=row[1],
                valves=int(row[2]),
                year=int(row[3]),
                cost_le=row[4],
            )
            for i, row in enumerate(RETRIEVAL_ROWS)
        )
    )
    config = CbrConfig(base, RETRIEVAL_WEIGHTS)
    top = cbr_predict(config, RETRIEVAL_QUERY, k=1)
    assert top.cost_le == 303024.42
    assert top.retrieved[0].case_similarity == pytest.approx(0.93, abs=0.005)

    first = cbr_evaluate_loo(train)
    again = cbr_evaluate_loo(train)
    assert first == again
    assert first.mape == pytest.approx(17.3, abs=3.0)


def test_08_neural_fit_accuracy_and_reproducibility(train):
    model = mlp_train(train)
    assert model.hidden == 5
    assert model.training_mape <= 12.0
    assert gradient_check(model, train.cases[:8]) < 1e-4
    assert mlp_train(train) == model
    assert mlp_train(train, seed=1) != model


def test_09_genetic_rule_selection(train, valid):
    inputs, output = default_partitions(train, labels=7)
    pool = generate_rules_wm(train, inputs, output)
    selected = ga_select_rules(pool, train)
    assert len(selected.rules) <= 100
    valid_mape, uncovered = penalized_mape(selected, valid)
    assert uncovered == 0
    assert valid_mape <= 20.0

    small = RuleBase(pool.inputs, pool.output, pool.rules[:10])
    config = GaConfig(population=30, generations=60, seed=0, init_probability=0.5)
    ga = ga_select_rules(small, train, config)
    best_fitness, best_subset = None, None
    for mask in range(1, 2**10):
        subset = tuple(r for i, r in enumerate(small.rules) if mask >> i & 1)
        value = fitness(RuleBase(small.inputs, small.output, subset), train)
        if best_fitness is None or value > best_fitness:
            best_fitness, best_subset = value, subset
    assert fitness(ga, train) == pytest.approx(best_fitness, rel=1e-12)
    assert set(ga.rules) == set(best_subset)

    first80 = Dataset(train.cases[:80])
    inputs6, output6 = default_partitions(first80, labels=6)
    compact = generate_rules_wm(first80, inputs6, output6)
    assert len(compact.rules) == pytest.approx(63, abs=10)


def test_10_structural_invariants(train, train_table):
    # factor analysis
    X = np.asarray(train_table.X)
    matrix = correlation_matrix(
        train_table.names, [X[:, i] for i in range(X.shape[1])]
    )
    solution = pca(matrix)
    assert sum(solution.eigenvalues) == pytest.approx(4.0, abs=1e-9)
    loadings = np.asarray(solution.loadings)[:, :2]
    rotated = np.asarray(varimax(loadings))
    assert (rotated**2).sum(axis=1) == pytest.approx(
        (loadings**2).sum(axis=1), abs=1e-9
    )
    two_var = adequacy([[c.area_ha, c.length_m] for c in train.cases])
    assert two_var.kmo == 0.5
    orthogonal = [list(r) for r in itertools.product((-1.0, 1.0), repeat=3)]
    assert adequacy(orthogonal).bartlett_statistic == 0.0

    # fuzzy algebra
    partition = uniform_partition((0.0, 100.0), 7)
    for x in np.linspace(0.0, 100.0, 257):
        total = sum(fs.evaluate(float(x)) for fs in partition.sets)
        assert total == pytest.approx(1.0, abs=1e-9)
    bump = FuzzySet(bounds=(0.0, 100.0), mf=MembershipFunction("triangular", (10.0, 30.0, 60.0)))
    for x in np.linspace(0.0, 100.0, 101):
        assert complement(complement(bump)).evaluate(float(x)) == pytest.approx(
            bump.evaluate(float(x)), abs=1e-12
        )
    unit = FuzzySet(bounds=(0.0, 2.0), mf=MembershipFunction("triangular", (0.0, 1.0, 2.0)))
    assert alpha_cut(unit, 1.0) == (pytest.approx((1.0, 1.0), abs=1e-9),)
    assert alpha_cut(unit, 0.5) == (pytest.approx((0.5, 1.5), abs=1e-9),)
    assert alpha_cut(unit, 0.0) == ((0.0, 2.0),)

    # sensitivity scenarios
    base = (30.0, 700.0, 5.0, 2014.0)
    predictor = lambda case: 10.0 * case[0] + case[1]  # noqa: E731
    flat = sensitivity_scenarios(predictor, base, toggled=(), n=10, seed=0)
    assert flat.sd == 0.0
    assert set(flat.scenarios) == {flat.base_prediction}
    bounded = sensitivity_scenarios(
        predictor,
        base,
        toggled=("area_ha",),
        n=64,
        band=0.25,
        bounds={"area_ha": (29.0, 31.0)},
        seed=0,
    )
    for value in bounded.scenarios:
        assert 10.0 * 29.0 + 700.0 <= value <= 10.0 * 31.0 + 700.0
    repeat = sensitivity_scenarios(
        predictor,
        base,
        toggled=("area_ha",),
        n=64,
        band=0.25,
        bounds={"area_ha": (29.0, 31.0)},
        seed=0,
    )
    assert repeat.scenarios == bounded.scenarios
    other_seed = sensitivity_scenarios(
        predictor, base, toggled=("area_ha",), n=64, band=0.25, seed=1
    )
    assert other_seed.scenarios != bounded.scenarios
