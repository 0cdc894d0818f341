"""Cost models: transformed regression, neural network, retrieval, scenarios."""

from __future__ import annotations

import math

import numpy as np
import pytest

from fcip.data import Dataset, ProjectCase, driver_bounds
from fcip.models import (
    TRANSFORMATIONS,
    CbrConfig,
    FittedCostModel,
    ScenarioSet,
    adjust_inflation,
    attribute_similarity,
    case_similarity,
    cbr_evaluate_holdout,
    cbr_evaluate_loo,
    cbr_predict,
    diagnostics,
    fit_parametric,
    gradient_check,
    importance_ranking,
    load_model,
    mape,
    mape_conventional,
    mlp_predict,
    mlp_train,
    predict_any,
    predict_cost,
    save_model,
    sensitivity_scenarios,
)


def dummy_regression(transformation: str, coefficients: tuple) -> FittedCostModel:
    return FittedCostModel(
        transformation=transformation,
        names=("area_ha", "length_m", "valves", "year"),
        coefficients=coefficients,
        r=0.0,
        r2=0.0,
        adjusted_r2=0.0,
        f_statistic=0.0,
        mape=1.0,
        mape_conventional=1.0,
        n=10,
    )


class TestMape:
    def test_prediction_denominator(self):
        # |120 - 100| / 100 -> 20% against the prediction of 100
        assert mape([100.0], [120.0]) == pytest.approx(20.0)
        assert mape_conventional([100.0], [120.0]) == pytest.approx(
            100.0 * 20.0 / 120.0
        )

    def test_errors(self):
        with pytest.raises(ValueError):
            mape([], [])
        with pytest.raises(ValueError):
            mape([1.0], [1.0, 2.0])
        with pytest.raises(ValueError):
            mape([0.0], [1.0])
        with pytest.raises(ValueError):
            mape_conventional([1.0], [0.0])


class TestParametricFit:
    def test_sqrt_coefficients(self, train):
        fit = fit_parametric(train, "sqrt")
        assert fit.coefficients == pytest.approx(
            (-37032.81003, 0.92811, 0.16929, 5.26537, 18.5939), abs=1e-4
        )
        assert fit.names == ("area_ha", "length_m", "valves", "year")
        assert fit.n == 111

    def test_sqrt_statistics(self, train):
        fit = fit_parametric(train, "sqrt")
        assert fit.r2 == pytest.approx(0.863169, abs=1e-5)
        assert fit.r == pytest.approx(math.sqrt(fit.r2))
        assert fit.adjusted_r2 == pytest.approx(0.858005, abs=1e-5)
        assert fit.f_statistic == pytest.approx(167.1693, abs=0.001)
        assert fit.mape == pytest.approx(9.0785, abs=0.001)
        assert fit.mape_conventional == pytest.approx(9.1238, abs=0.001)

    @pytest.mark.parametrize(
        "tag, r2, train_mape, conventional",
        [
            ("none", 0.8568, 9.0413, 9.1275),
            ("sqrt", 0.8632, 9.0785, 9.1238),
            ("reciprocal", 0.8032, 11.1096, 11.1935),
            ("semilog", 0.8566, 9.3926, 9.3664),
            ("power", 0.8136, 14.2166, 11.7939),
        ],
    )
    def test_transformation_table(self, train, tag, r2, train_mape, conventional):
        fit = fit_parametric(train, tag)
        assert fit.r2 == pytest.approx(r2, abs=1e-3)
        assert fit.mape == pytest.approx(train_mape, abs=1e-3)
        assert fit.mape_conventional == pytest.approx(conventional, abs=1e-3)

    def test_validation_error(self, train, valid):
        fit = fit_parametric(train, "sqrt")
        predictions = [predict_cost(fit, c.drivers) for c in valid]
        actuals = [c.cost_le for c in valid]
        assert mape(predictions, actuals) == pytest.approx(7.8263, abs=0.001)

    def test_unknown_transformation(self, train):
        with pytest.raises(ValueError):
            fit_parametric(train, "cubic")

    def test_too_few_cases(self, train):
        tiny = Dataset(cases=train.cases[:5], role="training")
        with pytest.raises(ValueError):
            fit_parametric(tiny, "sqrt")


class TestPredictCost:
    def test_positive_prediction(self, train):
        fit = fit_parametric(train, "sqrt")
        value = predict_cost(fit, (30.0, 700.0, 5.0, 2014.0))
        assert value > 0
        assert fit.predict((30.0, 700.0, 5.0, 2014.0)) == value

    def test_driver_validation(self, train):
        fit = fit_parametric(train, "sqrt")
        with pytest.raises(ValueError):
            predict_cost(fit, (30.0, 700.0, 5.0))
        with pytest.raises(ValueError):
            predict_cost(fit, (-1.0, 700.0, 5.0, 2014.0))

    @pytest.mark.parametrize(
        "tag, coefficients",
        [
            ("sqrt", (-10.0, 0.0, 0.0, 0.0, 0.0)),
            ("reciprocal", (-1.0, 0.0, 0.0, 0.0, 0.0)),
            ("power", (-5.0, 0.0, 0.0, 0.0, 0.0)),
        ],
    )
    def test_out_of_range_inversion(self, tag, coefficients):
        model = dummy_regression(tag, coefficients)
        with pytest.raises(ValueError, match="out-of-range prediction"):
            predict_cost(model, (1.0, 1.0, 1.0, 2014.0))

    def test_semilog_roundtrip(self, train):
        fit = fit_parametric(train, "semilog")
        case = train.cases[0]
        z = fit.coefficients[0] + sum(
            b * v for b, v in zip(fit.coefficients[1:], case.drivers)
        )
        assert predict_cost(fit, case.drivers) == pytest.approx(math.exp(z))


class TestDiagnostics:
    def test_training_values(self, train):
        fit = fit_parametric(train, "sqrt")
        diag = diagnostics(fit, train)
        assert diag.durbin_watson == pytest.approx(2.2237, abs=0.001)
        assert diag.max_cooks_distance == pytest.approx(0.2494, abs=0.001)
        assert diag.max_cooks_distance < 1.0
        assert diag.tolerance == pytest.approx(
            (0.5668, 0.5764, 0.6065, 0.9771), abs=0.001
        )

    def test_structural_identities(self, train):
        fit = fit_parametric(train, "sqrt")
        diag = diagnostics(fit, train)
        assert len(diag.cooks_distances) == len(train)
        assert max(diag.cooks_distances) == diag.max_cooks_distance
        for v, t in zip(diag.vif, diag.tolerance):
            assert t == pytest.approx(1.0 / v)
        assert 0.0 <= diag.durbin_watson <= 4.0


class TestMlp:
    def test_seeded_training_run(self, train):
        model = mlp_train(train)
        assert model.hidden == 5
        assert model.epochs_run == 163
        assert model.final_loss == pytest.approx(0.034145, abs=1e-5)
        assert model.training_mape == pytest.approx(9.089, abs=0.001)
        assert model.training_mape <= 12.0

    def test_bit_reproducible(self, train):
        assert mlp_train(train) == mlp_train(train)

    def test_seed_changes_result(self, train):
        assert mlp_train(train, seed=1) != mlp_train(train, seed=0)

    def test_gradient_check_small(self, train):
        model = mlp_train(train)
        assert gradient_check(model, train.cases[:8]) < 1e-6

    def test_validation_accuracy(self, train, valid):
        model = mlp_train(train)
        predictions = [mlp_predict(model, c.drivers) for c in valid]
        actuals = [c.cost_le for c in valid]
        assert mape(predictions, actuals) == pytest.approx(7.413, abs=0.01)

    def test_predict_width_check(self, train):
        model = mlp_train(train)
        with pytest.raises(ValueError):
            mlp_predict(model, (1.0, 2.0))

    def test_hidden_validation(self, train):
        with pytest.raises(ValueError):
            mlp_train(train, hidden=0)

    def test_constant_driver_rejected(self):
        cases = tuple(
            ProjectCase(f"c{i}", 25.0, 100.0 + i, 3 + i, 2010 + i % 5, 1000.0 * (i + 1))
            for i in range(8)
        )
        with pytest.raises(ValueError, match="area_ha"):
            mlp_train(Dataset(cases=cases, role="training"))


class TestCbr:
    def test_attribute_similarity(self):
        assert attribute_similarity(24.0, 30.0) == pytest.approx(0.8)
        assert attribute_similarity(30.0, 24.0) == pytest.approx(0.8)
        assert attribute_similarity(7.0, 7.0) == 1.0
        with pytest.raises(ValueError):
            attribute_similarity(0.0, 1.0)

    def test_case_similarity(self):
        assert case_similarity((1.0, 0.5), (1.0, 1.0)) == pytest.approx(0.75)
        assert case_similarity((1.0, 0.5), (3.0, 1.0)) == pytest.approx(0.875)
        with pytest.raises(ValueError):
            case_similarity((1.0,), (1.0, 1.0))
        with pytest.raises(ValueError):
            case_similarity((1.0, 1.0), (0.0, 0.0))

    def test_config_validation(self, train):
        with pytest.raises(ValueError):
            CbrConfig(train, weights=(-0.1, 0.4, 0.4, 0.3))
        with pytest.raises(ValueError):
            CbrConfig(train, weights=(0.0, 0.0, 0.0, 0.0))

    def test_predict_returns_top_case_cost(self, train):
        config = CbrConfig(train)
        case = train.cases[10]
        prediction = cbr_predict(config, case.drivers)
        assert prediction.cost_le == case.cost_le
        assert prediction.retrieved[0].case_similarity == pytest.approx(1.0)

    def test_ranking_and_k(self, train):
        config = CbrConfig(train)
        prediction = cbr_predict(config, (24.0, 779.0, 4.0, 2014.0), k=5)
        assert len(prediction.retrieved) == 5
        similarities = [r.case_similarity for r in prediction.retrieved]
        assert similarities == sorted(similarities, reverse=True)
        assert prediction.cost_le == prediction.retrieved[0].case.cost_le

    def test_k_clamped_to_base(self, train):
        config = CbrConfig(train)
        prediction = cbr_predict(config, (24.0, 779.0, 4.0, 2014.0), k=1000)
        assert len(prediction.retrieved) == len(train)

    def test_tie_breaks_toward_earlier_case(self):
        twin_a = ProjectCase("first", 20.0, 500.0, 5, 2012, 111111.0)
        twin_b = ProjectCase("second", 20.0, 500.0, 5, 2012, 222222.0)
        base = Dataset(cases=(twin_a, twin_b), role="training")
        prediction = cbr_predict(CbrConfig(base), (20.0, 500.0, 5.0, 2012.0), k=2)
        assert prediction.cost_le == 111111.0
        assert [r.case.id for r in prediction.retrieved] == ["first", "second"]

    def test_query_validation(self, train):
        config = CbrConfig(train)
        with pytest.raises(ValueError):
            cbr_predict(config, (1.0, 2.0, 3.0))
        with pytest.raises(ValueError):
            cbr_predict(config, (1.0, 2.0, 3.0, 4.0), k=0)

    def test_holdout_error(self, train, valid):
        result = cbr_evaluate_holdout(CbrConfig(train), valid)
        assert result.mape == pytest.approx(13.6304, abs=0.01)
        assert len(result.predictions) == len(valid)

    def test_leave_one_out_error(self, train):
        result = cbr_evaluate_loo(train)
        assert result.mape == pytest.approx(17.7465, abs=0.01)
        assert len(result.predictions) == len(train)

    def test_loo_needs_two_cases(self):
        only = Dataset(
            cases=(ProjectCase("solo", 20.0, 500.0, 5, 2012, 1000.0),),
            role="training",
        )
        with pytest.raises(ValueError):
            cbr_evaluate_loo(only)


class TestInflation:
    def test_compounding(self):
        assert adjust_inflation(100000.0, 10.0, 2) == pytest.approx(121000.0)
        assert adjust_inflation(100000.0, 0.0, 5) == 100000.0
        assert adjust_inflation(100000.0, 10.0, 0) == 100000.0

    def test_negative_rate_deflates(self):
        assert adjust_inflation(100.0, -50.0, 1) == pytest.approx(50.0)

    def test_errors(self):
        with pytest.raises(ValueError):
            adjust_inflation(100.0, 10.0, -1)
        with pytest.raises(ValueError):
            adjust_inflation(100.0, -100.0, 1)


class TestPredictAny:
    def test_all_model_kinds_agree_with_direct_calls(self, train):
        case = (30.0, 700.0, 5.0, 2014.0)
        fit = fit_parametric(train, "sqrt")
        assert predict_any(fit, case) == predict_cost(fit, case)
        net = mlp_train(train)
        assert predict_any(net, case) == mlp_predict(net, case)
        cbr = CbrConfig(train)
        assert predict_any(cbr, case) == cbr_predict(cbr, case).cost_le

    def test_callable_and_duck_typing(self):
        assert predict_any(lambda c: 42.0, (1.0, 2.0, 3.0, 4.0)) == 42.0

        class ByMethod:
            def predict_case(self, case):
                return 7.0

        assert predict_any(ByMethod(), (1.0, 2.0, 3.0, 4.0)) == 7.0

        class ByPredict:
            def predict(self, case):
                return 9.0

        assert predict_any(ByPredict(), (1.0, 2.0, 3.0, 4.0)) == 9.0

    def test_unsupported_object(self):
        with pytest.raises(TypeError):
            predict_any(object(), (1.0, 2.0, 3.0, 4.0))


class TestScenarios:
    BASE = (30.0, 700.0, 5.0, 2014.0)

    def test_no_toggles_is_flat(self, train):
        fit = fit_parametric(train, "sqrt")
        result = sensitivity_scenarios(fit, self.BASE, toggled=(), n=30)
        assert result.sd == 0.0
        assert result.mean == result.base_prediction
        assert set(result.scenarios) == {result.base_prediction}
        assert len(result.scenarios) == 30

    def test_toggled_draws_stay_inside_band(self, train):
        fit = fit_parametric(train, "sqrt")
        result = sensitivity_scenarios(fit, self.BASE, toggled=("area_ha",), n=100)
        areas = [case[0] for case in result.cases]
        assert all(30.0 * 0.75 <= a <= 30.0 * 1.25 for a in areas)
        assert len(set(areas)) > 1
        for case in result.cases:
            assert case[1:] == self.BASE[1:]

    def test_bounds_clamp(self, train):
        fit = fit_parametric(train, "sqrt")
        result = sensitivity_scenarios(
            fit,
            self.BASE,
            toggled=("area_ha",),
            n=100,
            bounds={"area_ha": (29.0, 31.0)},
        )
        assert all(29.0 <= case[0] <= 31.0 for case in result.cases)

    def test_year_rounds_to_whole_years(self, train):
        fit = fit_parametric(train, "sqrt")
        result = sensitivity_scenarios(
            fit,
            self.BASE,
            toggled=("year",),
            n=50,
            bounds=driver_bounds(train),
        )
        assert all(case[3] == round(case[3]) for case in result.cases)
        lo, hi = driver_bounds(train)["year"]
        assert all(lo <= case[3] <= hi for case in result.cases)

    def test_seed_determinism(self, train):
        fit = fit_parametric(train, "sqrt")
        a = sensitivity_scenarios(fit, self.BASE, toggled=("length_m",), seed=3)
        b = sensitivity_scenarios(fit, self.BASE, toggled=("length_m",), seed=3)
        c = sensitivity_scenarios(fit, self.BASE, toggled=("length_m",), seed=4)
        assert a.scenarios == b.scenarios
        assert a.scenarios != c.scenarios

    def test_statistics_match_numpy(self, train):
        fit = fit_parametric(train, "sqrt")
        result = sensitivity_scenarios(fit, self.BASE, toggled=("length_m",), n=30)
        arr = np.asarray(result.scenarios)
        assert result.mean == pytest.approx(arr.mean())
        assert result.sd == pytest.approx(arr.std(ddof=1))

    def test_validation(self, train):
        fit = fit_parametric(train, "sqrt")
        with pytest.raises(ValueError):
            sensitivity_scenarios(fit, self.BASE, n=0)
        with pytest.raises(ValueError):
            sensitivity_scenarios(fit, self.BASE, band=0.0)
        with pytest.raises(ValueError):
            sensitivity_scenarios(fit, self.BASE, toggled=("diameter",))
        with pytest.raises(ValueError):
            sensitivity_scenarios(fit, (1.0, 2.0))
        with pytest.raises(ValueError):
            ScenarioSet(1.0, (1.0,), (), 1.0, 0.0, 0, (), 0.25)


class TestImportance:
    def test_ranking_on_regression(self, train):
        fit = fit_parametric(train, "sqrt")
        ranking = importance_ranking(fit, train)
        assert [name for name, _ in ranking] == [
            "length_m",
            "valves",
            "year",
            "area_ha",
        ]
        scores = dict(ranking)
        assert scores["length_m"] == pytest.approx(0.5144, abs=0.001)
        assert scores["valves"] == pytest.approx(0.2062, abs=0.001)
        assert scores["year"] == pytest.approx(0.1502, abs=0.001)
        assert scores["area_ha"] == pytest.approx(0.1292, abs=0.001)
        assert sum(scores.values()) == pytest.approx(1.0)

    def test_fraction_validation(self, train):
        fit = fit_parametric(train, "sqrt")
        with pytest.raises(ValueError):
            importance_ranking(fit, train, fraction=0.0)


class TestPersistence:
    def test_regression_roundtrip(self, train, tmp_path):
        fit = fit_parametric(train, "sqrt")
        path = str(tmp_path / "regression.json")
        save_model(fit, path)
        assert load_model(path) == fit

    def test_mlp_roundtrip(self, train, tmp_path):
        model = mlp_train(train)
        path = str(tmp_path / "mlp.json")
        save_model(model, path)
        assert load_model(path) == model

    def test_cbr_roundtrip(self, train, tmp_path):
        config = CbrConfig(train, weights=(0.25, 0.25, 0.25, 0.25))
        path = str(tmp_path / "cbr.json")
        save_model(config, path)
        loaded = load_model(path)
        assert loaded.weights == config.weights
        assert loaded.case_base.cases == config.case_base.cases

    def test_unknown_kind_rejected(self, tmp_path):
        path = tmp_path / "mystery.json"
        path.write_text('{"kind": "mystery"}\n', encoding="utf-8")
        with pytest.raises(ValueError, match="mystery"):
            load_model(str(path))

    def test_unsupported_object_rejected(self, tmp_path):
        with pytest.raises(TypeError):
            save_model(object(), str(tmp_path / "nope.json"))
