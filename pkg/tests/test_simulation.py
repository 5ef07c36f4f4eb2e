import math

import numpy as np
import pytest

import centranorm as cn
from centranorm import (
    BOXCOX,
    YEOJOHNSON,
    EstimatorSpec,
    SimulationScenario,
    generate,
    run_bias_mse,
    sensitivity_curve,
    stylized_sample,
    tuning_delta_check,
)

# key derivation used for scenario seeding (documented constant)
_KEY_SALT = 0x9E3779B97F4A7C15


def scenario_rng(seed):
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, _KEY_SALT], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


class TestGenerate:
    def test_clean_lognormal_is_exp_of_the_normal_draws(self):
        scen = SimulationScenario(BOXCOX, 0.0, n=100, seed=123)
        data = generate(scen)
        expected = np.exp(scenario_rng(123).standard_normal(100))
        np.testing.assert_array_equal(data, expected)

    def test_identity_lambda_contamination_lands_at_k(self):
        scen = SimulationScenario(YEOJOHNSON, 1.0, n=100, epsilon=0.10, k=10, seed=5)
        data = generate(scen)
        assert (data == 10.0).sum() == 10

    def test_lambda_above_one_contaminates_at_minus_k(self):
        # y = -10 inverted through the lam=1.5 member: 1 - (1 + 0.5*10)^2 = -35
        scen = SimulationScenario(YEOJOHNSON, 1.5, n=100, epsilon=0.10, k=10, seed=5)
        data = generate(scen)
        near = np.isclose(data, -35.0, rtol=1e-10)
        assert near.sum() == 10

    def test_lambda_half_contaminates_at_plus_side(self):
        # y = +10 inverted through lam=0.5: (1 + 0.5*10)^2 - 1 = 35
        scen = SimulationScenario(YEOJOHNSON, 0.5, n=100, epsilon=0.10, k=10, seed=5)
        data = generate(scen)
        assert np.isclose(data, 35.0, rtol=1e-10).sum() == 10

    def test_bc_truncated_design(self):
        scen = SimulationScenario(BOXCOX, 1.0, n=200, epsilon=0.05, k=10, seed=9)
        data = generate(scen)
        contaminated = data == 11.0
        assert contaminated.sum() == 10
        clean = data[~contaminated]
        assert ((clean >= 0.01) & (clean <= 1.99)).all()
        assert abs(np.mean(clean) - 1.0) < 0.1

    def test_contamination_count_rounds_to_nearest(self):
        scen = SimulationScenario(YEOJOHNSON, 1.0, n=15, epsilon=0.10, k=10, seed=1)
        assert (generate(scen) == 10.0).sum() == 2  # floor(1.5 + 0.5)

    def test_deterministic(self):
        scen = SimulationScenario(YEOJOHNSON, 0.5, n=50, epsilon=0.10, k=3, seed=77)
        np.testing.assert_array_equal(generate(scen), generate(scen))

    def test_scenario_validation(self):
        with pytest.raises(ValueError):
            SimulationScenario(BOXCOX, 0.5)  # range not the whole line
        with pytest.raises(ValueError):
            SimulationScenario(YEOJOHNSON, 2.5)
        with pytest.raises(ValueError):
            SimulationScenario(YEOJOHNSON, 1.0, epsilon=0.2)
        with pytest.raises(ValueError):
            SimulationScenario(YEOJOHNSON, 1.0, k=11)
        with pytest.raises(ValueError):
            SimulationScenario(YEOJOHNSON, 1.0, k=2.5)  # type: ignore[arg-type]
        with pytest.raises(ValueError):
            SimulationScenario(YEOJOHNSON, 1.0, replications=0)


class TestRunBiasMse:
    def test_ml_unbiased_at_true_model(self):
        scen = SimulationScenario(YEOJOHNSON, 1.0, n=100, replications=100, seed=31)
        res = run_bias_mse(scen, {"ml": EstimatorSpec("ml", YEOJOHNSON)})["ml"]
        assert abs(res.bias) < 0.1
        assert res.n_failed == 0

    def test_mse_dominates_squared_bias(self):
        scen = SimulationScenario(YEOJOHNSON, 0.5, n=100, epsilon=0.10, k=5,
                                  replications=40, seed=8)
        results = run_bias_mse(scen, {
            "ml": EstimatorSpec("ml", YEOJOHNSON),
            "rewml": EstimatorSpec("rewml", YEOJOHNSON),
        })
        for res in results.values():
            assert res.mse >= res.bias ** 2 - 1e-12

    def test_deterministic_across_runs(self):
        scen = SimulationScenario(BOXCOX, 0.0, n=60, epsilon=0.05, k=6,
                                  replications=10, seed=4)
        specs = {"rewml": EstimatorSpec("rewml", BOXCOX)}
        a = run_bias_mse(scen, specs)["rewml"]
        b = run_bias_mse(scen, specs)["rewml"]
        assert a.bias == b.bias and a.mse == b.mse
        np.testing.assert_array_equal(a.lambda_hats, b.lambda_hats)

    def test_estimator_failures_counted_and_excluded(self):
        # n=10 with trim 0.52 gives h=5, violating ceil(n/2) < h on every
        # replicate, so the estimator fails everywhere
        scen = SimulationScenario(YEOJOHNSON, 1.0, n=10, replications=5, seed=2)
        res = run_bias_mse(scen, {
            "bad": EstimatorSpec("mtl", YEOJOHNSON, trim_fraction=0.52),
            "ml": EstimatorSpec("ml", YEOJOHNSON),
        })
        assert res["bad"].n_failed == 5
        assert math.isnan(res["bad"].bias) and math.isnan(res["bad"].mse)
        assert res["ml"].n_failed == 0

    def test_family_mismatch_rejected(self):
        scen = SimulationScenario(YEOJOHNSON, 1.0, n=30, replications=2, seed=0)
        with pytest.raises(ValueError):
            run_bias_mse(scen, {"ml": EstimatorSpec("ml", BOXCOX)})


class TestSensitivityCurve:
    def test_central_point_barely_moves_ml(self):
        curve = sensitivity_curve(EstimatorSpec("ml", YEOJOHNSON), 100, [0.0])
        assert abs(curve.sc[0]) < 0.5

    def test_duplicate_central_point_bounded_for_ml(self):
        base = stylized_sample(YEOJOHNSON, 100)
        z = float(np.median(base))
        curve = sensitivity_curve(EstimatorSpec("ml", YEOJOHNSON), 100, [z])
        assert abs(curve.sc[0]) < 1.0

    def test_failures_recorded_as_nan(self):
        # negative z is outside the boxcox domain, so that grid point fails
        curve = sensitivity_curve(EstimatorSpec("ml", BOXCOX), 50, [-1.0, 1.0])
        assert math.isnan(curve.sc[0])
        assert not math.isnan(curve.sc[1])

    def test_lognormal_base_for_bc(self):
        base = stylized_sample(BOXCOX, 100)
        assert (base > 0).all()
        np.testing.assert_allclose(np.log(base), stylized_sample(YEOJOHNSON, 100),
                                   atol=1e-12)

    def test_custom_quantile_fn(self):
        base = stylized_sample(YEOJOHNSON, 50, quantile_fn=lambda p: 2.0 * p - 1.0)
        np.testing.assert_allclose(base, 2.0 * np.arange(1, 50) / 50 - 1.0, atol=1e-15)


class TestTuningDeltaCheck:
    def test_no_contamination_gives_one(self):
        assert tuning_delta_check(100, 0.0, 0.5) == 1.0

    def test_reference_setup(self):
        assert tuning_delta_check(100, 0.15, 0.5) == pytest.approx(0.88, abs=0.02)

    def test_stable_in_n(self):
        v100 = tuning_delta_check(100, 0.15, 0.5)
        v1000 = tuning_delta_check(1000, 0.15, 0.5)
        assert abs(v100 - v1000) < 0.02

    def test_validation(self):
        with pytest.raises(ValueError):
            tuning_delta_check(0, 0.1, 0.5)
        with pytest.raises(ValueError):
            tuning_delta_check(100, 1.0, 0.5)


class TestFalsePositiveCalibration:
    def test_small_sample_sane_and_cutoff_monotone(self):
        loose = cn.false_positive_calibration([1000], 10, seed=3, cutoff_quantile=0.995)
        strict = cn.false_positive_calibration([1000], 10, seed=3, cutoff_quantile=0.975)
        frac_loose = loose[1000]
        frac_strict = strict[1000]
        assert ((frac_loose >= 0.0) & (frac_loose <= 0.2)).all()
        assert np.median(frac_strict) > np.median(frac_loose)
