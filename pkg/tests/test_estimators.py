import math

import numpy as np
import pytest

import centranorm as cn
from centranorm import (
    BOXCOX,
    YEOJOHNSON,
    EstimatorSpec,
    TransformFamily,
    apply,
    apply_inverse,
    fit,
    fit_carroll,
    fit_ml,
    fit_mtl,
    fit_rawml,
    fit_rewml,
    fit_wml,
    hard_rejection_weights,
    prestandardize,
    robust_criterion,
)
from centranorm.errors import DegenerateDataError, DomainError
from centranorm.estimators import PrestandardizationRecord
from centranorm.robust import normal_quantile, plotting_positions

CUTOFF995 = 2.5758293035489004


def stylized_normal(n):
    return normal_quantile(plotting_positions(n))


class TestRobustCriterion:
    def test_self_match_is_tiny(self):
        # data equal to the matched quantiles: every gap reflects only the
        # finite-sample error of the location/scale estimates
        data = stylized_normal(99)
        value = robust_criterion(data, TransformFamily(YEOJOHNSON, 1.0))
        assert 0.0 <= value < 0.05

    def test_single_point_moves_criterion_by_at_most_one(self):
        data = stylized_normal(99)
        base = robust_criterion(data, TransformFamily(YEOJOHNSON, 1.0))
        bumped = data.copy()
        bumped[-1] = 10.0
        moved = robust_criterion(bumped, TransformFamily(YEOJOHNSON, 1.0))
        assert abs(moved - base) <= 1.0 + 0.1

    def test_bounded_under_gross_replacement(self):
        # a 10-sigma replacement that keeps its sort slot changes the
        # criterion by at most its own saturated loss term (plus the small
        # drift of the bounded-influence location/scale); replacements that
        # change slots additionally shuffle the quantile pairing of the
        # points in between, which this bound does not cover
        rng = np.random.default_rng(31)
        data = np.sort(rng.standard_normal(100))
        fam = TransformFamily(YEOJOHNSON, 1.0)
        base = robust_criterion(data, fam)
        bumped = data.copy()
        bumped[-1] = 10.0 * np.std(data)
        assert abs(robust_criterion(bumped, fam) - base) <= 1.0 + 0.1

    def test_continuous_in_lambda(self):
        # locate the steepest move on a coarse grid, then rescan it finely:
        # for a continuous function the per-step change shrinks with the
        # step, while a genuine jump would persist
        rng = np.random.default_rng(8)
        data = np.exp(rng.standard_normal(100))

        def values(lams):
            return np.array([
                robust_criterion(data, TransformFamily(BOXCOX, lam)) for lam in lams
            ])

        coarse = np.arange(-1.0, 1.0 + 1e-9, 1e-3)
        worst = coarse[np.argmax(np.abs(np.diff(values(coarse))))]
        fine = np.arange(worst - 1e-3, worst + 2e-3, 1e-5)
        assert np.max(np.abs(np.diff(values(fine)))) < 1e-2

    def test_needs_ten_points(self):
        with pytest.raises(DegenerateDataError):
            robust_criterion(np.arange(9.0), TransformFamily(YEOJOHNSON, 1.0))

    def test_degenerate_data_raises(self):
        with pytest.raises(DegenerateDataError):
            robust_criterion(np.ones(20), TransformFamily(YEOJOHNSON, 1.0))


class TestFitMl:
    def test_recovers_identity_on_normal_data(self):
        rng = np.random.default_rng(1234)
        fitted = fit_ml(rng.standard_normal(10_000), YEOJOHNSON)
        assert 0.95 <= fitted.family.lam <= 1.05
        assert abs(fitted.location) < 0.05
        assert abs(fitted.scale - 1.0) < 0.05
        assert (fitted.weights == 1.0).all()

    def test_recovers_log_on_lognormal_data(self):
        rng = np.random.default_rng(77)
        fitted = fit_ml(np.exp(rng.standard_normal(10_000)), BOXCOX)
        assert abs(fitted.family.lam) < 0.05

    def test_bc_needs_positive(self):
        with pytest.raises(DomainError):
            fit_ml([1.0, -1.0, 2.0, 3.0], BOXCOX)

    def test_needs_three_points(self):
        with pytest.raises(DegenerateDataError):
            fit_ml([1.0, 2.0], YEOJOHNSON)


class TestFitWml:
    def test_unit_weights_reduce_to_ml(self):
        rng = np.random.default_rng(5)
        data = np.exp(rng.standard_normal(200))
        a = fit_ml(data, BOXCOX)
        b = fit_wml(data, BOXCOX, np.ones(200))
        assert abs(a.family.lam - b.family.lam) <= 2e-4  # 2x optimizer tolerance
        assert a.location == b.location
        assert a.scale == b.scale

    def test_zero_weights_equal_refit_on_subset(self):
        rng = np.random.default_rng(6)
        data = np.exp(rng.standard_normal(100))
        w = np.ones(100)
        w[np.argsort(data)[-10:]] = 0.0
        weighted = fit_wml(data, BOXCOX, w)
        retained = np.sort(data)[:90]
        refit = fit_ml(retained, BOXCOX)
        assert weighted.family.lam == refit.family.lam
        assert weighted.location == refit.location
        assert weighted.scale == refit.scale

    def test_total_weight_below_three_rejected(self):
        data = np.exp(np.random.default_rng(0).standard_normal(20))
        w = np.zeros(20)
        w[:2] = 1.0
        with pytest.raises(DegenerateDataError):
            fit_wml(data, BOXCOX, w)

    def test_weights_validation(self):
        data = np.ones(5) + np.arange(5)
        with pytest.raises(ValueError):
            fit_wml(data, YEOJOHNSON, [1, 1, 1, 0.5, 1])
        with pytest.raises(ValueError):
            fit_wml(data, YEOJOHNSON, [1, 1, 1])


class TestFitCarroll:
    def test_recovers_identity_on_normal_data(self):
        rng = np.random.default_rng(21)
        fitted = fit_carroll(rng.standard_normal(10_000), YEOJOHNSON)
        assert 0.93 <= fitted.family.lam <= 1.07

    def test_symmetric_equispaced_gives_identity(self):
        data = np.linspace(-3.0, 3.0, 41)
        fitted = fit_carroll(data, YEOJOHNSON)
        assert fitted.family.lam == pytest.approx(1.0, abs=2e-4)

    def test_less_sensitive_than_ml_to_one_outlier(self):
        base = stylized_normal(99)
        z = 5.0
        ml0 = fit_ml(base, YEOJOHNSON).family.lam
        ml1 = fit_ml(np.append(base, z), YEOJOHNSON).family.lam
        ca0 = fit_carroll(base, YEOJOHNSON).family.lam
        ca1 = fit_carroll(np.append(base, z), YEOJOHNSON).family.lam
        assert abs(ca1 - ca0) < abs(ml1 - ml0)


class TestFitMtl:
    def test_near_full_window_close_to_ml(self):
        rng = np.random.default_rng(17)
        data = rng.standard_normal(200)
        full = fit_ml(data, YEOJOHNSON)
        trimmed = fit_mtl(data, YEOJOHNSON, 199)
        assert abs(trimmed.family.lam - full.family.lam) < 0.1

    def test_window_excludes_far_right_outliers(self):
        rng = np.random.default_rng(18)
        data = rng.standard_normal(100)
        data[:5] = [40.0, 45.0, 50.0, 55.0, 60.0]
        fitted = fit_mtl(data, YEOJOHNSON, 95)
        # sorted positions 95..99 hold the outliers; the winning window must
        # stop before them
        assert fitted.extras["window_start"] == 0
        assert fitted.extras["window_size"] == 95

    @pytest.mark.parametrize("h", [50, 100, 101])
    def test_h_bounds(self, h):
        data = np.random.default_rng(0).standard_normal(100)
        with pytest.raises(ValueError):
            fit_mtl(data, YEOJOHNSON, h)

    def test_trim_fraction_recorded(self):
        data = np.random.default_rng(3).standard_normal(60)
        fitted = fit_mtl(data, YEOJOHNSON, 54)
        assert fitted.spec.trim_fraction == pytest.approx(0.9)
        assert (fitted.weights == 1.0).all()


class TestHardRejectionWeights:
    def test_clean_quantile_data_keeps_everything(self):
        w = hard_rejection_weights(stylized_normal(100))
        assert (w == 1.0).all()

    def test_single_far_point_zeroed(self):
        data = np.append(stylized_normal(100), 10.0)
        w = hard_rejection_weights(data)
        assert w[-1] == 0.0
        assert (w[:-1] == 1.0).all()

    def test_cutoff_monotone(self):
        rng = np.random.default_rng(10)
        data = rng.standard_normal(500)
        flagged_strict = (hard_rejection_weights(data, 0.975) == 0).sum()
        flagged_loose = (hard_rejection_weights(data, 0.995) == 0).sum()
        assert flagged_strict >= flagged_loose


class TestFitRawml:
    def test_plain_family_reported_with_criterion_extras(self):
        rng = np.random.default_rng(40)
        data = np.exp(rng.standard_normal(200))
        fitted = fit_rawml(data, BOXCOX)
        assert not fitted.family.rectified
        assert fitted.spec.method == "rawml"
        assert "criterion_value" in fitted.extras
        assert fitted.extras["upper_knot"] is not None
        assert (fitted.weights == 1.0).all()

    def test_resists_outliers_better_than_ml(self):
        scen = cn.SimulationScenario(YEOJOHNSON, 1.0, n=100, epsilon=0.10, k=10, seed=3)
        data = cn.generate(scen)
        raw = fit_rawml(data, YEOJOHNSON).family.lam
        ml = fit_ml(data, YEOJOHNSON).family.lam
        assert abs(raw - 1.0) < abs(ml - 1.0)


class TestFitRewml:
    def test_recovers_identity_on_normal_data(self):
        rng = np.random.default_rng(22)
        fitted = fit_rewml(rng.standard_normal(10_000), EstimatorSpec("rewml", YEOJOHNSON))
        assert 0.93 <= fitted.family.lam <= 1.07

    def test_flags_match_standardized_rule_exactly(self):
        scen = cn.SimulationScenario(BOXCOX, 0.0, n=200, epsilon=0.10, k=8, seed=11)
        data = cn.generate(scen)
        fitted = fit_rewml(data, EstimatorSpec("rewml", BOXCOX))
        flagged = np.abs(apply(fitted, data)) > CUTOFF995
        np.testing.assert_array_equal(flagged, fitted.weights == 0.0)

    def test_outliers_get_zero_weight(self):
        scen = cn.SimulationScenario(YEOJOHNSON, 1.0, n=100, epsilon=0.10, k=10, seed=2)
        data = cn.generate(scen)
        fitted = fit_rewml(data, EstimatorSpec("rewml", YEOJOHNSON))
        assert (fitted.weights[data == 10.0] == 0.0).all()
        assert abs(fitted.family.lam - 1.0) < 0.25

    def test_sensitivity_is_exactly_zero_at_far_outlier(self):
        base = np.asarray(cn.stylized_sample(YEOJOHNSON, 100))
        spec = EstimatorSpec("rewml", YEOJOHNSON)
        lam0 = fit_rewml(base, spec).family.lam
        for z in (-10.0, 10.0):
            lam_z = fit_rewml(np.append(base, z), spec).family.lam
            assert lam_z == lam0  # bit-identical: the point is fully rejected

    def test_rewmlnr_variant_runs_without_rectified_step(self):
        rng = np.random.default_rng(13)
        data = rng.standard_normal(300)
        fitted = fit_rewml(data, EstimatorSpec("rewmlnr", YEOJOHNSON))
        assert fitted.spec.method == "rewmlnr"
        assert 0.8 <= fitted.family.lam <= 1.2

    def test_method_validation(self):
        with pytest.raises(ValueError):
            fit_rewml(np.arange(20.0), EstimatorSpec("ml", YEOJOHNSON))

    def test_invalid_knot_falls_back_to_plain_with_warning(self):
        # all-positive data has no valid lower knot for yeojohnson; the
        # rectified criterion then uses the plain transform on that side
        rng = np.random.default_rng(61)
        data = np.exp(rng.standard_normal(100))
        with pytest.warns(cn.CentranormWarning):
            fitted = fit_rewml(data, EstimatorSpec("rewml", YEOJOHNSON))
        assert fitted.extras["lower_knot"] is None
        assert fitted.extras["upper_knot"] is not None

    def test_lambda0_and_rounds_recorded(self):
        rng = np.random.default_rng(57)
        data = rng.standard_normal(100)
        fitted = fit_rewml(data, EstimatorSpec("rewml", YEOJOHNSON))
        assert len(fitted.extras["round_lambdas"]) == 2
        assert fitted.extras["round_lambdas"][-1] == fitted.family.lam


class TestEstimatorSpec:
    def test_defaults(self):
        spec = EstimatorSpec("rewml")
        assert spec.c == 0.5
        assert spec.cutoff_quantile == 0.995
        assert spec.reweight_steps == 2
        assert spec.huber_b == 1.5

    def test_validation(self):
        with pytest.raises(ValueError):
            EstimatorSpec("nope")
        with pytest.raises(ValueError):
            EstimatorSpec("ml", c=0.0)
        with pytest.raises(ValueError):
            EstimatorSpec("ml", cutoff_quantile=0.4)
        with pytest.raises(ValueError):
            EstimatorSpec("mtl")  # needs trim_fraction
        with pytest.raises(ValueError):
            EstimatorSpec("mtl", trim_fraction=0.5)
        with pytest.raises(ValueError):
            EstimatorSpec("rewml", reweight_steps=0)


class TestPrestandardize:
    def test_yj_mad_centers_and_scales(self):
        rng = np.random.default_rng(14)
        data = rng.standard_normal(501) * 7.0 + 3.0
        scaled, rec = prestandardize(data, YEOJOHNSON)
        assert rec.mode == "mad"
        assert np.median(scaled) == pytest.approx(0.0, abs=1e-12)
        assert cn.mad(scaled) == pytest.approx(1.0, rel=1e-12)

    def test_bc_logmad_gives_unit_median(self):
        rng = np.random.default_rng(15)
        data = np.exp(rng.standard_normal(501) + 2.0)
        scaled, rec = prestandardize(data, BOXCOX)
        assert rec.mode == "logmad"
        assert np.median(scaled) == pytest.approx(1.0, rel=1e-12)

    def test_bc_median_mode(self):
        data = np.array([1.0, 2.0, 3.0, 4.0, 100.0])
        scaled, rec = prestandardize(data, BOXCOX, "median")
        assert np.median(scaled) == 1.0
        np.testing.assert_allclose(rec.inverse(scaled), data, rtol=1e-14)

    def test_roundtrip_forward_inverse(self):
        rng = np.random.default_rng(16)
        data = np.exp(rng.standard_normal(100))
        for kind, mode in ((YEOJOHNSON, "mad"), (BOXCOX, "logmad"), (BOXCOX, "median")):
            scaled, rec = prestandardize(data, kind, mode)
            np.testing.assert_allclose(rec.inverse(scaled), data, rtol=1e-12)

    def test_affine_invariance_of_rewml_after_mad_scaling(self):
        rng = np.random.default_rng(23)
        raw = rng.standard_normal(150) * 1.7
        raw[:8] += 9.0
        spec = EstimatorSpec("rewml", YEOJOHNSON)
        lam_a = fit(raw, spec, prestandardize_mode="mad").family.lam
        lam_b = fit(3.0 * raw + 7.0, spec, prestandardize_mode="mad").family.lam
        assert abs(lam_a - lam_b) <= 2e-4

    def test_validation(self):
        with pytest.raises(ValueError):
            prestandardize(np.arange(1.0, 10.0), BOXCOX, "mad")
        with pytest.raises(DomainError):
            prestandardize(np.array([-1.0, 2.0, 3.0]), YEOJOHNSON, "logmad")
        with pytest.raises(DegenerateDataError):
            prestandardize(np.ones(10), YEOJOHNSON, "mad")
        with pytest.raises(ValueError):
            prestandardize(np.arange(1.0, 10.0), BOXCOX, "banana")


class TestApply:
    def test_identity_fit_is_identity(self):
        fitted = cn.FittedTransform(
            family=TransformFamily(YEOJOHNSON, 1.0), location=0.0, scale=1.0,
            weights=np.ones(3), spec=EstimatorSpec("ml", YEOJOHNSON),
        )
        x = np.array([-2.0, 0.5, 11.0])
        np.testing.assert_array_equal(apply(fitted, x), x)
        np.testing.assert_array_equal(apply_inverse(fitted, x), x)

    @pytest.mark.parametrize("kind,mode", [(YEOJOHNSON, "mad"), (BOXCOX, "logmad"),
                                           (BOXCOX, "median"), (YEOJOHNSON, "none")])
    def test_roundtrip_raw_scale(self, kind, mode):
        rng = np.random.default_rng(44)
        data = np.exp(rng.standard_normal(1000))
        fitted = fit(data, EstimatorSpec("rewml", kind), prestandardize_mode=mode)
        z = apply(fitted, data)
        back = apply_inverse(fitted, z)
        np.testing.assert_allclose(back, data, rtol=1e-8)
        assert np.max(np.abs(back - data)) < 1e-8 * np.max(np.abs(data)) + 1e-8

    def test_nan_passes_through(self):
        rng = np.random.default_rng(45)
        data = np.exp(rng.standard_normal(50))
        fitted = fit(data, EstimatorSpec("ml", BOXCOX))
        x = np.array([data[0], math.nan, data[1]])
        out = apply(fitted, x)
        assert math.isnan(out[1]) and not math.isnan(out[0])
        back = apply_inverse(fitted, out)
        assert math.isnan(back[1])
        assert back[0] == pytest.approx(data[0], rel=1e-10)

    def test_scalar_in_scalar_out(self):
        rng = np.random.default_rng(46)
        data = rng.standard_normal(100)
        fitted = fit(data, EstimatorSpec("ml", YEOJOHNSON))
        assert isinstance(apply(fitted, 1.5), float)


class TestFitDispatch:
    def test_mtl_trim_fraction_to_window(self):
        data = np.random.default_rng(50).standard_normal(100)
        fitted = fit(data, EstimatorSpec("mtl", YEOJOHNSON, trim_fraction=0.9))
        assert fitted.extras["window_size"] == 90

    def test_prestandardization_recorded(self):
        data = np.exp(np.random.default_rng(51).standard_normal(100))
        fitted = fit(data, EstimatorSpec("ml", BOXCOX), prestandardize_mode="median")
        assert fitted.prestandardization.mode == "median"
        assert fitted.prestandardization.center == pytest.approx(np.median(data))

    @pytest.mark.parametrize("method", ["ml", "carroll", "rawml", "rewml", "rewmlnr"])
    def test_every_method_dispatches(self, method):
        data = np.exp(np.random.default_rng(52).standard_normal(80))
        fitted = fit(data, EstimatorSpec(method, BOXCOX))
        assert fitted.spec.method == method
        assert -4.0 <= fitted.family.lam <= 6.0
