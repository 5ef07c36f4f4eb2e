"""Estimators of the power-transform parameter.

Classical maximum likelihood, its weighted variant, Carroll's robust-scale
variant, maximum trimmed likelihood over windows of consecutive order
statistics, the bounded-loss initial estimator on the rectified transform,
and the full reweighted pipeline: a robust rectified initial fit followed by
hard-rejection / weighted-ML rounds on the plain transform.

Fitting is a pure computation per sample; fitted results are immutable.
"""

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from ._backend import kernels
from .errors import (CentranormWarning, DegenerateDataError, DomainError,
                     SpecificationError)
from .optimize import SearchConfig, minimize_scalar
from .robust import huber_m, normal_quantile, plotting_positions
from .transforms import (
    BOXCOX,
    YEOJOHNSON,
    _KIND_CODE,
    _NO_RECT,
    TransformFamily,
    _check_kind,
    _plain_scalar,
    _plain_slope,
    canonical_lambda,
    evaluate,
    inverse,
)
from .errors import TransformRangeError

_HUBER_TOL = 1e-6
_HUBER_MAXIT = 50

METHODS = ("ml", "carroll", "mtl", "rawml", "rewml", "rewmlnr")


@dataclass(frozen=True)
class EstimatorSpec:
    """Which estimator to run, with its tuning constants."""

    method: str
    family_kind: str = YEOJOHNSON
    c: float = 0.5
    cutoff_quantile: float = 0.995
    trim_fraction: float | None = None
    reweight_steps: int = 2
    huber_b: float = 1.5
    search: SearchConfig = field(default_factory=SearchConfig)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        _check_kind(self.family_kind)
        if not self.c > 0.0:
            raise ValueError("c must be positive")
        if not 0.5 < self.cutoff_quantile < 1.0:
            raise ValueError("cutoff_quantile must be in (0.5, 1)")
        if self.method == "mtl":
            if self.trim_fraction is None or not 0.5 < self.trim_fraction < 1.0:
                raise ValueError("mtl needs a trim_fraction in (0.5, 1)")
        if self.method in ("rewml", "rewmlnr") and self.reweight_steps < 1:
            raise ValueError("rewml needs at least one reweighting step")
        if not self.huber_b > 0.0:
            raise ValueError("huber_b must be positive")


@dataclass(frozen=True)
class PrestandardizationRecord:
    """Constants of the centering/scaling applied before fitting.

    Modes: ``none``; ``mad`` for (x - median)/mad; ``logmad`` for the same
    standardization on the log scale mapped back to the positive axis;
    ``median`` for plain division by the median.
    """

    mode: str = "none"
    center: float = 0.0
    spread: float = 1.0

    def forward(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.mode == "none":
            return x.copy()
        if self.mode == "mad":
            return (x - self.center) / self.spread
        if self.mode == "logmad":
            if x.size and not (x > 0.0).all():
                raise DomainError("logmad prestandardization needs positive values")
            return np.exp((np.log(x) - self.center) / self.spread)
        if self.mode == "median":
            return x / self.center
        raise ValueError(f"unknown prestandardization mode {self.mode!r}")

    def inverse(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.mode == "none":
            return x.copy()
        if self.mode == "mad":
            return x * self.spread + self.center
        if self.mode == "logmad":
            return np.exp(np.log(x) * self.spread + self.center)
        if self.mode == "median":
            return x * self.center
        raise ValueError(f"unknown prestandardization mode {self.mode!r}")


@dataclass(frozen=True)
class FittedTransform:
    """Estimation output: fitted plain family plus standardization state.

    ``weights`` are per-observation 0/1 values in input order. Methods that
    do no reweighting (ml, carroll, mtl, rawml) carry all-one weights; for
    the reweighted methods a zero weight marks a flagged observation, and the
    zero set coincides exactly with ``|apply(...)| > Phi^-1(cutoff)``.
    """

    family: TransformFamily
    location: float
    scale: float
    weights: np.ndarray
    spec: EstimatorSpec
    prestandardization: PrestandardizationRecord = PrestandardizationRecord()
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (math.isfinite(self.scale) and self.scale > 0.0):
            raise ValueError("scale must be positive and finite")
        if not math.isfinite(self.location):
            raise ValueError("location must be finite")
        w = np.ascontiguousarray(self.weights, dtype=np.float64)
        if w.size and not np.all((w == 0.0) | (w == 1.0)):
            raise ValueError("weights must be 0/1")
        object.__setattr__(self, "weights", w)


def _prepare(data, kind, min_n=2):
    arr = np.asarray(data, dtype=np.float64).ravel()
    if arr.size < min_n:
        raise DegenerateDataError(f"need at least {min_n} observations, got {arr.size}")
    if not np.isfinite(arr).all():
        raise DomainError("data must be finite")
    if kind == BOXCOX and not (arr > 0.0).all():
        raise DomainError("boxcox requires strictly positive data")
    order = np.argsort(arr, kind="stable")
    return arr[order], order


def _unsort(values_sorted, order):
    out = np.empty_like(values_sorted)
    out[order] = values_sorted
    return out


def _jacobian_sum(x_sorted, kind):
    # log-derivative term of the likelihood; constant across lambda
    if kind == BOXCOX:
        return float(np.log(x_sorted).sum())
    return float((np.sign(x_sorted) * np.log1p(np.abs(x_sorted))).sum())


def _transform_plain(x_sorted, lam, kind):
    return kernels.transform(x_sorted, canonical_lambda(lam, kind), _KIND_CODE[kind], *_NO_RECT)


def _wml_core(x_sub_sorted, kind, search):
    """Maximize the (weighted) normal likelihood over lambda on one subset.

    The zero-weight observations are already dropped, so the weighted moments
    reduce to plain moments of the retained points.
    """
    n_w = x_sub_sorted.size
    if n_w < 3:
        raise DegenerateDataError(f"need at least 3 weighted observations, got {n_w}")
    code = _KIND_CODE[kind]
    jac = _jacobian_sum(x_sub_sorted, kind)

    def neg_loglik(lam):
        lam = canonical_lambda(lam, kind)
        z = kernels.transform(x_sub_sorted, lam, code, *_NO_RECT)
        _, v = kernels.mean_var(z)
        if not (v > 0.0 and math.isfinite(v)):
            return math.inf
        return 0.5 * n_w * math.log(v) - (lam - 1.0) * jac

    lam_hat, neg_value = minimize_scalar(neg_loglik, search)
    lam_hat = canonical_lambda(lam_hat, kind)
    z = kernels.transform(x_sub_sorted, lam_hat, code, *_NO_RECT)
    m, v = kernels.mean_var(z)
    if not (v > 0.0 and math.isfinite(v)):
        raise DegenerateDataError("transformed data has zero variance at the optimum")
    return lam_hat, m, math.sqrt(v), -neg_value


def _rect_knots(x_sorted, kind, warn=True):
    """Rectification knots from the data quartiles, dropping invalid sides."""
    q1, q3 = (float(q) for q in np.quantile(x_sorted, [0.25, 0.75]))
    if kind == BOXCOX:
        cl = q1 if 0.0 < q1 < 1.0 else None
        cu = q3 if q3 > 1.0 else None
    else:
        cl = q1 if q1 < 0.0 else None
        cu = q3 if q3 > 0.0 else None
    if warn and (cl is None or cu is None):
        sides = [s for s, k in (("lower", cl), ("upper", cu)) if k is None]
        warnings.warn(
            f"data quartile is not a valid {'/'.join(sides)} rectification knot for "
            f"{kind}; the plain transform is used on that side (consider prestandardizing)",
            CentranormWarning,
            stacklevel=3,
        )
    return cl, cu


def _criterion_value(x_sorted, lam, kind, c, huber_b, qnorm, rectified, cl, cu):
    lam = canonical_lambda(lam, kind)
    params = _NO_RECT
    if rectified and lam < 1.0 and cu is not None:
        params = (math.nan, 0.0, 0.0, cu,
                  _plain_scalar(kind, lam, cu), _plain_slope(kind, lam, cu))
    elif rectified and lam > 1.0 and cl is not None:
        params = (cl, _plain_scalar(kind, lam, cl), _plain_slope(kind, lam, cl),
                  math.nan, 0.0, 0.0)
    z = kernels.transform(x_sorted, lam, _KIND_CODE[kind], *params)
    return kernels.criterion_sorted(z, qnorm, c, huber_b, _HUBER_TOL, _HUBER_MAXIT)


def robust_criterion(data, family: TransformFamily, c: float = 0.5,
                     huber_b: float = 1.5) -> float:
    """Bounded-loss discrepancy between the transformed sample and normality.

    Standardizes the transformed order statistics by their Huber location and
    scale, matches them against the normal quantiles at the usual plotting
    positions, and sums the bisquare loss of the gaps. Each observation can
    contribute at most 1, so single points have bounded influence.
    """
    x_sorted, _ = _prepare(data, family.kind, min_n=10)
    qnorm = normal_quantile(plotting_positions(x_sorted.size))
    cl = family.lower_knot if family.rectified else None
    cu = family.upper_knot if family.rectified else None
    value = _criterion_value(x_sorted, family.lam, family.kind, c, huber_b, qnorm,
                             family.rectified, cl, cu)
    if math.isinf(value):
        raise DegenerateDataError("transformed data is degenerate (Huber scale undefined)")
    return value


def _initial_lambda(x_sorted, kind, c, huber_b, search, rectified):
    qnorm = normal_quantile(plotting_positions(x_sorted.size))
    if rectified:
        cl, cu = _rect_knots(x_sorted, kind)
    else:
        cl = cu = None

    def objective(lam):
        return _criterion_value(x_sorted, lam, kind, c, huber_b, qnorm, rectified, cl, cu)

    lam0, value = minimize_scalar(objective, search)
    lam0 = canonical_lambda(lam0, kind)
    return lam0, value, {"lower_knot": cl, "upper_knot": cu}


def _huber_of_transformed(x_sorted, lam, kind, huber_b):
    z = _transform_plain(x_sorted, lam, kind)
    loc, scale, _, _ = kernels.huber_sorted(z, huber_b, _HUBER_TOL, _HUBER_MAXIT)
    if scale <= 0.0:
        raise DegenerateDataError("transformed data is degenerate (Huber scale undefined)")
    return z, loc, scale


def fit_ml(data, family_kind: str, search: SearchConfig | None = None) -> FittedTransform:
    """Classical maximum likelihood estimate of lambda."""
    search = search if search is not None else SearchConfig()
    x_sorted, order = _prepare(data, family_kind, min_n=3)
    lam, loc, scale, value = _wml_core(x_sorted, family_kind, search)
    return FittedTransform(
        family=TransformFamily(family_kind, lam),
        location=loc,
        scale=scale,
        weights=np.ones(x_sorted.size),
        spec=EstimatorSpec(method="ml", family_kind=family_kind, search=search),
        extras={"loglik": value},
    )


def fit_wml(data, family_kind: str, weights, search: SearchConfig | None = None) -> FittedTransform:
    """Weighted maximum likelihood with fixed 0/1 weights."""
    search = search if search is not None else SearchConfig()
    w = np.asarray(weights, dtype=np.float64).ravel()
    arr = np.asarray(data, dtype=np.float64).ravel()
    if w.shape != arr.shape:
        raise ValueError("weights must match the data length")
    if not np.all((w == 0.0) | (w == 1.0)):
        raise ValueError("weights must be 0/1")
    if w.sum() < 3:
        raise DegenerateDataError("total weight below 3")
    x_sorted, order = _prepare(arr, family_kind, min_n=3)
    w_sorted = w[order]
    lam, loc, scale, value = _wml_core(x_sorted[w_sorted > 0.0], family_kind, search)
    return FittedTransform(
        family=TransformFamily(family_kind, lam),
        location=loc,
        scale=scale,
        weights=w.copy(),
        spec=EstimatorSpec(method="ml", family_kind=family_kind, search=search),
        extras={"loglik": value},
    )


def _huber_rho(t, b):
    a = np.abs(t)
    return np.where(a <= b, 0.5 * t * t, b * a - 0.5 * b * b)


def fit_carroll(data, family_kind: str, search: SearchConfig | None = None,
                huber_b: float = 1.5) -> FittedTransform:
    """Likelihood-style estimate with Huber M-estimates in place of the
    Gaussian moments.

    The profile objective keeps the robust lack-of-fit sum next to the log
    M-scale: for the Gaussian loss that sum is constant in lambda (which is
    why the classical profile reduces to the log variance alone), but for a
    bounded loss it varies and dropping it loses consistency on skewed data.
    """
    search = search if search is not None else SearchConfig()
    x_sorted, order = _prepare(data, family_kind, min_n=3)
    n = x_sorted.size
    code = _KIND_CODE[family_kind]
    jac = _jacobian_sum(x_sorted, family_kind)

    def neg_objective(lam):
        lam = canonical_lambda(lam, family_kind)
        z = kernels.transform(x_sorted, lam, code, *_NO_RECT)
        loc, scale, _, _ = kernels.huber_sorted(z, huber_b, _HUBER_TOL, _HUBER_MAXIT)
        if not (scale > 0.0 and math.isfinite(scale)):
            return math.inf
        lack_of_fit = float(_huber_rho((z - loc) / scale, huber_b).sum())
        return n * math.log(scale) + lack_of_fit - (lam - 1.0) * jac

    lam, _ = minimize_scalar(neg_objective, search)
    lam = canonical_lambda(lam, family_kind)
    _, loc, scale = _huber_of_transformed(x_sorted, lam, family_kind, huber_b)
    return FittedTransform(
        family=TransformFamily(family_kind, lam),
        location=loc,
        scale=scale,
        weights=np.ones(n),
        spec=EstimatorSpec(method="carroll", family_kind=family_kind,
                           huber_b=huber_b, search=search),
    )


def fit_mtl(data, family_kind: str, h: int, search: SearchConfig | None = None) -> FittedTransform:
    """Maximum trimmed likelihood over windows of h consecutive order statistics.

    Every window of h consecutive sorted observations gets its own inner ML
    fit; the window achieving the highest likelihood value wins. All windows
    share the same h, so their values are directly comparable.
    """
    search = search if search is not None else SearchConfig()
    x_sorted, order = _prepare(data, family_kind, min_n=3)
    n = x_sorted.size
    if not math.ceil(n / 2) < h < n:
        raise SpecificationError(f"h must satisfy ceil(n/2) < h < n, got h={h} for n={n}")
    best = None
    for start in range(0, n - h + 1):
        try:
            lam, loc, scale, value = _wml_core(x_sorted[start:start + h], family_kind, search)
        except DegenerateDataError:
            continue
        if best is None or value > best[0]:
            best = (value, lam, loc, scale, start)
    if best is None:
        raise DegenerateDataError("every window of h consecutive observations is degenerate")
    value, lam, loc, scale, start = best
    return FittedTransform(
        family=TransformFamily(family_kind, lam),
        location=loc,
        scale=scale,
        weights=np.ones(n),
        spec=EstimatorSpec(method="mtl", family_kind=family_kind,
                           trim_fraction=h / n, search=search),
        extras={"window_start": start, "window_size": h, "trimmed_loglik": value},
    )


def hard_rejection_weights(transformed, cutoff_quantile: float = 0.995,
                           huber_b: float = 1.5) -> np.ndarray:
    """0/1 weights zeroing points far from the robust center of transformed data."""
    t = np.asarray(transformed, dtype=np.float64).ravel()
    est = huber_m(t, b=huber_b)
    threshold = normal_quantile(cutoff_quantile) * est.scale
    return (np.abs(t - est.location) <= threshold).astype(np.float64)


def fit_rawml(data, family_kind: str, c: float = 0.5, huber_b: float = 1.5,
              search: SearchConfig | None = None, rectified: bool = True) -> FittedTransform:
    """The initial estimator alone: minimize the bounded-loss criterion.

    By default the rectified transform is used inside the criterion (knots at
    the data quartiles); the reported family is always the plain transform at
    the fitted lambda.
    """
    search = search if search is not None else SearchConfig()
    x_sorted, order = _prepare(data, family_kind, min_n=10)
    lam0, value, info = _initial_lambda(x_sorted, family_kind, c, huber_b, search, rectified)
    _, loc, scale = _huber_of_transformed(x_sorted, lam0, family_kind, huber_b)
    return FittedTransform(
        family=TransformFamily(family_kind, lam0),
        location=loc,
        scale=scale,
        weights=np.ones(x_sorted.size),
        spec=EstimatorSpec(method="rawml", family_kind=family_kind, c=c,
                           huber_b=huber_b, search=search),
        extras={"criterion_value": value, **info},
    )


def fit_rewml(data, spec: EstimatorSpec) -> FittedTransform:
    """Robust initial fit plus hard-rejection / weighted-ML refinement rounds.

    Step 1 minimizes the bounded-loss criterion, on the rectified transform
    for method ``rewml`` and on the plain transform for ``rewmlnr``; that is
    the only place rectification enters. Each refinement round recomputes
    hard-rejection weights from the plain transform at the current lambda and
    refits by weighted ML. The reported weights are re-derived from the final
    fit's own location/scale, so the zero-weight set is exactly the set of
    points whose standardized transform exceeds the cutoff.
    """
    if spec.method not in ("rewml", "rewmlnr"):
        raise ValueError(f"fit_rewml expects method rewml or rewmlnr, got {spec.method!r}")
    kind = spec.family_kind
    x_sorted, order = _prepare(data, kind, min_n=10)
    qcut = normal_quantile(spec.cutoff_quantile)
    lam0, crit_value, info = _initial_lambda(
        x_sorted, kind, spec.c, spec.huber_b, spec.search, rectified=spec.method == "rewml"
    )
    lam = lam0
    round_lambdas = []
    loc = scale = None
    for _ in range(spec.reweight_steps):
        z, loc_h, scale_h = _huber_of_transformed(x_sorted, lam, kind, spec.huber_b)
        keep = np.abs(z - loc_h) <= qcut * scale_h
        lam, loc, scale, _ = _wml_core(x_sorted[keep], kind, spec.search)
        round_lambdas.append(lam)
    z = _transform_plain(x_sorted, lam, kind)
    w_sorted = (np.abs((z - loc) / scale) <= qcut).astype(np.float64)
    return FittedTransform(
        family=TransformFamily(kind, lam),
        location=loc,
        scale=scale,
        weights=_unsort(w_sorted, order),
        spec=spec,
        extras={"lambda0": lam0, "criterion_value": crit_value,
                "round_lambdas": round_lambdas, **info},
    )


def prestandardize(data, family_kind: str, mode: str = "auto"):
    """Center and scale data before fitting; returns (scaled data, record).

    ``auto`` resolves to ``mad`` for Yeo-Johnson and ``logmad`` for Box-Cox.
    ``median`` divides by the median only, the usual convention before a
    Box-Cox fit when interpretability of lambda matters.
    """
    _check_kind(family_kind)
    arr = np.asarray(data, dtype=np.float64).ravel()
    if not np.isfinite(arr).all():
        raise DomainError("data must be finite")
    if mode == "auto":
        mode = "mad" if family_kind == YEOJOHNSON else "logmad"
    if mode == "none":
        return arr.copy(), PrestandardizationRecord()
    if mode == "mad":
        if family_kind == BOXCOX:
            raise ValueError("mad prestandardization makes values nonpositive; "
                             "use logmad or median for boxcox")
        m = float(np.median(arr))
        s = float(kernels.MAD_SCALE * np.median(np.abs(arr - m)))
        if not s > 0.0:
            raise DegenerateDataError("mad is zero")
        rec = PrestandardizationRecord("mad", m, s)
    elif mode == "logmad":
        if not (arr > 0.0).all():
            raise DomainError("logmad prestandardization needs positive data")
        lx = np.log(arr)
        m = float(np.median(lx))
        s = float(kernels.MAD_SCALE * np.median(np.abs(lx - m)))
        if not s > 0.0:
            raise DegenerateDataError("mad of log data is zero")
        rec = PrestandardizationRecord("logmad", m, s)
    elif mode == "median":
        m = float(np.median(arr))
        if not m > 0.0:
            raise DegenerateDataError("median must be positive for median scaling")
        rec = PrestandardizationRecord("median", m, 1.0)
    else:
        raise ValueError(f"unknown prestandardization mode {mode!r}")
    return rec.forward(arr), rec


def fit(data, spec: EstimatorSpec, prestandardize_mode: str = "none") -> FittedTransform:
    """Fit with any method, optionally prestandardizing first.

    The prestandardization constants are recorded on the result so that
    :func:`apply` and :func:`apply_inverse` work on the raw data scale.
    """
    arr = np.asarray(data, dtype=np.float64).ravel()
    record = PrestandardizationRecord()
    if prestandardize_mode != "none":
        arr, record = prestandardize(arr, spec.family_kind, prestandardize_mode)
    if spec.method == "ml":
        fitted = fit_ml(arr, spec.family_kind, search=spec.search)
    elif spec.method == "carroll":
        fitted = fit_carroll(arr, spec.family_kind, search=spec.search, huber_b=spec.huber_b)
    elif spec.method == "mtl":
        h = int(round(spec.trim_fraction * arr.size))
        fitted = fit_mtl(arr, spec.family_kind, h, search=spec.search)
    elif spec.method == "rawml":
        fitted = fit_rawml(arr, spec.family_kind, c=spec.c, huber_b=spec.huber_b,
                           search=spec.search)
    else:
        fitted = fit_rewml(arr, spec)
    return replace(fitted, spec=spec, prestandardization=record)


def apply(fitted: FittedTransform, data):
    """Standardized transform of raw data; nan passes through as nan."""
    arr = np.asarray(data, dtype=np.float64)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr).astype(np.float64)
    out = np.full(arr.shape, math.nan)
    mask = ~np.isnan(arr)
    if arr[mask].size and not np.isfinite(arr[mask]).all():
        raise DomainError("data must be finite or nan")
    xt = fitted.prestandardization.forward(arr[mask])
    z = evaluate(fitted.family, xt)
    out[mask] = (z - fitted.location) / fitted.scale
    return float(out[0]) if scalar else out


def apply_inverse(fitted: FittedTransform, data):
    """Exact inverse of :func:`apply`, including the prestandardization."""
    arr = np.asarray(data, dtype=np.float64)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr).astype(np.float64)
    out = np.full(arr.shape, math.nan)
    mask = ~np.isnan(arr)
    if arr[mask].size and not np.isfinite(arr[mask]).all():
        raise DomainError("data must be finite or nan")
    y = arr[mask] * fitted.scale + fitted.location
    try:
        x = inverse(fitted.family, y)
    except TransformRangeError as err:
        err.positions = list(np.flatnonzero(mask)[err.positions])
        raise
    out[mask] = fitted.prestandardization.inverse(x)
    return float(out[0]) if scalar else out
