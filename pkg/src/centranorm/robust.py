"""Univariate robust building blocks.

Median / mad, Huber M-estimates of location and scale, the bounded bisquare
loss, a high-accuracy normal quantile function, and QQ plotting positions.
Only what the fitting pipeline needs; no general M-estimation framework.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from ._kernels_py import MAD_SCALE
from .errors import DegenerateDataError

__all__ = [
    "MAD_SCALE",
    "HuberEstimates",
    "median",
    "mad",
    "huber_m",
    "rho_bw",
    "normal_quantile",
    "plotting_positions",
]


def _clean_1d(data, min_n=1):
    arr = np.asarray(data, dtype=np.float64).ravel()
    if arr.size < min_n:
        raise ValueError(f"need at least {min_n} observations, got {arr.size}")
    return arr


def median(data) -> float:
    """Sample median (mean of the two middle order statistics for even n)."""
    return float(np.median(_clean_1d(data)))


def mad(data) -> float:
    """Median absolute deviation about the median, scaled to be consistent
    for the standard deviation under normality. Zero flags degenerate data."""
    arr = _clean_1d(data)
    return MAD_SCALE * float(np.median(np.abs(arr - np.median(arr))))


@dataclass(frozen=True)
class HuberEstimates:
    """Joint Huber M-estimates; ``converged`` is False when the sweep cap hit."""

    location: float
    scale: float
    iterations: int
    converged: bool


def huber_m(data, b: float = 1.5, tol: float = 1e-6, max_iter: int = 50) -> HuberEstimates:
    """Huber M-estimates of location and scale.

    Location uses winsorized-mean sweeps with tuning ``b``; the scale is the
    matching winsorized variance with a consistency correction so that normal
    samples give the usual standard deviation. Starts from (median, mad) and
    sweeps both jointly until each moves by less than ``tol`` relative to the
    current scale. Non-convergence within ``max_iter`` returns the last
    iterate flagged, not an error, so outer optimizers stay total.
    """
    arr = _clean_1d(data, min_n=2)
    loc, scale, iters, ok = kernels.huber_sorted(np.sort(arr), b, tol, max_iter)
    if scale <= 0.0:
        raise DegenerateDataError("mad is zero: Huber scale is undefined")
    return HuberEstimates(float(loc), float(scale), int(iters), bool(ok))


def rho_bw(t, c: float):
    """Bisquare loss: smooth, even, rises from 0 and saturates at 1 for |t| >= c."""
    if not c > 0.0:
        raise ValueError("c must be positive")
    t = np.asarray(t, dtype=np.float64)
    u2 = (t / c) ** 2
    out = np.where(u2 <= 1.0, 1.0 - (1.0 - u2) ** 3, 1.0)
    return float(out) if out.ndim == 0 else out


# Rational approximation for the normal quantile (relative error < 1.15e-9
# across (0,1)), finished with one Halley step to full double precision.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _qnorm_half(p: float) -> float:
    # p in (0, 0.5]; keeping x <= 0 makes the cdf in the polish step
    # cancellation-free (erfc of a nonnegative argument).
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        x = ((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
             / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    else:
        q = p - 0.5
        r = q * q
        x = ((((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
             / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0))
    # Halley polish against the exact cdf.
    e = 0.5 * math.erfc(-x / math.sqrt(2.0)) - p
    u = e * _SQRT_2PI * math.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


def _qnorm_scalar(p: float) -> float:
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must be in (0, 1), got {p}")
    if p > 0.5:
        return -_qnorm_half(1.0 - p)
    return _qnorm_half(p)


def normal_quantile(p):
    """Standard normal quantile function, accurate to well below 1e-10."""
    arr = np.asarray(p, dtype=np.float64)
    if arr.ndim == 0:
        return _qnorm_scalar(float(arr))
    out = np.empty(arr.shape, dtype=np.float64)
    flat_in, flat_out = arr.ravel(), out.ravel()
    for i in range(flat_in.size):
        flat_out[i] = _qnorm_scalar(float(flat_in[i]))
    return out


def plotting_positions(n: int) -> np.ndarray:
    """Quantile levels p_i = (i - 1/3)/(n + 1/3), symmetric about 1/2."""
    if n < 1:
        raise ValueError("n must be >= 1")
    i = np.arange(1, n + 1, dtype=np.float64)
    return (i - 1.0 / 3.0) / (n + 1.0 / 3.0)
