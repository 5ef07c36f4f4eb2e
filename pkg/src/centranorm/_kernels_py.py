"""Pure-NumPy implementations of the hot numerical kernels.

This module is the fallback twin of the compiled extension ``_kernels.pyx``;
``centranorm._backend`` picks whichever is importable. Any change here must
be mirrored in the .pyx file: both backends have to agree to floating-point
noise, and the test suite checks that they do.

Conventions shared by both backends:
  * arrays are 1-d contiguous float64,
  * the power parameter ``lam`` arrives already snapped to exactly 0.0
    (and 2.0 for Yeo-Johnson) when within the branch-switch clamp,
  * transform kind codes: 0 = Box-Cox, 1 = Yeo-Johnson,
  * an inactive rectification side is signalled by ``nan`` knots.
"""

import math

import numpy as np

IS_COMPILED = False

# 1 / Phi^-1(0.75): makes the mad consistent for the normal sd.
MAD_SCALE = 1.4826022185056018


def _winsor_beta(b: float) -> float:
    # E[psi_b(Z)^2] for Z ~ N(0,1) with psi_b(t) = clamp(t, -b, b).
    th = 1.0 - math.erfc(b / math.sqrt(2.0))  # 2*Phi(b) - 1
    dens = math.exp(-0.5 * b * b) / math.sqrt(2.0 * math.pi)
    return th + b * b * (1.0 - th) - 2.0 * b * dens


def transform(x, lam, kind, cl, g_cl, s_cl, cu, g_cu, s_cu):
    """Evaluate the power transform, linearized beyond any active knot.

    ``g_*``/``s_*`` are the plain transform's value and slope at the knot;
    they are precomputed by the caller so each call costs one pass.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    out = np.empty_like(x)
    lo = (x < cl) if not math.isnan(cl) else np.zeros(x.shape, bool)
    hi = (x > cu) if not math.isnan(cu) else np.zeros(x.shape, bool)
    mid = ~(lo | hi)
    out[mid] = _plain(x[mid], lam, kind)
    if lo.any():
        out[lo] = g_cl + (x[lo] - cl) * s_cl
    if hi.any():
        out[hi] = g_cu + (x[hi] - cu) * s_cu
    return out


def _plain(x, lam, kind):
    if lam == 1.0:  # affine member: keep it exact
        return x - 1.0 if kind == 0 else x.copy()
    if kind == 0:  # Box-Cox, caller guarantees x > 0
        if lam == 0.0:
            return np.log(x)
        with np.errstate(over="ignore"):
            return np.expm1(lam * np.log(x)) / lam
    out = np.empty_like(x)
    pos = x >= 0.0
    neg = ~pos
    with np.errstate(over="ignore"):
        if lam == 0.0:
            out[pos] = np.log1p(x[pos])
        else:
            out[pos] = np.expm1(lam * np.log1p(x[pos])) / lam
        if lam == 2.0:
            out[neg] = -np.log1p(-x[neg])
        else:
            out[neg] = -np.expm1((2.0 - lam) * np.log1p(-x[neg])) / (2.0 - lam)
    return out


def huber_sorted(z, b, tol, maxit):
    """Huber M-estimates of location and scale on ascending data.

    Winsorized-mean sweeps for the location joint with a consistency-corrected
    winsorized scale. Returns ``(location, scale, iterations, converged)``;
    a zero scale flags degenerate data and means the rest is unusable.
    """
    z = np.ascontiguousarray(z, dtype=np.float64)
    n = z.size
    half = n >> 1
    med = z[half] if n & 1 else 0.5 * (z[half - 1] + z[half])
    mad = MAD_SCALE * np.median(np.abs(z - med))
    if not (mad > 0.0 and math.isfinite(mad)):
        return med, 0.0, 0, 0
    beta = _winsor_beta(b)
    mu, s = med, mad
    for it in range(1, maxit + 1):
        w = np.clip(z, mu - b * s, mu + b * s)
        mu1 = float(w.mean())
        ss = float(((w - mu1) ** 2).sum()) / ((n - 1) * beta)
        s1 = math.sqrt(ss) if ss > 0.0 else 0.0
        done = abs(mu1 - mu) < tol * s and abs(s1 - s) < tol * s
        mu, s = mu1, s1
        if s == 0.0:
            return mu, 0.0, it, 0
        if done:
            return mu, s, it, 1
    return mu, s, maxit, 0


def criterion_sorted(z, q, c, b, tol, maxit):
    """Bounded-loss discrepancy between standardized data and normal quantiles.

    ``z`` are the transformed order statistics (ascending) and ``q`` the
    matching normal quantiles. Returns ``inf`` when the scale degenerates.
    """
    loc, scale, _, _ = huber_sorted(z, b, tol, maxit)
    if scale <= 0.0 or not math.isfinite(scale):
        return math.inf
    r = (z - loc) / scale - q
    t2 = (r / c) ** 2
    total = np.where(t2 <= 1.0, 1.0 - (1.0 - t2) ** 3, 1.0).sum()
    return float(total)


def mean_var(z):
    """Mean and 1/n variance in one place, two-pass for accuracy."""
    z = np.ascontiguousarray(z, dtype=np.float64)
    m = float(z.mean())
    v = float(((z - m) ** 2).mean())
    return m, v
