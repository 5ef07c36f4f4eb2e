"""One-dimensional minimization over a bounded parameter interval.

A coarse equispaced scan selects the basin (the robust fitting objectives can
be multimodal under contamination), then golden-section search with successive
parabolic interpolation refines inside the bracketing sub-interval. Fully
deterministic: identical inputs give bit-identical outputs.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import OptimizationError

_GOLDEN = 0.3819660112501051  # 2 - golden ratio
_SQRT_EPS = math.sqrt(np.finfo(np.float64).eps)


@dataclass(frozen=True)
class SearchConfig:
    """Search interval and stopping rule for the parameter scan."""

    lambda_min: float = -4.0
    lambda_max: float = 6.0
    tolerance: float = 1e-4
    coarse_grid_points: int = 21

    def __post_init__(self):
        if not self.lambda_min < self.lambda_max:
            raise ValueError("lambda_min must be < lambda_max")
        if not self.tolerance > 0.0:
            raise ValueError("tolerance must be positive")
        if self.coarse_grid_points < 3:
            raise ValueError("coarse_grid_points must be >= 3")


def _finite(value: float) -> float:
    # Non-finite objective values are treated as "worse than everything".
    return value if math.isfinite(value) else math.inf


def _brent_bounded(func, a: float, b: float, xatol: float, max_iter: int = 200):
    """Golden-section + successive parabolic interpolation on [a, b]."""
    x = w = v = a + _GOLDEN * (b - a)
    fx = fw = fv = func(x)
    d = e = 0.0
    for _ in range(max_iter):
        m = 0.5 * (a + b)
        tol1 = _SQRT_EPS * abs(x) + xatol / 3.0
        tol2 = 2.0 * tol1
        if abs(x - m) <= tol2 - 0.5 * (b - a):
            break
        golden = True
        if abs(e) > tol1:
            # parabola through (v, fv), (w, fw), (x, fx)
            r = (x - w) * (fx - fv)
            q = (x - v) * (fx - fw)
            p = (x - v) * q - (x - w) * r
            q = 2.0 * (q - r)
            if q > 0.0:
                p = -p
            q = abs(q)
            r, e = e, d
            if abs(p) < abs(0.5 * q * r) and q * (a - x) < p < q * (b - x):
                d = p / q
                u = x + d
                if (u - a) < tol2 or (b - u) < tol2:
                    d = tol1 if x < m else -tol1
                golden = False
        if golden:
            e = (b if x < m else a) - x
            d = _GOLDEN * e
        u = x + (d if abs(d) >= tol1 else (tol1 if d > 0.0 else -tol1))
        fu = func(u)
        if fu <= fx:
            if u < x:
                b = x
            else:
                a = x
            v, fv, w, fw = w, fw, x, fx
            x, fx = u, fu
        else:
            if u < x:
                a = u
            else:
                b = u
            if fu <= fw or w == x:
                v, fv, w, fw = w, fw, u, fu
            elif fu <= fv or v == x or v == w:
                v, fv = u, fu
    return x, fx


def minimize_scalar(objective, config: SearchConfig | None = None) -> tuple[float, float]:
    """Minimize ``objective`` on the configured interval.

    Returns ``(argmin, value)``. The result is never worse than the best
    coarse-grid point; grid ties break toward the smallest parameter.
    Raises :class:`OptimizationError` when the objective is non-finite on
    the entire coarse grid.
    """
    cfg = config if config is not None else SearchConfig()
    grid = np.linspace(cfg.lambda_min, cfg.lambda_max, cfg.coarse_grid_points)

    def safe(lam: float) -> float:
        return _finite(objective(float(lam)))

    values = [safe(g) for g in grid]
    best = 0
    for i in range(1, len(values)):
        if values[i] < values[best]:
            best = i
    if math.isinf(values[best]):
        raise OptimizationError("objective is non-finite at every coarse grid point")

    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, len(grid) - 1)]
    x, fx = _brent_bounded(safe, float(lo), float(hi), cfg.tolerance)
    if values[best] < fx:
        return float(grid[best]), float(values[best])
    return float(x), float(fx)
