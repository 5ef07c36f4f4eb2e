"""Box-Cox and Yeo-Johnson power transforms, plain and rectified.

The plain transforms map a variable through a power-like curve controlled by
``lam``; the rectified variants continue the curve as its tangent line beyond
a knot, which keeps the range unbounded on the side the plain transform would
compress. Rectification is one-sided: for ``lam < 1`` the upper tail is
linearized (knot ``upper_knot``), for ``lam > 1`` the lower tail
(``lower_knot``), and at ``lam == 1`` the map is already affine so nothing
happens.

All operations are pure functions of immutable values.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import DomainError, TransformRangeError

BOXCOX = "boxcox"
YEOJOHNSON = "yeojohnson"
_KINDS = (BOXCOX, YEOJOHNSON)
_KIND_CODE = {BOXCOX: 0, YEOJOHNSON: 1}

# |lam| below this is treated as the logarithmic branch (and |lam - 2| for the
# negative Yeo-Johnson branch): far below optimizer resolution, and expm1/log1p
# keep the adjacent region accurate.
LAMBDA_SNAP = 1e-10


def canonical_lambda(lam: float, kind: str) -> float:
    """Snap ``lam`` onto the exact logarithmic branch points."""
    if abs(lam) < LAMBDA_SNAP:
        return 0.0
    if kind == YEOJOHNSON and abs(lam - 2.0) < LAMBDA_SNAP:
        return 2.0
    return float(lam)


def _check_kind(kind: str) -> str:
    if kind not in _KINDS:
        raise ValueError(f"unknown transform kind {kind!r}; expected one of {_KINDS}")
    return kind


@dataclass(frozen=True)
class TransformFamily:
    """One member of the Box-Cox or Yeo-Johnson family.

    ``rectified`` switches on the tangent-line continuation beyond the knot
    on the side that ``lam`` makes bounded. Knots may both be present; only
    the side relevant for the current ``lam`` is used.
    """

    kind: str
    lam: float
    rectified: bool = False
    lower_knot: float | None = None
    upper_knot: float | None = None

    def __post_init__(self):
        _check_kind(self.kind)
        if not math.isfinite(self.lam):
            raise ValueError("lam must be finite")
        object.__setattr__(self, "lam", canonical_lambda(self.lam, self.kind))
        if self.upper_knot is not None:
            low = 1.0 if self.kind == BOXCOX else 0.0
            if not self.upper_knot > low:
                raise ValueError(
                    f"upper_knot must be > {low} for {self.kind}, got {self.upper_knot}"
                )
        if self.lower_knot is not None:
            if self.kind == BOXCOX and not 0.0 < self.lower_knot < 1.0:
                raise ValueError(f"lower_knot must be in (0, 1) for boxcox, got {self.lower_knot}")
            if self.kind == YEOJOHNSON and not self.lower_knot < 0.0:
                raise ValueError(f"lower_knot must be < 0 for yeojohnson, got {self.lower_knot}")
        if self.rectified:
            if self.lam < 1.0 and self.upper_knot is None:
                raise ValueError("rectified family with lam < 1 needs an upper knot")
            if self.lam > 1.0 and self.lower_knot is None:
                raise ValueError("rectified family with lam > 1 needs a lower knot")

    def plain(self) -> "TransformFamily":
        """The same family member without rectification."""
        return TransformFamily(self.kind, self.lam)


def _as_array(x, what="x"):
    arr = np.asarray(x, dtype=np.float64)
    scalar = arr.ndim == 0
    arr = np.ascontiguousarray(np.atleast_1d(arr))
    if arr.size and not np.isfinite(arr).all():
        raise DomainError(f"{what} must be finite")
    return arr, scalar


def _check_bc_domain(family, arr):
    if family.kind == BOXCOX and arr.size and not (arr > 0.0).all():
        raise DomainError("boxcox requires strictly positive data")


def _plain_scalar(kind: str, lam: float, x: float) -> float:
    return float(kernels.transform(np.array([x]), lam, _KIND_CODE[kind], *_NO_RECT)[0])


def _plain_slope(kind: str, lam: float, x: float) -> float:
    if kind == BOXCOX:
        return x ** (lam - 1.0)
    if x >= 0.0:
        return (1.0 + x) ** (lam - 1.0)
    return (1.0 - x) ** (1.0 - lam)


_NO_RECT = (math.nan, 0.0, 0.0, math.nan, 0.0, 0.0)


def _rect_params(family: TransformFamily):
    """Kernel arguments (cl, g_cl, s_cl, cu, g_cu, s_cu) for the active side."""
    lam = family.lam
    if family.rectified and lam < 1.0 and family.upper_knot is not None:
        cu = float(family.upper_knot)
        return (math.nan, 0.0, 0.0, cu,
                _plain_scalar(family.kind, lam, cu), _plain_slope(family.kind, lam, cu))
    if family.rectified and lam > 1.0 and family.lower_knot is not None:
        cl = float(family.lower_knot)
        return (cl, _plain_scalar(family.kind, lam, cl), _plain_slope(family.kind, lam, cl),
                math.nan, 0.0, 0.0)
    return _NO_RECT


def evaluate(family: TransformFamily, x):
    """Apply the transform to ``x`` (scalar or array)."""
    arr, scalar = _as_array(x)
    _check_bc_domain(family, arr)
    out = kernels.transform(arr, family.lam, _KIND_CODE[family.kind], *_rect_params(family))
    return float(out[0]) if scalar else out


def derivative(family: TransformFamily, x):
    """d/dx of :func:`evaluate`; strictly positive everywhere on the domain."""
    arr, scalar = _as_array(x)
    _check_bc_domain(family, arr)
    lam = family.lam
    cl, _, s_cl, cu, _, s_cu = _rect_params(family)
    out = np.empty_like(arr)
    lo = arr < cl if not math.isnan(cl) else np.zeros(arr.shape, bool)
    hi = arr > cu if not math.isnan(cu) else np.zeros(arr.shape, bool)
    mid = ~(lo | hi)
    xm = arr[mid]
    if family.kind == BOXCOX:
        out[mid] = xm ** (lam - 1.0)
    else:
        dm = np.empty_like(xm)
        pos = xm >= 0.0
        dm[pos] = (1.0 + xm[pos]) ** (lam - 1.0)
        dm[~pos] = (1.0 - xm[~pos]) ** (1.0 - lam)
        out[mid] = dm
    out[lo] = s_cl
    out[hi] = s_cu
    return float(out[0]) if scalar else out


def _plain_inverse(kind: str, lam: float, y: np.ndarray) -> np.ndarray:
    if lam == 1.0:  # affine member: keep it exact
        if kind != BOXCOX:
            return y.copy()
        bad = y <= -1.0
        if bad.any():
            where = np.flatnonzero(bad)
            raise TransformRangeError(
                f"{bad.sum()} value(s) outside the range of the boxcox transform "
                f"with lam=1.0 (first at position {where[0]})",
                positions=where,
            )
        return y + 1.0
    bad = np.zeros(y.shape, bool)
    out = np.empty_like(y)
    if kind == BOXCOX:
        if lam == 0.0:
            out = np.exp(y)
        else:
            arg = 1.0 + lam * y
            bad |= arg <= 0.0
            with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
                out = np.exp(np.log(arg) / lam)
    else:
        pos = y >= 0.0
        neg = ~pos
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            if lam == 0.0:
                out[pos] = np.expm1(y[pos])
            else:
                arg = 1.0 + lam * y[pos]
                bad[pos] |= arg <= 0.0
                out[pos] = np.expm1(np.log(arg) / lam)
            if lam == 2.0:
                out[neg] = -np.expm1(-y[neg])
            else:
                arg = 1.0 - (2.0 - lam) * y[neg]
                bad[neg] |= arg <= 0.0
                out[neg] = -np.expm1(np.log(arg) / (2.0 - lam))
    if bad.any():
        where = np.flatnonzero(bad)
        raise TransformRangeError(
            f"{bad.sum()} value(s) outside the range of the {kind} transform "
            f"with lam={lam} (first at position {where[0]})",
            positions=where,
        )
    return out


def inverse(family: TransformFamily, y):
    """Map ``y`` back through the transform; exact inverse of :func:`evaluate`.

    Plain transforms reject values outside their range; rectified ones are
    invertible on the whole real line on the rectified side.
    """
    arr, scalar = _as_array(y, what="y")
    lam = family.lam
    cl, g_cl, s_cl, cu, g_cu, s_cu = _rect_params(family)
    out = np.empty_like(arr)
    lo = arr < g_cl if not math.isnan(cl) else np.zeros(arr.shape, bool)
    hi = arr > g_cu if not math.isnan(cu) else np.zeros(arr.shape, bool)
    mid = ~(lo | hi)
    try:
        out[mid] = _plain_inverse(family.kind, lam, arr[mid])
    except TransformRangeError as err:
        # positions refer to the mid subset; translate to the caller's indexing
        err.positions = list(np.flatnonzero(mid)[err.positions])
        raise
    out[lo] = cl + (arr[lo] - g_cl) / s_cl
    out[hi] = cu + (arr[hi] - g_cu) / s_cu
    return float(out[0]) if scalar else out
