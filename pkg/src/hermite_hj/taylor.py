"""Truncated Taylor series arithmetic in one and two variables.

Coefficients are scaled: a 1D series ``c`` on a cell with center ``x_c`` and
width ``h`` represents ``sum_k c[k] * ((x - x_c) / h) ** k``.  In 2D the
tensor ``c[kx, ky]`` multiplies ``xi ** kx * eta ** ky``.

The ``*_array`` kernels operate on numpy arrays whose trailing axis (1D) or two
trailing axes (2D) hold the coefficients; any leading axes are batch axes.
This is what the solver calls, one vectorized sweep over all cells.  The
dataclass wrappers below give a small object API for single polynomials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

ArrayOrFn = Union[np.ndarray, Callable[[np.ndarray], np.ndarray]]


# {{{ array kernels

def diff_array(c, h, axis=-1):
    """Differentiate a scaled series along ``axis``; keeps the length."""
    c = np.asarray(c)
    c = np.moveaxis(c, axis, -1)
    K = c.shape[-1] - 1
    out = np.zeros_like(c)
    if K > 0:
        k = np.arange(1, K + 1, dtype=float)
        out[..., :K] = c[..., 1:] * k / h
    return np.moveaxis(out, -1, axis)


def product_array(a, b, ndim=1):
    """Truncated Cauchy product of two series with identical shapes."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape[-ndim:] != b.shape[-ndim:]:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if ndim not in (1, 2):
        raise ValueError(f"ndim must be 1 or 2, got {ndim}")
    shape = np.broadcast_shapes(a.shape, b.shape)
    a, b = np.broadcast_to(a, shape), np.broadcast_to(b, shape)
    # coefficient axes first: each update then runs over contiguous cells
    axes = tuple(range(-ndim, 0))
    front = tuple(range(ndim))
    A = np.ascontiguousarray(np.moveaxis(a, axes, front))
    B = np.ascontiguousarray(np.moveaxis(b, axes, front))
    out = np.zeros(A.shape, dtype=np.result_type(a, b))
    if ndim == 1:
        n = A.shape[0]
        for i in range(n):
            out[i:] += A[i] * B[:n - i]
    else:
        nx, ny = A.shape[:2]
        for i in range(nx):
            for j in range(ny):
                out[i:, j:] += A[i, j] * B[:nx - i, :ny - j]
    return np.moveaxis(out, front, axes)


def _recursion_axis(kx, ky):
    return 0 if kx > 0 else 1


def _weighted_sum_1d(u, w, k):
    # sum_{j=1}^{k} j u_j w_{k-j}
    j = np.arange(1, k + 1, dtype=float)
    return np.sum(j * u[..., 1:k + 1] * w[..., k - 1::-1], axis=-1)


def _weighted_sum_2d(u, w, kx, ky):
    # sum over j <= k of j_p u_j w_{k-j}, p the first axis with k_p > 0
    p = _recursion_axis(kx, ky)
    if p == 0:
        weight = np.arange(kx + 1, dtype=float)[:, None]
    else:
        weight = np.arange(ky + 1, dtype=float)[None, :]
    ub = u[..., :kx + 1, :ky + 1]
    wb = w[..., kx::-1, ky::-1]
    return np.sum(weight * ub * wb, axis=(-2, -1)), (kx, ky)[p]


def _indices(shape, ndim):
    if ndim == 1:
        return [(k,) for k in range(1, shape[-1])]
    nx, ny = shape[-2:]
    return [(kx, ky) for kx in range(nx) for ky in range(ny) if kx or ky]


def _origin(ndim):
    return (Ellipsis,) + (0,) * ndim


def lift_array(u, w: ArrayOrFn, f0, ndim=1):
    """Series of ``f(u)`` for any ``f`` with ``f' = w * u'``.

    ``w`` is either the full series of ``f'(u)`` or a callable that receives
    the partially filled output and returns the ``w`` series; entries of
    ``w`` needed at step ``k`` only involve indices below ``k`` (plus the
    constant), so e.g. ``w=lambda F: F`` produces ``exp(u)``.
    """
    u = np.asarray(u, dtype=float)
    F = np.zeros_like(u)
    F[_origin(ndim)] = f0
    for k in _indices(u.shape, ndim):
        W = w(F) if callable(w) else np.asarray(w)
        if ndim == 1:
            F[..., k[0]] = _weighted_sum_1d(u, W, k[0]) / k[0]
        else:
            s, kp = _weighted_sum_2d(u, W, *k)
            F[(Ellipsis,) + k] = s / kp
    return F


def sincos_array(u, ndim=1):
    """Series of ``sin(u)`` and ``cos(u)`` via the coupled recursion."""
    u = np.asarray(u, dtype=float)
    S = np.zeros_like(u)
    C = np.zeros_like(u)
    u0 = u[_origin(ndim)]
    S[_origin(ndim)] = np.sin(u0)
    C[_origin(ndim)] = np.cos(u0)
    for k in _indices(u.shape, ndim):
        if ndim == 1:
            kk = k[0]
            S[..., kk] = _weighted_sum_1d(u, C, kk) / kk
            C[..., kk] = -_weighted_sum_1d(u, S, kk) / kk
        else:
            s, kp = _weighted_sum_2d(u, C, *k)
            c, _ = _weighted_sum_2d(u, S, *k)
            S[(Ellipsis,) + k] = s / kp
            C[(Ellipsis,) + k] = -c / kp
    return S, C


def abs_array(u, ndim=1):
    """|u| with the branch frozen by the sign of the constant term."""
    u = np.asarray(u, dtype=float)
    sign = np.where(u[_origin(ndim)] >= 0, 1.0, -1.0)
    return u * sign[(Ellipsis,) + (None,) * ndim]


def evaluate_array(c, xi, eta=None):
    """Horner evaluation at scaled local coordinates (broadcasting)."""
    c = np.asarray(c)
    if eta is None:
        out = np.zeros(np.broadcast_shapes(c.shape[:-1], np.shape(xi)))
        for k in range(c.shape[-1] - 1, -1, -1):
            out = out * xi + c[..., k]
        return out
    out = 0.0
    for kx in range(c.shape[-2] - 1, -1, -1):
        row = 0.0
        for ky in range(c.shape[-1] - 1, -1, -1):
            row = row * eta + c[..., kx, ky]
        out = out * xi + row
    return out


def coordinate_series(center, h, K):
    """Series of the coordinate ``x`` itself on a cell: ``[x_c, h, 0, ...]``."""
    center = np.asarray(center, dtype=float)
    out = np.zeros(center.shape + (K + 1,))
    out[..., 0] = center
    if K >= 1:
        out[..., 1] = h
    return out


def scaled_taylor(derivatives, h):
    """Scale raw derivatives ``f^(k)`` into ``h^k / k! * f^(k)``."""
    derivatives = np.asarray(derivatives, dtype=float)
    K = derivatives.shape[-1] - 1
    scale = np.array([h ** k / math.factorial(k) for k in range(K + 1)])
    return derivatives * scale

# }}}


# {{{ object API

@dataclass(frozen=True)
class TaylorCoeffs1D:
    coeffs: np.ndarray
    h: float = 1.0
    center: float = 0.0

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("1D coefficients must be a nonempty vector")
        if not self.h > 0:
            raise ValueError("cell width must be positive")
        object.__setattr__(self, "coeffs", c)

    @property
    def K(self):
        return self.coeffs.size - 1

    def like(self, coeffs):
        return TaylorCoeffs1D(coeffs, self.h, self.center)

    def __call__(self, x):
        return evaluate(self, x)


@dataclass(frozen=True)
class TaylorCoeffs2D:
    coeffs: np.ndarray
    hx: float = 1.0
    hy: float = 1.0
    center: tuple = (0.0, 0.0)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValueError("2D coefficients must be a square tensor")
        if not (self.hx > 0 and self.hy > 0):
            raise ValueError("cell widths must be positive")
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "center", tuple(float(v) for v in self.center))

    @property
    def K(self):
        return self.coeffs.shape[0] - 1

    def like(self, coeffs):
        return TaylorCoeffs2D(coeffs, self.hx, self.hy, self.center)

    def __call__(self, x, y):
        return evaluate(self, (x, y))


TaylorCoeffs = Union[TaylorCoeffs1D, TaylorCoeffs2D]


def _ndim(p):
    return 1 if isinstance(p, TaylorCoeffs1D) else 2


def _check_compatible(a, b):
    if type(a) is not type(b) or a.coeffs.shape != b.coeffs.shape:
        raise ValueError("series must have the same kind and shape")
    if isinstance(a, TaylorCoeffs1D):
        same = math.isclose(a.h, b.h)
    else:
        same = math.isclose(a.hx, b.hx) and math.isclose(a.hy, b.hy)
    if not same:
        raise ValueError("series must share the cell scaling")


def diff(p: TaylorCoeffs1D) -> TaylorCoeffs1D:
    return p.like(diff_array(p.coeffs, p.h))


def diff2d(p: TaylorCoeffs2D, axis: int) -> TaylorCoeffs2D:
    if axis not in (0, 1):
        raise ValueError("axis must be 0 (x) or 1 (y)")
    h = p.hx if axis == 0 else p.hy
    return p.like(diff_array(p.coeffs, h, axis=axis))


def evaluate(p: TaylorCoeffs, point) -> float:
    if isinstance(p, TaylorCoeffs1D):
        return evaluate_array(p.coeffs, (np.asarray(point) - p.center) / p.h)
    x, y = point
    xi = (np.asarray(x) - p.center[0]) / p.hx
    eta = (np.asarray(y) - p.center[1]) / p.hy
    return evaluate_array(p.coeffs, xi, eta)


def cauchy_product(a: TaylorCoeffs, b: TaylorCoeffs) -> TaylorCoeffs:
    _check_compatible(a, b)
    return a.like(product_array(a.coeffs, b.coeffs, _ndim(a)))


def ddot(A, B, k: int) -> float:
    """``(1/k) * sum_{j=0}^{k-1} j * A[j] * B[k-j]``."""
    A = np.asarray(getattr(A, "coeffs", A))
    B = np.asarray(getattr(B, "coeffs", B))
    if k < 1:
        raise ValueError("ddot is defined for k >= 1")
    if k > min(A.shape[-1], B.shape[-1]) - 1:
        raise ValueError("k exceeds the series length")
    j = np.arange(k)
    return float(np.sum(j * A[j] * B[k - j]) / k)


def lift_fprime_w(u: TaylorCoeffs, w, f0: float) -> TaylorCoeffs:
    """Series of ``f(u)`` given the series (or a rule) for ``w = f'(u)``."""
    if isinstance(w, (TaylorCoeffs1D, TaylorCoeffs2D)):
        _check_compatible(u, w)
        w = w.coeffs
    elif not callable(w):
        w = np.asarray(w, dtype=float)
        if w.shape != u.coeffs.shape:
            raise ValueError("w must match the shape of u")
    return u.like(lift_array(u.coeffs, w, f0, _ndim(u)))


def sincos(u: TaylorCoeffs):
    S, C = sincos_array(u.coeffs, _ndim(u))
    return u.like(S), u.like(C)


def abs_approx(u: TaylorCoeffs) -> TaylorCoeffs:
    return u.like(abs_array(u.coeffs, _ndim(u)))

# }}}
