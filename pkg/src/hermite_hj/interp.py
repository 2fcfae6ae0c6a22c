"""Two-point Hermite interpolation on the reference cell.

Node data are scaled Taylor coefficients ``c_l = h^l/l! * d^l v`` of degree
``m`` at the two cell ends ``xi = -1/2`` and ``xi = +1/2``.  The unique
polynomial ``sum_k d_k xi^k`` of degree ``2m+1`` matching them is obtained
from one dense ``(2m+2)``-square matrix which depends on ``m`` only.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

from .taylor import TaylorCoeffs1D, TaylorCoeffs2D


@dataclass(frozen=True)
class InterpOperator:
    m: int
    M: np.ndarray  # (2m+2, 2m+2): [left dofs; right dofs] -> d_0..d_{2m+1}

    @property
    def K(self):
        return 2 * self.m + 1


def condition_matrix(m: int) -> np.ndarray:
    """Rows give the scaled l-th derivative of ``sum d_k xi^k`` at the ends."""
    K = 2 * m + 1
    A = np.zeros((K + 1, K + 1))
    for side, s in enumerate((-0.5, 0.5)):
        for l in range(m + 1):
            for k in range(l, K + 1):
                A[side * (m + 1) + l, k] = comb(k, l) * s ** (k - l)
    return A


@lru_cache(maxsize=None)
def build_operator(m: int) -> InterpOperator:
    if m < 0:
        raise ValueError("m must be nonnegative")
    A = condition_matrix(m)
    M = np.linalg.solve(A, np.eye(A.shape[0]))
    residual = np.max(np.abs(A @ M - np.eye(A.shape[0])))
    assert residual < 1e-12, f"interpolation operator residual {residual:.3e}"
    M.setflags(write=False)
    return InterpOperator(m, M)


def apply_1d(op: InterpOperator, left, right, axis=-1):
    """Batched interpolation along ``axis`` (length m+1 -> 2m+2)."""
    left = np.moveaxis(np.asarray(left), axis, -1)
    right = np.moveaxis(np.asarray(right), axis, -1)
    stacked = np.concatenate([left, right], axis=-1)
    out = stacked @ op.M.T
    return np.moveaxis(out, -1, axis)


def apply_2d(op: InterpOperator, c00, c10, c01, c11):
    """Batched tensor interpolation from the four corner DOF tensors.

    ``cXY`` sits at corner (x side X, y side Y), 0 meaning low.  Shapes end
    in ``(m+1, m+1)``; the result ends in ``(2m+2, 2m+2)``.  The y direction
    is interpolated first along the two x-edges, then x.
    """
    low = apply_1d(op, c00, c01, axis=-1)
    high = apply_1d(op, c10, c11, axis=-1)
    return apply_1d(op, low, high, axis=-2)


def interpolate_1d(op: InterpOperator, left: TaylorCoeffs1D,
                   right: TaylorCoeffs1D) -> TaylorCoeffs1D:
    h = left.h
    if not np.isclose(right.h, h):
        raise ValueError("node data must share the same scaling h")
    if not np.isclose(right.center - left.center, h, rtol=1e-12, atol=1e-12 * h):
        raise ValueError("left and right nodes must be adjacent at distance h")
    if left.K != op.m or right.K != op.m:
        raise ValueError(f"node data must have degree m={op.m}")
    d = apply_1d(op, left.coeffs, right.coeffs)
    return TaylorCoeffs1D(d, h, 0.5 * (left.center + right.center))


def interpolate_2d(op: InterpOperator, corners) -> TaylorCoeffs2D:
    """Corners ordered (x_lo,y_lo), (x_hi,y_lo), (x_lo,y_hi), (x_hi,y_hi)."""
    c00, c10, c01, c11 = corners
    hx, hy = c00.hx, c00.hy
    x0, y0 = c00.center
    expected = [(x0, y0), (x0 + hx, y0), (x0, y0 + hy), (x0 + hx, y0 + hy)]
    for c, (ex, ey) in zip(corners, expected):
        if c.K != op.m:
            raise ValueError(f"corner data must have degree m={op.m}")
        if not (np.isclose(c.hx, hx) and np.isclose(c.hy, hy)):
            raise ValueError("corner data must share the cell scaling")
        if not (np.isclose(c.center[0], ex, atol=1e-12 * hx)
                and np.isclose(c.center[1], ey, atol=1e-12 * hy)):
            raise ValueError("corners do not form an hx-by-hy cell")
    d = apply_2d(op, c00.coeffs, c10.coeffs, c01.coeffs, c11.coeffs)
    return TaylorCoeffs2D(d, hx, hy, (x0 + 0.5 * hx, y0 + 0.5 * hy))
