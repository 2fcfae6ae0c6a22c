"""Reference viscosity solutions and discrete error norms.

Convex problems use the Lax-Hopf minimization (dense scan plus bounded
Brent refinement), the smooth nonconvex ones follow characteristics, and
the Riemann problem minimizes over the fan of states.  Every oracle refuses
times outside the window where its construction is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from . import grid as gr


class OracleValidityError(ValueError):
    """The oracle is not exact at the requested time or point."""


@dataclass(frozen=True)
class OracleSpec:
    example: str
    method: str  # lax_hopf | characteristics | fixed_point | riemann_min
    fn: Callable
    t_min: float = 0.0
    t_max: float = math.inf
    t_max_inclusive: bool = True

    def valid(self, t: float) -> bool:
        if t < self.t_min:
            return False
        return t <= self.t_max if self.t_max_inclusive else t < self.t_max

    def __call__(self, *args):
        t = float(args[-1])
        if not self.valid(t):
            raise OracleValidityError(
                f"{self.method} oracle for {self.example} is exact only for "
                f"t in [{self.t_min}, {self.t_max}{']' if self.t_max_inclusive else ')'}"
                f", got t={t}")
        return self.fn(*args)


# {{{ Lax-Hopf

def lax_hopf_1d(g, L, x, t, radius, samples: int = 4096, refine: int = 3):
    """``min_y  t L((x - y)/t) + g(y)`` over ``|y - x| <= radius``.

    ``radius`` must bound the distance to the minimizer (finite
    propagation speed times ``t``).  The scan keeps the ``refine`` best
    local minima of the sampled objective and polishes each one with
    bounded Brent iterations; the smallest value found is returned.
    """
    if t < 0:
        raise OracleValidityError("Lax-Hopf needs t >= 0")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if t == 0:
        return g(x)
    out = np.empty_like(x)
    s = np.linspace(-radius, radius, samples)
    dy = s[1] - s[0]
    for i, xi in enumerate(x):
        y = xi + s
        f = t * L((xi - y) / t) + g(y)
        best = float(np.min(f))
        interior = np.flatnonzero((f[1:-1] <= f[:-2]) & (f[1:-1] <= f[2:])) + 1
        cand = np.concatenate([interior, [0, samples - 1]])
        cand = cand[np.argsort(f[cand], kind="stable")][:refine]
        obj = lambda yy: t * L((xi - yy) / t) + g(yy)
        for j in cand:
            a, b = y[max(j - 1, 0)], y[min(j + 1, samples - 1)]
            if b - a < 0.5 * dy:
                continue
            res = minimize_scalar(obj, bounds=(a, b), method="bounded",
                                  options={"xatol": 1e-12, "maxiter": 500})
            best = min(best, float(res.fun))
        out[i] = best
    return out

# }}}


# {{{ per-example solutions

def burgers1d_exact(x, t):
    return lax_hopf_1d(np.sin, lambda v: 0.5 * v * v, x, t, radius=1.05 * t + 1e-9)


def eikonal1d_exact(x, t):
    """``min sin(y)`` over ``[x - t, x + t]``."""
    if t < 0:
        raise OracleValidityError("needs t >= 0")
    x = np.asarray(x, dtype=float)
    a, b = x - t, x + t
    u = np.minimum(np.sin(a), np.sin(b))
    # an interior minimum of sin at 3pi/2 + 2k pi
    k = np.ceil((a - 1.5 * np.pi) / (2 * np.pi))
    hit = 1.5 * np.pi + 2 * np.pi * k <= b
    return np.where(hit, -1.0, u)


def _e3_residual(x0, x, t):
    return x0 + t * np.sin(np.pi * np.sin(np.pi * x0) + 1.0) - x


def _e3_dresidual(x0, t):
    p = np.pi * np.sin(np.pi * x0)
    return 1.0 + t * np.cos(p + 1.0) * np.pi ** 2 * np.cos(np.pi * x0)


def noncvx_cos_foot(x, t, tol=1e-14, maxiter=60):
    """Foot ``x0`` of the characteristic through ``(x, t)``."""
    x = float(x)
    if t == 0:
        return x
    lo, hi = x - t - 1e-9, x + t + 1e-9
    scan = np.linspace(lo, hi, 2049)
    r = _e3_residual(scan, x, t)
    changes = np.count_nonzero(np.sign(r[1:]) != np.sign(r[:-1]))
    if changes != 1 and not np.any(r == 0):
        raise OracleValidityError(f"found {changes} characteristic feet at x={x}")
    x0 = x
    for _ in range(maxiter):
        f = _e3_residual(x0, x, t)
        df = _e3_dresidual(x0, t)
        step = f / df
        nxt = x0 - step
        if not (lo <= nxt <= hi):
            break
        x0 = nxt
        if abs(step) < tol:
            return x0
    # bisection fallback
    a, b = lo, hi
    fa = _e3_residual(a, x, t)
    for _ in range(200):
        mid = 0.5 * (a + b)
        fm = _e3_residual(mid, x, t)
        if fm == 0 or b - a < 1e-15:
            break
        if np.sign(fm) == np.sign(fa):
            a, fa = mid, fm
        else:
            b = mid
    return 0.5 * (a + b)


def noncvx_cos_exact(x, t):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty_like(x)
    for i, xi in enumerate(x):
        x0 = noncvx_cos_foot(xi, t)
        p = np.pi * np.sin(np.pi * x0)
        out[i] = t * (np.sin(p + 1.0) * p + np.cos(p + 1.0)) - np.cos(np.pi * x0)
    return out


def quartic_flux(v):
    return 0.25 * (v * v - 1.0) * (v * v - 4.0)


def riemann_quartic_exact(x, t):
    """``t min_{v in [-2, 2]} (x/t) v - f(v)`` with ``f`` the quartic."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if t < 0:
        raise OracleValidityError("needs t >= 0")
    if t == 0:
        return -2.0 * np.abs(x)
    out = np.empty_like(x)
    for i, xi in enumerate(x):
        xi_t = xi / t
        roots = np.roots([1.0, 0.0, -2.5, -xi_t])
        cand = [-2.0, 2.0]
        for r in roots:
            if abs(r.imag) < 1e-9 and -2.0 <= r.real <= 2.0:
                v = r.real
                for _ in range(3):  # Newton polish of f'(v) = x/t
                    dv = (v ** 3 - 2.5 * v - xi_t) / (3 * v * v - 2.5)
                    if not np.isfinite(dv):
                        break
                    v = min(2.0, max(-2.0, v - dv))
                cand.append(v)
        v = np.asarray(cand)
        out[i] = t * np.min(xi_t * v - quartic_flux(v))
    return out


def burgers2d_exact(x, y, t):
    """Reduces to 1D Burgers in ``z = (x + y)/2`` with data ``-cos(2z)``."""
    z = 0.5 * (np.asarray(x, dtype=float) + np.asarray(y, dtype=float))
    shape = z.shape
    u = lax_hopf_1d(lambda s: -np.cos(2.0 * s), lambda v: 0.5 * v * v,
                    z.ravel(), t, radius=2.1 * t + 1e-9)
    return u.reshape(shape)


def xy_feet(x, y, t, tol=1e-15, maxiter=500):
    """Solve ``x0 = x + t sin(y0)``, ``y0 = y - t cos(x0)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x0, y0 = x.copy(), y.copy()
    for _ in range(maxiter):
        nx = x + t * np.sin(y0)
        ny = y - t * np.cos(nx)
        err = max(np.max(np.abs(nx - x0), initial=0.0),
                  np.max(np.abs(ny - y0), initial=0.0))
        x0, y0 = nx, ny
        if err < tol:
            return x0, y0
    # Newton fallback on G(x0, y0) = 0
    for _ in range(50):
        g1 = x0 - t * np.sin(y0) - x
        g2 = y0 + t * np.cos(x0) - y
        a, b = 1.0, -t * np.cos(y0)
        c, d = -t * np.sin(x0), 1.0
        det = a * d - b * c
        dx = (d * g1 - b * g2) / det
        dy = (-c * g1 + a * g2) / det
        x0, y0 = x0 - dx, y0 - dy
        if max(np.max(np.abs(dx)), np.max(np.abs(dy))) < tol:
            return x0, y0
    raise OracleValidityError("characteristic feet did not converge")


def xy_nonconvex_exact(x, y, t):
    x0, y0 = xy_feet(x, y, t)
    p1, p2 = np.cos(x0), -np.sin(y0)
    return t * p1 * p2 + np.sin(x0) + np.cos(y0)


ORACLES = {
    "burgers1d": OracleSpec("burgers1d", "lax_hopf", burgers1d_exact),
    "eikonal1d": OracleSpec("eikonal1d", "lax_hopf", eikonal1d_exact),
    "noncvx-cos": OracleSpec("noncvx-cos", "characteristics", noncvx_cos_exact,
                             0.0, 1.0 / np.pi ** 2, False),
    "riemann-quartic": OracleSpec("riemann-quartic", "riemann_min",
                                  riemann_quartic_exact),
    "burgers2d": OracleSpec("burgers2d", "lax_hopf", burgers2d_exact),
    "xy-nonconvex": OracleSpec("xy-nonconvex", "fixed_point", xy_nonconvex_exact,
                               0.0, 0.5, True),
}


def get_oracle(example: str) -> Optional[OracleSpec]:
    return ORACLES.get(example)

# }}}


# {{{ norms

def norms(errors, h, dim: int):
    """h-weighted discrete ``(L1, L2, Linf)`` of nodal errors."""
    e = np.abs(np.asarray(errors, dtype=float)).ravel()
    w = float(np.prod(h)) if np.ndim(h) else float(h) ** dim
    if e.size == 0:
        return 0.0, 0.0, 0.0
    return float(w * e.sum()), float(math.sqrt(w * np.sum(e * e))), float(e.max())


def physical_values(field: gr.NodeField, grid: gr.GridSpec):
    """Node coordinates and values of ``field`` inside the physical window."""
    sl = grid.physical_slice(field.which)
    vals = field.values()[sl]
    pts = grid.coords(field.which)
    if grid.dim == 1:
        return (pts[sl],), vals
    return tuple(p[sl] for p in pts), vals


def error_norms(field: gr.NodeField, oracle: OracleSpec, grid: gr.GridSpec,
                t: float):
    pts, vals = physical_values(field, grid)
    exact = oracle(*pts, t)
    return norms(vals - exact, grid.h, grid.dim)

# }}}
