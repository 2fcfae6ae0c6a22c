"""Half-step cycle of the staggered Hermite scheme.

A full step moves the solution primal -> dual -> primal, each leg covering
half of the time step.  One leg:

1. exchange ghosts and gather the end (corner) node data of every
   destination cell;
2. Hermite-interpolate the degree-m DOFs to a degree-(2m+1) cell polynomial;
3. refresh ``lambda`` from the interpolants, sense each cell's window and
   turn the decay rates into an averaged viscosity;
4. integrate ``d' = -H(v_x[, v_y]) + kappa * Laplacian(v)`` on every cell
   with classical RK4 and store the result at the destination node.

Steps 1-3 read the source field only; step 4 writes only the destination.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from . import grid as gr
from . import interp
from . import sensor as sn
from .taylor import diff_array

EPS_SPEED = 1e-12


class BlowUpError(RuntimeError):
    """Raised when a cell polynomial stops being finite."""


class ViscousRestrictionError(BlowUpError):
    """The explicit viscous term would be unstable with the current step.

    With default settings this only happens once ``lambda`` has grown far
    beyond its initial value, i.e. the run is already diverging.
    """


@dataclass(frozen=True)
class StepConfig:
    m: int
    tfinal: float
    cfl: float = 0.25
    dt: Optional[float] = None
    substeps: int = 1
    sensor: bool = True
    nu0_scale: float = 1.0
    threads: int = 1
    sensor_cfg: Optional[sn.SensorConfig] = None

    def __post_init__(self):
        if self.tfinal < 0:
            raise ValueError("final time must be nonnegative")
        if self.cfl <= 0 or (self.dt is not None and self.dt <= 0):
            raise ValueError("CFL number and dt must be positive")
        if self.substeps < 1 or self.threads < 1:
            raise ValueError("substeps and threads must be at least 1")
        if self.sensor_cfg is None:
            object.__setattr__(self, "sensor_cfg", sn.SensorConfig(self.m))
        elif self.sensor_cfg.m != self.m:
            raise ValueError("sensor configuration has a different m")


@dataclass
class Diagnostics:
    rows: List[dict] = field(default_factory=list)

    def record(self, **row):
        self.rows.append(row)

    def columns(self):
        cols = []
        for r in self.rows:
            cols.extend(k for k in r if k not in cols)
        return cols


# {{{ local ODE

def cell_rhs(d, model, kappa, h, center=None, t=0.0):
    """``b = -H(grad v) + kappa * Laplacian(v)`` as coefficient series.

    ``d`` has shape ``(..., K+1)`` in 1D or ``(..., K+1, K+1)`` in 2D.
    ``kappa`` is ``None`` or broadcastable to the batch shape.
    """
    d = np.asarray(d, dtype=float)
    if model.dim == 1:
        vx = diff_array(d, h[0])
        b = -model.series_of_H(vx, None, center, h, t)
        if kappa is not None:
            b += np.asarray(kappa)[..., None] * diff_array(vx, h[0])
        return b
    vx = diff_array(d, h[0], axis=-2)
    vy = diff_array(d, h[1], axis=-1)
    b = -model.series_of_H(vx, vy, center, h, t)
    if kappa is not None:
        lap = diff_array(vx, h[0], axis=-2) + diff_array(vy, h[1], axis=-1)
        b += np.asarray(kappa)[..., None, None] * lap
    return b


def rk4_evolve_cell(d0, model, kappa, dt, nsub, h, center=None, t0=0.0):
    """``nsub`` classical RK4 steps of size ``dt / nsub``."""
    if dt <= 0:
        raise ValueError("time step must be positive")
    d = np.array(d0, dtype=float)
    k = dt / nsub
    t = t0
    for i in range(nsub):
        k1 = cell_rhs(d, model, kappa, h, center, t)
        k2 = cell_rhs(d + 0.5 * k * k1, model, kappa, h, center, t + 0.5 * k)
        k3 = cell_rhs(d + 0.5 * k * k2, model, kappa, h, center, t + 0.5 * k)
        k4 = cell_rhs(d + k * k3, model, kappa, h, center, t + k)
        d = d + (k / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = t0 + k * (i + 1)
    if not np.all(np.isfinite(d)):
        flat = d.reshape(d.shape[:-model.dim] + (-1,))
        bad = np.argwhere((~np.isfinite(flat)).any(axis=-1))
        raise BlowUpError(f"non-finite cell polynomial near t={t0 + dt:.6g}, "
                          f"first cell index {tuple(int(v) for v in bad[0])}")
    return d

# }}}


# {{{ half step

@dataclass
class HalfStepInfo:
    lam: float
    nu0: float
    max_kappa: float
    active: int
    s: Optional[np.ndarray] = None
    nu: Optional[np.ndarray] = None
    kappa: Optional[np.ndarray] = None


def _cell_centers(grid, which_dst, index):
    c = grid.coords(which_dst)
    if grid.dim == 1:
        return c[index]
    return tuple(a[index] for a in c)


def _chunks(n, parts):
    edges = np.linspace(0, n, min(parts, n) + 1).round().astype(int)
    return [slice(a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _evolve(d, model, kappa, dt, cfg, h, center, t):
    if cfg.threads == 1 or d.shape[0] < 2:
        return rk4_evolve_cell(d, model, kappa, dt, cfg.substeps, h, center, t)
    parts = _chunks(d.shape[0], cfg.threads)

    def work(sl):
        kap = None if kappa is None else kappa[sl]
        cen = None if center is None else (
            center[sl] if model.dim == 1 else tuple(c[sl] for c in center))
        return rk4_evolve_cell(d[sl], model, kap, dt, cfg.substeps, h, cen, t)

    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        pieces = list(pool.map(work, parts))
    return np.concatenate(pieces, axis=0)


def interpolate_cells(ext: gr.Extended, m: int, dim: int):
    op = interp.build_operator(m)
    if dim == 1:
        left, right = ext.ends
        return interp.apply_1d(op, left[..., :m + 1], right[..., :m + 1])
    c00, c10, c01, c11 = (c[..., :m + 1, :m + 1] for c in ext.ends)
    return interp.apply_2d(op, c00, c10, c01, c11)


def gradient_at_centers(d, h, dim):
    if dim == 1:
        return d[..., 1] / h[0], None
    return d[..., 1, 0] / h[0], d[..., 0, 1] / h[1]


def sense(ext: gr.Extended, d, model, grid, cfg: StepConfig, centers,
          periodic: bool):
    """Decay rates, raw and averaged viscosity for every destination cell."""
    p, q = gradient_at_centers(d, grid.h, grid.dim)
    if grid.dim == 1:
        nu0, lam = sn.nu0_and_lambda(model, p, None, centers, None, grid.h,
                                     cfg.m, cfg.nu0_scale)
    else:
        nu0, lam = sn.nu0_and_lambda(model, p, q, centers[0], centers[1],
                                     grid.h, cfg.m, cfg.nu0_scale)
    if not cfg.sensor:
        return HalfStepInfo(lam, nu0, 0.0, 0)
    if grid.dim == 1:
        s = sn.decay_rate_1d(ext.ends[0], ext.ends[1], cfg.sensor_cfg)
    else:
        s = sn.decay_rate_2d(ext.ends, cfg.sensor_cfg)
    nu = np.asarray(sn.viscosity_of_s(s, nu0, cfg.sensor_cfg))
    kappa = sn.average_viscosity(nu, periodic=periodic)
    return HalfStepInfo(lam, nu0, float(np.max(kappa, initial=0.0)),
                        int(np.count_nonzero(nu)), s, nu, kappa)


def half_step(field: gr.NodeField, grid: gr.GridSpec, model, cfg: StepConfig,
              dt: float, t: float, mode: gr.BoundaryMode = gr.Periodic()):
    """Advance ``field`` by ``dt`` onto the opposite node set.

    Returns ``(new_field, info)``.
    """
    dst = gr.other(field.which)
    ext = gr.ghost_exchange(field, grid, mode, t)
    d = interpolate_cells(ext, cfg.m, grid.dim)
    centers = _cell_centers(grid, dst, ext.dst_index)
    info = sense(ext, d, model, grid, cfg, centers, grid.periodic)

    kappa = None
    if cfg.sensor and info.max_kappa > 0.0:
        kappa = info.kappa
        hmin = min(grid.h)
        ratio = info.nu0 * (dt / cfg.substeps) / hmin ** 2
        if ratio > 1.0:
            raise ViscousRestrictionError(f"viscous step restriction violated "
                                          f"(nu0 dt / h^2 = {ratio:.3g}); "
                                          f"lower the CFL")
    poly = np.zeros(grid.shape(dst) + d.shape[grid.dim:])
    if isinstance(mode, gr.PaddedOutflow) and mode.freezes:
        live = ~mode.frozen_mask(grid, dst)
        cen = tuple(c[live] for c in centers) if grid.dim == 2 else centers[live]
        kap = None if kappa is None else kappa[live]
        poly[live] = _evolve(d[live], model, kap, dt, cfg, grid.h, cen, t)
    else:
        poly[ext.dst_index] = _evolve(d, model, kappa, dt, cfg, grid.h,
                                      centers, t)
    out = gr.NodeField(dst, cfg.m, poly, None, t + dt)
    gr.extend_outflow(out, grid, mode)
    gr.fill_boundary(out, grid, mode, t + dt)
    return out, info

# }}}


# {{{ driver

def initial_speed(field: gr.NodeField, grid: gr.GridSpec, model) -> float:
    polys = [field.poly] if field.sided is None else list(
        field.sided.reshape((-1,) + field.poly.shape))
    lam = 0.0
    pts = grid.coords(field.which)
    for p in polys:
        vx, vy = gradient_at_centers(p, grid.h, grid.dim)
        if grid.dim == 1:
            lam = max(lam, sn.max_speed(model, vx, None, pts, None))
        else:
            lam = max(lam, sn.max_speed(model, vx, vy, pts[0], pts[1]))
    return lam


def auto_substeps(m: int, n: int, n_ref: int, base: int = 4) -> int:
    """RK4 substeps that keep the time error below the spatial error.

    With ``dt`` proportional to ``h`` the RK4 error per cell decays like
    ``h^4`` while the spatial error decays like ``h^(2m+1)``; refining the
    substep by ``(n / n_ref)^((2m+1)/4 - 1)`` keeps the two in balance.
    """
    if n < 1 or n_ref < 1 or base < 1:
        raise ValueError("n, n_ref and base must be positive")
    p = max(0.0, (2 * m + 1) / 4.0 - 1.0)
    return max(1, math.ceil(base * (n / n_ref) ** p - 1e-9))


def time_step(field, grid, model, cfg: StepConfig):
    """Uniform full step landing exactly on ``tfinal`` and the step count."""
    if cfg.tfinal == 0:
        return 0.0, 0
    if cfg.dt is not None:
        dt = cfg.dt
    else:
        lam0 = initial_speed(field, grid, model)
        dt = cfg.cfl * min(grid.h) / max(lam0, EPS_SPEED)
    nsteps = max(1, math.ceil(cfg.tfinal / dt - 1e-12))
    return cfg.tfinal / nsteps, nsteps


def run(field0: gr.NodeField, grid: gr.GridSpec, model, cfg: StepConfig,
        mode: gr.BoundaryMode = gr.Periodic(),
        error_fn: Optional[Callable] = None, progress: Optional[Callable] = None):
    """Integrate to ``cfg.tfinal``; returns ``(field, diagnostics)``.

    ``error_fn(field, t)``, when given, is called after every full step and
    its ``(L1, L2, Linf)`` tuple is added to the diagnostics row.
    """
    if field0.which != gr.PRIMAL:
        raise ValueError("runs start from primal data")
    diag = Diagnostics()
    dt, nsteps = time_step(field0, grid, model, cfg)
    field = field0
    t = field0.t
    for step in range(nsteps):
        t_start = field0.t + step * dt
        mid, a = half_step(field, grid, model, cfg, 0.5 * dt, t_start, mode)
        field, b = half_step(mid, grid, model, cfg, 0.5 * dt,
                             t_start + 0.5 * dt, mode)
        t = field0.t + (step + 1) * dt
        field.t = t
        row = dict(t=t, lam=max(a.lam, b.lam),
                   max_kappa=max(a.max_kappa, b.max_kappa),
                   n_active=max(a.active, b.active))
        if error_fn is not None:
            e1, e2, einf = error_fn(field, t)
            row.update(L1=e1, L2=e2, Linf=einf)
        diag.record(**row)
        if progress is not None:
            progress(step + 1, nsteps, t)
    return field, diag

# }}}
