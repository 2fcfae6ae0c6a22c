"""Built-in problems: domain, initial data, boundary treatment, defaults.

Initial data expose ``derivatives(x[, y], order, side=None)`` returning raw
partial derivatives up to ``order`` (per direction) in the trailing axis
(axes).  Data with kinks on grid nodes set ``node_kinks`` and honour
``side`` (``+1``/``-1`` per direction) to return one-sided limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from . import grid as gr
from . import oracle as orc


def _trig_derivs(fn, x, order, scale=1.0, phase=0.0):
    """k-th derivatives of ``fn(scale x + phase)`` for fn in {sin, cos}."""
    x = np.asarray(x, dtype=float)
    k = np.arange(order + 1)
    arg = scale * x[..., None] + phase + k * np.pi / 2
    return fn(arg) * scale ** k


def _one_sided_sign(x, side):
    s = np.sign(np.asarray(x, dtype=float))
    if side is None:
        return s
    return np.where(s == 0, float(side), s)


@dataclass(frozen=True)
class Sin1D:
    def derivatives(self, x, order, side=None):
        return _trig_derivs(np.sin, x, order)


@dataclass(frozen=True)
class NegCosPi:
    """``-cos(pi x)``."""
    def derivatives(self, x, order, side=None):
        return -_trig_derivs(np.cos, x, order, np.pi)


@dataclass(frozen=True)
class NegTwoAbs:
    """``-2|x|``; the kink sits on a node for even cell counts."""
    node_kinks: bool = True

    def derivatives(self, x, order, side=None):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape + (order + 1,))
        out[..., 0] = -2.0 * np.abs(x)
        if order >= 1:
            out[..., 1] = -2.0 * _one_sided_sign(x, side)
        return out


@dataclass(frozen=True)
class NegCosSum:
    """``-cos(x + y)``."""
    def derivatives(self, x, y, order, side=None):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        k = np.arange(order + 1)
        arg = (x + y)[..., None, None] + (k[:, None] + k[None, :]) * np.pi / 2
        return -np.cos(arg)


@dataclass(frozen=True)
class SinPlusCos:
    """``sin(x) + cos(y)``."""
    def derivatives(self, x, y, order, side=None):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        out = np.zeros(x.shape + (order + 1, order + 1))
        out[..., :, 0] = _trig_derivs(np.sin, x, order)
        out[..., 0, :] += _trig_derivs(np.cos, y, order)
        return out


@dataclass(frozen=True)
class AbsDifference:
    """``pi (|y| - |x|)``; kinks along both axes."""
    node_kinks: bool = True

    def derivatives(self, x, y, order, side=None):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        sx, sy = (None, None) if side is None else side
        out = np.zeros(x.shape + (order + 1, order + 1))
        out[..., 0, 0] = np.pi * (np.abs(y) - np.abs(x))
        if order >= 1:
            out[..., 1, 0] = -np.pi * _one_sided_sign(x, sx)
            out[..., 0, 1] = np.pi * _one_sided_sign(y, sy)
        return out


@dataclass(frozen=True)
class Zero:
    dim: int = 2

    def derivatives(self, *args, side=None):
        *pts, order = args
        pts = np.broadcast_arrays(*[np.asarray(p, float) for p in pts])
        return np.zeros(pts[0].shape + (order + 1,) * len(pts))


@dataclass(frozen=True)
class Example:
    id: str
    dim: int
    bounds: tuple
    initial: object
    tfinal: float
    ladder: tuple
    boundary: str = "periodic"  # periodic | dirichlet | padded
    alt_ladder: Optional[tuple] = None
    notes: str = ""
    cfl: tuple = ()  # (m, cfl) pairs overriding DEFAULT_CFL
    substeps: Optional[int] = None  # fixed RK4 substeps; None = auto rule
    nu0_scale: tuple = ()  # (m, scale) pairs overriding 1

    @property
    def oracle(self) -> Optional[orc.OracleSpec]:
        return orc.get_oracle(self.id)

    def default_cfl(self, m: int) -> float:
        return dict(self.cfl).get(m, DEFAULT_CFL)

    def default_nu0_scale(self, m: int) -> float:
        return dict(self.nu0_scale).get(m, 1.0)


TWO_PI = 2.0 * np.pi
DEFAULT_CFL = 0.25

EXAMPLES = {
    "burgers1d": Example("burgers1d", 1, (0.0, TWO_PI), Sin1D(), 0.5,
                         (20, 40, 80, 160),
                         notes="kink forms at t = 1; use tfinal 1.5 past it"),
    "eikonal1d": Example("eikonal1d", 1, (0.0, TWO_PI), Sin1D(), 1.0,
                         (20, 40, 80, 160), substeps=1),
    "noncvx-cos": Example("noncvx-cos", 1, (-1.0, 1.0), NegCosPi(),
                          0.5 / np.pi ** 2, (20, 40, 80, 160)),
    "riemann-quartic": Example("riemann-quartic", 1, (-1.0, 1.0), NegTwoAbs(),
                               1.0, (41, 81, 161, 321), "dirichlet",
                               alt_ladder=(40, 80, 160, 320),
                               notes="at m=3 and CFL >= 0.2 the cell ODE next "
                                     "to the initial kink blows up",
                               cfl=((3, 0.1),), substeps=1),
    "burgers2d": Example("burgers2d", 2, (0.0, TWO_PI, 0.0, TWO_PI), NegCosSum(),
                         0.1, (10, 20, 40, 80)),
    "xy-nonconvex": Example("xy-nonconvex", 2, (-np.pi, np.pi, -np.pi, np.pi),
                            SinPlusCos(), 0.5, (10, 20, 40, 80)),
    "riemann-sin2d": Example("riemann-sin2d", 2, (-1.0, 1.0, -1.0, 1.0),
                             AbsDifference(), 1.0, (20,), "padded",
                             notes="the cell ODE at the origin blows up for "
                                   "m=2 above CFL 0.1 and m=3 above 0.05; "
                                   "m=3 needs the extra viscosity to stay "
                                   "accurate at CFL 0.025",
                             cfl=((2, 0.1), (3, 0.025)), substeps=1,
                             nu0_scale=((3, 4.0),)),
    "optimal-control": Example("optimal-control", 2,
                               (-np.pi, np.pi, -np.pi, np.pi), Zero(), 1.0,
                               (40,)),
}


def get_example(example_id: str) -> Example:
    try:
        return EXAMPLES[example_id]
    except KeyError:
        raise ValueError(f"unknown example {example_id!r}; "
                         f"choose from {sorted(EXAMPLES)}") from None


FROZEN_CELLS = 4


def physical_reach(h: float, tfinal: float, speed: float = 1.0) -> int:
    """Cells a characteristic of speed ``speed`` crosses by ``tfinal``, plus two."""
    return math.ceil(tfinal * speed / h - 1e-9) + 2


class Setup(NamedTuple):
    grid: gr.GridSpec
    mode: object
    initial: object


def build(example: Example, n: int, tfinal: Optional[float] = None,
          cfl: float = DEFAULT_CFL, pad_cells: Optional[int] = None,
          reach_cells: Optional[int] = None) -> Setup:
    """Grid, boundary mode and initial data for ``example`` at resolution ``n``.

    Padded examples evolve ``reach_cells`` cells beyond the physical window
    (default: the distance waves travel by ``tfinal``, plus two) and freeze
    the rest of the padding at the initial data.  The padding defaults to
    ``reach_cells + FROZEN_CELLS``.
    """
    tfinal = example.tfinal if tfinal is None else tfinal
    if example.boundary == "dirichlet":
        grid = gr.GridSpec(example.bounds, (n,) * example.dim, periodic=False)
        return Setup(grid, gr.DirichletExact(example.oracle), example.initial)
    grid = gr.GridSpec(example.bounds, (n,) * example.dim)
    if example.boundary != "padded":
        return Setup(grid, gr.Periodic(), example.initial)

    h = min(grid.h)
    reach = physical_reach(h, tfinal) if reach_cells is None else reach_cells
    pad = reach + FROZEN_CELLS if pad_cells is None else pad_cells
    if pad * h < tfinal:  # characteristic speeds are at most 1 here
        raise ValueError("padding is narrower than the distance waves "
                         "travel before the final time")
    if reach * h < tfinal:
        raise ValueError("the evolved band is narrower than the distance "
                         "waves travel before the final time")
    mode = gr.PaddedOutflow(pad, reach, example.initial)
    return Setup(grid.padded(pad), mode, example.initial)
