"""Staggered primal/dual grids, node fields and ghost exchange.

Node data are stored structure-of-arrays: a 1D field holds ``poly`` of shape
``(N, K+1)`` and a 2D field ``(Nx, Ny, K+1, K+1)``, where ``K = 2m+1``.  Each
entry is the node-centered polynomial carried over from the last half-step
(in h-scaled coefficients); the degree-``m`` DOFs are its truncation.

Periodic grids store ``n`` primal nodes per axis (node ``n`` is node ``0``).
Non-periodic 1D grids store ``n + 1`` primal nodes, the two ends being
boundary nodes filled from exact data.  Dual grids always have ``n`` nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Union

import numpy as np

PRIMAL = "primal"
DUAL = "dual"


def other(which: str) -> str:
    if which not in (PRIMAL, DUAL):
        raise ValueError(f"unknown node set {which!r}")
    return DUAL if which == PRIMAL else PRIMAL


# {{{ boundary modes

@dataclass(frozen=True)
class Periodic:
    pass


@dataclass(frozen=True)
class DirichletExact:
    """Boundary nodes take their data from ``oracle(x, t)`` (1D only)."""
    oracle: Callable[[np.ndarray, float], np.ndarray]


@dataclass(frozen=True, eq=False)
class PaddedOutflow:
    """The physical window is embedded in a larger periodic domain.

    With ``initial`` given, nodes more than ``reach_cells`` beyond the
    window are never evolved; see ``extend_outflow``.  This keeps the
    periodic seam out of the computation.
    """
    pad_cells: int
    reach_cells: Optional[int] = None
    initial: object = None
    _reference: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.pad_cells < 1:
            raise ValueError("pad_cells must be positive")
        if self.reach_cells is not None and self.reach_cells < 1:
            raise ValueError("reach_cells must be positive")

    @property
    def freezes(self) -> bool:
        return (self.initial is not None and self.reach_cells is not None
                and self.reach_cells < self.pad_cells)

    def band(self, grid: "GridSpec", which: str, axis: int) -> np.ndarray:
        """Node indices along ``axis`` lying more than the reach outside."""
        n_phys = grid.n[axis] - 2 * grid.offset[axis]
        i = np.arange(grid.count(which, axis)) - grid.offset[axis]
        if which == DUAL:
            i = i + 0.5
        return (i < -self.reach_cells) | (i > n_phys + self.reach_cells)

    def frozen_mask(self, grid: "GridSpec", which: str) -> np.ndarray:
        """Boolean array over the ``which`` nodes: true where not evolved."""
        mask = np.zeros(grid.shape(which), dtype=bool)
        if not self.freezes:
            return mask
        for a in range(grid.dim):
            shape = [1] * grid.dim
            shape[a] = -1
            mask = mask | self.band(grid, which, a).reshape(shape)
        return mask

    def reference(self, grid: "GridSpec", which: str, m: int) -> "NodeField":
        key = (grid, which, m)
        if key not in self._reference:
            self._reference[key] = init_field(grid, m, self.initial, which)
        return self._reference[key]


BoundaryMode = Union[Periodic, DirichletExact, PaddedOutflow]

# }}}


# {{{ grid geometry

@dataclass(frozen=True)
class GridSpec:
    """Uniform grid; ``bounds`` is ``(xl, xr)`` or ``(xl, xr, yb, yt)``.

    ``offset`` shifts node indices so that coordinates of a padded grid are
    computed from the physical window's left edge; with ``offset = p`` the
    primal node ``i`` sits at ``xl + (i - p) * h``.
    """
    bounds: tuple
    n: tuple
    periodic: bool = True
    offset: tuple = None

    def __post_init__(self):
        bounds = tuple(float(b) for b in self.bounds)
        n = tuple(int(v) for v in np.atleast_1d(self.n))
        if len(bounds) != 2 * len(n) or len(n) not in (1, 2):
            raise ValueError("bounds and n do not describe a 1D or 2D grid")
        if any(v < 2 for v in n):
            raise ValueError("need at least two cells per direction")
        if any(bounds[2 * a + 1] <= bounds[2 * a] for a in range(len(n))):
            raise ValueError("empty domain")
        if not self.periodic and len(n) != 1:
            raise ValueError("non-periodic boundaries are supported in 1D only")
        offset = (0,) * len(n) if self.offset is None else tuple(self.offset)
        object.__setattr__(self, "bounds", bounds)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "offset", offset)

    @property
    def dim(self) -> int:
        return len(self.n)

    @property
    def h(self) -> tuple:
        """Cell widths, computed from the physical (unpadded) window."""
        n_phys = [self.n[a] - 2 * self.offset[a] for a in range(self.dim)]
        return tuple((self.bounds[2 * a + 1] - self.bounds[2 * a]) / n_phys[a]
                     for a in range(self.dim))

    def count(self, which: str, axis: int = 0) -> int:
        if which == PRIMAL and not self.periodic:
            return self.n[axis] + 1
        return self.n[axis]

    def shape(self, which: str) -> tuple:
        return tuple(self.count(which, a) for a in range(self.dim))

    def axis_coords(self, which: str, axis: int = 0) -> np.ndarray:
        i = np.arange(self.count(which, axis), dtype=float) - self.offset[axis]
        if which == DUAL:
            i = i + 0.5
        return self.bounds[2 * axis] + i * self.h[axis]

    def coords(self, which: str):
        """Node coordinates: a 1D array, or an ``ij``-indexed meshgrid pair."""
        if which not in (PRIMAL, DUAL):
            raise ValueError(f"unknown node set {which!r}")
        if self.dim == 1:
            return self.axis_coords(which)
        return tuple(np.meshgrid(self.axis_coords(which, 0),
                                 self.axis_coords(which, 1), indexing="ij"))

    def padded(self, pad_cells: int) -> "GridSpec":
        """Periodic grid extended by ``pad_cells`` on every side."""
        if not self.periodic:
            raise ValueError("padding applies to periodic grids")
        return GridSpec(self.bounds, tuple(v + 2 * pad_cells for v in self.n),
                        True, tuple(o + pad_cells for o in self.offset))

    def physical_slice(self, which: str = PRIMAL):
        """Index slices selecting nodes inside the physical window."""
        if not self.periodic:
            return (slice(None),)
        out = []
        for a in range(self.dim):
            lo = self.offset[a]
            n_phys = self.n[a] - 2 * lo
            stop = lo + n_phys + (1 if which == PRIMAL and lo > 0 else 0)
            out.append(slice(lo, stop))
        return tuple(out)


def dual_of(grid: GridSpec, which: str):
    """Coordinates of the node set opposite to ``which``."""
    return grid.coords(other(which))

# }}}


# {{{ node fields

@dataclass
class NodeField:
    which: str
    m: int
    poly: np.ndarray
    sided: Optional[np.ndarray] = None
    t: float = 0.0

    @property
    def K(self) -> int:
        return 2 * self.m + 1

    @property
    def dim(self) -> int:
        return 1 if self.poly.ndim == 2 else 2

    @property
    def _is_1d(self) -> bool:
        return self.poly.ndim == 2

    @property
    def dofs(self) -> np.ndarray:
        """Degree-m truncation of the node polynomials."""
        if self._is_1d:
            return self.poly[..., :self.m + 1]
        return self.poly[..., :self.m + 1, :self.m + 1]

    def values(self) -> np.ndarray:
        return self.poly[..., 0] if self._is_1d else self.poly[..., 0, 0]

    def copy(self) -> "NodeField":
        sided = None if self.sided is None else self.sided.copy()
        return replace(self, poly=self.poly.copy(), sided=sided)


def _scaled_tensor(raw, hs, K):
    """Scale raw partial derivatives ``[..., kx(, ky)]`` by ``h^k / k!``."""
    sx = np.array([hs[0] ** k / math.factorial(k) for k in range(K + 1)])
    if raw.ndim >= 2 and len(hs) == 2:
        sy = np.array([hs[1] ** k / math.factorial(k) for k in range(K + 1)])
        return raw * sx[:, None] * sy[None, :]
    return raw * sx


def _left_images(grid: GridSpec, which: str, pts, sides):
    """Coordinates for one-sided sampling.

    On a periodic primal grid the limit from the left at node 0 is the
    limit at the right end of the domain, so those nodes are replaced by
    their periodic images when a side is -1.
    """
    if not grid.periodic or which != PRIMAL:
        return pts
    out = []
    for a, (p, s) in enumerate(zip(pts, sides)):
        p = np.array(p, dtype=float)
        if s < 0:
            idx = [slice(None)] * p.ndim
            idx[a] = 0
            p[tuple(idx)] += grid.n[a] * grid.h[a]
        out.append(p)
    return tuple(out)


def init_field(grid: GridSpec, m: int, initial, which: str = PRIMAL) -> NodeField:
    """Sample an initial condition into node polynomials of degree 2m+1.

    ``initial`` provides ``derivatives(x[, y], order, side=None)`` returning
    raw partials up to ``order`` in each direction, shaped ``(..., order+1)``
    in 1D and ``(..., order+1, order+1)`` in 2D.  If ``initial.node_kinks``
    is true, one-sided limits are also stored; ``side`` is then ``+1``/``-1``
    in 1D and a pair of those in 2D.
    """
    derivatives = getattr(initial, "derivatives", None)
    if derivatives is None:
        raise ValueError("initial data must provide derivatives")
    K = 2 * m + 1
    pts = grid.coords(which)
    pts = (pts,) if grid.dim == 1 else pts
    poly = _scaled_tensor(np.asarray(derivatives(*pts, K), dtype=float), grid.h, K)
    sided = None
    if getattr(initial, "node_kinks", False):
        if grid.dim == 1:
            sided = np.stack([
                _scaled_tensor(np.asarray(derivatives(
                    *_left_images(grid, which, pts, (s,)), K, side=s)), grid.h, K)
                for s in (-1, 1)])
        else:
            sided = np.stack([np.stack([
                _scaled_tensor(np.asarray(derivatives(
                    *_left_images(grid, which, pts, (sx, sy)), K,
                    side=(sx, sy))), grid.h, K)
                for sy in (-1, 1)]) for sx in (-1, 1)])
    return NodeField(which, m, poly, sided, 0.0)

# }}}


# {{{ Dirichlet data

def boundary_polynomial(oracle, x: float, t: float, h: float, K: int,
                        J: Optional[int] = None) -> np.ndarray:
    """Scaled Taylor coefficients of ``oracle(., t)`` at ``x`` up to degree K.

    The oracle is sampled at ``x + j h/8`` for ``|j| <= J`` and the
    interpolating polynomial's coefficients in ``(y - x)/h`` are returned.
    """
    J = (K + 3) // 2 if J is None else J
    j = np.arange(-J, J + 1, dtype=float)
    s = j / 8.0
    if t <= 0:
        raise ValueError("boundary data from the oracle needs t > 0")
    vals = np.asarray(oracle(x + s * h, t), dtype=float)
    V = np.vander(s, 2 * J + 1, increasing=True)
    coeffs = np.linalg.solve(V, vals)
    return coeffs[:K + 1]


def extend_outflow(field: NodeField, grid: GridSpec,
                   mode: BoundaryMode) -> NodeField:
    """Fill the held band of a padded field from the evolved region.

    The deviation from the initial data is carried unchanged across the
    band along each axis in turn.  This is exact wherever the solution is
    the initial data plus a profile that is constant along that axis.
    """
    if not isinstance(mode, PaddedOutflow) or not mode.freezes:
        return field
    ref = mode.reference(grid, field.which, field.m).poly
    dev = field.poly - ref
    for a in range(grid.dim):
        live = np.flatnonzero(~mode.band(grid, field.which, a))
        src = np.clip(np.arange(grid.count(field.which, a)), live[0], live[-1])
        dev = np.take(dev, src, axis=a)
    mask = mode.frozen_mask(grid, field.which)
    field.poly[mask] = ref[mask] + dev[mask]
    field.sided = None
    return field


def fill_boundary(field: NodeField, grid: GridSpec, mode: BoundaryMode,
                  t: float) -> NodeField:
    """Overwrite primal boundary nodes with exact data (Dirichlet only)."""
    if not isinstance(mode, DirichletExact) or field.which != PRIMAL:
        return field
    if t <= 0:
        return field
    x = grid.axis_coords(PRIMAL)
    for idx in (0, -1):
        field.poly[idx] = boundary_polynomial(mode.oracle, x[idx], t,
                                              grid.h[0], field.K)
    return field

# }}}


# {{{ ghost exchange

@dataclass
class Extended:
    """Per destination cell, the polynomials of its end/corner nodes.

    1D: ``ends = (left, right)``, each ``(Ndst, K+1)``.
    2D: ``ends = (c00, c10, c01, c11)``, corner ``cXY`` at side X in x and
    side Y in y (0 low, 1 high), each ``(Nx, Ny, K+1, K+1)``.
    ``dst_index`` locates the destination cells within the destination
    grid's node array.
    """
    ends: tuple
    dst_index: tuple = field(default_factory=tuple)


def _wrap(a, which_src, axis):
    if which_src == PRIMAL:
        first = np.take(a, [0], axis=axis)
        return np.concatenate([a, first], axis=axis)
    last = np.take(a, [-1], axis=axis)
    return np.concatenate([last, a], axis=axis)


def ghost_exchange(field: NodeField, grid: GridSpec, mode: BoundaryMode,
                   t: float = 0.0) -> Extended:
    if isinstance(mode, DirichletExact):
        if mode.oracle is None:
            raise ValueError("Dirichlet boundary requires an oracle")
        if grid.periodic:
            raise ValueError("Dirichlet boundary requires a non-periodic grid")
    elif not grid.periodic:
        raise ValueError("non-periodic grid needs a Dirichlet boundary mode")

    dim = grid.dim
    src = field.which

    def extend(a, lead=0):
        if grid.periodic:
            for ax in range(dim):
                a = _wrap(a, src, lead + ax)
        return a

    if dim == 1:
        if field.sided is None:
            ext = extend(field.poly)
            left, right = ext[:-1], ext[1:]
        else:
            ext = extend(field.sided, lead=1)
            left, right = ext[1, :-1], ext[0, 1:]
        if grid.periodic or src == PRIMAL:
            index = (slice(None),)
        else:
            index = (slice(1, -1),)
        return Extended((left, right), index)

    if field.sided is None:
        ext = extend(field.poly)
        pick = lambda sx, sy, X, Y: ext[X, Y]
    else:
        ext = extend(field.sided, lead=2)
        pick = lambda sx, sy, X, Y: ext[sx, sy, X, Y]
    lo, hi = slice(None, -1), slice(1, None)
    corners = (pick(1, 1, lo, lo), pick(0, 1, hi, lo),
               pick(1, 0, lo, hi), pick(0, 0, hi, hi))
    return Extended(corners, (slice(None), slice(None)))

# }}}
