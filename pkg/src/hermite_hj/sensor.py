"""Modal-decay smoothness sensor and artificial viscosity.

The sensing window of a destination cell spans the segment (square) between
its end (corner) nodes.  Each half (quadrant) is represented by the
polynomial carried by the nearest node, so a kink sitting between nodes is
visible even though every individual polynomial is smooth.

Pipeline per window: Legendre projection, baseline decay, skyline, least
squares fit of ``log q_n`` against ``log n`` for ``n >= 1``, and a smooth
ramp from the fitted rate ``s`` to the viscosity.  All steps are batched
over windows.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
from numpy.polynomial import legendre as npleg

SAMPLINGS = ("exact", "lgl")
BASELINE_NORMS = ("centered", "full")


@dataclass(frozen=True)
class SensorConfig:
    m: int
    s0: float = 2.0
    w: float = 1.0
    sampling: str = "exact"
    baseline: bool = True
    skyline: bool = True
    baseline_norm: str = "centered"
    centered_floor: float = 1e-10

    def __post_init__(self):
        if self.m < 0:
            raise ValueError("m must be nonnegative")
        if self.s0 - self.w < 0 or self.w <= 0:
            raise ValueError("need w > 0 and s0 - w >= 0")
        if self.sampling not in SAMPLINGS:
            raise ValueError(f"sampling must be one of {SAMPLINGS}")
        if self.baseline_norm not in BASELINE_NORMS:
            raise ValueError(f"baseline_norm must be one of {BASELINE_NORMS}")
        if not 0.0 <= self.centered_floor < 1.0:
            raise ValueError("centered_floor must lie in [0, 1)")

    @property
    def N(self) -> int:
        return 2 * self.m + 1

    @property
    def Np(self) -> int:
        return 2 * self.m + 3

    @property
    def K(self) -> int:
        return 2 * self.m + 1


@dataclass
class ModalSpectrum:
    """Modal magnitudes per window; arrays have a trailing mode axis."""
    qhat: np.ndarray
    l2_norm: np.ndarray
    centered_norm: Optional[np.ndarray] = None
    qtilde: Optional[np.ndarray] = None
    qbar: Optional[np.ndarray] = None


@dataclass
class ViscosityField:
    s: np.ndarray
    nu: np.ndarray
    kappa: np.ndarray
    lam: float
    nu0: float
    active: int = field(init=False)

    def __post_init__(self):
        self.active = int(np.count_nonzero(self.nu))


# {{{ projection matrices

def _half_rule(sampling: str, K: int, Np: int):
    """Points and weights on [-1, 1] for one half of the window."""
    if sampling == "exact":
        npts = (K + Np) // 2 + 1
        return npleg.leggauss(npts)
    n = K  # 2m+1 Lobatto points
    interior = npleg.Legendre.basis(n - 1).deriv().roots()
    x = np.concatenate([[-1.0], np.sort(interior.real), [1.0]])
    Pn = npleg.legval(x, np.eye(n)[n - 1])
    w = 2.0 / (n * (n - 1) * Pn ** 2)
    return x, w


@lru_cache(maxsize=None)
def half_operators(K: int, Np: int, sampling: str = "exact"):
    """Matrices mapping node coefficients to modal coefficients of a window.

    Returns ``(QL, QR, EL, ER, wq)``: ``QL`` is ``(K+1, Np)`` such that
    ``pL @ QL + pR @ QR`` are the Legendre coefficients on ``[-1, 1]`` of the
    window built from a left half ``pL`` (node at the window's left end)
    and a right half ``pR``.  ``E*`` evaluate node polynomials at the
    half-window quadrature points, which carry weights ``wq``.
    """
    g, wg = _half_rule(sampling, K, Np)
    zl, zr = 0.5 * (g - 1.0), 0.5 * (g + 1.0)  # window coordinate per half
    wq = 0.5 * wg
    out = []
    for z, xi in ((zl, 0.5 * (zl + 1.0)), (zr, 0.5 * (zr - 1.0))):
        E = np.vander(xi, K + 1, increasing=True).T  # (K+1, npts)
        P = npleg.legvander(z, Np - 1)  # (npts, Np)
        norm = (2.0 * np.arange(Np) + 1.0) / 2.0
        out.append((E * wq) @ P * norm)
        out.append(E)
    QL, EL, QR, ER = out
    for a in (QL, QR, EL, ER, wq):
        a.setflags(write=False)
    return QL, QR, EL, ER, wq


def project_window_1d(pL, pR, cfg: SensorConfig) -> ModalSpectrum:
    """Legendre spectrum of the window formed by two node polynomials."""
    QL, QR, EL, ER, wq = half_operators(cfg.K, cfg.Np, cfg.sampling)
    pL = np.asarray(pL, dtype=float)
    pR = np.asarray(pR, dtype=float)
    qhat = pL @ QL + pR @ QR
    vl, vr = pL @ EL, pR @ ER
    sq = np.sum(wq * (vl ** 2 + vr ** 2), axis=-1)
    mean = qhat[..., :1]
    csq = np.sum(wq * ((vl - mean) ** 2 + (vr - mean) ** 2), axis=-1)
    return ModalSpectrum(np.abs(qhat), np.sqrt(sq), np.sqrt(csq))


def tensor_modes_2d(corners, cfg: SensorConfig):
    """Tensor Legendre coefficients ``C[k, l]`` and the squared L2 norms of
    the window and of its deviation from the mean."""
    QL, QR, EL, ER, wq = half_operators(cfg.K, cfg.Np, cfg.sampling)
    Q = (QL, QR)
    E = (EL, ER)
    C = 0.0
    W = np.outer(wq, wq)
    corners = [np.asarray(p, dtype=float) for p in corners]
    quads = ((0, 0), (1, 0), (0, 1), (1, 1))
    for (X, Y), p in zip(quads, corners):
        C = C + np.einsum("ka,...kl,lb->...ab", Q[X], p, Q[Y], optimize=True)
    mean = C[..., :1, :1]
    sq = csq = 0.0
    for (X, Y), p in zip(quads, corners):
        v = np.einsum("ka,...kl,lb->...ab", E[X], p, E[Y], optimize=True)
        sq = sq + np.sum(W * v ** 2, axis=(-2, -1))
        csq = csq + np.sum(W * (v - mean) ** 2, axis=(-2, -1))
    return C, sq, csq


def group_total_degree(C, Np: int):
    """``c_i = max |C[k, l]|`` over ``k + l = i`` for ``i < Np``."""
    A = np.abs(C)
    k = np.arange(A.shape[-2])[:, None] + np.arange(A.shape[-1])[None, :]
    out = np.zeros(A.shape[:-2] + (Np,))
    for i in range(Np):
        out[..., i] = np.max(np.where(k == i, A, 0.0), axis=(-2, -1))
    return out


def project_window_2d(corners, cfg: SensorConfig) -> ModalSpectrum:
    """Grouped spectrum of a window built from four corner polynomials.

    ``corners`` are ordered (x_lo, y_lo), (x_hi, y_lo), (x_lo, y_hi),
    (x_hi, y_hi); each polynomial covers the quadrant next to its node.
    """
    C, sq, csq = tensor_modes_2d(corners, cfg)
    return ModalSpectrum(group_total_degree(C, cfg.Np), np.sqrt(sq),
                         np.sqrt(csq))

# }}}


# {{{ decay estimation

def baseline_coefficients(cfg: SensorConfig) -> np.ndarray:
    """``b_n`` for ``n = 0..Np-1`` with ``b_0 = 0`` and unit sum of squares."""
    n = np.arange(1, cfg.Np, dtype=float)
    b = n ** (-float(cfg.N))
    b = b / np.sqrt(np.sum(b ** 2))
    return np.concatenate([[0.0], b])


def baseline_decay(spec: ModalSpectrum, cfg: SensorConfig) -> ModalSpectrum:
    if not cfg.baseline:
        spec.qtilde = spec.qhat.copy()
        return spec
    b = baseline_coefficients(cfg)
    if cfg.baseline_norm == "centered":
        if spec.centered_norm is None:
            raise ValueError("spectrum carries no mean-free norm")
        # the floor keeps round-off on a constant from reading as noise
        norm = np.maximum(spec.centered_norm,
                          cfg.centered_floor * np.asarray(spec.l2_norm))
    else:
        norm = spec.l2_norm
    norm2 = np.asarray(norm)[..., None] ** 2
    qt = np.sqrt(spec.qhat ** 2 + norm2 * b ** 2)
    qt[..., 0] = spec.qhat[..., 0]
    spec.qtilde = qt
    return spec


def skyline(spec: ModalSpectrum, cfg: SensorConfig) -> ModalSpectrum:
    q = spec.qtilde if spec.qtilde is not None else spec.qhat
    if not cfg.skyline:
        spec.qbar = q.copy()
        return spec
    Np = q.shape[-1]
    # suffix maxima; the two last modes share the max over {Np-2, Np-1}
    suffix = np.maximum.accumulate(q[..., ::-1], axis=-1)[..., ::-1]
    qbar = suffix.copy()
    qbar[..., Np - 1] = suffix[..., Np - 2]
    spec.qbar = qbar
    return spec


def fit_decay_rate(spec: ModalSpectrum, cfg: Optional[SensorConfig] = None):
    """Least-squares ``log q_n = log c - s log n`` over ``n = 1..Np-1``.

    Returns ``(s, c)``.  Windows with no positive modes get ``s = +inf`` and
    ``c = 0``.
    """
    q = spec.qbar if spec.qbar is not None else spec.qhat
    q = np.asarray(q, dtype=float)[..., 1:]
    n = np.arange(1, q.shape[-1] + 1, dtype=float)
    x = np.log(n)
    xm = x.mean()
    dx = x - xm
    zero = ~np.all(q > 0, axis=-1)
    # normalizing first makes s bitwise invariant under power-of-two scaling
    top = np.max(q, axis=-1, keepdims=True)
    top = np.where(top > 0, top, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        y = np.log(np.where(q > 0, q / top, 1.0))
    ym = y.mean(axis=-1)
    slope = np.sum(dx * (y - ym[..., None]), axis=-1) / np.sum(dx * dx)
    s = -slope
    logc = ym - slope * xm + np.log(top[..., 0])
    s = np.where(zero, np.inf, s)
    c = np.where(zero, 0.0, np.exp(logc))
    if s.ndim == 0:
        return float(s), float(c)
    return s, c


def viscosity_of_s(s, nu0: float, cfg: SensorConfig):
    """``nu0`` below ``s0 - w``, zero above ``s0 + w``, sine ramp between."""
    s = np.asarray(s, dtype=float)
    ramp = 0.5 * (1.0 + np.sin(np.pi * (cfg.s0 - np.clip(s, cfg.s0 - cfg.w,
                                                          cfg.s0 + cfg.w))
                               / (2.0 * cfg.w)))
    nu = nu0 * np.where(s <= cfg.s0 - cfg.w, 1.0,
                        np.where(s >= cfg.s0 + cfg.w, 0.0, ramp))
    return nu if nu.ndim else float(nu)


def decay_rate_1d(pL, pR, cfg: SensorConfig):
    spec = skyline(baseline_decay(project_window_1d(pL, pR, cfg), cfg), cfg)
    return fit_decay_rate(spec, cfg)[0]


def decay_rate_2d(corners, cfg: SensorConfig):
    spec = skyline(baseline_decay(project_window_2d(corners, cfg), cfg), cfg)
    return fit_decay_rate(spec, cfg)[0]

# }}}


# {{{ viscosity scale and averaging

def max_speed(model, vx, vy=None, x=None, y=None) -> float:
    """Exact max of the characteristic speeds over point values."""
    sp = model.speeds(vx, vy, x, y)
    if isinstance(sp, tuple):
        return float(max(np.max(a) for a in sp))
    return float(np.max(sp))


def nu0_and_lambda(model, vx, vy=None, x=None, y=None, h=(1.0,), m=0,
                   nu0_scale: float = 1.0):
    """``lambda`` = max speed at the given points; ``nu0 = lambda h / N``."""
    lam = max_speed(model, vx, vy, x, y)
    N = 2 * m + 1
    nu0 = nu0_scale * lam * max(h) / N
    return nu0, lam


def average_viscosity(nu, periodic: bool = True):
    """Stencil average: [1,2,1]/4 per axis, tensorized in 2D."""
    out = np.asarray(nu, dtype=float)
    for ax in range(out.ndim):
        if periodic:
            lo = np.roll(out, 1, axis=ax)
            hi = np.roll(out, -1, axis=ax)
        else:
            pad = [(0, 0)] * out.ndim
            pad[ax] = (1, 1)
            e = np.pad(out, pad, mode="edge")
            idx = [slice(None)] * out.ndim
            idx[ax] = slice(None, -2)
            lo = e[tuple(idx)]
            idx[ax] = slice(2, None)
            hi = e[tuple(idx)]
        out = 0.25 * lo + 0.5 * out + 0.25 * hi
    return out

# }}}
