"""Stand-alone probes of the Taylor recursions and of the sensor.

Taylor probes compose a nonlinear function with the exact scaled Taylor
series of a smooth inner function on every cell of a periodic grid over
``[0, 2 pi)``, then compare the truncated composite series against the
true composite at 9 equispaced points per cell (per direction).

Sensor probes sample a test function into node polynomials on
``[-2, 2]^d`` and run the window sensor on every cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict

import numpy as np

from . import sensor as sn
from .taylor import abs_array, evaluate_array, product_array, sincos_array

SAMPLES = 9


# {{{ taylor probes

def _trig_series(fn, x, h, K, scale=1.0, phase=0.0):
    """Scaled Taylor coefficients of ``fn(scale x + phase)`` at ``x``."""
    k = np.arange(K + 1)
    arg = scale * np.asarray(x, float)[..., None] + phase + k * np.pi / 2
    fact = np.array([math.factorial(j) for j in range(K + 1)], dtype=float)
    return fn(arg) * (scale * h) ** k / fact


def _embed_x(c):
    out = np.zeros(c.shape + (c.shape[-1],))
    out[..., :, 0] = c
    return out


def _embed_y(c):
    out = np.zeros(c.shape[:-1] + (c.shape[-1], c.shape[-1]))
    out[..., 0, :] = c
    return out


@dataclass(frozen=True)
class TaylorProbe:
    id: str
    dim: int
    series: Callable  # (centers, h, K) -> composite series
    exact: Callable  # point values of the composite
    description: str


def _cos_shift(x, h, K):
    u = _trig_series(np.cos, x, h, K)
    u[..., 0] += 1.0
    return -sincos_array(u)[1]


def _abs(x, h, K):
    return abs_array(_trig_series(np.cos, x, h, K))


def _linear(x, h, K):
    u = np.zeros(np.shape(x) + (K + 1,))
    u[..., 0] = 1.3
    return -sincos_array(u)[1]


def _cos_cos(x, y, h, K):
    k = np.arange(K + 1)
    kk = k[:, None] + k[None, :]
    fact = np.array([math.factorial(j) for j in range(K + 1)], dtype=float)
    scale = h ** kk / (fact[:, None] * fact[None, :])
    u = np.cos((x + y)[..., None, None] + kk * np.pi / 2) * scale
    return sincos_array(u, ndim=2)[1]


def _sin_sum(x, y, h, K):
    u = _embed_x(_trig_series(np.sin, x, h, K)) + \
        _embed_y(_trig_series(np.cos, y, h, K))
    return sincos_array(u, ndim=2)[0]


def _sin_prod(x, y, h, K):
    u = product_array(_embed_x(_trig_series(np.sin, x, h, K)),
                      _embed_y(_trig_series(np.cos, y, h, K)), ndim=2)
    return sincos_array(u, ndim=2)[0]


TAYLOR_PROBES: Dict[str, TaylorProbe] = {
    "cos-shift": TaylorProbe("cos-shift", 1, _cos_shift,
                             lambda x: -np.cos(np.cos(x) + 1.0),
                             "-cos(phi_x + 1) with phi = sin x"),
    "abs": TaylorProbe("abs", 1, _abs, lambda x: np.abs(np.cos(x)),
                       "|phi_x| with phi = sin x"),
    "linear": TaylorProbe("linear", 1, _linear,
                          lambda x: -np.cos(np.full_like(x, 1.3)),
                          "-cos(phi_x + 1) with phi = 0.3 x"),
    "cos-cos": TaylorProbe("cos-cos", 2, _cos_cos,
                           lambda x, y: np.cos(np.cos(x + y)),
                           "cos(cos(x + y))"),
    "sin-sum": TaylorProbe("sin-sum", 2, _sin_sum,
                           lambda x, y: np.sin(np.sin(x) + np.cos(y)),
                           "sin(sin x + cos y)"),
    "sin-prod": TaylorProbe("sin-prod", 2, _sin_prod,
                            lambda x, y: np.sin(np.sin(x) * np.cos(y)),
                            "sin(sin x cos y)"),
}


def get_taylor_probe(probe_id: str) -> TaylorProbe:
    try:
        return TAYLOR_PROBES[probe_id]
    except KeyError:
        raise ValueError(f"unknown taylor probe {probe_id!r}; "
                         f"choose from {sorted(TAYLOR_PROBES)}") from None


def taylor_probe_errors(probe_id: str, m: int, n: int):
    """``(L1, L2, Linf)`` of the composite series error on an ``n``-cell grid.

    Samples are weighted by ``(h/8)^d``.
    """
    probe = get_taylor_probe(probe_id)
    if n < 1 or m < 0:
        raise ValueError("need n >= 1 and m >= 0")
    K = 2 * m + 1
    h = 2.0 * np.pi / n
    nodes = np.arange(n) * h
    xi = np.linspace(-0.5, 0.5, SAMPLES)
    if probe.dim == 1:
        c = probe.series(nodes, h, K)
        approx = evaluate_array(c[:, None, :], xi[None, :])
        exact = probe.exact(nodes[:, None] + h * xi[None, :])
    else:
        X, Y = np.meshgrid(nodes, nodes, indexing="ij")
        c = probe.series(X, Y, h, K)
        XI, ETA = np.meshgrid(xi, xi, indexing="ij")
        approx = evaluate_array(c[:, :, None, None], XI, ETA)
        exact = probe.exact(X[..., None, None] + h * XI,
                            Y[..., None, None] + h * ETA)
    e = np.abs(approx - exact).ravel()
    w = (h / (SAMPLES - 1)) ** probe.dim
    return float(w * e.sum()), float(math.sqrt(w * np.sum(e * e))), float(e.max())

# }}}


# {{{ sensor probes

BOX = (-2.0, 2.0)


def _step_poly(mask, K, dim):
    out = np.zeros(mask.shape + (K + 1,) * dim)
    out[(Ellipsis,) + (0,) * dim] = mask.astype(float)
    return out


def _radial(x, y, h, K):
    return _step_poly(x * x + y * y <= 1.0, K, 2)


def _oblique(x, y, h, K):
    return _step_poly(x + y <= 1.0, K, 2)


def _constant(x, y, h, K):
    return _step_poly(np.ones_like(x, dtype=bool), K, 2) * 3.0


def _smooth2d(x, y, h, K):
    return product_array(_embed_x(_trig_series(np.sin, x, h, K, 2.0)),
                         _embed_y(_trig_series(np.cos, y, h, K, 1.5)), ndim=2)


def _smooth1d(x, h, K):
    return _trig_series(np.sin, x, h, K, 2.0)


SENSOR_PROBES = {
    "radial-step": (2, _radial, "1 inside the unit disc, 0 outside"),
    "oblique-step": (2, _oblique, "1 where x + y <= 1, 0 elsewhere"),
    "smooth": (2, _smooth2d, "sin(2x) cos(1.5y)"),
    "smooth-1d": (1, _smooth1d, "sin(2x)"),
    "constant": (2, _constant, "the constant 3"),
}


@dataclass
class SensorProbeResult:
    centers: tuple
    s: np.ndarray
    nu: np.ndarray
    kappa: np.ndarray
    crossing: np.ndarray  # window corner values differ
    nu0: float


def sensor_probe(probe_id: str, n: int, m: int,
                 cfg: sn.SensorConfig = None) -> SensorProbeResult:
    """Decay rate, viscosity (``nu0 = h / N``) and averaged viscosity per cell."""
    try:
        dim, fn, _ = SENSOR_PROBES[probe_id]
    except KeyError:
        raise ValueError(f"unknown sensor probe {probe_id!r}; "
                         f"choose from {sorted(SENSOR_PROBES)}") from None
    if n < 2:
        raise ValueError("need at least two cells")
    cfg = sn.SensorConfig(m) if cfg is None else cfg
    K = cfg.K
    h = (BOX[1] - BOX[0]) / n
    nodes = BOX[0] + np.arange(n + 1) * h
    mids = 0.5 * (nodes[:-1] + nodes[1:])
    nu0 = h / cfg.N
    if dim == 1:
        p = fn(nodes, h, K)
        s = sn.decay_rate_1d(p[:-1], p[1:], cfg)
        vals = p[..., 0]
        crossing = vals[:-1] != vals[1:]
        centers = (mids,)
    else:
        X, Y = np.meshgrid(nodes, nodes, indexing="ij")
        p = fn(X, Y, h, K)
        lo, hi = slice(None, -1), slice(1, None)
        corners = (p[lo, lo], p[hi, lo], p[lo, hi], p[hi, hi])
        s = sn.decay_rate_2d(corners, cfg)
        v = [c[..., 0, 0] for c in corners]
        crossing = ~((v[0] == v[1]) & (v[0] == v[2]) & (v[0] == v[3]))
        centers = tuple(np.meshgrid(mids, mids, indexing="ij"))
    nu = np.asarray(sn.viscosity_of_s(s, nu0, cfg))
    kappa = sn.average_viscosity(nu, periodic=False)
    return SensorProbeResult(centers, np.asarray(s), nu, kappa, crossing, nu0)

# }}}
