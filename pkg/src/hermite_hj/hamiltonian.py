"""Built-in Hamiltonians as Taylor-series maps.

Each model turns the coefficient series of the gradient on a batch of cells
into the series of ``H``, and evaluates characteristic speeds pointwise.
Series arguments are h-scaled coefficient arrays with coefficient axes last
(one axis in 1D, two in 2D); batch axes in front.  Kinks of ``H`` (``|p|``,
``sign(q)``) pick their branch from the constant term of the argument on
each cell.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import taylor as ts


def _const(shape_like, value, ndim):
    out = np.zeros_like(shape_like, dtype=float)
    out[(Ellipsis,) + (0,) * ndim] = value
    return out


def _sign(v):
    return np.where(np.asarray(v) >= 0, 1.0, -1.0)


@dataclass(frozen=True)
class HamiltonianModel:
    id: str
    dim: int
    smooth: bool
    _series: Callable
    _speeds: Callable
    _value: Callable
    description: str = ""

    def series_of_H(self, vx, vy=None, center=None, h=None, t=0.0):
        """Series of ``H`` on each cell.

        ``center``/``h`` give the cell centers and widths; they are only
        used by models with explicit space dependence.
        """
        if self.dim == 2 and vy is None:
            raise ValueError(f"model {self.id} needs both gradient components")
        return self._series(vx, vy, center, h, t)

    def speeds(self, p, q=None, x=None, y=None):
        """``|dH/dp|`` (and ``|dH/dq|``) at point values."""
        return self._speeds(p, q, x, y)

    def value(self, p, q=None, x=None, y=None):
        return self._value(p, q, x, y)


# {{{ 1D models

def _burgers1d_series(vx, vy, center, h, t):
    return 0.5 * ts.product_array(vx, vx, 1)


def _eikonal_series(vx, vy, center, h, t):
    return ts.abs_array(vx, 1)


def _noncvx_cos_series(vx, vy, center, h, t):
    arg = vx + _const(vx, 1.0, 1)
    _, C = ts.sincos_array(arg, 1)
    return -C


def _quartic_series(vx, vy, center, h, t):
    p2 = ts.product_array(vx, vx, 1)
    p4 = ts.product_array(p2, p2, 1)
    return 0.25 * (p4 - 5.0 * p2) + _const(vx, 1.0, 1)

# }}}


# {{{ 2D models

def _burgers2d_series(vx, vy, center, h, t):
    s = vx + vy
    return 0.5 * ts.product_array(s, s, 2)


def _xy_series(vx, vy, center, h, t):
    return ts.product_array(vx, vy, 2)


def _sin2d_series(vx, vy, center, h, t):
    S, _ = ts.sincos_array(vx + vy, 2)
    return S


def coordinate_tensors(center, h, K):
    """2D series of the coordinates ``x`` and ``y`` on each cell."""
    xc, yc = (np.asarray(c, dtype=float) for c in center)
    hx, hy = h
    X = np.zeros(np.broadcast_shapes(xc.shape, yc.shape) + (K + 1, K + 1))
    Y = np.zeros_like(X)
    X[..., 0, 0] = xc
    Y[..., 0, 0] = yc
    if K >= 1:
        X[..., 1, 0] = hx
        Y[..., 0, 1] = hy
    return X, Y


def _control_series(vx, vy, center, h, t):
    if center is None or h is None:
        raise ValueError("optimal-control needs cell centers and widths")
    K = vx.shape[-1] - 1
    X, Y = coordinate_tensors(center, h, K)
    sinx, cosx = ts.sincos_array(X, 2)
    siny, _ = ts.sincos_array(Y, 2)
    H = ts.product_array(siny, vx, 2)
    H += ts.product_array(sinx, vy, 2)
    H += ts.abs_array(vy, 2)  # sign(q) q with the sign frozen per cell
    H -= 0.5 * ts.product_array(siny, siny, 2)
    H += cosx
    H[..., 0, 0] -= 1.0
    return H

# }}}


def _e8_speeds(p, q, x, y):
    sx = np.abs(np.sin(x))
    q = np.asarray(q, dtype=float)
    sy = np.abs(np.sin(x) + _sign(q))
    # at q = 0 take the larger one-sided derivative
    sy = np.where(q == 0, 1.0 + sx, sy)
    return np.abs(np.sin(y)), sy


MODELS = {
    "burgers1d": HamiltonianModel(
        "burgers1d", 1, True, _burgers1d_series,
        lambda p, q, x, y: np.abs(p),
        lambda p, q, x, y: 0.5 * np.asarray(p) ** 2,
        "H = p^2 / 2"),
    "eikonal1d": HamiltonianModel(
        "eikonal1d", 1, False, _eikonal_series,
        lambda p, q, x, y: np.ones_like(np.asarray(p, dtype=float)),
        lambda p, q, x, y: np.abs(p),
        "H = |p|"),
    "noncvx-cos": HamiltonianModel(
        "noncvx-cos", 1, True, _noncvx_cos_series,
        lambda p, q, x, y: np.abs(np.sin(np.asarray(p) + 1.0)),
        lambda p, q, x, y: -np.cos(np.asarray(p) + 1.0),
        "H = -cos(p + 1)"),
    "riemann-quartic": HamiltonianModel(
        "riemann-quartic", 1, True, _quartic_series,
        lambda p, q, x, y: np.abs(np.asarray(p) ** 3 - 2.5 * np.asarray(p)),
        lambda p, q, x, y: 0.25 * (np.asarray(p) ** 2 - 1) * (np.asarray(p) ** 2 - 4),
        "H = (p^2 - 1)(p^2 - 4) / 4"),
    "burgers2d": HamiltonianModel(
        "burgers2d", 2, True, _burgers2d_series,
        lambda p, q, x, y: (np.abs(p + q), np.abs(p + q)),
        lambda p, q, x, y: 0.5 * (np.asarray(p) + q) ** 2,
        "H = (p + q)^2 / 2"),
    "xy-nonconvex": HamiltonianModel(
        "xy-nonconvex", 2, True, _xy_series,
        lambda p, q, x, y: (np.abs(q), np.abs(p)),
        lambda p, q, x, y: np.asarray(p) * q,
        "H = p q"),
    "riemann-sin2d": HamiltonianModel(
        "riemann-sin2d", 2, True, _sin2d_series,
        lambda p, q, x, y: (np.abs(np.cos(p + q)),) * 2,
        lambda p, q, x, y: np.sin(np.asarray(p) + q),
        "H = sin(p + q)"),
    "optimal-control": HamiltonianModel(
        "optimal-control", 2, False, _control_series, _e8_speeds,
        lambda p, q, x, y: (np.sin(y) * p + (np.sin(x) + _sign(q)) * q
                            - 0.5 * np.sin(y) ** 2 + np.cos(x) - 1.0),
        "H = sin(y) p + (sin(x) + sign(q)) q - sin(y)^2 / 2 + cos(x) - 1"),
}


def get_model(model_id: str) -> HamiltonianModel:
    try:
        return MODELS[model_id]
    except KeyError:
        raise ValueError(f"unsupported Hamiltonian id {model_id!r}; "
                         f"choose from {sorted(MODELS)}") from None


def series_of_H(model, vx, vy=None, center=None, h=None, t=0.0):
    model = get_model(model) if isinstance(model, str) else model
    return model.series_of_H(vx, vy, center, h, t)


def speeds(model, p, q=None, x=None, y=None):
    model = get_model(model) if isinstance(model, str) else model
    return model.speeds(p, q, x, y)


def sign_control_field(model, vy_values) -> np.ndarray:
    """Per-node ``sign(phi_y)`` for the optimal-control model; sign(0) = +1."""
    model = get_model(model) if isinstance(model, str) else model
    if model.id != "optimal-control":
        raise ValueError("sign_control_field applies to optimal-control only")
    return _sign(vy_values)
