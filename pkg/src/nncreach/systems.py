"""Benchmark plant models and a small system registry.

Ships the kinematic bicycle vehicle (continuous time, 4 states, 2 inputs)
and the zero-order-hold double integrator (discrete time, 2 states, 1
input), plus an affine-system helper used heavily by tests and
diagnostics.
"""

from __future__ import annotations

import math

import numpy as np

from .embedding import OpenLoopSystem
from .intervals import interval_cos, interval_mul, interval_sin

__all__ = [
    "VehicleSystem",
    "DoubleIntegratorSystem",
    "affine_system",
    "register_system",
    "get_system",
]

_HALF_PI = 0.5 * math.pi
_WHEEL_MARGIN = 1e-9


class VehicleSystem:
    """Kinematic bicycle model with saturating actuators.

    State ``(p_x, p_y, phi, v)``: planar position, heading, speed.  Inputs
    ``(u1, u2)``: applied force and front wheel angle, clipped by the plant
    to ``[-u1_max, u1_max]`` and ``[-u2_max, u2_max]``.  The slip angle
    ``beta(u2) = arctan(l_f / (l_f + l_r) * tan(u2))`` is odd and strictly
    increasing on ``(-pi/2, pi/2)``; the wheel-angle saturation keeps the
    model inside that range no matter how loose the controller bounds get.

    The interval extension below is exact: every state/input variable
    occurs once per component, clipping is monotone, and sin/cos ranges
    are computed exactly, so the synthesized decomposition is the tight
    one.
    """

    n = 4
    p = 2
    q = 0

    def __init__(self, l_f: float = 1.0, l_r: float = 1.0,
                 u1_max: float = 20.0, u2_max: float = math.pi / 4):
        if l_f <= 0 or l_r <= 0:
            raise ValueError("axle distances must be positive")
        if not 0 < u2_max < _HALF_PI:
            raise ValueError("wheel-angle limit must lie in (0, pi/2)")
        if u1_max <= 0:
            raise ValueError("force limit must be positive")
        self.l_f = float(l_f)
        self.l_r = float(l_r)
        self.u1_max = float(u1_max)
        self.u2_max = float(u2_max)
        self._k = self.l_f / (self.l_f + self.l_r)

    def beta(self, u2):
        u2 = np.clip(np.asarray(u2, dtype=float), -self.u2_max, self.u2_max)
        return np.arctan(self._k * np.tan(u2))

    def f(self, x, u, w=None):
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        phi = x[..., 2]
        v = x[..., 3]
        u1 = np.clip(u[..., 0], -self.u1_max, self.u1_max)
        b = self.beta(u[..., 1])
        return np.stack([
            v * np.cos(phi + b),
            v * np.sin(phi + b),
            v / self.l_r * np.sin(b),
            u1 + np.zeros_like(v),
        ], axis=-1)

    def extension(self, Xlo, Xhi, Ulo, Uhi, Wlo, Whi):
        """Exact componentwise enclosure over row-stacked boxes."""
        u1lo = np.clip(Ulo[:, 0], -self.u1_max, self.u1_max)
        u1hi = np.clip(Uhi[:, 0], -self.u1_max, self.u1_max)
        u2lo = np.clip(Ulo[:, 1], -self.u2_max, self.u2_max)
        u2hi = np.clip(Uhi[:, 1], -self.u2_max, self.u2_max)
        blo = np.arctan(self._k * np.tan(u2lo))
        bhi = np.arctan(self._k * np.tan(u2hi))
        tlo = Xlo[:, 2] + blo
        thi = Xhi[:, 2] + bhi
        clo, chi = interval_cos(tlo, thi)
        slo, shi = interval_sin(tlo, thi)
        vlo, vhi = Xlo[:, 3], Xhi[:, 3]
        flo = np.empty_like(Xlo)
        fhi = np.empty_like(Xhi)
        flo[:, 0], fhi[:, 0] = interval_mul(vlo, vhi, clo, chi)
        flo[:, 1], fhi[:, 1] = interval_mul(vlo, vhi, slo, shi)
        # beta stays in (-pi/2, pi/2) where sin is increasing
        flo[:, 2], fhi[:, 2] = interval_mul(vlo / self.l_r, vhi / self.l_r,
                                            np.sin(blo), np.sin(bhi))
        flo[:, 3] = u1lo
        fhi[:, 3] = u1hi
        return flo, fhi

    def open_loop(self) -> OpenLoopSystem:
        return OpenLoopSystem(self.n, self.p, self.q, self.f,
                              extension=self.extension, name="vehicle")


class DoubleIntegratorSystem:
    """Zero-order-hold double integrator with unit step size.

    ``x+ = A x + B u`` with ``A = [[1, 1], [0, 1]]`` and ``B = [0.5, 1]``.
    """

    n = 2
    p = 1
    q = 0

    def __init__(self):
        self.A = np.array([[1.0, 1.0], [0.0, 1.0]])
        self.B = np.array([[0.5], [1.0]])
        self.A.setflags(write=False)
        self.B.setflags(write=False)

    def f(self, x, u, w=None):
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        return x @ self.A.T + u @ self.B.T

    def open_loop(self) -> OpenLoopSystem:
        """Decomposition view of the one-step map (positive/negative split)."""
        return affine_system(self.A, self.B, discrete=True, name="double-integrator")


def affine_system(A, B=None, D=None, const=None, discrete: bool = False,
                  name: str = "affine") -> OpenLoopSystem:
    """Open-loop system for ``f(x, u, w) = A x + B u + D w + const``.

    Continuous-time systems keep the diagonal of ``A`` with the first state
    argument and split only the off-diagonal entries by sign; discrete-time
    maps split every entry.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("A must be square")
    B = np.zeros((n, 0)) if B is None else np.asarray(B, dtype=float).reshape(n, -1)
    D = np.zeros((n, 0)) if D is None else np.asarray(D, dtype=float).reshape(n, -1)
    c = np.zeros(n) if const is None else np.asarray(const, dtype=float)

    if discrete:
        Asplit = A
    else:
        Asplit = A - np.diag(np.diag(A))
    Ap = np.maximum(Asplit, 0.0)
    An = np.minimum(Asplit, 0.0)
    if not discrete:
        Ap = Ap + np.diag(np.diag(A))
    Bp, Bn = np.maximum(B, 0.0), np.minimum(B, 0.0)
    Dp, Dn = np.maximum(D, 0.0), np.minimum(D, 0.0)

    def f(x, u, w=None):
        x = np.asarray(x, dtype=float)
        out = x @ A.T + c
        if B.shape[1]:
            out = out + np.asarray(u, dtype=float) @ B.T
        if D.shape[1] and w is not None:
            out = out + np.asarray(w, dtype=float) @ D.T
        return out

    def d(x, xh, u, uh, w, wh):
        out = Ap @ x + An @ xh + c
        if B.shape[1]:
            out = out + Bp @ u + Bn @ uh
        if D.shape[1]:
            out = out + Dp @ w + Dn @ wh
        return out

    return OpenLoopSystem(n, B.shape[1], D.shape[1], f, d=d, name=name)


_REGISTRY = {}


def register_system(name: str, factory) -> None:
    """Register a system factory; ``factory(**params)`` builds the model."""
    _REGISTRY[name] = factory


def get_system(name: str, **params):
    try:
        factory = _REGISTRY[name]
    except KeyError:
        known = ", ".join(sorted(_REGISTRY))
        raise ValueError(f"unknown system {name!r} (known: {known})") from None
    return factory(**params)


register_system("vehicle", VehicleSystem)
register_system("double-integrator", DoubleIntegratorSystem)
