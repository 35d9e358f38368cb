"""Centroid motion in a uniformly accelerated, rotating frame.

The semiclassical Hamiltonian in SI units is

    H = (1 + a.r / c^2) sqrt(m^2 c^4 + hbar^2 c^2 k_perp^2 + |p|^2 c^2) - omega.(r x p + L)

where ``k_perp^2`` is the hidden transverse wavenumber of a structured beam
(zero for a point particle). Hamilton's equations give

    dr/dt = (1 + a.r/c^2) p c^2 / E - omega x r
    dp/dt = -(a / c^2) E - omega x p

with ``E`` the square root above. ``L`` is constant and only shifts H.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from .beamcore import C, HBAR, ModeSpec
from .kinematics import CentroidState, centroid

MAX_STEPS = 10_000_000
WEAK_FIELD_LIMIT = 0.1
C2 = C * C

Vector = np.ndarray


class IntegrationError(RuntimeError):
    """The integrator hit its step cap or produced non-finite values."""


class StrongFieldWarning(UserWarning):
    """|a.r| / c^2 grew beyond the weak-field range."""


def _const(vec) -> Callable[[float], Vector]:
    arr = np.array(vec, dtype=float)
    return lambda t: arr


@dataclass(frozen=True)
class NoninertialFrame:
    """Frame acceleration a(t) (m/s^2) and angular velocity omega(t) (rad/s).

    Both are uniform in space. Build with callables, or use :meth:`static`.
    """

    acceleration: Callable[[float], Vector] = field(default_factory=lambda: _const([0, 0, 0]))
    omega: Callable[[float], Vector] = field(default_factory=lambda: _const([0, 0, 0]))
    static_values: Optional[Tuple[Tuple[float, ...], Tuple[float, ...]]] = None

    @classmethod
    def static(cls, acceleration=(0.0, 0.0, 0.0), omega=(0.0, 0.0, 0.0)) -> "NoninertialFrame":
        a = tuple(float(x) for x in acceleration)
        w = tuple(float(x) for x in omega)
        if len(a) != 3 or len(w) != 3:
            raise ValueError("acceleration and omega must be three-vectors")
        if not all(map(math.isfinite, a + w)):
            raise ValueError("frame vectors must be finite")
        return cls(_const(a), _const(w), (a, w))

    @property
    def is_static(self) -> bool:
        return self.static_values is not None

    def to_dict(self) -> dict:
        if not self.is_static:
            raise ValueError("only static frames serialize")
        a, w = self.static_values
        return dict(acceleration=list(a), omega=list(w))


@dataclass(frozen=True)
class CentroidModel:
    """Rest-energy content of the moving object.

    ``mass`` is a rest mass in kg and ``kperp2`` a hidden transverse
    wavenumber squared in 1/m^2. A twisted photon is (0, 2 zeta/w0^2); the
    equivalent point particle is (M, 0).
    """

    mass: float = 0.0
    kperp2: float = 0.0
    L: Vector = field(default_factory=lambda: np.zeros(3))

    @property
    def rest_energy_sq(self) -> float:
        return (self.mass * C2) ** 2 + (HBAR * C) ** 2 * self.kperp2

    def energy(self, p: Vector) -> float:
        return math.sqrt(self.rest_energy_sq + float(np.dot(p, p)) * C2)


def hamiltonian(r, p, L, frame: NoninertialFrame, t: float, m: float, kperp2: float = 0.0) -> float:
    """Energy of the centroid at (r, p) and time t, in joules."""
    r = np.asarray(r, dtype=float)
    p = np.asarray(p, dtype=float)
    a = frame.acceleration(t)
    w = frame.omega(t)
    E = CentroidModel(m, kperp2).energy(p)
    return (1.0 + float(np.dot(a, r)) / C**2) * E - float(np.dot(w, np.cross(r, p) + np.asarray(L, float)))


def _ham(r, p, a, w, L, rest2):
    rx, ry, rz = r
    px, py, pz = p
    E = math.sqrt(rest2 + (px * px + py * py + pz * pz) * C2)
    lx, ly, lz = ry * pz - rz * py + L[0], rz * px - rx * pz + L[1], rx * py - ry * px + L[2]
    return (1.0 + (a[0] * rx + a[1] * ry + a[2] * rz) / C2) * E - (w[0] * lx + w[1] * ly + w[2] * lz)


def _rhs(r, p, a, w, rest2):
    # scalar arithmetic on 3-tuples; numpy call overhead dominates otherwise
    rx, ry, rz = r
    px, py, pz = p
    ax, ay, az = a
    wx, wy, wz = w
    E = math.sqrt(rest2 + (px * px + py * py + pz * pz) * C2)
    f = (1.0 + (ax * rx + ay * ry + az * rz) / C2) * C2 / E
    g = E / C2
    return (
        (f * px - (wy * rz - wz * ry), f * py - (wz * rx - wx * rz), f * pz - (wx * ry - wy * rx)),
        (-ax * g - (wy * pz - wz * py), -ay * g - (wz * px - wx * pz), -az * g - (wx * py - wy * px)),
    )


def eom_rhs(r, p, frame: NoninertialFrame, t: float, model: CentroidModel):
    """(dr/dt, dp/dt) from Hamilton's equations."""
    a = tuple(map(float, frame.acceleration(t)))
    w = tuple(map(float, frame.omega(t)))
    drdt, dpdt = _rhs(tuple(map(float, r)), tuple(map(float, p)), a, w, model.rest_energy_sq)
    return np.array(drdt), np.array(dpdt)


@dataclass
class Trajectory:
    t: np.ndarray
    r: np.ndarray
    p: np.ndarray
    H: np.ndarray

    def __len__(self):
        return len(self.t)

    def energy_drift(self) -> float:
        return float(np.max(np.abs(self.H - self.H[0])) / abs(self.H[0]))


def integrate(
    state: CentroidState,
    r0,
    frame: NoninertialFrame,
    t_span: Tuple[float, float],
    dt: float,
    model: Optional[CentroidModel] = None,
    max_steps: int = MAX_STEPS,
    record_every: int = 1,
) -> Trajectory:
    """Fixed-step classical RK4 from ``state`` at position ``r0``.

    Without ``model`` the state is treated as a point particle of mass
    ``state.M``. The last step is shortened to land on ``t_span[1]``.
    """
    t0, t1 = map(float, t_span)
    if not dt > 0:
        raise ValueError("dt must be positive")
    if not (math.isfinite(t0) and math.isfinite(t1)) or t1 < t0:
        raise ValueError("t_span must be finite and ordered")
    n_steps = int(math.ceil((t1 - t0) / dt - 1e-9))
    if n_steps > max_steps:
        raise IntegrationError(f"{n_steps} steps exceed the cap of {max_steps}")
    if model is None:
        model = CentroidModel(mass=state.M, L=state.L)

    r = tuple(float(x) for x in r0)
    if len(r) != 3:
        raise ValueError("r0 must be a three-vector")
    p = tuple(float(x) for x in state.p)
    L = tuple(float(x) for x in model.L)
    rest2 = model.rest_energy_sq
    acc, omg = frame.acceleration, frame.omega
    if frame.is_static:
        a_fixed, w_fixed = frame.static_values

        def vectors(tt):
            return a_fixed, w_fixed
    else:
        def vectors(tt):
            return tuple(map(float, acc(tt))), tuple(map(float, omg(tt)))

    def axpy(x, s, y):
        return (x[0] + s * y[0], x[1] + s * y[1], x[2] + s * y[2])

    ts, rs, ps, Hs = [t0], [r], [p], [_ham(r, p, *vectors(t0), L, rest2)]
    t = t0
    warned = False
    for i in range(n_steps):
        h = min(dt, t1 - t)
        a1, w1 = vectors(t)
        a2, w2 = vectors(t + 0.5 * h)
        a4, w4 = vectors(t + h)
        k1r, k1p = _rhs(r, p, a1, w1, rest2)
        k2r, k2p = _rhs(axpy(r, 0.5 * h, k1r), axpy(p, 0.5 * h, k1p), a2, w2, rest2)
        k3r, k3p = _rhs(axpy(r, 0.5 * h, k2r), axpy(p, 0.5 * h, k2p), a2, w2, rest2)
        k4r, k4p = _rhs(axpy(r, h, k3r), axpy(p, h, k3p), a4, w4, rest2)
        s = h / 6.0
        r = tuple(r[j] + s * (k1r[j] + 2.0 * k2r[j] + 2.0 * k3r[j] + k4r[j]) for j in range(3))
        p = tuple(p[j] + s * (k1p[j] + 2.0 * k2p[j] + 2.0 * k3p[j] + k4p[j]) for j in range(3))
        t = t0 + (i + 1) * dt if i + 1 < n_steps else t1
        if not all(map(math.isfinite, r + p)):
            raise IntegrationError(f"non-finite state at t={t}")
        if not warned and abs(sum(x * y for x, y in zip(a4, r))) / C2 > WEAK_FIELD_LIMIT:
            warnings.warn("|a.r|/c^2 exceeds 0.1; outside the weak-field regime", StrongFieldWarning,
                          stacklevel=2)
            warned = True
        if (i + 1) % record_every == 0 or i + 1 == n_steps:
            ts.append(t)
            rs.append(r)
            ps.append(p)
            Hs.append(_ham(r, p, *vectors(t), L, rest2))
    return Trajectory(np.array(ts), np.array(rs), np.array(ps), np.array(Hs))


def twisted_and_point_models(mode: ModeSpec) -> Tuple[CentroidModel, CentroidModel]:
    """Hidden-momentum model of the beam and the equivalent point particle."""
    state = centroid(mode)
    kperp2 = 2.0 * mode.zeta / mode.w0**2
    twisted = CentroidModel(mass=mode.m, kperp2=kperp2, L=state.L)
    point = CentroidModel(mass=state.M, kperp2=0.0, L=np.zeros(3))
    return twisted, point


def inertial_mass_equivalence(
    mode: ModeSpec,
    frame: NoninertialFrame,
    t_span: Tuple[float, float],
    dt: float,
    r0=(0.0, 0.0, 0.0),
) -> float:
    """Max position gap between the twisted centroid and a mass-M particle.

    Both start from the mode's centroid momentum at ``r0``. The gap is
    returned relative to the largest distance either trajectory reaches from
    the origin (or to c * duration if that is zero).
    """
    state = centroid(mode)
    twisted, point = twisted_and_point_models(mode)
    a = integrate(state, r0, frame, t_span, dt, model=twisted)
    b = integrate(state, r0, frame, t_span, dt, model=point)
    gap = float(np.max(np.linalg.norm(a.r - b.r, axis=1)))
    if gap == 0.0:
        return 0.0
    scale = max(float(np.max(np.linalg.norm(a.r, axis=1))), float(np.max(np.linalg.norm(b.r, axis=1))))
    if scale == 0.0:
        scale = C * (t_span[1] - t_span[0])
    return gap / scale
