"""Semiclassical centroid model: energy, momentum, effective mass and boosts."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .beamcore import C, E_CHARGE, ELECTRON, HBAR, PHOTON, ModeSpec
from .expectations import centroid_mass

INVARIANT_RTOL = 1e-12


def _vec3(v) -> np.ndarray:
    arr = np.array(v, dtype=float).reshape(-1)
    if arr.shape != (3,):
        raise ValueError(f"expected a three-vector, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class CentroidState:
    """Energy ``E`` (J), momentum ``p`` (kg m/s), invariant mass ``M`` (kg)
    and intrinsic OAM ``L`` (J s, three-vector) of a beam centroid.

    ``M`` is carried, not recomputed, so it stays exact under boosts; use
    :meth:`invariant_drift` to audit E^2 - |p|^2 c^2 against M^2 c^4.
    """

    E: float
    p: np.ndarray
    M: float
    L: np.ndarray = field(default_factory=lambda: np.zeros(3))
    species: str = PHOTON

    def __post_init__(self):
        object.__setattr__(self, "p", _vec3(self.p))
        object.__setattr__(self, "L", _vec3(self.L))
        if not self.E > 0:
            raise ValueError("centroid energy must be positive")
        if self.M < 0:
            raise ValueError("mass must be non-negative")

    @property
    def velocity(self) -> np.ndarray:
        return self.p * C**2 / self.E

    @property
    def vz(self) -> float:
        return float(self.velocity[2])

    def invariant_drift(self) -> float:
        """|E^2 - |p|^2 c^2 - M^2 c^4| / (M^2 c^4), or relative to E^2 if M = 0."""
        pc = float(np.linalg.norm(self.p)) * C
        lhs = (self.E - pc) * (self.E + pc)
        ref = (self.M * C**2) ** 2
        return abs(lhs - ref) / (ref if ref > 0 else self.E**2)

    def to_dict(self) -> dict:
        return dict(E=self.E, p=self.p.tolist(), M=self.M, L=self.L.tolist(), species=self.species)

    @classmethod
    def from_dict(cls, data: dict) -> "CentroidState":
        unknown = set(data) - {"E", "p", "M", "L", "species"}
        if unknown:
            raise ValueError(f"unknown centroid keys: {sorted(unknown)}")
        return cls(**data)

    def __eq__(self, other):
        if not isinstance(other, CentroidState):
            return NotImplemented
        return (
            self.E == other.E
            and self.M == other.M
            and self.species == other.species
            and np.array_equal(self.p, other.p)
            and np.array_equal(self.L, other.L)
        )

    __hash__ = None

    def allclose(self, other: "CentroidState", rtol: float = 1e-12) -> bool:
        scale = self.E / C
        return (
            abs(self.E - other.E) <= rtol * abs(self.E)
            and np.all(np.abs(self.p - other.p) <= rtol * scale)
            and abs(self.M - other.M) <= rtol * max(self.M, other.M, 1e-300)
        )


@dataclass(frozen=True)
class BoostSpec:
    """Boost velocity V (m/s). The boosted state gains velocity +V."""

    V: np.ndarray

    def __post_init__(self):
        V = _vec3(self.V)
        if not np.linalg.norm(V) < C:
            raise ValueError("boost speed must be strictly below c")
        object.__setattr__(self, "V", V)

    @property
    def gamma(self) -> float:
        b2 = float(np.dot(self.V, self.V)) / C**2
        return 1.0 / math.sqrt(1.0 - b2)


def _axial_state(E: float, M: float, l: int, species: str) -> CentroidState:
    # p_z fixed by the mass shell: (E - Mc^2)(E + Mc^2) = p^2 c^2
    Mc2 = M * C**2
    pz = math.sqrt((E - Mc2) * (E + Mc2)) / C
    return CentroidState(E=E, p=[0.0, 0.0, pz], M=M, L=[0.0, 0.0, HBAR * l], species=species)


def photon_centroid(mode: ModeSpec) -> CentroidState:
    """Centroid of a photon LG mode: E = hbar c k, M = sqrt(2 zeta) hbar/(c w0).

    ``p_z`` sits on the mass shell, hbar k sqrt(1 - 2 zeta/(k w0)^2), which is
    hbar k (1 - zeta/(k w0)^2) to first paraxial order.
    """
    if mode.species != PHOTON:
        raise ValueError("photon_centroid needs a photon mode")
    mode.check_paraxial()
    E = HBAR * C * mode.k
    M = centroid_mass(mode.zeta, mode.k, mode.w0)
    return _axial_state(E, M, mode.l, PHOTON)


def mass_energy_ratio(mode: ModeSpec) -> float:
    """M c^2 / E = sqrt(2 zeta) lambda / (2 pi w0) for the photon centroid."""
    wavelength = 2 * math.pi / mode.k
    return math.sqrt(2.0 * mode.zeta) * wavelength / (2 * math.pi * mode.w0)


def mass_from_velocity(k: float, vz: float) -> Tuple[float, float]:
    """Both forms of the mass-velocity relation.

    Returns ``(M1, M2)`` with ``M1 = (hbar k/c) sqrt(2 (1 - vz/c))`` and
    ``M2 = (hbar k/c) sqrt(1 - vz^2/c^2)``.
    """
    if not 0 < vz <= C:
        raise ValueError("vz must lie in (0, c]")
    beta = vz / C
    pref = HBAR * k / C
    return pref * math.sqrt(2.0 * (1.0 - beta)), pref * math.sqrt((1.0 - beta) * (1.0 + beta))


def electron_energy(mode: ModeSpec) -> float:
    return math.hypot(HBAR * C * mode.k, mode.m * C**2)


def electron_pz_expectation(mode: ModeSpec) -> float:
    """<p_z> = sqrt(E^2 - m^2c^4)/c [1 - zeta hbar^2 c^2 / ((E^2 - m^2c^4) w0^2)]."""
    E = electron_energy(mode)
    rest = mode.m * C**2
    pc2 = (E - rest) * (E + rest)
    return math.sqrt(pc2) / C * (1.0 - mode.zeta * (HBAR * C) ** 2 / (pc2 * mode.w0**2))


def electron_centroid(mode: ModeSpec) -> CentroidState:
    """Centroid of an electron LG mode with M = sqrt(m^2 + 2 zeta hbar^2/(c w0)^2)."""
    if mode.species != ELECTRON:
        raise ValueError("electron_centroid needs an electron mode")
    mode.check_paraxial()
    E = electron_energy(mode)
    if not E > mode.m * C**2:
        raise ValueError("electron energy must exceed the rest energy")
    M = centroid_mass(mode.zeta, mode.k, mode.w0, mode.m)
    return _axial_state(E, M, mode.l, ELECTRON)


def centroid(mode: ModeSpec) -> CentroidState:
    return photon_centroid(mode) if mode.species == PHOTON else electron_centroid(mode)


def boost(state: CentroidState, V) -> CentroidState:
    """Pure Lorentz boost after which the state has gained velocity ``V``.

    A state at rest with energy E0 comes out with E' = gamma E0 and
    p' = E' V / c^2. ``L`` is passed through unchanged.
    """
    spec = V if isinstance(V, BoostSpec) else BoostSpec(V)
    Vv = spec.V
    speed2 = float(np.dot(Vv, Vv))
    if speed2 == 0.0:
        return state
    gamma = spec.gamma
    p_par = float(np.dot(state.p, Vv)) / speed2  # component along V, in units of V
    E_new = gamma * (state.E + float(np.dot(Vv, state.p)))
    p_new = state.p + ((gamma - 1.0) * p_par + gamma * state.E / C**2) * Vv
    return CentroidState(E=E_new, p=p_new, M=state.M, L=state.L, species=state.species)


def rest_frame(state: CentroidState) -> Tuple[CentroidState, BoostSpec]:
    """Boost to the centroid rest frame.

    Returns the rest-frame state (p = 0, E = M c^2) and the centroid velocity
    ``V = p c^2 / E``; ``boost(rest, V)`` restores the original state.
    """
    if state.M <= 0:
        raise ValueError("a massless state has no rest frame")
    V = BoostSpec(state.velocity)
    if not np.any(V.V):
        return state, V
    rest = boost(state, -V.V)
    # the mass shell fixes these exactly; drop round-off
    rest = CentroidState(E=state.M * C**2, p=np.zeros(3), M=state.M, L=rest.L, species=state.species)
    return rest, V


def velocity_addition(u: float, v: float) -> float:
    return (u + v) / (1.0 + u * v / C**2)


def orbital_magnetic_moment(l: int, E: float) -> float:
    """mu_L = e hbar l c^2 / (2 E) in J/T. Independent of the radial index."""
    if not E > 0:
        raise ValueError("energy must be positive")
    return E_CHARGE * HBAR * l * C**2 / (2.0 * E)
