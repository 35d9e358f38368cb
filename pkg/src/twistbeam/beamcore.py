"""Beam geometry, Laguerre polynomials, normalization constants and units.

Everything in here works in SI: lengths in meters, wavenumbers in rad/m,
energies in joules. Conversions from eV and nm happen only through
:func:`convert_units`.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import constants as _const

C = _const.c
HBAR = _const.hbar
H_PLANCK = _const.h
E_CHARGE = _const.e
M_ELECTRON = _const.m_e
EV = _const.electron_volt

#: Reduced Compton wavenumber of the electron, m_e c / hbar.
K_ELECTRON = M_ELECTRON * C / HBAR

PHOTON = "photon"
ELECTRON = "electron"
SPECIES = (PHOTON, ELECTRON)

LAGUERRE_MAX_ORDER = 50

PARAXIAL_WARN = 0.1
PARAXIAL_REJECT = 0.5


class ParaxialityWarning(UserWarning):
    """zeta / (k w0)^2 is large enough that the paraxial formulas degrade."""


def zeta_of(n: int, l: int) -> int:
    """Mode weight 2n + |l| + 1."""
    return 2 * n + abs(l) + 1


@dataclass(frozen=True)
class ModeSpec:
    """Quantum numbers and waist of one Laguerre-Gauss mode.

    Parameters
    ----------
    n : int
        Radial index, ``n >= 0``.
    l : int
        Azimuthal (OAM) index, any sign.
    k : float
        Wavenumber in rad/m.
    w0 : float
        Waist radius in m.
    species : {"photon", "electron"}
    m : float, optional
        Rest mass in kg. Defaults to 0 for photons and the electron mass for
        electrons.
    """

    n: int
    l: int
    k: float
    w0: float
    species: str = PHOTON
    m: Optional[float] = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise ValueError(f"radial index n must be a non-negative integer, got {self.n!r}")
        if int(self.l) != self.l:
            raise ValueError(f"azimuthal index l must be an integer, got {self.l!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "l", int(self.l))
        if not (np.isfinite(self.k) and self.k > 0):
            raise ValueError(f"k must be positive and finite, got {self.k!r}")
        if not (np.isfinite(self.w0) and self.w0 > 0):
            raise ValueError(f"w0 must be positive and finite, got {self.w0!r}")
        if self.species not in SPECIES:
            raise ValueError(f"species must be one of {SPECIES}, got {self.species!r}")
        if self.m is None:
            object.__setattr__(self, "m", 0.0 if self.species == PHOTON else M_ELECTRON)
        if self.species == PHOTON and self.m != 0:
            raise ValueError("a photon mode must have m = 0")
        if self.m < 0:
            raise ValueError(f"rest mass must be >= 0, got {self.m!r}")
        object.__setattr__(self, "m", float(self.m))
        eps = self.paraxial_parameter
        if eps > PARAXIAL_REJECT:
            raise ValueError(
                f"zeta/(k w0)^2 = {eps:.3g} exceeds {PARAXIAL_REJECT}; the mode is not paraxial"
            )
        self.check_paraxial()

    @property
    def zeta(self) -> int:
        return zeta_of(self.n, self.l)

    @property
    def paraxial_parameter(self) -> float:
        """zeta / (k w0)^2, the relative velocity deficit."""
        return self.zeta / (self.k * self.w0) ** 2

    @property
    def z_rayleigh(self) -> float:
        return 0.5 * self.k * self.w0**2

    @property
    def K(self) -> float:
        """m c / hbar (zero for photons)."""
        return self.m * C / HBAR

    def check_paraxial(self) -> None:
        eps = self.paraxial_parameter
        if eps > PARAXIAL_WARN:
            warnings.warn(
                f"zeta/(k w0)^2 = {eps:.3g} > {PARAXIAL_WARN}: paraxial results are approximate",
                ParaxialityWarning,
                stacklevel=3,
            )

    def replace(self, **changes) -> "ModeSpec":
        fields = dict(n=self.n, l=self.l, k=self.k, w0=self.w0, species=self.species, m=self.m)
        if "species" in changes and "m" not in changes:
            fields["m"] = None
        fields.update(changes)
        return ModeSpec(**fields)

    def to_dict(self) -> dict:
        return dict(n=self.n, l=self.l, k=self.k, w0=self.w0, species=self.species, m=self.m)

    @classmethod
    def from_dict(cls, data: dict) -> "ModeSpec":
        return cls(**data)


@dataclass(frozen=True)
class BeamGeometry:
    """Width, curvature, Gouy phase and Rayleigh length at one plane.

    The wavefront curvature is stored as ``curvature = 1/R``. At the waist the
    front is flat: ``curvature == 0``, ``is_flat`` is true and ``R`` is
    ``math.inf``.
    """

    w: float
    curvature: float
    gouy: float
    zR: float

    @property
    def is_flat(self) -> bool:
        return self.curvature == 0.0

    @property
    def R(self) -> float:
        return math.inf if self.is_flat else 1.0 / self.curvature


def beam_width(z, w0: float, k: float):
    zR = 0.5 * k * w0**2
    return w0 * np.sqrt(1.0 + (z / zR) ** 2)


def beam_geometry(z: float, mode: ModeSpec) -> BeamGeometry:
    """Gaussian-beam scalars of ``mode`` at the plane ``z``."""
    zR = mode.z_rayleigh
    w = mode.w0 * math.sqrt(1.0 + (z / zR) ** 2)
    # 1/R = z / (z^2 + zR^2) stays finite through the waist
    curvature = z / (z * z + zR * zR)
    gouy = math.atan(z / zR)
    return BeamGeometry(w=w, curvature=curvature, gouy=gouy, zR=zR)


def laguerre(n: int, alpha: float, x):
    """Generalized Laguerre polynomial L_n^alpha(x) by upward recurrence.

    Accepts scalar or array ``x``. The recurrence is stable for ``alpha >= 0``;
    orders above ``LAGUERRE_MAX_ORDER`` (50) are refused because no accuracy
    claim is made for them.
    """
    if int(n) != n or n < 0:
        raise ValueError(f"Laguerre order must be a non-negative integer, got {n!r}")
    n = int(n)
    if n > LAGUERRE_MAX_ORDER:
        raise ValueError(f"Laguerre order {n} exceeds the supported maximum {LAGUERRE_MAX_ORDER}")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 + alpha - x
    for j in range(1, n):
        prev, cur = cur, ((2 * j + 1 + alpha - x) * cur - (j + alpha) * prev) / (j + 1)
    return cur if np.ndim(cur) else float(cur)


def laguerre_derivative(n: int, alpha: float, x, order: int = 1):
    """d^order/dx^order L_n^alpha(x) = (-1)^order L_{n-order}^{alpha+order}(x)."""
    if order > n:
        return np.zeros_like(np.asarray(x, dtype=float)) if np.ndim(x) else 0.0
    return (-1) ** order * laguerre(n - order, alpha + order, x)


def norm_const(n: int, l: int) -> float:
    """C_nl = sqrt(2 n! / (pi (n+|l|)!)).

    The factorial ratio is accumulated as a running product of 1/j, so large
    indices neither overflow nor lose precision to huge intermediates.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    ratio = 1.0
    for j in range(n + 1, n + abs(l) + 1):
        ratio /= j
    return math.sqrt(2.0 * ratio / math.pi)


@dataclass(frozen=True)
class UnitConversion:
    """Consistent wavenumber/energy pair for one species."""

    k: float
    E: float
    K: float
    species: str

    @property
    def wavelength(self) -> float:
        return math.inf if self.k == 0 else 2 * math.pi / self.k

    @property
    def energy_ev(self) -> float:
        return self.E / EV


def convert_units(
    *,
    wavelength: Optional[float] = None,
    energy: Optional[float] = None,
    kinetic_energy: Optional[float] = None,
    wavenumber: Optional[float] = None,
    species: str = PHOTON,
    m: Optional[float] = None,
) -> UnitConversion:
    """Turn one of wavelength (m), total energy (J), kinetic energy (J) or
    wavenumber (rad/m) into the triple (k, E, K).

    For electrons ``energy`` is the total energy and must be at least m c^2;
    ``wavelength`` is the de Broglie wavelength. ``K = m c / hbar``.
    """
    given = {
        name: val
        for name, val in dict(
            wavelength=wavelength, energy=energy, kinetic_energy=kinetic_energy, wavenumber=wavenumber
        ).items()
        if val is not None
    }
    if len(given) != 1:
        raise ValueError(f"exactly one input quantity is required, got {sorted(given)}")
    (name, value), = given.items()
    if species not in SPECIES:
        raise ValueError(f"unknown species {species!r}")
    if m is None:
        m = 0.0 if species == PHOTON else M_ELECTRON
    if species == PHOTON and m != 0:
        raise ValueError("photon mass must be 0")
    rest = m * C**2
    if not np.isfinite(value) or value < 0 or (value == 0 and name != "kinetic_energy"):
        raise ValueError(f"{name} must be positive, got {value!r}")

    if name == "wavelength":
        k = 2 * math.pi / value
        E = math.hypot(HBAR * k * C, rest)
    elif name == "wavenumber":
        k = value
        E = math.hypot(HBAR * k * C, rest)
    else:
        E = value + rest if name == "kinetic_energy" else value
        if E < rest:
            raise ValueError(f"total energy {E!r} J is below the rest energy {rest!r} J")
        if species == PHOTON:
            k = E / (HBAR * C)
        else:
            # (E - mc^2)(E + mc^2) avoids cancellation near rest
            k = math.sqrt((E - rest) * (E + rest)) / (HBAR * C)
    return UnitConversion(k=k, E=E, K=m * C / HBAR, species=species)
