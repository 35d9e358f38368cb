"""Expectation values of LG modes and the quantized longitudinal velocity.

Each moment is produced twice: once from its closed form and once by
Gauss-Laguerre quadrature of the sampled mode. The transverse-momentum
quadrature works from the transverse gradient of the field, so it does not
share a derivation path with the longitudinal phase derivative.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .beamcore import (
    C,
    ELECTRON,
    HBAR,
    M_ELECTRON,
    PHOTON,
    ModeSpec,
    beam_geometry,
    zeta_of,
)
from .lgfield import (
    PolarQuadrature,
    amplitude,
    default_quadrature,
    dphi_dz_analytic,
    sample_grid,
    transverse_gradient_sq,
)

CONVERGENCE_TOL = 1e-8
FD_STEP = 1e-6  # in units of the Rayleigh length


class ConvergenceError(RuntimeError):
    """Quadrature result moved too much when the node count was doubled."""


@dataclass(frozen=True)
class MomentValue:
    analytic: float
    numeric: float

    @property
    def abs_diff(self) -> float:
        return abs(self.numeric - self.analytic)

    @property
    def rel_diff(self) -> float:
        return self.abs_diff / abs(self.analytic) if self.analytic else self.abs_diff


@dataclass(frozen=True)
class MomentReport:
    """<r^2> (m^2), <dPhi/dz> (rad/m) and <k_perp^2> (1/m^2) at one plane."""

    r2: MomentValue
    dphi_dz: MomentValue
    pperp2: MomentValue
    z: float

    def rows(self):
        return [("r2", self.r2), ("dphi_dz", self.dphi_dz), ("pperp2", self.pperp2)]


def analytic_moments(mode: ModeSpec, z: float):
    w = beam_geometry(z, mode).w
    zeta = mode.zeta
    return (
        0.5 * zeta * w**2,
        -zeta / (mode.k * mode.w0**2),
        2.0 * zeta / mode.w0**2,
    )


def _numeric_moments(mode: ModeSpec, z: float, quad: PolarQuadrature):
    field = sample_grid(mode, quad, z)
    geo = field.geometry
    R, _ = geo.mesh()
    W = geo.weights
    dens = np.abs(field.values) ** 2
    norm = np.sum(W * dens)
    r2 = np.sum(W * dens * R**2) / norm
    dphi = np.sum(W * dens * dphi_dz_analytic(mode, R, z)) / norm
    pperp2 = np.sum(W * transverse_gradient_sq(mode, R, z)) / norm
    return np.array([r2, dphi, pperp2])


def moments(mode: ModeSpec, z: float = 0.0, quad: Optional[PolarQuadrature] = None) -> MomentReport:
    """Closed-form and quadrature moments of ``mode`` at plane ``z``.

    Raises
    ------
    ConvergenceError
        If doubling the radial node count changes any moment by more than
        ``CONVERGENCE_TOL`` relative.
    """
    if quad is None:
        quad = default_quadrature(mode)
    coarse = _numeric_moments(mode, z, quad)
    fine = _numeric_moments(
        mode, z, PolarQuadrature(2 * quad.n_radial, quad.n_azimuthal, quad.scale)
    )
    change = np.abs(fine - coarse) / np.maximum(np.abs(fine), np.finfo(float).tiny)
    if np.any(change > CONVERGENCE_TOL):
        raise ConvergenceError(
            f"moments of {mode} at z={z} changed by {change.max():.3g} on node doubling"
        )
    ana = analytic_moments(mode, z)
    return MomentReport(*(MomentValue(a, float(v)) for a, v in zip(ana, coarse)), z=z)


def amplitude_flux(mode: ModeSpec, z: float, quad: Optional[PolarQuadrature] = None) -> float:
    """int A dA/dz r dr dphi (1/m), dA/dz by central difference.

    The step is ``FD_STEP * zR``. The quadrature nodes stay at fixed radii
    for all three planes.
    """
    if quad is None:
        quad = default_quadrature(mode)
    if quad.scale is None:
        quad = quad.with_scale(beam_geometry(z, mode).w)
    R, _ = quad.mesh()
    h = FD_STEP * mode.z_rayleigh
    dA = (amplitude(mode, R, z + h) - amplitude(mode, R, z - h)) / (2 * h)
    return float(np.sum(quad.weights * amplitude(mode, R, z) * dA))


def _deficit(zeta: int, k: float, w0: float) -> float:
    return zeta / (k * w0) ** 2


def photon_vz(mode: ModeSpec) -> float:
    """<v_z> = c (1 - zeta/(k w0)^2)."""
    if mode.species != PHOTON:
        raise ValueError("photon_vz needs a photon mode")
    mode.check_paraxial()
    return C * (1.0 - _deficit(mode.zeta, mode.k, mode.w0))


def plane_wave_speed(k: float, m: float) -> float:
    """Group speed c k / sqrt(k^2 + K^2) of a plane wave with K = m c / hbar."""
    K = m * C / HBAR
    return C * k / math.hypot(k, K)


def electron_vz(mode: ModeSpec) -> float:
    """<v_z> = c k/sqrt(k^2+K^2) (1 - zeta/(k w0)^2)."""
    if mode.species != ELECTRON:
        raise ValueError("electron_vz needs an electron mode")
    mode.check_paraxial()
    return plane_wave_speed(mode.k, mode.m) * (1.0 - _deficit(mode.zeta, mode.k, mode.w0))


def mean_vz(mode: ModeSpec) -> float:
    return photon_vz(mode) if mode.species == PHOTON else electron_vz(mode)


def vz_unexpanded(mode: ModeSpec) -> float:
    """v sqrt(1 - <p_perp^2>/p^2), i.e. the velocity before the paraxial expansion."""
    ratio = 2.0 * mode.zeta / (mode.k * mode.w0) ** 2
    return plane_wave_speed(mode.k, mode.m) * math.sqrt(1.0 - ratio)


def vz_from_numeric_phase(mode: ModeSpec, z: float = 0.0) -> float:
    """c (1 + <dPhi/dz>/k) using the quadrature value of <dPhi/dz>."""
    return C * (1.0 + moments(mode, z).dphi_dz.numeric / mode.k)


def centroid_mass(zeta: int, k: float, w0: float, m: float = 0.0) -> float:
    """Effective centroid mass sqrt(m^2 + 2 zeta hbar^2 / (c w0)^2) in kg."""
    hidden = math.sqrt(2.0 * zeta) * HBAR / (C * w0)
    if m == 0:
        return hidden
    return math.hypot(m, hidden)


@dataclass(frozen=True)
class SpectrumRow:
    n: int
    l: int
    zeta: int
    vz_over_c: float
    M_kg: float
    M_c2_over_E: float


SPECTRUM_COLUMNS = ("n", "l", "zeta", "vz_over_c", "M_kg", "M_c2_over_E")


def vz_spectrum(
    k: float,
    w0: float,
    species: str = PHOTON,
    m: Optional[float] = None,
    zeta_max: int = 10,
) -> List[SpectrumRow]:
    """One row per (n, l) with 2n+|l|+1 <= zeta_max, ordered by (zeta, n, l).

    Velocities and masses depend on (n, l) only through zeta, so the table
    steps by a constant velocity gap between consecutive zeta.
    """
    if zeta_max < 1:
        raise ValueError("zeta_max must be >= 1")
    if m is None:
        m = 0.0 if species == PHOTON else M_ELECTRON
    if species == PHOTON and m != 0:
        raise ValueError("photon mass must be 0")
    v_plane = plane_wave_speed(k, m) if species == ELECTRON else C
    energy = math.hypot(HBAR * k * C, m * C**2)
    rows = []
    for zeta in range(1, zeta_max + 1):
        vz = v_plane * (1.0 - _deficit(zeta, k, w0)) / C
        M = centroid_mass(zeta, k, w0, m)
        ratio = M * C**2 / energy
        for n in range((zeta - 1) // 2 + 1):
            a = zeta - 1 - 2 * n
            for l in ((0,) if a == 0 else (-a, a)):
                rows.append(SpectrumRow(n, l, zeta_of(n, l), vz, M, ratio))
    return rows
