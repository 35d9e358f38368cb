"""Local phase and group velocity maps of the full field exp(ikz) Psi.

Mode-based maps use closed-form gradients of the LG phase. The ``*_from_field``
variants work on any sampled full-convention field with spectral transverse
derivatives, taking d/dz from the paraxial equation itself.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _spectral
from .beamcore import C, ModeSpec, beam_geometry
from .lgfield import (
    FULL,
    CartesianGrid,
    FieldGrid,
    PolarQuadrature,
    amplitude,
    default_quadrature,
    dphi_dz_analytic,
    laplacian_over_amplitude,
    sample_grid,
)

MASK_THRESHOLD = 1e-6
K_STEP = 1e-6  # relative step for the omega derivative


@dataclass(frozen=True)
class VelocityMap:
    """Local velocities (m/s) on a grid; masked nodes hold nan.

    ``vz_local`` is c (1 + dPhi/dz / k), the pointwise contribution to the
    mean longitudinal velocity; it is kept for region classification.
    """

    geometry: CartesianGrid
    vp: Optional[np.ndarray]
    vg: Optional[np.ndarray]
    mask: np.ndarray
    vz_local: Optional[np.ndarray] = None

    def radius(self):
        X, Y = self.geometry.mesh()
        return np.hypot(X, Y)


def _grid_polar(geometry: CartesianGrid):
    if not isinstance(geometry, CartesianGrid):
        raise TypeError("velocity maps use cartesian grids")
    return geometry.polar_mesh()


def amplitude_mask(mode: ModeSpec, geometry: CartesianGrid, z: float):
    """True where the field is too weak (or singular) for a local velocity."""
    R, _ = _grid_polar(geometry)
    A = np.abs(amplitude(mode, R, z))
    mask = A < MASK_THRESHOLD * A.max()
    if mode.l != 0:
        mask |= R == 0
    return mask


def _phase_gradient(mode: ModeSpec, R, z, k: Optional[float] = None):
    """(d_r, r^-1 d_phi, d_z) of the total phase k z + Phi, with k overridable."""
    if k is not None:
        mode = mode.replace(k=k)
    geo = beam_geometry(z, mode)
    with np.errstate(divide="ignore"):
        g_phi = np.where(R > 0, mode.l / np.where(R > 0, R, 1.0), 0.0)
    g_r = mode.k * R * geo.curvature
    g_z = mode.k + dphi_dz_analytic(mode, R, z)
    return g_r, g_phi, g_z


def _envelope_gradient(mode: ModeSpec, R, z, k: float):
    m = mode.replace(k=k)
    geo = beam_geometry(z, m)
    return m.k * R * geo.curvature, dphi_dz_analytic(m, R, z)


def phase_velocity_gradient(mode: ModeSpec, geometry: CartesianGrid, z: float = 0.0) -> VelocityMap:
    """v_p = omega / |grad Phi_total| with omega = c k."""
    R, _ = _grid_polar(geometry)
    mask = amplitude_mask(mode, geometry, z)
    g_r, g_phi, g_z = _phase_gradient(mode, R, z)
    vp = C * mode.k / np.sqrt(g_r**2 + g_phi**2 + g_z**2)
    vz_local = C * (1.0 + dphi_dz_analytic(mode, R, z) / mode.k)
    return VelocityMap(geometry, np.where(mask, np.nan, vp), None, mask, vz_local)


def phase_velocity_chen(mode: ModeSpec, geometry: CartesianGrid, z: float = 0.0) -> VelocityMap:
    """v_p = c [1 + lap_perp A / (k^2 A)]^(-1/2), closed-form Laplacian ratio.

    Nodes where the bracket is not positive are masked as undefined.
    """
    R, _ = _grid_polar(geometry)
    mask = amplitude_mask(mode, geometry, z)
    with np.errstate(invalid="ignore"):
        bracket = 1.0 + laplacian_over_amplitude(mode, R, z) / mode.k**2
        mask = mask | ~(bracket > 0)
        vp = C / np.sqrt(np.where(mask, 1.0, bracket))
    vz_local = C * (1.0 + dphi_dz_analytic(mode, R, z) / mode.k)
    return VelocityMap(geometry, np.where(mask, np.nan, vp), None, mask, vz_local)


def group_velocity_map(mode: ModeSpec, geometry: CartesianGrid, z: float = 0.0) -> VelocityMap:
    """v_g = |d_omega grad Phi_total|^(-1) at fixed w0, n, l.

    d/dk of the kz term is exactly 1 and is added analytically; only the
    envelope part is differenced (central, relative step ``K_STEP``).
    """
    R, _ = _grid_polar(geometry)
    mask = amplitude_mask(mode, geometry, z)
    h = K_STEP * mode.k
    r_p, z_p = _envelope_gradient(mode, R, z, mode.k + h)
    r_m, z_m = _envelope_gradient(mode, R, z, mode.k - h)
    d_r = (r_p - r_m) / (2 * h)
    d_z = 1.0 + (z_p - z_m) / (2 * h)
    # the azimuthal component l/r does not depend on k
    vg = C / np.hypot(d_r, d_z)
    vz_local = C * (1.0 + dphi_dz_analytic(mode, R, z) / mode.k)
    return VelocityMap(geometry, None, np.where(mask, np.nan, vg), mask, vz_local)


def velocity_map(mode: ModeSpec, geometry: CartesianGrid, z: float = 0.0, lpv: str = "gradient") -> VelocityMap:
    """Phase (by ``lpv`` formula) and group velocities on one grid."""
    if lpv == "gradient":
        pv = phase_velocity_gradient(mode, geometry, z)
    elif lpv == "chen":
        pv = phase_velocity_chen(mode, geometry, z)
    else:
        raise ValueError("lpv must be 'gradient' or 'chen'")
    gv = group_velocity_map(mode, geometry, z)
    mask = pv.mask | gv.mask
    return VelocityMap(
        geometry,
        np.where(mask, np.nan, pv.vp),
        np.where(mask, np.nan, gv.vg),
        mask,
        pv.vz_local,
    )


def velocity_maps_from_field(field: FieldGrid) -> VelocityMap:
    """Phase (gradient form) and group velocity of an arbitrary full field.

    The envelope is recovered by removing exp(ikz). Transverse derivatives
    are spectral; d(Psi)/dz = (i / 2k) lap_perp Psi from the paraxial
    equation, so the envelope phase slope is Re(conj(Psi) lap Psi)/(2k|Psi|^2).
    For the group velocity the sampled envelope is held fixed as omega varies.
    """
    if field.phase_convention != FULL:
        raise ValueError("local velocities need the full phase convention")
    grid = field.geometry
    if not isinstance(grid, CartesianGrid):
        raise TypeError("velocity maps use cartesian grids")
    k = field.k
    psi = field.to_envelope().values
    dens = np.abs(psi) ** 2
    mask = dens < (MASK_THRESHOLD * np.sqrt(dens.max())) ** 2 if dens.max() > 0 else np.ones(dens.shape, bool)
    safe = np.where(mask, 1.0, dens)
    gx, gy = _spectral.gradient(psi, grid)
    lap = _spectral.laplacian(psi, grid)
    grad_x = np.imag(np.conj(psi) * gx) / safe
    grad_y = np.imag(np.conj(psi) * gy) / safe
    env_z = np.real(np.conj(psi) * lap) / (2 * k * safe)
    g_z = k + env_z
    vp = C * k / np.sqrt(grad_x**2 + grad_y**2 + g_z**2)
    # d/dk of k + env_z at fixed envelope: 1 - env_z / k
    vg = C / np.abs(1.0 - env_z / k)
    vz_local = C * (1.0 + env_z / k)
    return VelocityMap(grid, np.where(mask, np.nan, vp), np.where(mask, np.nan, vg), mask, vz_local)


def chen_from_field(field: FieldGrid) -> VelocityMap:
    """Chen-form phase velocity with a spectral Laplacian of |Psi|."""
    grid = field.geometry
    if not isinstance(grid, CartesianGrid):
        raise TypeError("velocity maps use cartesian grids")
    A = np.abs(field.values)
    mask = A < MASK_THRESHOLD * A.max() if A.max() > 0 else np.ones(A.shape, bool)
    lapA = np.real(_spectral.laplacian(A, grid))
    with np.errstate(invalid="ignore", divide="ignore"):
        bracket = 1.0 + lapA / (field.k**2 * np.where(mask, 1.0, A))
        mask = mask | ~(bracket > 0)
        vp = C / np.sqrt(np.where(mask, 1.0, bracket))
    return VelocityMap(grid, np.where(mask, np.nan, vp), None, mask, None)


@dataclass(frozen=True)
class RegionClassification:
    subluminal: np.ndarray
    superluminal: np.ndarray
    boundary_radius: Optional[float]


def classify_regions(vmap: VelocityMap, which: str = "vz") -> RegionClassification:
    """Split unmasked nodes by the sign of v - c.

    ``which`` picks the field classified: ``"vz"`` (local longitudinal
    contribution), ``"vp"`` or ``"vg"``. The boundary radius always comes
    from the sign change of the local longitudinal contribution: midway
    between the outermost subluminal and innermost superluminal node.
    """
    values = {"vz": vmap.vz_local, "vp": vmap.vp, "vg": vmap.vg}[which]
    if values is None:
        raise ValueError(f"map carries no {which!r} data")
    live = ~vmap.mask
    with np.errstate(invalid="ignore"):
        sub = live & (values < C)
        sup = live & (values > C)
    boundary = None
    if vmap.vz_local is not None:
        R = vmap.radius()
        slow = live & (vmap.vz_local < C)
        fast = live & (vmap.vz_local > C)
        if slow.any() and fast.any():
            boundary = 0.5 * (float(R[slow].max()) + float(R[fast].min()))
    return RegionClassification(sub, sup, boundary)


def intensity_weighted_deficit(mode: ModeSpec, z: float = 0.0, quad: Optional[PolarQuadrature] = None) -> float:
    """int |Psi|^2 (-dPhi/dz / k) c r dr dphi, in m/s."""
    if quad is None:
        quad = default_quadrature(mode)
    field = sample_grid(mode, quad, z)
    R, _ = field.geometry.mesh()
    integrand = np.abs(field.values) ** 2 * (-dphi_dz_analytic(mode, R, z) / mode.k) * C
    return float(np.sum(field.geometry.weights * integrand))


def plane_wave_field(grid: CartesianGrid, k: float, z: float = 0.0, amplitude_value: complex = 1.0) -> FieldGrid:
    """Uniform full-convention field exp(ikz) on ``grid``."""
    values = np.full(grid.shape, amplitude_value, dtype=complex) * np.exp(1j * k * z)
    return FieldGrid(values, grid, z, k, FULL)
