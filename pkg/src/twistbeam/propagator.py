"""Spectral solver for the free paraxial equation on cartesian grids.

In transverse-frequency space the paraxial equation is diagonal, so each
step multiplies the spectrum by exp(-i |q|^2 dz / (2k)); apart from grid
truncation the step is exact. Steps only matter when an absorbing boundary
is applied between them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _spectral
from .beamcore import C, ModeSpec, beam_geometry
from .lgfield import (
    ENVELOPE,
    CartesianGrid,
    FieldGrid,
    UnderResolvedError,
    inner,
    norm,
    sample_grid,
)

ALIAS_CUTOFF = 0.8
ALIAS_POWER = 1e-8


@dataclass(frozen=True)
class PropagationPlan:
    """Grid, wavenumber and step for repeated propagation.

    Parameters
    ----------
    grid : CartesianGrid
    k : float
        Wavenumber (rad/m).
    dz : float, optional
        Step between intermediate planes. ``None`` means one exact step.
    absorber_width : float
        Fraction of the half-extent covered by a cos^2 absorbing edge applied
        after each step. 0 disables absorption (norm is then conserved).
    """

    grid: CartesianGrid
    k: float
    dz: Optional[float] = None
    absorber_width: float = 0.0

    def __post_init__(self):
        if not isinstance(self.grid, CartesianGrid):
            raise TypeError("propagation needs a cartesian grid")
        if not self.k > 0:
            raise ValueError("k must be positive")
        if self.dz is not None and not self.dz > 0:
            raise ValueError("dz must be positive")
        if not 0.0 <= self.absorber_width < 1.0:
            raise ValueError("absorber_width must lie in [0, 1)")

    @property
    def q2(self):
        qx, qy = _spectral.angular_frequencies(self.grid)
        return qx**2 + qy**2

    def transfer(self, distance: float):
        return np.exp(-1j * self.q2 * distance / (2.0 * self.k))

    def absorber(self):
        if self.absorber_width == 0.0:
            return None
        X, Y = self.grid.mesh()
        prof = np.ones(self.grid.shape)
        for coord, half in ((X, 0.5 * self.grid.extent_x), (Y, 0.5 * self.grid.extent_y)):
            start = half * (1.0 - self.absorber_width)
            s = np.clip((np.abs(coord) - start) / (half - start), 0.0, 1.0)
            prof *= np.cos(0.5 * np.pi * s) ** 2
        return prof

    def check_mode(self, mode: ModeSpec, z_max: float) -> None:
        """Refuse plans that cannot hold ``mode`` out to ``|z| = z_max``."""
        w_max = beam_geometry(z_max, mode).w
        if self.grid.min_extent < 8 * w_max:
            raise UnderResolvedError(
                f"grid extent {self.grid.min_extent:.4g} m is below 8 w(z_max) = {8 * w_max:.4g} m"
            )
        if self.dz is not None and self.dz > mode.z_rayleigh / 100:
            raise ValueError("dz must not exceed zR/100")
        if not math.isclose(self.k, mode.k, rel_tol=1e-15):
            raise ValueError("plan and mode use different wavenumbers")


def check_aliasing(field: FieldGrid) -> float:
    frac = _spectral.high_frequency_fraction(field.values, field.geometry, ALIAS_CUTOFF)
    if frac >= ALIAS_POWER:
        raise UnderResolvedError(
            f"{frac:.3g} of the spectral power lies above {ALIAS_CUTOFF} x Nyquist"
        )
    return frac


def propagate(field: FieldGrid, plan: PropagationPlan, z_target: float) -> FieldGrid:
    """Advance an envelope field from ``field.z`` to ``z_target``."""
    if field.phase_convention != ENVELOPE:
        raise ValueError("propagate works on envelope fields; call to_envelope() first")
    if field.geometry != plan.grid:
        raise ValueError("field is not on the plan's grid")
    if not math.isclose(field.k, plan.k, rel_tol=1e-15):
        raise ValueError("field and plan use different wavenumbers")
    distance = z_target - field.z
    if distance == 0:
        return field
    check_aliasing(field)
    spec = _spectral.fft2(field.values)
    absorb = plan.absorber()
    if plan.dz is None or absorb is None:
        out = _spectral.ifft2(spec * plan.transfer(distance))
    else:
        n = max(1, int(math.ceil(abs(distance) / plan.dz - 1e-9)))
        step = distance / n
        kernel = plan.transfer(step)
        for _ in range(n):
            spec = _spectral.fft2(_spectral.ifft2(spec * kernel) * absorb)
        out = _spectral.ifft2(spec)
    return field.with_values(out, z=z_target)


def fidelity(field: FieldGrid, mode: ModeSpec) -> float:
    """|<Psi_num, Psi_mode>|^2 / (<Psi_num,Psi_num> <Psi_mode,Psi_mode>) at field.z."""
    ref = sample_grid(mode, field.geometry, field.z, field.phase_convention)
    num = abs(inner(field, ref)) ** 2
    den = norm(field) * norm(ref)
    return float(num / den) if den > 0 else 0.0


def default_plan(mode: ModeSpec, n_nodes: int = 256, z_max: float = 0.0, margin: float = 12.0) -> PropagationPlan:
    """Square grid of ``margin`` x w(z_max), the spacing this module tests with."""
    extent = margin * beam_geometry(z_max, mode).w
    return PropagationPlan(CartesianGrid(n_nodes, extent), mode.k)


def measure_vz(
    mode: ModeSpec,
    plan: Optional[PropagationPlan] = None,
    z: float = 0.0,
    probe: float = 1e-4,
    z_start: Optional[float] = None,
) -> float:
    """<v_z> from numerically propagated planes.

    The mode is sampled once at ``z_start`` (default: ``z - 3 probe zR``),
    propagated to ``z`` and ``z +/- probe zR``, and dPhi/dz is taken from
    arg(Psi(z+d) conj(Psi(z-d))) / 2d, averaged with weight |Psi(z)|^2.
    Returns c (1 + <dPhi/dz>/k) for photons and the plane-wave group speed
    times the same factor for massive modes.
    """
    if plan is None:
        plan = default_plan(mode, z_max=abs(z) + mode.z_rayleigh * probe * 4)
    d = probe * mode.z_rayleigh
    if z_start is None:
        z_start = z - 3 * d
    plan.check_mode(mode, max(abs(z_start), abs(z) + d))
    start = sample_grid(mode, plan.grid, z_start)
    centre = propagate(start, plan, z)
    ahead = propagate(start, plan, z + d)
    behind = propagate(start, plan, z - d)
    dphase = np.angle(ahead.values * np.conj(behind.values))
    weight = np.abs(centre.values) ** 2
    mean_dphase = float(np.sum(weight * dphase) / np.sum(weight))
    if abs(mean_dphase) < 10 * np.finfo(float).eps:
        raise UnderResolvedError("probe separation too small to resolve the phase advance")
    mean_dphi_dz = mean_dphase / (2 * d)
    from .expectations import plane_wave_speed

    return plane_wave_speed(mode.k, mode.m) * (1.0 + mean_dphi_dz / mode.k)
