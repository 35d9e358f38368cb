"""Laguerre-Gauss fields: point evaluation, grids, quadrature and checks."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Union

import numpy as np
from scipy.special import roots_laguerre

from . import _spectral
from .beamcore import ModeSpec, beam_geometry, laguerre, laguerre_derivative, norm_const

ENVELOPE = "envelope"
FULL = "full"
CONVENTIONS = (ENVELOPE, FULL)


class UnderResolvedError(ValueError):
    """Grid too small or too coarse for the requested field."""


# ----------------------------------------------------------------------------
# geometry


@dataclass(frozen=True)
class CartesianGrid:
    """Uniform periodic grid centred on the beam axis.

    Nodes are ``x_i = (i - nx // 2) * dx`` with ``dx = extent_x / nx``, so an
    even ``nx`` puts a node exactly on the axis, and the layout matches the
    FFT frequency ordering used by the spectral routines. Arrays are indexed
    ``[ix, iy]``.
    """

    nx: int
    extent_x: float
    ny: Optional[int] = None
    extent_y: Optional[float] = None

    kind = "cartesian"

    def __post_init__(self):
        if self.ny is None:
            object.__setattr__(self, "ny", self.nx)
        if self.extent_y is None:
            object.__setattr__(self, "extent_y", self.extent_x)
        if self.nx < 1 or self.ny < 1:
            raise ValueError("grid needs at least one node per axis")
        if not (self.extent_x > 0 and self.extent_y > 0):
            raise ValueError("grid extents must be positive")

    @property
    def shape(self):
        return (self.nx, self.ny)

    @property
    def dx(self) -> float:
        return self.extent_x / self.nx

    @property
    def dy(self) -> float:
        return self.extent_y / self.ny

    @property
    def x(self):
        return (np.arange(self.nx) - self.nx // 2) * self.dx

    @property
    def y(self):
        return (np.arange(self.ny) - self.ny // 2) * self.dy

    def mesh(self):
        return np.meshgrid(self.x, self.y, indexing="ij")

    def polar_mesh(self):
        X, Y = self.mesh()
        return np.hypot(X, Y), np.arctan2(Y, X)

    @property
    def weights(self):
        return np.full(self.shape, self.dx * self.dy)

    @property
    def min_extent(self) -> float:
        return min(self.extent_x, self.extent_y)

    def to_dict(self) -> dict:
        return dict(kind=self.kind, nx=self.nx, ny=self.ny, dx=self.dx, dy=self.dy)


@dataclass(frozen=True)
class PolarQuadrature:
    """Gauss-Laguerre radial nodes times a uniform azimuthal rule.

    The radial variable is ``u = 2 r^2 / scale^2``; nodes and weights are the
    standard Gauss-Laguerre ones for weight ``exp(-u)``, so the rule
    integrates ``exp(-u) * poly(u)`` exactly up to degree ``2 n_radial - 1``.
    The azimuthal trapezoid rule is exact for trigonometric polynomials of
    degree below ``n_azimuthal``. ``scale`` is normally the beam width at the
    sampled plane and is filled in by :func:`sample_grid` when left unset.
    """

    n_radial: int
    n_azimuthal: int = 1
    scale: Optional[float] = None

    kind = "polar-quadrature"

    def __post_init__(self):
        if self.n_radial < 1 or self.n_azimuthal < 1:
            raise ValueError("quadrature needs at least one node per axis")
        if self.scale is not None and not self.scale > 0:
            raise ValueError("quadrature scale must be positive")

    def with_scale(self, scale: float) -> "PolarQuadrature":
        return PolarQuadrature(self.n_radial, self.n_azimuthal, scale)

    @property
    def shape(self):
        return (self.n_radial, self.n_azimuthal)

    @cached_property
    def _laguerre_rule(self):
        u, lam = roots_laguerre(self.n_radial)
        return u, lam

    @property
    def u(self):
        return self._laguerre_rule[0]

    @property
    def u_weights(self):
        """Gauss-Laguerre weights (for integrands carrying ``exp(-u)``)."""
        return self._laguerre_rule[1]

    def _require_scale(self):
        if self.scale is None:
            raise ValueError("quadrature scale not set; use with_scale() or sample_grid()")
        return self.scale

    @property
    def r(self):
        return self._require_scale() * np.sqrt(self.u / 2.0)

    @property
    def phi(self):
        return 2 * np.pi * np.arange(self.n_azimuthal) / self.n_azimuthal

    def mesh(self):
        return np.meshgrid(self.r, self.phi, indexing="ij")

    @property
    def weights(self):
        """Weights for plain integrands: sum(weights * f) ~ int f r dr dphi."""
        w = self._require_scale()
        u, lam = self._laguerre_rule
        radial = np.exp(np.log(lam) + u) * w**2 / 4.0
        return np.outer(radial, np.full(self.n_azimuthal, 2 * np.pi / self.n_azimuthal))

    def to_dict(self) -> dict:
        return dict(kind=self.kind, nx=self.n_radial, ny=self.n_azimuthal, scale=self.scale)


Geometry = Union[CartesianGrid, PolarQuadrature]


def default_quadrature(mode: ModeSpec, extra: int = 8) -> PolarQuadrature:
    """Polar rule exact for every moment integrand of ``mode`` with margin."""
    n_radial = mode.n + abs(mode.l) + extra
    return PolarQuadrature(n_radial=n_radial, n_azimuthal=2 * abs(mode.l) + 2)


# ----------------------------------------------------------------------------
# data types


@dataclass(frozen=True)
class AmplitudePhase:
    """Real amplitude and phase of a field sample.

    ``amplitude`` carries the sign of the Laguerre factor (it is the real
    amplitude of the closed-form mode), so ``phase`` stays a smooth function
    of position. At a vortex core (``r = 0``, ``l != 0``) the phase is
    reported as 0.
    """

    amplitude: np.ndarray
    phase: np.ndarray

    @property
    def value(self):
        return self.amplitude * np.exp(1j * self.phase)


@dataclass(frozen=True)
class FieldGrid:
    """Complex scalar field sampled on a transverse grid at plane ``z``."""

    values: np.ndarray
    geometry: Geometry
    z: float
    k: float
    phase_convention: str = ENVELOPE
    mode: Optional[ModeSpec] = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=complex, copy=True)
        if values.shape != tuple(self.geometry.shape):
            raise ValueError(
                f"field shape {values.shape} does not match geometry {tuple(self.geometry.shape)}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("field contains non-finite values")
        if self.phase_convention not in CONVENTIONS:
            raise ValueError(f"phase_convention must be one of {CONVENTIONS}")
        if not self.k > 0:
            raise ValueError("k must be positive")
        if isinstance(self.geometry, PolarQuadrature) and self.geometry.scale is None:
            raise ValueError("polar field needs a quadrature scale")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def with_values(self, values, z: Optional[float] = None) -> "FieldGrid":
        return FieldGrid(
            values,
            self.geometry,
            self.z if z is None else z,
            self.k,
            self.phase_convention,
            self.mode,
        )

    def to_envelope(self) -> "FieldGrid":
        if self.phase_convention == ENVELOPE:
            return self
        return FieldGrid(self.values * np.exp(-1j * self.k * self.z), self.geometry, self.z, self.k,
                         ENVELOPE, self.mode)

    def to_full(self) -> "FieldGrid":
        if self.phase_convention == FULL:
            return self
        return FieldGrid(self.values * np.exp(1j * self.k * self.z), self.geometry, self.z, self.k,
                         FULL, self.mode)

    def __mul__(self, scalar):
        return self.with_values(self.values * scalar)

    __rmul__ = __mul__

    def __add__(self, other: "FieldGrid"):
        _check_compatible(self, other)
        return self.with_values(self.values + other.values)


def _check_compatible(a: FieldGrid, b: FieldGrid):
    if a.geometry != b.geometry:
        raise ValueError("fields live on different grids")
    if a.phase_convention != b.phase_convention:
        raise ValueError("fields use different phase conventions")


# ----------------------------------------------------------------------------
# point evaluation


def _radial_parts(mode: ModeSpec, r, z):
    geo = beam_geometry(z, mode)
    r = np.asarray(r, dtype=float)
    u = 2.0 * r**2 / geo.w**2
    m = abs(mode.l)
    pref = norm_const(mode.n, mode.l) / geo.w
    return geo, u, m, pref


def amplitude(mode: ModeSpec, r, z):
    geo, u, m, pref = _radial_parts(mode, r, z)
    return pref * np.sqrt(u) ** m * laguerre(mode.n, m, u) * np.exp(-u / 2.0)


def phase(mode: ModeSpec, r, phi, z):
    geo = beam_geometry(z, mode)
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    ph = mode.l * phi + 0.5 * mode.k * r**2 * geo.curvature - mode.zeta * geo.gouy
    if mode.l != 0:
        ph = np.where(r == 0, 0.0, ph)
    return ph


def eval_mode(mode: ModeSpec, r, phi, z: float) -> AmplitudePhase:
    """Amplitude and phase of the LG mode at cylindrical points (r, phi, z)."""
    if np.any(np.asarray(r) < 0):
        raise ValueError("r must be non-negative")
    return AmplitudePhase(amplitude(mode, r, z), phase(mode, r, phi, z))


def mode_value(mode: ModeSpec, r, phi, z: float, phase_convention: str = ENVELOPE):
    val = eval_mode(mode, r, phi, z).value
    if phase_convention == FULL:
        val = val * np.exp(1j * mode.k * z)
    return val


def amplitude_u_derivative(mode: ModeSpec, r, z):
    """dA/du with u = 2 r^2 / w(z)^2, from the Laguerre derivative identity."""
    geo, u, m, pref = _radial_parts(mode, r, z)
    L = laguerre(mode.n, m, u)
    dL = laguerre_derivative(mode.n, m, u)
    if m == 0:
        head = 0.0
    else:
        # singular only at u = 0 for |l| = 1
        with np.errstate(divide="ignore", invalid="ignore"):
            head = 0.5 * m * u ** (0.5 * m - 1.0) * L
    return pref * np.exp(-u / 2.0) * (head + np.sqrt(u) ** m * (dL - 0.5 * L))


def transverse_gradient_sq(mode: ModeSpec, r, z):
    """|grad_perp Psi|^2 from analytic radial and azimuthal derivatives.

    Built from dA/dr, the curvature term of the phase and l/r; it never
    touches the longitudinal phase derivative.
    """
    geo, u, m, pref = _radial_parts(mode, r, z)
    r = np.asarray(r, dtype=float)
    A = amplitude(mode, r, z)
    dA_dr_sq = 8.0 * u / geo.w**2 * amplitude_u_derivative(mode, r, z) ** 2
    dphi_dr = mode.k * r * geo.curvature
    with np.errstate(divide="ignore", invalid="ignore"):
        azim = np.where(r > 0, (mode.l * A / r) ** 2, 0.0)
    return dA_dr_sq + (A * dphi_dr) ** 2 + azim


def laplacian_over_amplitude(mode: ModeSpec, r, z):
    """grad_perp^2 A / A in closed form.

    With u = 2 r^2/w^2 the Laguerre differential equation reduces the ratio to
    (8/w^2) [a^2/u + u/4 - (n + a + 1/2)], a = |l|/2. Undefined at u = 0 for
    l != 0 (returned as nan).
    """
    geo, u, m, _ = _radial_parts(mode, r, z)
    a = 0.5 * m
    with np.errstate(divide="ignore", invalid="ignore"):
        core = np.where(u > 0, a * a / u, np.nan) if m > 0 else 0.0
    return 8.0 / geo.w**2 * (core + u / 4.0 - (mode.n + a + 0.5))


def dphi_dz_analytic(mode: ModeSpec, r, z: float):
    """Longitudinal phase derivative of the envelope in rad/m."""
    r = np.asarray(r, dtype=float)
    k, w0 = mode.k, mode.w0
    w2 = beam_geometry(z, mode).w ** 2
    return 2.0 / (k * w2) * ((r**2 / w0**2) * (1.0 - 8.0 * z**2 / (k**2 * w0**2 * w2)) - mode.zeta)


# ----------------------------------------------------------------------------
# grids


def sample_grid(
    mode: ModeSpec,
    geometry: Geometry,
    z: float = 0.0,
    phase_convention: str = ENVELOPE,
) -> FieldGrid:
    """Sample ``mode`` on ``geometry`` at plane ``z``.

    Cartesian grids narrower than 4 w(z) are refused. A polar rule without a
    scale is scaled to w(z).
    """
    if phase_convention not in CONVENTIONS:
        raise ValueError(f"phase_convention must be one of {CONVENTIONS}")
    w = beam_geometry(z, mode).w
    if isinstance(geometry, CartesianGrid):
        if geometry.min_extent < 4 * w:
            raise UnderResolvedError(
                f"grid extent {geometry.min_extent:.4g} m is below 4 w(z) = {4 * w:.4g} m"
            )
        R, PHI = geometry.polar_mesh()
    elif isinstance(geometry, PolarQuadrature):
        if geometry.scale is None:
            geometry = geometry.with_scale(w)
        R, PHI = geometry.mesh()
    else:
        raise TypeError(f"unsupported geometry {type(geometry).__name__}")
    values = mode_value(mode, R, PHI, z, phase_convention)
    return FieldGrid(values, geometry, z, mode.k, phase_convention, mode)


def inner(f: FieldGrid, g: FieldGrid) -> complex:
    """<f, g> = int conj(f) g r dr dphi with the grid's quadrature rule."""
    _check_compatible(f, g)
    return complex(np.sum(f.geometry.weights * np.conj(f.values) * g.values))


def norm(field: FieldGrid) -> float:
    """int |Psi|^2 r dr dphi."""
    return float(np.sum(field.geometry.weights * np.abs(field.values) ** 2))


def overlap(mode_a: ModeSpec, mode_b: ModeSpec, z: float, geometry: Optional[Geometry] = None) -> complex:
    if geometry is None:
        geometry = PolarQuadrature(
            n_radial=max(mode_a.n, mode_b.n) + max(abs(mode_a.l), abs(mode_b.l)) + 8,
            n_azimuthal=abs(mode_a.l) + abs(mode_b.l) + 2,
        )
    if isinstance(geometry, PolarQuadrature) and geometry.scale is None:
        geometry = geometry.with_scale(beam_geometry(z, mode_a).w)
    return inner(sample_grid(mode_a, geometry, z), sample_grid(mode_b, geometry, z))


# ----------------------------------------------------------------------------
# paraxial-equation residual

FieldSource = Union[ModeSpec, Callable]


def paraxial_residual(
    source: FieldSource,
    geometry: CartesianGrid,
    z: float = 0.0,
    k: Optional[float] = None,
    dz: Optional[float] = None,
) -> float:
    """Relative L2 norm of (lap_perp + 2ik d/dz) Psi on a cartesian grid.

    ``source`` is either a :class:`ModeSpec` or a callable ``f(x, y, z)``
    returning envelope samples (then ``k`` and ``dz`` are required). The
    transverse Laplacian is spectral; d/dz is a central difference of two
    analytically sampled planes. The norm is taken relative to the Laplacian
    term; a field for which both terms vanish has residual 0.
    """
    if not isinstance(geometry, CartesianGrid):
        raise TypeError("the residual needs a cartesian grid")
    X, Y = geometry.mesh()
    if isinstance(source, ModeSpec):
        mode = source
        k = mode.k
        dz = 1e-5 * mode.z_rayleigh if dz is None else dz
        w = beam_geometry(z, mode).w
        if geometry.min_extent < 8 * w:
            raise UnderResolvedError(
                f"grid extent {geometry.min_extent:.4g} m is below 8 w(z) = {8 * w:.4g} m"
            )
        R, PHI = np.hypot(X, Y), np.arctan2(Y, X)

        def func(zz):
            return mode_value(mode, R, PHI, zz)
    else:
        if k is None or dz is None:
            raise ValueError("a callable source needs k and dz")

        def func(zz):
            return np.broadcast_to(np.asarray(source(X, Y, zz), dtype=complex), X.shape)

    psi = func(z)
    if _spectral.high_frequency_fraction(psi, geometry) > 1e-8:
        raise UnderResolvedError("field has spectral power near the grid Nyquist limit")
    lap = _spectral.laplacian(psi, geometry)
    dpsi_dz = (func(z + dz) - func(z - dz)) / (2 * dz)
    res = lap + 2j * k * dpsi_dz
    scale = np.linalg.norm(lap)
    res_norm = np.linalg.norm(res)
    if scale == 0:
        return 0.0 if res_norm == 0 else float("inf")
    return float(res_norm / scale)
