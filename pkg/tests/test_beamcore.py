import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from twistbeam.beamcore import (
    EV,
    HBAR,
    C,
    H_PLANCK,
    K_ELECTRON,
    M_ELECTRON,
    LAGUERRE_MAX_ORDER,
    ModeSpec,
    ParaxialityWarning,
    beam_geometry,
    beam_width,
    convert_units,
    laguerre,
    laguerre_derivative,
    norm_const,
    zeta_of,
)

from conftest import make_mode


def laguerre_exact(n, alpha, x):
    x = Fraction(x)
    total = Fraction(0)
    for j in range(n + 1):
        total += Fraction((-1) ** j * math.comb(n + alpha, n - j)) * x**j / math.factorial(j)
    return total


class TestModeSpec:
    def test_zeta(self):
        assert zeta_of(2, -3) == 8
        assert make_mode(1, 3).zeta == 6

    def test_rayleigh(self):
        m = make_mode(kw0=50.0)
        assert m.z_rayleigh == pytest.approx(m.k * m.w0**2 / 2, rel=1e-15)

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(n=-1, l=0, k=1e6, w0=1e-4),
            dict(n=0, l=0, k=-1.0, w0=1e-4),
            dict(n=0, l=0, k=1e6, w0=0.0),
            dict(n=0, l=0, k=1e6, w0=1e-4, species="neutron"),
            dict(n=0, l=0, k=1e6, w0=1e-4, m=1e-30),
            dict(n=0.5, l=0, k=1e6, w0=1e-4),
        ],
    )
    def test_rejects_invalid(self, kwargs):
        with pytest.raises((ValueError, TypeError)):
            ModeSpec(**kwargs)

    def test_paraxiality(self):
        with pytest.warns(ParaxialityWarning):
            make_mode(0, 3, kw0=5.0)  # eps = 0.16
        with pytest.raises(ValueError):
            make_mode(0, 0, kw0=1.0)

    def test_electron_default_mass(self):
        m = make_mode(species="electron")
        assert m.m == M_ELECTRON

    def test_dict_round_trip(self):
        m = make_mode(2, -3, species="electron")
        assert ModeSpec.from_dict(m.to_dict()) == m


class TestGeometry:
    def test_waist(self, gauss):
        g = beam_geometry(0.0, gauss)
        assert g.w == gauss.w0 and g.gouy == 0.0 and g.R == math.inf and g.is_flat

    def test_rayleigh_plane(self, gauss):
        zR = gauss.z_rayleigh
        g = beam_geometry(zR, gauss)
        assert g.w == pytest.approx(math.sqrt(2) * gauss.w0, rel=1e-15)
        assert g.gouy == pytest.approx(math.pi / 4, rel=1e-15)
        assert g.R == pytest.approx(2 * zR, rel=1e-15)
        gm = beam_geometry(-zR, gauss)
        assert gm.w == pytest.approx(g.w, rel=1e-15) and gm.gouy == pytest.approx(-math.pi / 4, rel=1e-15)

    def test_even_width(self):
        rng = np.random.default_rng(1)
        z = rng.uniform(-1e3, 1e3, 10_000)
        w0, k = 1e-4, 1e6
        wp, wm = beam_width(z, w0, k), beam_width(-z, w0, k)
        assert np.all(wp * w0 >= w0**2)
        assert np.array_equal(wp**2 * wm**2, wp**2 * wp**2)

    @given(st.floats(-1e4, 1e4, allow_nan=False))
    def test_gouy_range(self, z):
        g = beam_geometry(z, make_mode())
        assert -math.pi / 2 < g.gouy < math.pi / 2 and g.w >= make_mode().w0


class TestLaguerre:
    def test_trivial(self):
        assert laguerre(0, 3, 1.7) == 1.0
        assert laguerre(1, 2, 0.5) == pytest.approx(2.5, rel=1e-15)

    def test_exact_rational(self):
        exact = float(laguerre_exact(5, 3, Fraction(2)))
        assert laguerre(5, 3, 2.0) == pytest.approx(exact, rel=1e-14)

    @pytest.mark.parametrize("n,alpha,x", [(7, 0, 3.3), (12, 5, 0.25), (20, 10, 17.0), (30, 2, 45.5)])
    def test_against_exact_series(self, n, alpha, x):
        exact = float(laguerre_exact(n, alpha, Fraction(x)))
        assert laguerre(n, alpha, x) == pytest.approx(exact, rel=1e-10, abs=1e-12 * abs(exact) + 1e-300)

    @given(st.integers(1, LAGUERRE_MAX_ORDER - 1), st.integers(0, 20), st.floats(0.0, 100.0))
    def test_recurrence(self, n, alpha, x):
        lhs = (n + 1) * laguerre(n + 1, alpha, x)
        rhs = (2 * n + 1 + alpha - x) * laguerre(n, alpha, x) - (n + alpha) * laguerre(n - 1, alpha, x)
        scale = max(abs(lhs), abs((2 * n + 1 + alpha - x) * laguerre(n, alpha, x)), 1e-300)
        assert abs(lhs - rhs) <= 1e-12 * scale

    def test_vectorized(self):
        x = np.linspace(0, 10, 7)
        assert np.allclose(laguerre(3, 1, x), [laguerre(3, 1, v) for v in x], rtol=0, atol=0)

    def test_rejects(self):
        with pytest.raises(ValueError):
            laguerre(-1, 0, 1.0)
        with pytest.raises(ValueError):
            laguerre(LAGUERRE_MAX_ORDER + 1, 0, 1.0)

    def test_derivative(self):
        x, h = 3.1, 1e-5
        fd = (laguerre(6, 2, x + h) - laguerre(6, 2, x - h)) / (2 * h)
        assert laguerre_derivative(6, 2, x) == pytest.approx(fd, rel=1e-8)


class TestNormConst:
    def test_values(self):
        assert norm_const(0, 0) == pytest.approx(math.sqrt(2 / math.pi), rel=1e-15)
        assert norm_const(1, 2) == pytest.approx(math.sqrt(2 / (6 * math.pi)), rel=1e-15)
        assert norm_const(1, -2) == norm_const(1, 2)

    def test_large_orders(self):
        v = norm_const(30, 40)
        assert math.isfinite(v) and v > 0

    @given(st.integers(0, 50), st.integers(-60, 60))
    def test_log_domain(self, n, l):
        log_check = 2 * math.log(norm_const(n, l)) + math.log(math.pi) + math.lgamma(n + abs(l) + 1) \
            - math.log(2) - math.lgamma(n + 1)
        assert abs(math.expm1(log_check)) < 1e-12


class TestUnits:
    def test_photon_wavelength(self):
        u = convert_units(wavelength=795e-9)
        assert u.energy_ev == pytest.approx(H_PLANCK * C / 795e-9 / EV, rel=1e-15)
        assert u.energy_ev == pytest.approx(1.5595, abs=1e-4)

    def test_photon_energy(self):
        u = convert_units(energy=EV)
        assert u.k == pytest.approx(EV / (HBAR * C), rel=1e-15)

    def test_electron(self):
        rest = M_ELECTRON * C**2
        assert convert_units(energy=rest, species="electron").k == 0.0
        u = convert_units(kinetic_energy=100e3 * EV, species="electron")
        assert u.K == pytest.approx(2.58961e12, rel=1e-5)
        assert u.E == pytest.approx(rest + 100e3 * EV, rel=1e-15)
        back = convert_units(wavenumber=u.k, species="electron")
        assert back.E == pytest.approx(u.E, rel=1e-14)
        assert K_ELECTRON == pytest.approx(u.K, rel=1e-15)

    def test_rejects(self):
        with pytest.raises(ValueError):
            convert_units(energy=0.5 * M_ELECTRON * C**2, species="electron")
        with pytest.raises(ValueError):
            convert_units(wavelength=1e-6, energy=EV)
        with pytest.raises(ValueError):
            convert_units()
        with pytest.raises(ValueError):
            convert_units(wavelength=-1.0)
