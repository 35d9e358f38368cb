import numpy as np
import pytest

from twistbeam import _spectral
from twistbeam.beamcore import C, beam_geometry
from twistbeam.expectations import photon_vz
from twistbeam.lgfield import FULL, CartesianGrid, UnderResolvedError, norm, sample_grid
from twistbeam.propagator import (
    PropagationPlan,
    check_aliasing,
    default_plan,
    fidelity,
    measure_vz,
    propagate,
)

from conftest import make_mode


def plan_for(mode, nodes=256, zf=2.0):
    return default_plan(mode, nodes, zf * mode.z_rayleigh)


class TestPropagate:
    def test_identity(self, gauss):
        f = sample_grid(gauss, plan_for(gauss).grid, 0.0)
        assert propagate(f, plan_for(gauss), 0.0) is f

    def test_gaussian_to_rayleigh(self, gauss):
        plan = plan_for(gauss, zf=1.0)
        out = propagate(sample_grid(gauss, plan.grid, 0.0), plan, gauss.z_rayleigh)
        assert fidelity(out, gauss) >= 1 - 1e-6

    @pytest.mark.parametrize("n,l", [(2, 3), (0, -5), (5, 1)])
    def test_higher_modes(self, n, l):
        m = make_mode(n, l)
        plan = plan_for(m, 512)
        f0 = sample_grid(m, plan.grid, 0.0)
        f1 = propagate(f0, plan, 2 * m.z_rayleigh)
        assert fidelity(f1, m) >= 1 - 1e-6
        assert abs(norm(f1) - norm(f0)) < 1e-10

    def test_backward(self, gauss):
        plan = plan_for(gauss)
        f = sample_grid(gauss, plan.grid, gauss.z_rayleigh)
        assert fidelity(propagate(f, plan, -gauss.z_rayleigh), gauss) >= 1 - 1e-6

    def test_unitary_per_frequency(self, gauss):
        plan = plan_for(gauss)
        f0 = sample_grid(gauss, plan.grid, 0.0)
        f1 = propagate(f0, plan, 0.7 * gauss.z_rayleigh)
        p0 = np.abs(_spectral.fft2(f0.values)) ** 2
        p1 = np.abs(_spectral.fft2(f1.values)) ** 2
        assert np.max(np.abs(p1 - p0)) <= 1e-12 * p0.max()

    def test_stepping_matches_single_step(self, gauss):
        grid = plan_for(gauss).grid
        f0 = sample_grid(gauss, grid, 0.0)
        stepped = PropagationPlan(grid, gauss.k, dz=gauss.z_rayleigh / 100, absorber_width=0.05)
        single = PropagationPlan(grid, gauss.k)
        a = propagate(f0, stepped, gauss.z_rayleigh)
        b = propagate(f0, single, gauss.z_rayleigh)
        # the beam never reaches the absorber
        assert np.max(np.abs(a.values - b.values)) < 1e-9 * np.abs(b.values).max()

    def test_absorber_removes_power(self, gauss):
        # w(3 zR) ~ 3.2 w0 spreads into the absorbing edge of an 8 w0 grid
        grid = CartesianGrid(128, 8 * gauss.w0)
        f0 = sample_grid(gauss, grid, 0.0)
        plan = PropagationPlan(grid, gauss.k, dz=gauss.z_rayleigh / 50, absorber_width=0.3)
        out = propagate(f0, plan, 3 * gauss.z_rayleigh)
        assert norm(out) < 0.99 * norm(f0)

    def test_rejects_full_convention(self, gauss):
        plan = plan_for(gauss)
        with pytest.raises(ValueError):
            propagate(sample_grid(gauss, plan.grid, 0.0, FULL), plan, 1e-3)

    def test_rejects_other_grid(self, gauss):
        plan = plan_for(gauss)
        f = sample_grid(gauss, CartesianGrid(128, 12 * gauss.w0), 0.0)
        with pytest.raises(ValueError):
            propagate(f, plan, 1e-3)

    def test_aliasing_detected(self):
        m = make_mode(5, 5)
        grid = CartesianGrid(24, 12 * m.w0)
        with pytest.raises(UnderResolvedError):
            check_aliasing(sample_grid(m, grid, 0.0))


class TestPlan:
    def test_check_mode(self, gauss):
        small = PropagationPlan(CartesianGrid(64, 4 * gauss.w0), gauss.k)
        with pytest.raises(UnderResolvedError):
            small.check_mode(gauss, 0.0)
        coarse = PropagationPlan(CartesianGrid(64, 12 * gauss.w0), gauss.k, dz=gauss.z_rayleigh)
        with pytest.raises(ValueError):
            coarse.check_mode(gauss, 0.0)
        other = PropagationPlan(CartesianGrid(64, 12 * gauss.w0), 2 * gauss.k)
        with pytest.raises(ValueError):
            other.check_mode(gauss, 0.0)

    def test_validation(self, gauss):
        with pytest.raises(ValueError):
            PropagationPlan(CartesianGrid(8, 1.0), -1.0)
        with pytest.raises(ValueError):
            PropagationPlan(CartesianGrid(8, 1.0), 1.0, absorber_width=1.0)


class TestFidelity:
    def test_exact_samples(self):
        m = make_mode(1, 2)
        f = sample_grid(m, plan_for(m).grid, 0.3 * m.z_rayleigh)
        assert fidelity(f, m) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal(self):
        a, b = make_mode(0, 1), make_mode(0, -1)
        f = sample_grid(a, plan_for(a).grid, 0.0)
        assert fidelity(f, b) < 1e-8


class TestMeasureVz:
    def test_gaussian(self, gauss):
        assert measure_vz(gauss) / C == pytest.approx(0.9999, abs=1e-7)

    @pytest.mark.parametrize("kw0", [50.0, 200.0])
    def test_matches_closed_form(self, kw0):
        for n, l in ((0, 0), (2, 3)):
            m = make_mode(n, l, kw0)
            assert abs(measure_vz(m) - photon_vz(m)) < 1e-7 * C

    def test_degenerate(self):
        a, b = measure_vz(make_mode(1, 1)), measure_vz(make_mode(0, 3))
        assert abs(a - b) < 1e-8 * C

    def test_slope(self):
        zetas = np.arange(1, 11)
        vals = np.array([measure_vz(make_mode(0, z - 1)) / C for z in zetas])
        slope, icpt = np.polyfit(zetas, vals, 1)
        assert slope == pytest.approx(-1e-4, abs=1e-8)
        assert np.max(np.abs(vals - slope * zetas - icpt)) < 1e-8

    def test_off_waist(self, gauss):
        v = measure_vz(gauss, z=0.5 * gauss.z_rayleigh)
        assert abs(v - photon_vz(gauss)) < 1e-7 * C
