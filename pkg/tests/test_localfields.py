import math

import numpy as np
import pytest

from twistbeam.beamcore import C
from twistbeam.lgfield import FULL, CartesianGrid, sample_grid
from twistbeam.localfields import (
    MASK_THRESHOLD,
    VelocityMap,
    amplitude_mask,
    chen_from_field,
    classify_regions,
    group_velocity_map,
    intensity_weighted_deficit,
    phase_velocity_chen,
    phase_velocity_gradient,
    plane_wave_field,
    velocity_map,
    velocity_maps_from_field,
)

from conftest import W0, make_mode

GRID = CartesianGrid(256, 10 * W0)
CENTRE = GRID.nx // 2


class TestPhaseVelocity:
    def test_on_axis_gradient(self, gauss):
        v = phase_velocity_gradient(gauss, GRID).vp[CENTRE, CENTRE] / C
        assert v == pytest.approx(1 / (1 - 2 / 100**2), rel=1e-14)

    def test_on_axis_chen(self, gauss):
        v = phase_velocity_chen(gauss, GRID).vp[CENTRE, CENTRE] / C
        assert v == pytest.approx((1 - 4 / 100**2) ** -0.5, rel=1e-14)

    @pytest.mark.parametrize("kw0", [50.0, 100.0, 300.0])
    def test_formulas_agree(self, kw0):
        m = make_mode(kw0=kw0)
        a = phase_velocity_gradient(m, GRID).vp[CENTRE, CENTRE] / C - 1
        b = phase_velocity_chen(m, GRID).vp[CENTRE, CENTRE] / C - 1
        assert abs(a / b - 1) <= 5 / kw0**2
        assert abs(a / (2 / kw0**2) - 1) < 0.01

    def test_vortex_core_slow(self):
        m = make_mode(0, 2)
        fine = CartesianGrid(256, 2 * W0)  # resolves r << l/k near the core
        vm = phase_velocity_gradient(m, fine)
        row = vm.vp[CENTRE + 1 : CENTRE + 20, CENTRE]
        live = ~np.isnan(row)
        assert np.all(np.diff(row[live]) > 0)
        assert row[live][0] < 0.5 * C
        assert vm.mask[CENTRE, CENTRE]

    def test_masks(self):
        m = make_mode(1, 1)
        mask = amplitude_mask(m, GRID, 0.0)
        vm = phase_velocity_gradient(m, GRID)
        assert np.array_equal(np.isnan(vm.vp), mask)
        assert mask[0, 0]  # corner of a 10 w0 grid is far below threshold


class TestGroupVelocity:
    def test_on_axis(self, gauss):
        v = group_velocity_map(gauss, GRID).vg[CENTRE, CENTRE] / C
        assert v == pytest.approx(1 / (1 + 2 / 100**2), rel=1e-8)

    def test_superluminal_somewhere(self, gauss):
        vg = group_velocity_map(gauss, GRID).vg
        assert np.nanmax(vg) > C and np.nanmin(vg) < C


class TestFieldBased:
    def test_plane_wave(self):
        f = plane_wave_field(GRID, 1e6, z=1.234e-3, amplitude_value=0.5 - 0.2j)
        vm = velocity_maps_from_field(f)
        ch = chen_from_field(f)
        for arr in (vm.vp, vm.vg, ch.vp):
            assert np.max(np.abs(arr / C - 1)) <= 1e-12

    def test_matches_analytic(self):
        m = make_mode(1, 2)
        z = 0.3 * m.z_rayleigh
        grid = CartesianGrid(256, 12 * W0 * math.sqrt(1.09))
        f = sample_grid(m, grid, z, FULL)
        num = velocity_maps_from_field(f)
        ana = phase_velocity_gradient(m, grid, z)
        live = ~(num.mask | ana.mask)
        # compare away from the mask edges where amplitudes are tiny
        R = ana.radius()
        live &= R < 2.5 * W0
        live &= R > 0.2 * W0
        assert np.max(np.abs(num.vp[live] - ana.vp[live])) < 1e-7 * C

    def test_requires_full(self, gauss):
        with pytest.raises(ValueError):
            velocity_maps_from_field(sample_grid(gauss, GRID, 0.0))


class TestRegions:
    @pytest.mark.parametrize("n,l", [(0, 0), (1, 1), (0, 3)])
    def test_boundary(self, n, l):
        m = make_mode(n, l)
        cls = classify_regions(phase_velocity_gradient(m, GRID))
        assert abs(cls.boundary_radius - math.sqrt(m.zeta) * m.w0) <= GRID.dx
        assert cls.subluminal.any() and cls.superluminal.any()

    def test_all_subluminal(self):
        vals = np.full(GRID.shape, 0.5 * C)
        vm = VelocityMap(GRID, vals, None, np.zeros(GRID.shape, bool), vals)
        cls = classify_regions(vm, "vp")
        assert not cls.superluminal.any() and cls.boundary_radius is None

    def test_missing_data(self, gauss):
        with pytest.raises(ValueError):
            classify_regions(phase_velocity_gradient(gauss, GRID), "vg")

    def test_weighted_deficit(self):
        for n, l in ((0, 0), (2, 3), (4, -6)):
            m = make_mode(n, l)
            expected = C * m.zeta / (m.k * m.w0) ** 2
            assert intensity_weighted_deficit(m) == pytest.approx(expected, rel=1e-8)


class TestCombined:
    def test_velocity_map(self, gauss):
        vm = velocity_map(gauss, GRID, lpv="chen")
        assert vm.vp is not None and vm.vg is not None
        assert np.array_equal(np.isnan(vm.vp), vm.mask)
        with pytest.raises(ValueError):
            velocity_map(gauss, GRID, lpv="other")

    def test_threshold(self):
        assert MASK_THRESHOLD == 1e-6
