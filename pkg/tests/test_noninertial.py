import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from twistbeam.beamcore import C, HBAR, M_ELECTRON, ModeSpec
from twistbeam.kinematics import CentroidState, centroid
from twistbeam.noninertial import (
    CentroidModel,
    IntegrationError,
    NoninertialFrame,
    StrongFieldWarning,
    eom_rhs,
    hamiltonian,
    inertial_mass_equivalence,
    integrate,
    twisted_and_point_models,
)

from conftest import make_mode

OMEGA = 1e6
TAU = 1 / OMEGA
K = M_ELECTRON * C / HBAR
PHOTON = ModeSpec(1, 2, 2 * np.pi / 795e-9, 20e-6)
ELECTRON = ModeSpec(2, -1, 0.2 * K, 1e-9, species="electron")


def frames():
    a = 0.05 * C * OMEGA
    return [
        NoninertialFrame.static([a, 0.0, -0.5 * a], [0, 0, 0]),
        NoninertialFrame.static([0, 0, 0], [0.3 * OMEGA, 0.2 * OMEGA, OMEGA]),
        NoninertialFrame.static([a, 0.0, -0.5 * a], [0.3 * OMEGA, 0.2 * OMEGA, OMEGA]),
    ]


class TestHamiltonian:
    def test_free(self):
        p = np.array([1e-24, 0, 2e-24])
        H = hamiltonian([1, 2, 3], p, [0, 0, 0], NoninertialFrame(), 0.0, M_ELECTRON)
        assert H == pytest.approx(math.sqrt(M_ELECTRON**2 * C**4 + p @ p * C**2), rel=1e-15)

    def test_spin_rotation_shift(self):
        L = np.array([0, 0, 3 * HBAR])
        w = np.array([0, 0, OMEGA])
        p = np.array([0, 0, 1e-27])
        frame = NoninertialFrame.static([0, 0, 0], w)
        free = hamiltonian([0, 0, 0], p, [0, 0, 0], NoninertialFrame(), 0.0, 0.0)
        assert hamiltonian([0, 0, 0], p, L, frame, 0.0, 0.0) == pytest.approx(free - w @ L, rel=1e-15)

    def test_hidden_momentum_equals_mass(self):
        # sqrt(p_z^2 + p_perp^2) c equals the point-particle energy with M
        twisted, point = twisted_and_point_models(PHOTON)
        p = np.array([0, 0, 1e-27])
        assert twisted.energy(p) == pytest.approx(point.energy(p), rel=1e-15)

    @given(
        st.tuples(*[st.floats(-1, 1)] * 3),
        st.tuples(*[st.floats(-1, 1)] * 3),
    )
    def test_gradient_consistency(self, r, pdir):
        frame = frames()[2]
        model = CentroidModel(mass=M_ELECTRON)
        r = np.array(r)
        p = np.array(pdir) * M_ELECTRON * C
        drdt, dpdt = eom_rhs(r, p, frame, 0.0, model)
        H = lambda rr, pp: hamiltonian(rr, pp, [0, 0, 0], frame, 0.0, M_ELECTRON)
        for i in range(3):
            e = np.zeros(3)
            hr, hp = 1e-3, 1e-5 * M_ELECTRON * C
            e[i] = 1
            dHdp = (H(r, p + hp * e) - H(r, p - hp * e)) / (2 * hp)
            dHdr = (H(r + hr * e, p) - H(r - hr * e, p)) / (2 * hr)
            # natural scales: c for velocities, (|a|/c^2 E + |omega| |p|) for forces
            force = np.linalg.norm(frame.acceleration(0.0)) * model.energy(p) / C**2 \
                + np.linalg.norm(frame.omega(0.0)) * M_ELECTRON * C
            assert abs(dHdp - drdt[i]) <= 1e-8 * C
            assert abs(-dHdr - dpdt[i]) <= 1e-8 * force

    def test_free_rhs(self):
        p = np.array([0, 1e-24, 1e-23])
        model = CentroidModel(mass=M_ELECTRON)
        drdt, dpdt = eom_rhs([0, 0, 0], p, NoninertialFrame(), 0.0, model)
        assert np.allclose(drdt, p * C**2 / model.energy(p), rtol=1e-15)
        assert not np.any(dpdt)

    def test_rotation_force_perpendicular(self):
        w = np.array([0, 0, OMEGA])
        frame = NoninertialFrame.static([0, 0, 0], w)
        _, dpdt = eom_rhs([1, 0, 0], [1e-24, 2e-24, 0], frame, 0.0, CentroidModel(mass=M_ELECTRON))
        assert abs(dpdt @ w) == 0.0


class TestIntegrate:
    def test_free_line(self):
        s = centroid(make_mode(1, 1, kw0=30))
        tr = integrate(s, [1e-3, 0, 0], NoninertialFrame(), (0, 1e-9), 1e-11)
        expected = np.array([1e-3, 0, 0]) + np.outer(tr.t, s.velocity)
        assert np.allclose(tr.r, expected, rtol=1e-12, atol=1e-12 * np.abs(expected).max())

    def test_frame_off_velocity(self):
        s = centroid(PHOTON)
        tr = integrate(s, [0, 0, 0], NoninertialFrame(), (0, 1e-9), 1e-10)
        v = (tr.r[-1, 2] - tr.r[0, 2]) / (tr.t[-1] - tr.t[0])
        assert v == pytest.approx(s.vz, rel=1e-13)

    def test_constant_acceleration_closed_form(self):
        a = 1e-3 * C * OMEGA
        frame = NoninertialFrame.static([0, 0, -a], [0, 0, 0])
        p0 = 0.5 * M_ELECTRON * C
        s = CentroidState(E=math.hypot(M_ELECTRON * C**2, p0 * C), p=[0, 0, p0], M=M_ELECTRON)
        T = 10 * TAU
        tr = integrate(s, [0, 0, 0], frame, (0, T), 1e-3 * TAU, record_every=1000)
        mc = M_ELECTRON * C
        exact = mc * np.sinh(np.arcsinh(p0 / mc) + a * tr.t / C)
        assert np.allclose(tr.p[:, 2], exact, rtol=1e-8)

    def test_energy_conservation(self):
        weak = NoninertialFrame.static([1e-4 * C * OMEGA, 0, 0], [0.3 * OMEGA, 0.2 * OMEGA, OMEGA])
        tr = integrate(centroid(PHOTON), [1, 0.5, 0], weak, (0, 100 * TAU), 1e-3 * TAU, record_every=100)
        assert tr.energy_drift() < 1e-8

    def test_energy_drift_order(self):
        frame = frames()[2]
        s = centroid(PHOTON)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", StrongFieldWarning)
            drifts = [
                integrate(s, [1, 0.5, 0], frame, (0, 10 * TAU), dt * TAU, record_every=10**9).energy_drift()
                for dt in (0.2, 0.1, 0.05)
            ]
        orders = [math.log2(drifts[i] / drifts[i + 1]) for i in range(2)]
        assert all(p >= 3.7 for p in orders)

    def test_position_order(self):
        frame = frames()[2]
        s = centroid(PHOTON)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", StrongFieldWarning)
            run = lambda dt: integrate(s, [1, 0.5, 0], frame, (0, 10 * TAU), dt, record_every=10**9).r[-1]
            ref = run(0.2 * TAU / 64)
            errs = [np.linalg.norm(run(dt * TAU) - ref) for dt in (0.2, 0.1, 0.05)]
        orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
        assert all(3.7 <= p <= 4.3 for p in orders)

    def test_step_cap(self):
        with pytest.raises(IntegrationError):
            integrate(centroid(PHOTON), [0, 0, 0], NoninertialFrame(), (0, 1.0), 1e-9, max_steps=1000)

    def test_rejects_bad_input(self):
        s = centroid(PHOTON)
        with pytest.raises(ValueError):
            integrate(s, [0, 0, 0], NoninertialFrame(), (0, 1.0), 0.0)
        with pytest.raises(ValueError):
            integrate(s, [0, 0, 0], NoninertialFrame(), (1.0, 0.0), 0.1)
        with pytest.raises(ValueError):
            integrate(s, [0, 0], NoninertialFrame(), (0, 1.0), 0.1)

    def test_non_finite_abort(self):
        frame = NoninertialFrame(lambda t: np.array([np.nan, 0, 0]), lambda t: np.zeros(3))
        with pytest.raises(IntegrationError):
            integrate(centroid(PHOTON), [1, 0, 0], frame, (0, 1e-9), 1e-10)

    def test_strong_field_warning(self):
        frame = NoninertialFrame.static([C * C, 0, 0], [0, 0, 0])
        with pytest.warns(StrongFieldWarning):
            integrate(centroid(PHOTON), [1, 0, 0], frame, (0, 1e-12), 1e-13)

    def test_time_dependent_frame(self):
        frame = NoninertialFrame(lambda t: np.zeros(3), lambda t: np.array([0, 0, OMEGA * math.cos(OMEGA * t)]))
        tr = integrate(centroid(PHOTON), [1, 0, 0], frame, (0, TAU), 1e-3 * TAU)
        assert np.all(np.isfinite(tr.r)) and not frame.is_static
        with pytest.raises(ValueError):
            frame.to_dict()


class TestEquivalence:
    @pytest.mark.parametrize("mode", [PHOTON, ELECTRON, make_mode(0, 0, kw0=10)])
    @pytest.mark.parametrize("idx", [0, 1, 2])
    def test_equivalence(self, mode, idx):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", StrongFieldWarning)
            dev = inertial_mass_equivalence(mode, frames()[idx], (0, 10 * TAU), 0.01 * TAU, (1.0, 0.5, 0.0))
        assert dev < 1e-10

    def test_frame_off_exact(self):
        assert inertial_mass_equivalence(PHOTON, NoninertialFrame(), (0, 1e-9), 1e-11) == 0.0

    def test_models(self):
        twisted, point = twisted_and_point_models(ELECTRON)
        assert twisted.mass == M_ELECTRON and point.kperp2 == 0
        assert point.mass == pytest.approx(centroid(ELECTRON).M, rel=1e-15)

    def test_static_frame_dict(self):
        f = NoninertialFrame.static([1, 2, 3], [4, 5, 6])
        assert f.to_dict() == dict(acceleration=[1.0, 2.0, 3.0], omega=[4.0, 5.0, 6.0])
        with pytest.raises(ValueError):
            NoninertialFrame.static([1, 2], [0, 0, 0])
