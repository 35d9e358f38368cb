"""Cross-checks that gate a release: closed forms against independent oracles.

Every check returns a :class:`CheckResult`; :func:`run_all` runs them in
order and :func:`format_table` prints one line per check. ``twistbeam verify``
is a thin wrapper around these.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass
from typing import Callable, Dict, List

import numpy as np

from .beamcore import C, EV, HBAR, M_ELECTRON, E_CHARGE, ModeSpec, beam_geometry, convert_units
from .expectations import (
    amplitude_flux,
    centroid_mass,
    electron_vz,
    moments,
    photon_vz,
    plane_wave_speed,
)
from .kinematics import (
    boost,
    centroid,
    electron_centroid,
    mass_energy_ratio,
    mass_from_velocity,
    orbital_magnetic_moment,
    rest_frame,
)
from .lgfield import CartesianGrid, norm, paraxial_residual, sample_grid
from .localfields import (
    classify_regions,
    phase_velocity_chen,
    phase_velocity_gradient,
    plane_wave_field,
    velocity_maps_from_field,
    chen_from_field,
)
from .noninertial import NoninertialFrame, inertial_mass_equivalence, integrate
from .propagator import PropagationPlan, fidelity, measure_vz, propagate

W0 = 1e-4  # reference waist, m
KW0 = 100.0


@dataclass(frozen=True)
class CheckResult:
    key: str
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.key:<4} {self.title}: {self.detail} ({self.seconds:.1f}s)"


def _mode(n, l, kw0=KW0, w0=W0, **kw) -> ModeSpec:
    return ModeSpec(n, l, kw0 / w0, w0, **kw)


# -- 1 ------------------------------------------------------------------------


def check_moments():
    worst = 0.0
    count = 0
    for n in range(11):
        for l in range(-10, 11):
            mode = _mode(n, l)
            zR = mode.z_rayleigh
            for z in (0.0, 0.5 * zR, zR, 3 * zR):
                rep = moments(mode, z)
                worst = max(worst, rep.r2.rel_diff, rep.dphi_dz.rel_diff, rep.pperp2.rel_diff)
                count += 1
    return worst < 1e-10, f"max relative error {worst:.2e} over {count} (mode, z) cases (tol 1e-10)"


# -- 2 ------------------------------------------------------------------------


def check_amplitude_flux():
    worst = 0.0
    for n in range(11):
        for l in range(-10, 11):
            mode = _mode(n, l)
            zR = mode.z_rayleigh
            for z in (0.0, 0.5 * zR, zR, 3 * zR):
                # dimensionless: flux in units of 1/zR
                worst = max(worst, abs(amplitude_flux(mode, z)) * zR)
    return worst < 1e-8, f"max |zR * int A dA/dz| = {worst:.2e} (tol 1e-8)"


# -- 3 ------------------------------------------------------------------------


def check_velocity_quantization():
    worst_abs = 0.0
    worst_fit = 0.0
    worst_slope = 0.0
    for kw0 in (50.0, 100.0, 200.0):
        zetas, measured = [], []
        for zeta in range(1, 11):
            mode = _mode(0, zeta - 1, kw0)
            v = measure_vz(mode)
            worst_abs = max(worst_abs, abs(v - photon_vz(mode)) / C)
            zetas.append(zeta)
            measured.append(v / C)
        slope, icpt = np.polyfit(zetas, measured, 1)
        fit = np.asarray(measured) - (slope * np.asarray(zetas) + icpt)
        worst_fit = max(worst_fit, float(np.max(np.abs(fit))))
        worst_slope = max(worst_slope, abs(slope + 1.0 / kw0**2))
    degenerate = [[(1, 1), (0, 3), (0, -3)], [(2, 0), (0, 4), (1, 2), (1, -2)]]
    worst_deg = 0.0
    for group in degenerate:
        vals = [measure_vz(_mode(n, l)) / C for n, l in group]
        worst_deg = max(worst_deg, max(vals) - min(vals))
    ok = worst_abs < 1e-7 and worst_fit < 1e-8 and worst_slope < 1e-8 and worst_deg < 1e-8
    detail = (
        f"|measured - closed form| <= {worst_abs:.1e} c (tol 1e-7), fit residual {worst_fit:.1e} c, "
        f"slope error {worst_slope:.1e} c (tol 1e-8), degenerate spread {worst_deg:.1e} c (tol 1e-8)"
    )
    return ok, detail


# -- 4 ------------------------------------------------------------------------


def check_electron_velocity():
    errs = []
    kw0 = 100.0
    K = M_ELECTRON * C / HBAR
    mode = ModeSpec(2, 1, K, kw0 / K, species="electron")
    expected = C / math.sqrt(2.0) * (1.0 - mode.zeta / kw0**2)
    errs.append(abs(electron_vz(mode) / expected - 1.0))
    # massless limit
    for n, l in ((0, 0), (1, 3)):
        e0 = _mode(n, l, species="electron", m=0.0)
        errs.append(abs(electron_vz(e0) / photon_vz(_mode(n, l)) - 1.0))
    # plane-wave limit
    wide = ModeSpec(1, 2, 3.0 * K, 1e3, species="electron")
    errs.append(abs(electron_vz(wide) / plane_wave_speed(wide.k, wide.m) - 1.0))
    # monotone approach as m -> 0
    masses = M_ELECTRON * np.logspace(0, -12, 25)
    k = 2.0 * K
    w0 = 100.0 / k
    vs = [electron_vz(ModeSpec(1, 1, k, w0, species="electron", m=m)) for m in masses]
    v_photon = photon_vz(ModeSpec(1, 1, k, w0))
    # strictly increasing until the gap to the photon value drops below float resolution
    resolvable = [v_photon - v > 4 * np.spacing(v_photon) for v in vs]
    monotone = all(b > a if ok else b >= a for a, b, ok in zip(vs, vs[1:], resolvable)) and all(
        v <= v_photon for v in vs
    )
    worst = max(errs)
    ok = worst < 1e-12 and monotone and abs(vs[-1] / v_photon - 1) < 1e-12
    return ok, f"max relative error {worst:.1e} (tol 1e-12), monotone approach to photon value: {monotone}"


# -- 5 ------------------------------------------------------------------------


def check_mass_relations():
    w0 = W0
    worst_form = 0.0  # (M2 - M1)/M1 relative to eps/2
    worst_eq = 0.0  # M1 vs closed-form mass
    for zeta_kw0 in ((1, 100.0), (5, 30.0), (31, 20.0), (1, 3.5), (10, 10.0)):
        zeta, kw0 = zeta_kw0
        n, l = 0, zeta - 1
        mode = _mode(n, l, kw0, w0)
        eps = mode.paraxial_parameter
        if eps > 0.1:
            continue
        M1, M2 = mass_from_velocity(mode.k, photon_vz(mode))
        worst_form = max(worst_form, abs(M2 - M1) / M1 / (eps / 2))
        worst_eq = max(worst_eq, abs(M1 / centroid_mass(zeta, mode.k, w0) - 1))
    worst_el = 0.0
    K = M_ELECTRON * C / HBAR
    for kfac, kw0, (n, l) in ((0.5, 50.0, (0, 0)), (1.0, 20.0, (2, 3)), (10.0, 100.0, (1, 1)), (1e-3, 10.0, (0, 2))):
        k = kfac * K
        mode = ModeSpec(n, l, k, kw0 / k, species="electron")
        eps = mode.paraxial_parameter
        if eps > 0.1:
            continue
        st = electron_centroid(mode)
        M26 = st.E / C**2 * math.sqrt(1.0 - (electron_vz(mode) / C) ** 2)
        worst_el = max(worst_el, abs(M26 / st.M - 1) / eps)
    quantum = 2.0 * HBAR**2 / (C * w0) ** 2
    worst_q = 0.0
    for zeta in range(1, 100):
        step = centroid_mass(zeta + 1, 1e6, w0) ** 2 - centroid_mass(zeta, 1e6, w0) ** 2
        worst_q = max(worst_q, abs(step / quantum - 1))
    # M1 goes through 1 - vz/c ~ eps, so cancellation costs ~ eps_machine / eps
    ok = worst_form <= 1.0 and worst_eq < 1e-10 and worst_el <= 1.0 and worst_q < 1e-12
    detail = (
        f"|M2-M1|/M1 <= {worst_form:.3f} x eps/2, velocity-mass vs closed form {worst_eq:.1e}, "
        f"electron forms <= {worst_el:.3f} x eps, mass step error {worst_q:.1e}"
    )
    return ok, detail


# -- 6 ------------------------------------------------------------------------


def check_numeric_anchor():
    conv = convert_units(energy=1.56 * EV)
    mode = ModeSpec(0, 99, conv.k, 89.5e-6)  # zeta = 100
    ratio = mass_energy_ratio(mode)
    st = centroid(mode)
    ratio_state = st.M * C**2 / st.E
    ok = abs(ratio - 0.02) <= 5e-4 and abs(ratio_state / ratio - 1) < 1e-12
    return ok, f"Mc^2/E = {ratio:.5f} (target 0.0200 +/- 0.0005)"


# -- 7 ------------------------------------------------------------------------


def check_lorentz_invariance(seed: int = 20240615):
    rng = np.random.default_rng(seed)
    states = [
        centroid(_mode(0, 0, 10.0)),  # M c^2 / E ~ 0.14
        centroid(_mode(1, 2, 8.0)),
        centroid(ModeSpec(1, 1, 0.7 * M_ELECTRON * C / HBAR, 1e-10, species="electron")),
    ]
    worst = 0.0
    for st in states:
        for _ in range(1000):
            d = rng.normal(size=3)
            V = d / np.linalg.norm(d) * rng.uniform(0.0, 0.99) * C
            worst = max(worst, boost(st, V).invariant_drift())
    worst_rt = 0.0
    for st in states:
        tilted = boost(st, [0.3 * C, -0.2 * C, 0.1 * C])
        for s in (st, tilted):
            rest, V = rest_frame(s)
            back = boost(rest, V)
            worst_rt = max(
                worst_rt,
                abs(back.E / s.E - 1),
                float(np.max(np.abs(back.p - s.p))) / (s.E / C),
            )
    ok = worst < 1e-10 and worst_rt < 1e-12
    return ok, f"max invariant drift {worst:.1e} (tol 1e-10), rest-frame round trip {worst_rt:.1e} (tol 1e-12)"


# -- 8 ------------------------------------------------------------------------


def check_propagator():
    worst_fid = 0.0
    worst_norm = 0.0
    worst_res = 0.0
    for n in range(6):
        for l in range(-5, 6):
            mode = _mode(n, l)
            zR = mode.z_rayleigh
            w_far = beam_geometry(2 * zR, mode).w
            plan = PropagationPlan(CartesianGrid(512, 12 * w_far), mode.k)
            f0 = sample_grid(mode, plan.grid, 0.0)
            f1 = propagate(f0, plan, 2 * zR)
            worst_fid = max(worst_fid, 1.0 - fidelity(f1, mode))
            worst_norm = max(worst_norm, abs(norm(f1) - norm(f0)))
            if l >= 0:  # the residual depends on |l| only
                res_grid = CartesianGrid(512, 16 * w_far)
                for z in (0.0, zR, 2 * zR):
                    worst_res = max(worst_res, paraxial_residual(mode, res_grid, z))
    ok = worst_fid <= 1e-6 and worst_norm < 1e-10 and worst_res < 1e-6
    detail = (
        f"1 - fidelity <= {worst_fid:.1e} (tol 1e-6), norm drift {worst_norm:.1e} (tol 1e-10), "
        f"paraxial residual {worst_res:.1e} (tol 1e-6)"
    )
    return ok, detail


# -- 9 ------------------------------------------------------------------------

OMEGA = 1e6  # rad/s; sets the time unit of the dynamics checks


def _frames():
    a = 0.05 * C * OMEGA
    return {
        "acceleration": NoninertialFrame.static([a, 0.0, -0.5 * a], [0.0, 0.0, 0.0]),
        "rotation": NoninertialFrame.static([0.0, 0.0, 0.0], [0.3 * OMEGA, 0.2 * OMEGA, OMEGA]),
        "combined": NoninertialFrame.static([a, 0.0, -0.5 * a], [0.3 * OMEGA, 0.2 * OMEGA, OMEGA]),
    }


def check_noninertial():
    tau = 1.0 / OMEGA
    r0 = (1.0, 0.5, 0.0)
    modes = [
        ModeSpec(1, 2, 2 * np.pi / 795e-9, 20e-6),
        ModeSpec(0, 0, 2 * np.pi / 795e-9, 5e-6),
        ModeSpec(2, -1, 0.2 * M_ELECTRON * C / HBAR, 1e-9, species="electron"),
    ]
    worst_eq = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for frame in _frames().values():
            for mode in modes:
                worst_eq = max(worst_eq, inertial_mass_equivalence(mode, frame, (0.0, 10 * tau), 0.01 * tau, r0))

    # H drift: 1e5 steps at dt = 1e-3 tau in a static combined frame in the weak-field regime
    weak = NoninertialFrame.static([1e-4 * C * OMEGA, 0.0, 0.0], [0.3 * OMEGA, 0.2 * OMEGA, OMEGA])
    state = centroid(modes[0])
    traj = integrate(state, r0, weak, (0.0, 100 * tau), 1e-3 * tau, record_every=100)
    drift = traj.energy_drift()

    # convergence order from the end-point error against a refined run
    frame = _frames()["combined"]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        T = 10 * tau
        ref = integrate(state, r0, frame, (0.0, T), 0.2 * tau / 64, record_every=10**9).r[-1]
        errs = [
            float(np.linalg.norm(integrate(state, r0, frame, (0.0, T), dt, record_every=10**9).r[-1] - ref))
            for dt in (0.2 * tau, 0.1 * tau, 0.05 * tau)
        ]
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    ok = worst_eq < 1e-10 and drift < 1e-8 and all(3.7 <= p <= 4.3 for p in orders)
    detail = (
        f"trajectory gap {worst_eq:.1e} (tol 1e-10), H drift over 1e5 steps {drift:.1e} (tol 1e-8), "
        f"observed order {orders[0]:.2f}, {orders[1]:.2f} (want 3.7..4.3)"
    )
    return ok, detail


# -- 10 -----------------------------------------------------------------------


def check_local_fields():
    grid = CartesianGrid(256, 10 * W0)
    worst_b = 0.0
    for n, l in ((0, 0), (1, 0), (0, 2), (1, 2), (2, 3)):
        mode = _mode(n, l)
        cls = classify_regions(phase_velocity_gradient(mode, grid, 0.0))
        worst_b = max(worst_b, abs(cls.boundary_radius - math.sqrt(mode.zeta) * mode.w0) / grid.dx)
    mode = _mode(0, 0, 100.0)
    c0 = grid.nx // 2
    grad = phase_velocity_gradient(mode, grid).vp[c0, c0] / C - 1.0
    chen = phase_velocity_chen(mode, grid).vp[c0, c0] / C - 1.0
    lead = 2.0 * mode.zeta / KW0**2
    agree = max(abs(grad / lead - 1), abs(chen / lead - 1))
    pw = plane_wave_field(grid, mode.k, z=0.37 * mode.z_rayleigh)
    vm = velocity_maps_from_field(pw)
    ch = chen_from_field(pw)
    flat = max(
        float(np.max(np.abs(vm.vp / C - 1))),
        float(np.max(np.abs(vm.vg / C - 1))),
        float(np.max(np.abs(ch.vp / C - 1))),
    )
    ok = worst_b <= 1.0 and grad > 0 and chen > 0 and agree < 0.01 and flat <= 1e-12
    detail = (
        f"sign boundary within {worst_b:.2f} cells of sqrt(zeta) w0, on-axis v_p/c - 1 = {grad:.3e} / {chen:.3e} "
        f"(gradient / Chen; off leading term by {agree:.1e}, tol 1e-2), plane wave |v/c - 1| <= {flat:.0e}"
    )
    return ok, detail


# -- 11 -----------------------------------------------------------------------


def check_magnetic_moment():
    K = M_ELECTRON * C / HBAR
    same = True
    for l in (-3, 1, 4):
        vals = {orbital_magnetic_moment(l, centroid(ModeSpec(n, l, 2 * K, 1e-9, species="electron")).E)
                for n in range(6)}
        same &= len(vals) == 1
    mu = orbital_magnetic_moment(1, M_ELECTRON * C**2)
    bohr = E_CHARGE * HBAR / (2 * M_ELECTRON)
    rel = abs(mu / bohr - 1)
    return same and rel < 1e-12, f"bitwise independent of n: {same}, Bohr-magneton limit error {rel:.1e} (tol 1e-12)"


CHECKS: Dict[str, tuple] = {
    "1": ("moment closed forms vs quadrature", check_moments),
    "2": ("amplitude-flux integral vanishes", check_amplitude_flux),
    "3": ("velocity quantization from propagation", check_velocity_quantization),
    "4": ("electron velocity limits", check_electron_velocity),
    "5": ("mass relations", check_mass_relations),
    "6": ("mass-energy ratio anchor", check_numeric_anchor),
    "7": ("Lorentz invariance of the centroid", check_lorentz_invariance),
    "8": ("spectral propagator oracle", check_propagator),
    "9": ("noninertial inertial-mass equivalence", check_noninertial),
    "10": ("local velocity structure", check_local_fields),
    "11": ("orbital magnetic moment", check_magnetic_moment),
}


def run_check(key: str) -> CheckResult:
    title, func = CHECKS[key]
    start = time.perf_counter()
    try:
        passed, detail = func()
    except Exception as exc:  # a crash is a failed check, reported not raised
        passed, detail = False, f"error: {type(exc).__name__}: {exc}"
    return CheckResult(key, title, bool(passed), detail, time.perf_counter() - start)


def run_all(keys=None, progress: Callable[[CheckResult], None] = None) -> List[CheckResult]:
    results = []
    for key in keys or CHECKS:
        res = run_check(key)
        if progress:
            progress(res)
        results.append(res)
    return results


def format_table(results: List[CheckResult]) -> str:
    lines = [r.line() for r in results]
    n_pass = sum(r.passed for r in results)
    lines.append(f"{n_pass}/{len(results)} checks passed")
    return "\n".join(lines)
