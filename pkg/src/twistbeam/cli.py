"""Command-line front end: ``twistbeam <subcommand> [flags]``.

Every subcommand reads its parameters from flags, from a JSON file given
with ``--config`` (keys are the flag names with dashes or underscores), or
both; flags win over the file. ``--dump-config PATH`` writes the resolved
parameters so the run can be repeated with ``--config PATH``.

Exit codes: 0 success, 1 failed verification, 2 invalid input,
3 numerical convergence or integration failure.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import gridio
from .beamcore import C, ELECTRON, EV, PHOTON, ModeSpec, beam_geometry, convert_units
from .expectations import ConvergenceError, mean_vz, moments, vz_spectrum
from .kinematics import boost, centroid, mass_energy_ratio, orbital_magnetic_moment, rest_frame
from .lgfield import ENVELOPE, FULL, CartesianGrid, sample_grid
from .localfields import classify_regions, velocity_map
from .noninertial import IntegrationError, NoninertialFrame, integrate, twisted_and_point_models
from .propagator import PropagationPlan, fidelity, propagate
from . import verify as _verify

EXIT_OK, EXIT_FAILED, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2, 3

DEFAULT_LAMBDA_NM = 795.0
DEFAULT_W0_UM = 89.5


class ConfigError(ValueError):
    """Bad configuration: unknown key, wrong type or conflicting inputs."""


# -- parser -------------------------------------------------------------------

# every option: (flag, type, default, help). nargs=3 vectors use type "vec3".
_MODE_OPTS = [
    ("species", str, PHOTON, "photon or electron"),
    ("n", int, 0, "radial index"),
    ("l", int, 0, "azimuthal index"),
    ("lambda-nm", float, None, f"wavelength in nm (default {DEFAULT_LAMBDA_NM} when no other is set)"),
    ("energy-ev", float, None, "total energy in eV"),
    ("kinetic-ev", float, None, "kinetic energy in eV (electrons)"),
    ("k", float, None, "wavenumber in rad/m"),
    ("w0-um", float, DEFAULT_W0_UM, "waist radius in micrometres"),
    ("mass-kg", float, None, "rest mass override in kg (electrons)"),
]
_GRID_OPTS = [
    ("nodes", int, 256, "grid nodes per axis"),
    ("extent-w", float, 12.0, "grid side in units of the beam width at the plane"),
]
_COMMANDS: Dict[str, dict] = {
    "mode-eval": dict(
        help="sample a mode on a cartesian grid",
        opts=_MODE_OPTS + _GRID_OPTS + [
            ("z", float, 0.0, "plane in m"),
            ("convention", str, ENVELOPE, "envelope or full"),
        ],
    ),
    "moments": dict(
        help="analytic and quadrature moments",
        opts=_MODE_OPTS + [("z", float, 0.0, "plane in m")],
    ),
    "vz-spectrum": dict(
        help="quantized <v_z> and centroid mass for all modes up to zeta-max",
        opts=_MODE_OPTS + [("zeta-max", int, 10, "largest 2n+|l|+1")],
    ),
    "velocity-map": dict(
        help="local phase and group velocity maps",
        opts=_MODE_OPTS + _GRID_OPTS + [
            ("z", float, 0.0, "plane in m"),
            ("lpv", str, "gradient", "phase-velocity formula: gradient or chen"),
        ],
    ),
    "centroid": dict(help="centroid energy, momentum and mass", opts=_MODE_OPTS),
    "boost": dict(
        help="Lorentz-boost the centroid",
        opts=_MODE_OPTS + [("velocity", "vec3", [0.0, 0.0, 0.5], "boost velocity in units of c")],
    ),
    "noninertial": dict(
        help="centroid trajectory in an accelerated, rotating frame",
        opts=_MODE_OPTS + [
            ("acceleration", "vec3", [0.0, 0.0, 0.0], "frame acceleration in m/s^2"),
            ("omega", "vec3", [0.0, 0.0, 0.0], "frame angular velocity in rad/s"),
            ("r0", "vec3", [0.0, 0.0, 0.0], "start position in m"),
            ("t-end", float, 1e-9, "duration in s"),
            ("dt", float, 1e-12, "RK4 step in s"),
            ("record-every", int, 1, "keep every n-th step"),
        ],
    ),
    "propagate": dict(
        help="propagate a sampled mode and report fidelity",
        opts=_MODE_OPTS + _GRID_OPTS + [
            ("z-end", float, None, "target plane in m (default 2 zR)"),
            ("dz", float, None, "step in m; only used with an absorber"),
            ("absorber", float, 0.0, "absorbing edge width as a fraction of the half-extent"),
        ],
    ),
    "verify": dict(
        help="run the acceptance checks and print a pass/fail table",
        opts=[("only", "list", None, "comma-separated check keys, e.g. 1,3,8")],
    ),
}
_COMMON_OPTS = [("out-dir", str, ".", "output directory")]


def _key(flag: str) -> str:
    return flag.replace("-", "_")


def _parse_vec3(text: str) -> List[float]:
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected three comma-separated numbers")
    return [float(p) for p in parts]


def _parse_list(text: str) -> List[str]:
    return [p.strip() for p in text.split(",") if p.strip()]


_TYPES = {"vec3": _parse_vec3, "list": _parse_list}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="twistbeam", description="Twisted-beam kinematics toolkit.")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    for name, spec in _COMMANDS.items():
        p = sub.add_parser(name, help=spec["help"], description=spec["help"])
        p.add_argument("--config", help="JSON file with parameters")
        p.add_argument("--dump-config", help="write the resolved parameters to this JSON file")
        for flag, typ, default, text in spec["opts"] + _COMMON_OPTS:
            hint = f" [default: {default}]" if default is not None else ""
            # defaults are applied after merging with --config
            p.add_argument(f"--{flag}", type=_TYPES.get(typ, typ), default=None, help=text + hint)
    return parser


# -- config -------------------------------------------------------------------


def _coerce(name: str, typ, value):
    try:
        if typ == "vec3":
            vec = [float(v) for v in value]
            if len(vec) != 3:
                raise ValueError
            return vec
        if typ == "list":
            return [str(v) for v in (value if isinstance(value, list) else _parse_list(str(value)))]
        if typ is int:
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise ValueError
            return int(value)
        if typ is float:
            if isinstance(value, bool):
                raise ValueError
            return float(value)
        if not isinstance(value, str):
            raise ValueError
        return value
    except (TypeError, ValueError):
        raise ConfigError(f"bad value for {name!r}: {value!r}") from None


def resolve_config(command: str, args: argparse.Namespace) -> dict:
    """Merge defaults, the JSON file and flags into one validated dict."""
    opts = _COMMANDS[command]["opts"] + _COMMON_OPTS
    types = {_key(f): t for f, t, _, _ in opts}
    config = {_key(f): d for f, _, d, _ in opts}
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        loaded = {_key(k): v for k, v in loaded.items()}
        if loaded.pop("command", command) != command:
            raise ConfigError(f"config was written for another subcommand, not {command!r}")
        unknown = sorted(set(loaded) - set(types))
        if unknown:
            raise ConfigError(f"unknown config keys for {command}: {', '.join(unknown)}")
        for key, value in loaded.items():
            config[key] = None if value is None else _coerce(key, types[key], value)
    for key in types:
        value = getattr(args, key, None)
        if value is not None:
            config[key] = value
    return config


def dump_config(command: str, config: dict, path) -> None:
    payload = dict(command=command, **config)
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def mode_from_config(cfg: dict) -> ModeSpec:
    species = cfg["species"]
    if species not in (PHOTON, ELECTRON):
        raise ConfigError("species must be 'photon' or 'electron'")
    given = {k: cfg[k] for k in ("lambda_nm", "energy_ev", "kinetic_ev", "k") if cfg.get(k) is not None}
    if len(given) > 1:
        raise ConfigError(f"give only one of --lambda-nm, --energy-ev, --kinetic-ev, --k (got {sorted(given)})")
    if not given:
        given = {"lambda_nm": DEFAULT_LAMBDA_NM}
    (key, value), = given.items()
    kwargs = dict(species=species, m=cfg.get("mass_kg"))
    if key == "lambda_nm":
        conv = convert_units(wavelength=value * 1e-9, **kwargs)
    elif key == "energy_ev":
        conv = convert_units(energy=value * EV, **kwargs)
    elif key == "kinetic_ev":
        conv = convert_units(kinetic_energy=value * EV, **kwargs)
    else:
        conv = convert_units(wavenumber=value, **kwargs)
    return ModeSpec(cfg["n"], cfg["l"], conv.k, cfg["w0_um"] * 1e-6, species=species, m=cfg.get("mass_kg"))


def _grid(mode: ModeSpec, cfg: dict, z: float) -> CartesianGrid:
    if cfg["nodes"] < 8:
        raise ConfigError("nodes must be at least 8")
    return CartesianGrid(cfg["nodes"], cfg["extent_w"] * beam_geometry(z, mode).w)


def _out(cfg: dict) -> Path:
    path = Path(cfg["out_dir"])
    path.mkdir(parents=True, exist_ok=True)
    return path


# -- subcommands --------------------------------------------------------------


def cmd_mode_eval(cfg, out) -> int:
    mode = mode_from_config(cfg)
    if cfg["convention"] not in (ENVELOPE, FULL):
        raise ConfigError("convention must be 'envelope' or 'full'")
    field = sample_grid(mode, _grid(mode, cfg, cfg["z"]), cfg["z"], cfg["convention"])
    gridio.write_field(field, out / "field.bin")
    gridio.field_to_csv(field, out / "field.csv")
    print(f"wrote {out / 'field.bin'} (+ .json sidecar) and {out / 'field.csv'}")
    return EXIT_OK


def cmd_moments(cfg, out) -> int:
    mode = mode_from_config(cfg)
    rep = moments(mode, cfg["z"])
    header = ("quantity", "analytic", "numeric", "abs_diff", "rel_diff")
    rows = [(name, v.analytic, v.numeric, v.abs_diff, v.rel_diff) for name, v in rep.rows()]
    gridio.write_csv(out / "moments.csv", header, rows)
    for row in rows:
        print(f"{row[0]:<8} analytic {row[1]: .12e}  numeric {row[2]: .12e}  rel diff {row[4]:.1e}")
    return EXIT_OK


def cmd_vz_spectrum(cfg, out) -> int:
    mode = mode_from_config(cfg)
    rows = vz_spectrum(mode.k, mode.w0, mode.species, mode.m, cfg["zeta_max"])
    gridio.spectrum_to_csv(rows, out / "vz_spectrum.csv")
    print(f"wrote {len(rows)} rows to {out / 'vz_spectrum.csv'}")
    return EXIT_OK


def cmd_velocity_map(cfg, out) -> int:
    mode = mode_from_config(cfg)
    vmap = velocity_map(mode, _grid(mode, cfg, cfg["z"]), cfg["z"], cfg["lpv"])
    gridio.velocity_map_to_csv(vmap, out / "velocity_map.csv")
    cls = classify_regions(vmap)
    if cls.boundary_radius is not None:
        print(f"subluminal/superluminal boundary at r = {cls.boundary_radius:.6e} m")
    print(f"wrote {out / 'velocity_map.csv'}")
    return EXIT_OK


def _state_row(label, st):
    return (label, st.E, *st.p, st.M, st.vz / C, st.invariant_drift())


_STATE_HEADER = ("frame", "E_J", "px", "py", "pz", "M_kg", "vz_over_c", "invariant_drift")


def cmd_centroid(cfg, out) -> int:
    mode = mode_from_config(cfg)
    st = centroid(mode)
    summary = dict(
        mode=mode.to_dict(),
        state=st.to_dict(),
        vz_over_c=mean_vz(mode) / C,
        M_c2_over_E=st.M * C**2 / st.E,
        mu_L=orbital_magnetic_moment(mode.l, st.E) if mode.species == ELECTRON else None,
    )
    if mode.species == PHOTON:
        summary["M_c2_over_E_closed_form"] = mass_energy_ratio(mode)
    (out / "centroid.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    gridio.write_csv(out / "centroid.csv", _STATE_HEADER, [_state_row("lab", st)])
    print(f"M = {st.M:.9e} kg, Mc^2/E = {summary['M_c2_over_E']:.6f}, <v_z>/c = {summary['vz_over_c']:.15f}")
    return EXIT_OK


def cmd_boost(cfg, out) -> int:
    mode = mode_from_config(cfg)
    V = np.asarray(cfg["velocity"], dtype=float) * C
    st = centroid(mode)
    moved = boost(st, V)
    rows = [_state_row("lab", st), _state_row("boosted", moved)]
    if st.M > 0:
        rest, _ = rest_frame(st)
        rows.append(_state_row("rest", rest))
    gridio.write_csv(out / "boost.csv", _STATE_HEADER, rows)
    print(f"invariant drift after boost: {moved.invariant_drift():.2e}")
    return EXIT_OK


def cmd_noninertial(cfg, out) -> int:
    mode = mode_from_config(cfg)
    frame = NoninertialFrame.static(cfg["acceleration"], cfg["omega"])
    st = centroid(mode)
    twisted, point = twisted_and_point_models(mode)
    span = (0.0, cfg["t_end"])
    a = integrate(st, cfg["r0"], frame, span, cfg["dt"], model=twisted, record_every=cfg["record_every"])
    b = integrate(st, cfg["r0"], frame, span, cfg["dt"], model=point, record_every=cfg["record_every"])
    gridio.trajectory_to_csv(a, out / "trajectory_twisted.csv")
    gridio.trajectory_to_csv(b, out / "trajectory_point.csv")
    gap = float(np.max(np.linalg.norm(a.r - b.r, axis=1)))
    print(f"max position gap {gap:.3e} m, H drift {a.energy_drift():.2e}")
    return EXIT_OK


def cmd_propagate(cfg, out) -> int:
    mode = mode_from_config(cfg)
    z_end = cfg["z_end"] if cfg["z_end"] is not None else 2 * mode.z_rayleigh
    plan = PropagationPlan(_grid(mode, cfg, z_end), mode.k, cfg["dz"], cfg["absorber"])
    plan.check_mode(mode, abs(z_end))
    start = sample_grid(mode, plan.grid, 0.0)
    end = propagate(start, plan, z_end)
    gridio.write_field(start, out / "field_start.bin")
    gridio.write_field(end, out / "field_end.bin")
    fid = fidelity(end, mode)
    gridio.write_csv(out / "propagate.csv", ("z_end", "fidelity", "one_minus_fidelity"), [(z_end, fid, 1 - fid)])
    print(f"fidelity at z = {z_end:.6e} m: 1 - F = {1 - fid:.2e}")
    return EXIT_OK


def cmd_verify(cfg, out) -> int:
    keys = cfg["only"] or list(_verify.CHECKS)
    bad = [k for k in keys if k not in _verify.CHECKS]
    if bad:
        raise ConfigError(f"unknown check keys: {', '.join(bad)}")
    results = _verify.run_all(keys, progress=lambda r: print(r.line(), flush=True))
    print(f"{sum(r.passed for r in results)}/{len(results)} checks passed")
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILED


_HANDLERS = {
    "mode-eval": cmd_mode_eval,
    "moments": cmd_moments,
    "vz-spectrum": cmd_vz_spectrum,
    "velocity-map": cmd_velocity_map,
    "centroid": cmd_centroid,
    "boost": cmd_boost,
    "noninertial": cmd_noninertial,
    "propagate": cmd_propagate,
    "verify": cmd_verify,
}


def run(argv: Optional[List[str]] = None) -> int:
    """Parse ``argv``, run the subcommand and return an exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            raise ConfigError("missing subcommand")
        cfg = resolve_config(args.command, args)
        if args.dump_config:
            dump_config(args.command, cfg, args.dump_config)
        return _HANDLERS[args.command](cfg, _out(cfg))
    except (ConvergenceError, IntegrationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    warnings.simplefilter("default")
    sys.exit(run())


if __name__ == "__main__":
    main()
