"""File formats: raw complex grids with a JSON sidecar, and CSV tables.

Raw grid: little-endian float64 pairs (re, im), C order over the grid shape
(x slow, y fast for cartesian grids; radial slow, azimuthal fast for polar
rules). The sidecar ``<name>.json`` holds the geometry, plane, wavenumber,
phase convention and the generating mode (or null).
"""
from __future__ import annotations

import csv
import json
import os
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

from .beamcore import C, ModeSpec
from .expectations import SPECTRUM_COLUMNS
from .lgfield import CartesianGrid, FieldGrid, PolarQuadrature

PathLike = Union[str, os.PathLike]
RAW_DTYPE = np.dtype("<f8")
FORMAT_VERSION = 1


def fmt(x) -> str:
    """17 significant digits; round-trips every float64. Strings pass through."""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def sidecar_path(raw_path: PathLike) -> Path:
    return Path(raw_path).with_suffix(".json")


def field_metadata(field: FieldGrid) -> dict:
    geo = field.geometry
    meta = dict(
        format_version=FORMAT_VERSION,
        kind=geo.kind,
        z=field.z,
        k=field.k,
        phase_convention=field.phase_convention,
        mode=field.mode.to_dict() if field.mode is not None else None,
    )
    if isinstance(geo, CartesianGrid):
        meta.update(nx=geo.nx, ny=geo.ny, dx=geo.dx, dy=geo.dy, extent_x=geo.extent_x, extent_y=geo.extent_y)
    else:
        meta.update(nx=geo.n_radial, ny=geo.n_azimuthal, dx=None, dy=None, scale=geo.scale)
    return meta


def write_field(field: FieldGrid, raw_path: PathLike) -> Path:
    """Write ``field`` to ``raw_path`` plus a JSON sidecar; returns the sidecar path."""
    raw_path = Path(raw_path)
    pairs = np.empty(field.values.shape + (2,), dtype=RAW_DTYPE)
    pairs[..., 0] = field.values.real
    pairs[..., 1] = field.values.imag
    raw_path.write_bytes(pairs.tobytes(order="C"))
    side = sidecar_path(raw_path)
    side.write_text(json.dumps(field_metadata(field), indent=2, sort_keys=True) + "\n")
    return side


def geometry_from_metadata(meta: dict):
    kind = meta.get("kind")
    if kind == CartesianGrid.kind:
        nx, ny = int(meta["nx"]), int(meta["ny"])
        # extents are optional for files written by other tools
        ex = float(meta["extent_x"]) if "extent_x" in meta else float(meta["dx"]) * nx
        ey = float(meta["extent_y"]) if "extent_y" in meta else float(meta["dy"]) * ny
        return CartesianGrid(nx, ex, ny, ey)
    if kind == PolarQuadrature.kind:
        return PolarQuadrature(int(meta["nx"]), int(meta["ny"]), float(meta["scale"]))
    raise ValueError(f"unknown grid kind {kind!r}")


def read_field(raw_path: PathLike) -> FieldGrid:
    """Load a raw grid and its sidecar."""
    raw_path = Path(raw_path)
    meta = json.loads(sidecar_path(raw_path).read_text())
    geo = geometry_from_metadata(meta)
    data = np.frombuffer(raw_path.read_bytes(), dtype=RAW_DTYPE)
    expected = 2 * int(np.prod(geo.shape))
    if data.size != expected:
        raise ValueError(f"raw file holds {data.size} floats, sidecar implies {expected}")
    pairs = data.reshape(geo.shape + (2,))
    values = pairs[..., 0] + 1j * pairs[..., 1]
    mode = ModeSpec.from_dict(meta["mode"]) if meta.get("mode") else None
    return FieldGrid(values, geo, float(meta["z"]), float(meta["k"]), meta["phase_convention"], mode)


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    return path


def _node_xy(geo):
    if isinstance(geo, CartesianGrid):
        return geo.mesh()
    R, P = geo.mesh()
    return R * np.cos(P), R * np.sin(P)


def field_to_csv(field: FieldGrid, path: PathLike) -> Path:
    """Columns x, y, re, im, abs, phase."""
    X, Y = _node_xy(field.geometry)
    v = field.values
    cols = (X.ravel(), Y.ravel(), v.real.ravel(), v.imag.ravel(), np.abs(v).ravel(), np.angle(v).ravel())
    return write_csv(path, ("x", "y", "re", "im", "abs", "phase"), zip(*cols))


def velocity_map_to_csv(vmap, path: PathLike) -> Path:
    """Columns x, y, vp_over_c, vg_over_c, mask (masked velocities as nan)."""
    X, Y = vmap.geometry.mesh()
    nan = np.full(vmap.mask.shape, np.nan)
    vp = vmap.vp / C if vmap.vp is not None else nan
    vg = vmap.vg / C if vmap.vg is not None else nan
    cols = (X.ravel(), Y.ravel(), vp.ravel(), vg.ravel(), vmap.mask.astype(int).ravel())
    return write_csv(path, ("x", "y", "vp_over_c", "vg_over_c", "mask"), zip(*cols))


def trajectory_to_csv(traj, path: PathLike) -> Path:
    rows = (
        (t, *r, *p, H) for t, r, p, H in zip(traj.t, traj.r, traj.p, traj.H)
    )
    return write_csv(path, ("t", "x", "y", "z", "px", "py", "pz", "H"), rows)


def spectrum_to_csv(rows, path: PathLike) -> Path:
    return write_csv(path, SPECTRUM_COLUMNS, ((getattr(r, c) for c in SPECTRUM_COLUMNS) for r in rows))
