"""Geometry files, trajectory directories and deterministic report writers.

Surfaces are Wavefront OBJ (``v``/``f`` records only); closed polylines are
plain text with one ``x y`` pair per line and implicit closure.  Floats are
written with 17 significant digits so a write/read round trip is exact.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import InvalidSurface
from .flow import FlowControls, FlowState, Termination, Trajectory
from .geometry import DiscreteHypersurface

FLOAT_FORMAT = "%.17g"


def _fmt(x) -> str:
    return FLOAT_FORMAT % x


# -- geometry files ------------------------------------------------------------


def write_surface(surface: DiscreteHypersurface, path) -> Path:
    """Write a polyline (``.txt``) or a mesh (``.obj``); the suffix is chosen by dimension."""
    path = Path(path)
    if surface.n == 1:
        # the file format is always counter-clockwise-outward; reverse instead of flagging
        verts = surface.vertices if surface.orientation > 0 else surface.vertices[::-1]
        lines = [f"{_fmt(x)} {_fmt(y)}" for x, y in verts]
    else:
        if surface.orientation < 0:
            # OBJ has no orientation flag; store the reversed winding instead
            faces = surface.faces[:, ::-1]
        else:
            faces = surface.faces
        lines = [f"v {_fmt(x)} {_fmt(y)} {_fmt(z)}" for x, y, z in surface.vertices]
        lines += ["f %d %d %d" % tuple(f + 1) for f in faces]
    path.write_text("\n".join(lines) + "\n")
    return path


def read_polyline(path) -> DiscreteHypersurface:
    rows = []
    for k, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InvalidSurface(f"{path}:{k}: expected 'x y', got {line!r}")
        rows.append([float(p) for p in parts])
    return DiscreteHypersurface(np.array(rows))


def read_obj(path, closed: bool = True) -> DiscreteHypersurface:
    verts, faces = [], []
    for k, line in enumerate(Path(path).read_text().splitlines(), 1):
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        if parts[0] == "v":
            verts.append([float(p) for p in parts[1:4]])
        elif parts[0] == "f":
            if len(parts) != 4:
                raise InvalidSurface(f"{path}:{k}: only triangles are supported")
            # accept "i/t/n" forms but keep only the position index
            faces.append([int(p.split("/")[0]) - 1 for p in parts[1:]])
    if not verts or not faces:
        raise InvalidSurface(f"{path}: no vertices or faces")
    return DiscreteHypersurface(np.array(verts), np.array(faces), closed=closed)


def read_surface(path) -> DiscreteHypersurface:
    """Read ``.obj`` as a mesh and anything else as a polyline."""
    path = Path(path)
    if path.suffix.lower() == ".obj":
        return read_obj(path)
    return read_polyline(path)


def surface_suffix(surface: DiscreteHypersurface) -> str:
    return ".txt" if surface.n == 1 else ".obj"


# -- trajectories --------------------------------------------------------------

_CONTROL_KEYS = ("t_end", "cfl", "remesh_every", "snapshot_every", "snapshot_steps", "scheme",
                 "curvature_threshold", "volume_threshold", "detect_every", "max_steps")


def _manifest_value(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, float):
        return _fmt(v)
    if hasattr(v, "value"):
        return str(v.value)
    if isinstance(v, np.ndarray):
        return " ".join(_fmt(x) for x in v)
    return str(v)


def save_trajectory(traj: Trajectory, directory) -> Path:
    """Write ``manifest.txt`` and one geometry file per snapshot into ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    entries = [
        ("format", "entroflow-trajectory 1"),
        ("termination", traj.termination.value),
        ("singular_location", _manifest_value(traj.singular_location)),
        ("steps", str(traj.steps)),
        ("max_dt", _fmt(traj.max_dt)),
    ]
    entries += [(f"control.{k}", _manifest_value(getattr(traj.controls, k))) for k in _CONTROL_KEYS]
    entries.append(("snapshots", str(len(traj.snapshots))))
    for i, s in enumerate(traj.snapshots):
        name = f"snapshot_{i:05d}{surface_suffix(s.surface)}"
        write_surface(s.surface, directory / name)
        entries.append((f"snapshot.{i:05d}", f"{_fmt(s.time)} {s.step_count} {s.generation} {name}"))
    (directory / "manifest.txt").write_text("".join(f"{k} = {v}\n" for k, v in entries))
    return directory


def _parse_manifest(text):
    out = {}
    for line in text.splitlines():
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"bad manifest line {line!r}")
        out[key.strip()] = value.strip()
    return out


def load_trajectory(directory) -> Trajectory:
    directory = Path(directory)
    meta = _parse_manifest((directory / "manifest.txt").read_text())
    controls = {}
    for k in _CONTROL_KEYS:
        raw = meta.get(f"control.{k}", "none")
        if raw == "none":
            continue
        if k == "scheme":
            controls[k] = raw
        elif k in ("remesh_every", "snapshot_steps", "detect_every", "max_steps"):
            controls[k] = int(raw)
        else:
            controls[k] = float(raw)
    snapshots = []
    for i in range(int(meta["snapshots"])):
        t, step_count, generation, name = meta[f"snapshot.{i:05d}"].split()
        surface = read_surface(directory / name)
        snapshots.append(FlowState(surface, float(t), int(step_count), int(generation)))
    loc = meta.get("singular_location", "none")
    location = None if loc == "none" else np.array([float(x) for x in loc.split()])
    traj = Trajectory(snapshots, FlowControls(**controls), Termination(meta["termination"]), location)
    traj.steps = int(meta.get("steps", 0))
    traj.max_dt = float(meta.get("max_dt", 0.0))
    return traj


# -- reports -------------------------------------------------------------------


def _plain(obj):
    """Numpy-free JSON tree with floats pre-rendered at 17 digits."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _Float(float(obj))
    if hasattr(obj, "value") and isinstance(obj.value, str):
        return obj.value
    return obj


class _Float(float):
    def __repr__(self):
        if math.isnan(self) or math.isinf(self):
            return "null"
        return _fmt(self)


class _Encoder(json.JSONEncoder):
    def iterencode(self, o, _one_shot=False):
        # the C encoder bypasses float repr, so force the pure-Python path
        return json.encoder._make_iterencode(
            {}, self.default, json.encoder.encode_basestring, self.indent,
            lambda f: repr(f) if isinstance(f, _Float) else _fmt(f),
            self.key_separator, self.item_separator, False, self.skipkeys, _one_shot,
        )(o, 0)


def dumps_report(report) -> str:
    """Deterministic JSON: insertion key order, 17-digit floats, NaN as null."""
    return json.dumps(_plain(report), indent=2, cls=_Encoder) + "\n"


def write_report(report, path) -> Path:
    path = Path(path)
    path.write_text(dumps_report(report))
    return path


def write_csv(header, rows, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) if isinstance(x, (float, np.floating)) else x for x in row])
    return path
