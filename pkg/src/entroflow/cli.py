"""Command-line front end.

    entroflow make circle --radius 1 --segments 1024 --out circle.txt
    entroflow flow --input circle.txt --t-end 1 --out run/
    entroflow entropy --input sphere.obj
    entroflow density --input run/trajectory --center 0,0 --time 0.5
    entroflow rescale --input run/trajectory --scales 4
    entroflow shrinker --input circle.txt
    entroflow stone 1..5
    entroflow verify shrinking-sphere

Options come from built-in defaults, then a ``key = value`` config file
(``--config``), then command-line flags.  Exit codes: 0 ok, 1 verification
failure, 2 bad arguments, 3 I/O, 4 numerical abort, 5 out-of-range query.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .errors import EntroflowError, InvalidSurface, OutOfRange
from .flow import FlowAborted, FlowControls, run_flow
from .gaussian import EntropyOptions, entropy, stone_entropy
from .geometry import compute_curvature
from .rescale import gaussian_density, shrinker_residual, tangent_flow_extract
from .shapes import circle, ellipsoid, icosphere
from .suites import SUITES

logger = logging.getLogger("entroflow")

EXIT_OK, EXIT_VERIFY, EXIT_ARGS, EXIT_IO, EXIT_NUMERIC, EXIT_RANGE = range(6)


class UsageError(Exception):
    """Bad option values; maps to exit code 2."""


class InputError(Exception):
    """Unreadable or malformed input; maps to exit code 3."""


# -- option parsing helpers ---------------------------------------------------------


def _floats(text):
    try:
        return [float(x) for x in str(text).replace(",", " ").split()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from exc


def _vector(text, dim=None):
    v = np.array(_floats(text))
    if dim is not None and v.shape != (dim,):
        raise UsageError(f"expected {dim} coordinates, got {text!r}")
    return v


# Options that may also come from a config file, with their parsers.
CONFIG_KEYS = {
    "input": str, "out": str, "scheme": str, "cfl": float, "t_end": float,
    "snapshot_every": float, "snapshot_steps": int, "remesh_every": int, "detect_every": int,
    "starts": int, "scales": str, "seed": int,
    "radius": float, "segments": int, "subdiv": int, "axes": str, "center": str,
    "time": float, "times": str, "file": str,
}

DEFAULTS = {
    "scheme": "semi-implicit", "cfl": 0.5, "t_end": 1.0, "snapshot_every": None, "snapshot_steps": None,
    "remesh_every": 25, "detect_every": 1, "starts": 8, "seed": None,
    "radius": 1.0, "segments": 256, "subdiv": 3, "axes": "2,1,1", "center": None,
}


def read_config(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment; unknown keys are rejected."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    out = {}
    for k, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep:
            raise UsageError(f"{path}:{k}: expected 'key = value'")
        if key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{k}: unknown key {key!r}")
        try:
            out[key] = CONFIG_KEYS[key](value.strip())
        except ValueError as exc:
            raise UsageError(f"{path}:{k}: bad value for {key}: {value.strip()!r}") from exc
    return out


def resolve(args) -> dict:
    """Defaults, overridden by the config file, overridden by explicit flags."""
    opts = dict(DEFAULTS)
    if getattr(args, "config", None):
        opts.update(read_config(args.config))
    for key, value in vars(args).items():
        if value is not None and key not in ("config", "command", "func"):
            opts[key] = value
    return opts


def _require(opts, key):
    if opts.get(key) is None:
        raise UsageError(f"--{key.replace('_', '-')} is required")
    return opts[key]


def _load_surface(path):
    try:
        return io.read_surface(path)
    except (OSError, InvalidSurface, ValueError) as exc:
        raise InputError(f"cannot read geometry {path}: {exc}") from exc


def _load_trajectory(path):
    try:
        return io.load_trajectory(path)
    except (OSError, KeyError, ValueError) as exc:
        raise InputError(f"cannot read trajectory {path}: {exc}") from exc


def _emit(report, opts, name):
    """Write ``<out>/<name>.json`` when ``--out`` is given, else print the JSON."""
    text = io.dumps_report(report)
    out = opts.get("out")
    if out:
        path = Path(out)
        path.mkdir(parents=True, exist_ok=True)
        (path / f"{name}.json").write_text(text)
    else:
        sys.stdout.write(text)


# -- commands ---------------------------------------------------------------------


def cmd_make(opts) -> int:
    shape = opts["shape"]
    radius = float(opts["radius"])
    if not radius > 0:
        raise UsageError("radius must be positive")
    subdiv = int(opts["subdiv"])
    if shape in ("sphere", "ellipsoid") and not 0 <= subdiv <= 6:
        raise UsageError("subdivision must lie in 0..6")
    center = None if opts.get("center") is None else _vector(opts["center"])
    if shape == "circle":
        if int(opts["segments"]) < 3:
            raise UsageError("need at least 3 segments")
        c = (0.0, 0.0) if center is None else _vector(opts["center"], 2)
        surface = circle(radius, int(opts["segments"]), c)
    elif shape == "sphere":
        c = (0.0, 0.0, 0.0) if center is None else _vector(opts["center"], 3)
        surface = icosphere(radius, subdiv, c)
    elif shape == "ellipsoid":
        axes = _vector(opts["axes"], 3)
        if np.any(axes <= 0):
            raise UsageError("axes must be positive")
        surface = ellipsoid(tuple(axes), subdiv)
    else:  # polygon or obj: read, validate, rewrite
        surface = _load_surface(_require(opts, "file"))
        if (shape == "polygon") != (surface.n == 1):
            raise UsageError(f"{opts['file']} is not a {shape} file")
    out = Path(_require(opts, "out"))
    try:
        io.write_surface(surface, out)
    except OSError as exc:
        raise InputError(f"cannot write {out}: {exc}") from exc
    print(f"vertices {surface.num_vertices} elements {len(surface.elements)} "
          f"measure {io._fmt(surface.total_measure)} volume {io._fmt(surface.enclosed_volume)}")
    return EXIT_OK


def _controls(opts):
    try:
        return FlowControls(t_end=float(opts["t_end"]), cfl=float(opts["cfl"]),
                            remesh_every=int(opts["remesh_every"]), snapshot_every=opts["snapshot_every"],
                            snapshot_steps=opts["snapshot_steps"], scheme=opts["scheme"],
                            detect_every=int(opts["detect_every"]))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _flow_outputs(traj, out):
    io.save_trajectory(traj, out / "trajectory")
    rows = []
    for s in traj.snapshots:
        curv = compute_curvature(s.surface, second_form=False)
        rows.append([s.time, s.step_count, s.generation, s.surface.num_vertices,
                     s.surface.total_measure, s.surface.enclosed_volume, float(np.max(curv.mean_curvature))])
    io.write_csv(["time", "step", "generation", "vertices", "area", "volume", "max_H"], rows, out / "series.csv")
    final = traj.final
    summary = {
        "termination": traj.termination.value,
        "singular_time": traj.extrapolated_singular_time(),
        "detected_time": traj.singular_time,
        "singular_location": traj.singular_location,
        "final_time": final.time,
        "final_area": final.surface.total_measure,
        "final_volume": final.surface.enclosed_volume,
        "steps": traj.steps,
        "max_dt": traj.max_dt,
        "snapshots": len(traj.snapshots),
    }
    io.write_report(summary, out / "summary.json")
    return summary


def cmd_flow(opts) -> int:
    surface = _load_surface(_require(opts, "input"))
    controls = _controls(opts)
    out = Path(_require(opts, "out"))
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise InputError(f"cannot create {out}: {exc}") from exc
    try:
        traj = run_flow(surface, controls)
    except FlowAborted as exc:
        _flow_outputs(exc.partial, out)
        print(f"flow aborted: {exc}; partial trajectory in {out}", file=sys.stderr)
        return EXIT_NUMERIC
    summary = _flow_outputs(traj, out)
    print(f"termination {summary['termination']} final_time {io._fmt(summary['final_time'])} "
          f"singular_time {summary['singular_time']}")
    return EXIT_OK


def cmd_entropy(opts) -> int:
    surface = _load_surface(_require(opts, "input"))
    fractions = tuple(_floats(opts["scales"])) if opts.get("scales") else (0.25, 0.5, 1.0)
    if int(opts["starts"]) < 1 or any(not f > 0 for f in fractions):
        raise UsageError("starts must be >= 1 and scale fractions positive")
    res = entropy(surface, EntropyOptions(starts=int(opts["starts"]), scale_fractions=fractions, seed=opts["seed"]))
    _emit({
        "entropy": res.entropy,
        "center": res.argmax.center,
        "scale": res.argmax.scale,
        "starts_tried": res.starts_tried,
        "converged": res.converged,
        "gradient_norm": res.best_gradient_norm,
    }, opts, "entropy")
    return EXIT_OK


def cmd_density(opts) -> int:
    traj = _load_trajectory(_require(opts, "input"))
    dim = traj.snapshots[0].surface.ambient
    x0 = _vector(_require(opts, "center"), dim)
    t0 = float(_require(opts, "time"))
    if opts.get("times"):
        times = _floats(opts["times"])
    else:
        t_first, t_last = float(traj.times[0]), float(traj.times[-1])
        gap = max(0.0, t0 - t_last)
        span = min(t0, t_last) - t_first
        times = [t0 - gap - span * 2.0 ** -k for k in range(1, 6)]
    est = gaussian_density(traj, x0, t0, times)
    report = {"center": x0, "time": t0}
    report.update(est.to_dict())
    _emit(report, opts, "density")
    if opts.get("out"):
        io.write_csv(["time", "gaussian_integral"], est.samples, Path(opts["out"]) / "density.csv")
    return EXIT_OK


def cmd_rescale(opts) -> int:
    traj = _load_trajectory(_require(opts, "input"))
    dim = traj.snapshots[0].surface.ambient
    x0 = traj.singular_location if opts.get("center") is None else _vector(opts["center"], dim)
    t0 = traj.extrapolated_singular_time() if opts.get("time") is None else float(opts["time"])
    if x0 is None or t0 is None:
        raise UsageError("trajectory has no detected singularity; pass --center and --time")
    count = int(opts["scales"]) if opts.get("scales") else 4
    seq, report = tangent_flow_extract(traj, x0, t0, count)
    doc = {"center": x0, "time": t0}
    doc.update(report.to_dict())
    _emit(doc, opts, "rescale")
    if opts.get("out"):
        for j in range(count):
            m = seq.at(j)
            io.write_surface(m, Path(opts["out"]) / f"rescaled_{j:02d}{io.surface_suffix(m)}")
    return EXIT_OK


def cmd_shrinker(opts) -> int:
    surface = _load_surface(_require(opts, "input"))
    rep = shrinker_residual(surface)
    _emit(rep.to_dict(), opts, "shrinker")
    if opts.get("out"):
        rows = [[i, r] for i, r in enumerate(rep.residuals)]
        io.write_csv(["vertex", "residual"], rows, Path(opts["out"]) / "residual.csv")
    return EXIT_OK


def _k_range(text):
    text = text or "1..10"
    lo, sep, hi = text.partition("..")
    try:
        lo, hi = int(lo), int(hi) if sep else int(lo)
    except ValueError as exc:
        raise UsageError(f"expected K or K1..K2, got {text!r}") from exc
    if lo < 1 or hi < lo:
        raise UsageError("k range must satisfy 1 <= K1 <= K2")
    return range(lo, hi + 1)


def cmd_stone(opts) -> int:
    for k in _k_range(opts.get("range")):
        print(f"{k} {stone_entropy(k):.12f}")
    return EXIT_OK


def cmd_verify(opts) -> int:
    names = opts.get("suites") or ["all"]
    if names == ["all"]:
        names = list(SUITES)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise UsageError(f"unknown suite(s) {unknown}; choose from {sorted(SUITES)}")
    results = []
    for name in names:
        for check in SUITES[name]():
            results.append({"suite": name, **check.to_dict()})
            status = "PASS" if check.passed else "FAIL"
            print(f"{status} {name}: {check.name} = {check.value:.6g} (tolerance {check.tolerance:.3g})")
    if opts.get("out"):
        _emit({"results": results}, opts, "verify")
    return EXIT_OK if all(r["passed"] for r in results) else EXIT_VERIFY


# -- parser ----------------------------------------------------------------------


def _add_common(p, *names):
    flags = {
        "input": dict(help="input geometry file or trajectory directory"),
        "out": dict(help="output file (make) or directory"),
        "scheme": dict(choices=["explicit", "semi-implicit"]),
        "cfl": dict(type=float),
        "t-end": dict(type=float),
        "snapshot-every": dict(type=float),
        "snapshot-steps": dict(type=int),
        "remesh-every": dict(type=int),
        "detect-every": dict(type=int),
        "starts": dict(type=int),
        "seed": dict(type=int),
    }
    for name in names:
        p.add_argument(f"--{name}", default=None, **flags[name])
    p.add_argument("--config", default=None, help="key = value file; flags override it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="entroflow", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("make", help="generate or convert a geometry file")
    p.add_argument("shape", choices=["circle", "polygon", "sphere", "ellipsoid", "obj"])
    p.add_argument("--radius", type=float)
    p.add_argument("--segments", type=int)
    p.add_argument("--subdiv", type=int)
    p.add_argument("--axes", help="three comma-separated semi-axes")
    p.add_argument("--center", help="comma-separated centre")
    p.add_argument("--file", help="source file for polygon/obj")
    _add_common(p, "out")
    p.set_defaults(func=cmd_make)

    p = sub.add_parser("flow", help="run mean curvature flow")
    _add_common(p, "input", "out", "scheme", "cfl", "t-end", "snapshot-every", "snapshot-steps",
                "remesh-every", "detect-every")
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("entropy", help="entropy of a geometry file")
    _add_common(p, "input", "out", "starts", "seed")
    p.add_argument("--scales", help="comma-separated start scales as fractions of the diameter")
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("density", help="Gaussian density at a space-time point")
    _add_common(p, "input", "out")
    p.add_argument("--center", help="comma-separated point x0")
    p.add_argument("--time", type=float, help="time t0")
    p.add_argument("--times", help="comma-separated sample times before t0")
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("rescale", help="parabolic blow-up sequence at a singularity")
    _add_common(p, "input", "out")
    p.add_argument("--center", help="blow-up centre (default: detected location)")
    p.add_argument("--time", type=float, help="blow-up time (default: extrapolated singular time)")
    p.add_argument("--scales", help="number of dyadic scales (>= 3)")
    p.set_defaults(func=cmd_rescale)

    p = sub.add_parser("shrinker", help="self-shrinker residual and shape classification")
    _add_common(p, "input", "out")
    p.set_defaults(func=cmd_shrinker)

    p = sub.add_parser("stone", help="closed-form sphere entropies")
    p.add_argument("range", nargs="?", help="K or K1..K2 (default 1..10)")
    p.set_defaults(func=cmd_stone)

    p = sub.add_parser("verify", help="run property suites")
    p.add_argument("suites", nargs="*", help=f"any of {', '.join(SUITES)} or 'all'")
    _add_common(p, "out")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on bad usage and 0 on --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s", stream=sys.stderr)
    try:
        opts = resolve(args)
        return args.func(opts)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OutOfRange as exc:
        print(f"out of range: {exc}", file=sys.stderr)
        return EXIT_RANGE
    except ValueError as exc:  # includes the library's validation errors
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except (EntroflowError, ArithmeticError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
