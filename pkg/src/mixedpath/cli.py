"""Command-line front end.

Every subcommand writes its artifacts into the output directory, prints a
one-line summary and returns an exit code: 0 on success, 1 for domain
errors (bad config, infeasible endpoints), 2 for numerical failures and 3
for I/O errors.  Errors are reported as one JSON object on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import TOOL, __version__
from .action import HamiltonianModel, ModelKind, build_action_matrix
from .amplitude import AmplitudeMode, _wrap
from .config import ExperimentConfig, load_config
from .config import config_hash as config_hash_of
from .errors import ConfigError, DomainError, MixedPathError, NumericalError
from .grassmann import check_identities
from .lattice import enumerate_paths
from .pipeline import phase_propagator_row, run_lattice, solve
from .reference import GridSpec, free_particle_propagator, harmonic_propagator, time_sliced_row
from .windows import Regularization

SCHEMA_VERSION = 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"usage: {message}")


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    raise TypeError(f"cannot serialize {type(obj).__name__}")


class Artifacts:
    """Writes provenance-stamped JSON/CSV files into one directory."""

    def __init__(self, directory: Path, command: str, config: dict, config_hash: str, formats=("json", "csv")):
        self.directory = Path(directory)
        self.command = command
        self.config = config
        self.config_hash = config_hash
        self.formats = tuple(formats)
        self.written: list[str] = []
        self.directory.mkdir(parents=True, exist_ok=True)

    def _stamp(self) -> dict:
        return {
            "tool": TOOL,
            "version": __version__,
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "config_hash": self.config_hash,
        }

    def json(self, name: str, result) -> None:
        if "json" not in self.formats:
            return
        doc = {**self._stamp(), "config": self.config, "result": result}
        text = json.dumps(doc, indent=2, sort_keys=True, default=_json_default, allow_nan=False)
        self._write(name, text + "\n")

    def csv(self, name: str, table: str) -> None:
        if "csv" not in self.formats:
            return
        s = self._stamp()
        header = f"# {s['tool']} {s['version']} command={s['command']} config_hash={s['config_hash']}\n"
        self._write(name, header + table)

    def figure(self, name: str, draw, *args) -> None:
        draw(*args, self.directory / name)
        self.written.append(name)

    def _write(self, name: str, text: str) -> None:
        (self.directory / name).write_text(text)
        self.written.append(name)


def _load(args) -> ExperimentConfig:
    if args.config is None:
        raise ConfigError(f"{args.command} needs --config")
    cfg = load_config(args.config)
    if cfg.lattice is None and args.command != "propagate":
        raise ConfigError("config has no [lattice] section")
    return cfg


def _artifacts(args, cfg: ExperimentConfig) -> Artifacts:
    directory = Path(args.out) if args.out else cfg.output.directory
    return Artifacts(directory, args.command, cfg.to_dict(), cfg.hash(), cfg.output.formats)


def _plot_enabled(args, cfg) -> bool:
    return bool(args.plot or (cfg is not None and cfg.output.plot))


def cmd_enumerate(args) -> str:
    cfg = _load(args)
    out = _artifacts(args, cfg)
    paths = enumerate_paths(cfg.lattice, workers=args.workers)
    out.json("paths.json", paths.to_dict())
    if _plot_enabled(args, cfg):
        from .plotting import plot_path_fan

        out.figure("paths.png", plot_path_fan, paths)
    return f"enumerate: {len(paths)} paths -> {out.directory / 'paths.json'}"


def cmd_matrix(args) -> str:
    cfg = _load(args)
    out = _artifacts(args, cfg)
    paths = enumerate_paths(cfg.lattice, workers=args.workers)
    matrix = build_action_matrix(paths, cfg.model, workers=args.workers)
    out.json("matrix.json", matrix.to_dict())
    out.csv("matrix.csv", matrix.to_csv())
    return f"matrix: {matrix.n}x{matrix.n} action matrix -> {out.directory}"


def cmd_solve(args) -> str:
    cfg = _load(args)
    out = _artifacts(args, cfg)
    paths = enumerate_paths(cfg.lattice, workers=args.workers)
    matrix = build_action_matrix(paths, cfg.model, workers=args.workers)
    pair, report = solve(matrix, cfg.solver)
    out.json("solution.json", {"pair": pair.to_dict(), "report": report})
    return (
        f"solve: {cfg.solver.mode.value} n={matrix.n} generalized_action={report['generalized_action']:.12g} "
        f"total_probability={report['total_probability']:.12g}"
    )


def cmd_amplitudes(args) -> str:
    cfg = _load(args)
    out = _artifacts(args, cfg)
    run = run_lattice(cfg.lattice, cfg.model, cfg.solver, cfg.amplitude)
    result = {"amplitudes": run.amplitudes.to_dict()}
    if run.balanced is not None:
        result["rotation"] = {
            "magnitude": run.balanced.magnitude,
            "spread": run.balanced.spread,
            "rotations": run.balanced.rotations,
            "orthogonality_defect": run.balanced.orthogonality_defect,
            "matrix": run.balanced.rotation,
        }
    result.update(run.extras)
    out.json("amplitudes.json", result)
    out.csv("amplitudes.csv", run.amplitudes.to_csv())
    if _plot_enabled(args, cfg):
        from .plotting import plot_phasors

        out.figure("amplitudes.png", plot_phasors, run.amplitudes)
    return f"amplitudes: {len(run.amplitudes)} ({run.amplitudes.mode.value}) scale={run.amplitudes.scale:.12g}"


def cmd_propagate(args) -> str:
    cfg = _load(args)
    out = _artifacts(args, cfg)
    if cfg.grid:
        g = _grid_settings(cfg.grid, cfg.model)
        row = phase_propagator_row(g["grid"], cfg.model, g["T"], g["slices"], g["x_a"])
        row.meta = {"slices": g["slices"], "regularization": Regularization().to_dict()}
        out.json("propagator.json", {"kernel_row": row.to_dict(), "grid": g["grid"].to_dict()})
        out.csv("propagator.csv", row.to_csv())
        k = row.at(g["x_a"], g["x_b"])
        return f"propagate: K({g['x_a']:g}, {g['x_b']:g}) = {k.real:.9g}{k.imag:+.9g}i over {g['slices']} slices"
    run = run_lattice(cfg.lattice, cfg.model, cfg.solver, cfg.amplitude)
    k = run.propagator
    out.json("propagator.json", {"propagator": k.to_dict(), "solver": run.report, "num_paths": len(run.pathset)})
    return f"propagate: K = {k.value.real:.9g}{k.value.imag:+.9g}i from {len(run.pathset)} paths, KK* = {k.probability:.9g}"


def auto_spacing(model: HamiltonianModel, eps: float, half_width: float, min_levels: float = 100.0) -> float:
    """Largest spacing <= 0.05 that keeps ``min_levels`` momentum levels per slice and divides the half width."""
    reg = Regularization()
    target = min(0.05, np.sqrt(reg.jump_fraction * np.pi * model.hbar * eps / (min_levels * model.mass)))
    return half_width / np.ceil(half_width / target - 1e-12)


def _grid_settings(values: dict, model: HamiltonianModel) -> dict:
    T = values.get("T", 1.0)
    slices = values.get("slices", 16)
    if not T > 0 or slices < 1:
        raise DomainError("need T > 0 and slices >= 1")
    half = values.get("half_width", 10.0)
    spacing = values.get("spacing") or auto_spacing(model, T / slices, half)
    grid = GridSpec.symmetric(half, spacing)
    x_a = values.get("x_a", 0.0)
    x_b = values.get("x_b", x_a)
    grid.index_of(x_a)
    grid.index_of(x_b)
    return {"grid": grid, "T": T, "slices": slices, "x_a": x_a, "x_b": x_b}


def _phase_error(k: complex, ref: complex) -> float:
    return float(np.angle(k / ref))


def cmd_compare(args) -> str:
    if args.config is not None:
        cfg = load_config(args.config)
        model = cfg.model
        grid_values = dict(cfg.grid)
    else:
        cfg = None
        kind = ModelKind(args.model)
        model = HamiltonianModel(kind=kind, mass=args.mass, omega=args.omega if kind is ModelKind.HARMONIC else 0.0, hbar=args.hbar)
        grid_values = {}
    for key in ("T", "slices", "half_width", "spacing", "x_a", "x_b"):
        value = getattr(args, key)
        if value is not None:
            grid_values[key] = value
    if model.kind is ModelKind.TABULATED:
        raise DomainError("compare supports the free and harmonic models")
    g = _grid_settings(grid_values, model)
    grid, T, slices, x_a, x_b = g["grid"], g["T"], g["slices"], g["x_a"], g["x_b"]

    config = {"model": model.to_dict(), "grid": grid.to_dict(), "T": T, "slices": slices, "x_a": x_a, "x_b": x_b}
    if cfg is not None:
        config_hash = cfg.hash()
        config = {**cfg.to_dict(), "resolved": config}
    else:
        config_hash = config_hash_of(config)
    directory = Path(args.out) if args.out else (cfg.output.directory if cfg else Path("."))
    out = Artifacts(directory, "compare", config, config_hash, cfg.output.formats if cfg else ("json", "csv"))

    pipeline_row = phase_propagator_row(grid, model, T, slices, x_a).values[0]
    reference_row = time_sliced_row(model, grid, slices, T, x_a)
    ib = grid.index_of(x_b)
    if model.kind is ModelKind.FREE:
        exact = free_particle_propagator(model.mass, T, x_a, x_b, model.hbar)
    else:
        exact = harmonic_propagator(model.mass, model.omega, T, x_a, x_b, model.hbar)

    rows = [("phase_pipeline", complex(pipeline_row[ib])), ("time_sliced", complex(reference_row[ib])), ("analytic", exact)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["method", "re", "im", "modulus", "relative_error"])
    result = {"methods": {}}
    for name, k in rows:
        rel = abs(abs(k) - abs(exact)) / abs(exact)
        w.writerow([name, repr(k.real), repr(k.imag), repr(abs(k)), repr(rel)])
        result["methods"][name] = {
            "re": k.real,
            "im": k.imag,
            "modulus": abs(k),
            "phase": float(_wrap(np.angle(k))),
            "relative_error": rel,
            "phase_error": _phase_error(k, exact),
        }
    result["pipeline_vs_time_sliced"] = abs(rows[0][1] - rows[1][1]) / abs(rows[1][1])
    result["regularization"] = Regularization().to_dict()
    out.csv("compare.csv", buf.getvalue())
    out.json("compare.json", result)

    if args.plot or (cfg is not None and cfg.output.plot):
        from .plotting import plot_kernel_comparison

        x = grid.points
        if model.kind is ModelKind.FREE:
            analytic_row = [free_particle_propagator(model.mass, T, x_a, xb, model.hbar) for xb in x]
        else:
            analytic_row = [harmonic_propagator(model.mass, model.omega, T, x_a, xb, model.hbar) for xb in x]
        inner = np.abs(x - x_a) <= 0.5 * (x[-1] - x[0]) / 2
        curves = {
            "phase pipeline": pipeline_row[inner],
            "time sliced": reference_row[inner],
            "analytic": np.asarray(analytic_row)[inner],
        }
        out.figure("compare.png", plot_kernel_comparison, x[inner], curves)

    p = result["methods"]["phase_pipeline"]
    return (
        f"compare: {model.kind.value} T={T:g} slices={slices} spacing={grid.spacing:.6g} "
        f"modulus_error={p['relative_error']:.3e} phase_error={p['phase_error']:.3e}"
    )


def cmd_grassmann_check(args) -> str:
    report = check_identities(args.max_generators)
    config = {"max_generators": args.max_generators}
    out = Artifacts(Path(args.out or "."), "grassmann-check", config, config_hash_of(config), ("json",))
    out.json("grassmann.json", report)
    if report["failures"]:
        raise NumericalError(f"{len(report['failures'])} Grassmann identity failures")
    return f"grassmann-check: {report['pairs_checked']} odd monomial pairs, 0 failures (n <= {args.max_generators})"


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog=TOOL, description="Mixed-path action games and propagators")
    parser.add_argument("--version", action="version", version=f"{TOOL} {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--config", required=False, help="experiment config file")
        p.add_argument("--out", help="output directory (overrides [output] directory)")
        p.add_argument("--plot", action="store_true", help="also render PNG figures")
        p.add_argument("--workers", type=int, default=None, help="threads for enumeration and matrix fill")

    for name, fn, text in [
        ("enumerate", cmd_enumerate, "enumerate lattice paths"),
        ("matrix", cmd_matrix, "build the action matrix"),
        ("solve", cmd_solve, "extremize the generalized action"),
        ("amplitudes", cmd_amplitudes, "construct per-path amplitudes"),
        ("propagate", cmd_propagate, "sum amplitudes into a propagator"),
    ]:
        p = sub.add_parser(name, help=text)
        common(p)
        p.set_defaults(func=fn)

    p = sub.add_parser("compare", help="phase-sum pipeline against time-sliced and analytic propagators")
    common(p)
    p.add_argument("--model", choices=["free", "harmonic"], default="free")
    p.add_argument("--T", type=float, default=None)
    p.add_argument("--slices", type=int, default=None)
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--mass", type=float, default=1.0)
    p.add_argument("--hbar", type=float, default=1.0)
    p.add_argument("--spacing", type=float, default=None, help="grid spacing (default: automatic)")
    p.add_argument("--half-width", dest="half_width", type=float, default=None)
    p.add_argument("--x-a", dest="x_a", type=float, default=None)
    p.add_argument("--x-b", dest="x_b", type=float, default=None)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("grassmann-check", help="exhaustive anticommutation identities")
    p.add_argument("--max-generators", type=int, default=4)
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_grassmann_check)
    return parser


def _fail(code: int, exc: BaseException) -> int:
    diag = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(diag, sort_keys=True), file=sys.stderr)
    return code


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        print(args.func(args))
        return 0
    except DomainError as exc:
        return _fail(1, exc)
    except NumericalError as exc:
        return _fail(2, exc)
    except OSError as exc:
        return _fail(3, exc)
    except MixedPathError as exc:
        return _fail(1, exc)


def main() -> None:
    sys.exit(run())
