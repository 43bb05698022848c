"""Experiment configuration: sectioned ``key = value`` files.

Example::

    [lattice]
    num_steps = 2
    dt = 1.0
    dq = 1.0
    branching = 3
    endpoint_start = 0
    endpoint_end = 0

    [model]
    kind = free
    mass = 1.0

    [solver]
    mode = equal
    norm_mode = sum

    [amplitude]
    mode = phases
    include_backward = false

    [output]
    directory = out
    formats = json, csv
    plot = false

``[grid]`` (``half_width``, ``spacing``, ``slices``, ``T``, ``x_a``, ``x_b``)
is read by the ``propagate`` and ``compare`` commands.  Unknown sections or
keys are rejected.  A potential table is written ``site:value`` pairs
separated by commas.
"""

from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .action import HamiltonianModel, ModelKind
from .amplitude import AmplitudeMode
from .errors import ConfigError, MixedPathError
from .game import NormMode
from .lattice import LatticeSpec
from .pipeline import AmplitudeOptions, SolverMode, SolverOptions

_SCHEMA = {
    "lattice": {
        "num_steps": int,
        "dt": float,
        "dq": float,
        "branching": int,
        "mass": float,
        "endpoint_start": int,
        "endpoint_end": "optional_int",
        "max_paths": int,
    },
    "model": {"kind": str, "mass": float, "omega": float, "hbar": float, "potential_table": "table"},
    "solver": {"mode": str, "norm_mode": str, "tol": float, "max_iter": int},
    "amplitude": {"mode": str, "include_backward": bool},
    "output": {"directory": str, "formats": "formats", "plot": bool},
    "grid": {"half_width": float, "spacing": float, "slices": int, "T": float, "x_a": float, "x_b": float},
}
_FORMATS = {"json", "csv"}


@dataclass
class OutputOptions:
    directory: Path = Path(".")
    formats: tuple = ("json", "csv")
    plot: bool = False


@dataclass
class ExperimentConfig:
    lattice: LatticeSpec | None = None
    model: HamiltonianModel = field(default_factory=HamiltonianModel)
    solver: SolverOptions = field(default_factory=SolverOptions)
    amplitude: AmplitudeOptions = field(default_factory=AmplitudeOptions)
    output: OutputOptions = field(default_factory=OutputOptions)
    grid: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "lattice": None if self.lattice is None else self.lattice.to_dict(),
            "model": self.model.to_dict(),
            "solver": {
                "mode": self.solver.mode.value,
                "norm_mode": self.solver.norm_mode.value,
                "tol": self.solver.tol,
                "max_iter": self.solver.max_iter,
            },
            "amplitude": {"mode": self.amplitude.mode.value, "include_backward": self.amplitude.include_backward},
            "grid": dict(sorted(self.grid.items())),
        }

    def hash(self) -> str:
        """Hash of everything except the output location."""
        return config_hash(self.to_dict())


def config_hash(data: dict) -> str:
    """sha256 of the canonical JSON form of ``data``."""
    text = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def _parse_value(kind, raw: str, where: str):
    raw = raw.strip()
    try:
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        if kind is bool:
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if kind == "optional_int":
            return None if raw.lower() in ("", "none", "free") else int(raw)
        if kind == "table":
            table = {}
            for item in filter(None, (s.strip() for s in raw.split(","))):
                site, value = item.split(":")
                table[int(site)] = float(value)
            return table
        if kind == "formats":
            formats = tuple(s.strip().lower() for s in raw.split(",") if s.strip())
            if not set(formats) <= _FORMATS:
                raise ValueError(f"formats must be a subset of {sorted(_FORMATS)}")
            return formats
        return raw
    except ValueError as exc:
        raise ConfigError(f"{where}: cannot parse {raw!r} ({exc})") from None


def _enum(cls, value: str, where: str):
    try:
        return cls(value.lower())
    except ValueError:
        choices = ", ".join(m.value for m in cls)
        raise ConfigError(f"{where}: {value!r} is not one of {choices}") from None


def parse_config(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, default_section="__none__", inline_comment_prefixes=(";", "#"))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None

    raw: dict = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        raw[section] = {}
        for key, value in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            raw[section][key] = _parse_value(_SCHEMA[section][key], value, f"[{section}] {key}")

    try:
        m = dict(raw.get("model", {}))
        if "kind" in m:
            m["kind"] = _enum(ModelKind, m["kind"], "[model] kind")
        model = HamiltonianModel(**m)

        lattice = None
        if "lattice" in raw:
            lat = dict(raw["lattice"])
            if "mass" in lat and lat["mass"] != model.mass:
                raise ConfigError("[lattice] mass differs from [model] mass")
            lat["mass"] = model.mass
            missing = {"num_steps", "dt", "dq"} - set(lat)
            if missing:
                raise ConfigError(f"[lattice] is missing {sorted(missing)}")
            lattice = LatticeSpec(**lat)

        s = dict(raw.get("solver", {}))
        solver = SolverOptions(
            mode=_enum(SolverMode, s.get("mode", "equal"), "[solver] mode"),
            norm_mode=_enum(NormMode, s.get("norm_mode", "sum"), "[solver] norm_mode"),
            tol=s.get("tol", 1e-10),
            max_iter=s.get("max_iter", 100_000),
        )
        a = raw.get("amplitude", {})
        amplitude = AmplitudeOptions(
            mode=_enum(AmplitudeMode, a.get("mode", "phases"), "[amplitude] mode"),
            include_backward=a.get("include_backward", False),
        )
        o = raw.get("output", {})
        output = OutputOptions(
            directory=Path(o.get("directory", ".")),
            formats=o.get("formats", ("json", "csv")),
            plot=o.get("plot", False),
        )
    except ConfigError:
        raise
    except MixedPathError as exc:
        raise ConfigError(str(exc)) from None
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    return ExperimentConfig(lattice, model, solver, amplitude, output, dict(raw.get("grid", {})))


def load_config(path) -> ExperimentConfig:
    """Read and validate a config file; I/O errors propagate as ``OSError``."""
    return parse_config(Path(path).read_text())
