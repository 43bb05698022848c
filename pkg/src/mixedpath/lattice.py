"""Discrete space-time grid and enumeration of admissible lattice paths.

A position path visits ``num_steps + 1`` integer sites.  Between two samples
the walker moves by one momentum level ``l`` in ``{-h, ..., h}`` with
``h = (branching - 1) // 2``; the level maps to the momentum
``p = l * mass * dq / dt`` so that ``qdot = p / mass`` holds exactly on the
lattice.  Momentum levels live on the half-integer time slots between
position samples.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InfeasibleEndpoints, PathExplosion, StepOutOfRange

DEFAULT_MAX_PATHS = 10**6


class Direction(enum.Enum):
    FORWARD = "forward"
    BACKWARD = "backward"


@dataclass(frozen=True)
class LatticeSpec:
    num_steps: int
    dt: float
    dq: float
    branching: int = 3
    mass: float = 1.0
    endpoint_start: int = 0
    endpoint_end: int | None = None
    max_paths: int = DEFAULT_MAX_PATHS

    def __post_init__(self):
        if int(self.num_steps) != self.num_steps or self.num_steps < 1:
            raise DomainError(f"num_steps must be a positive integer, got {self.num_steps}")
        if int(self.branching) != self.branching or self.branching < 1 or self.branching % 2 == 0:
            raise DomainError(f"branching must be a positive odd integer, got {self.branching}")
        for name in ("dt", "dq", "mass"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise DomainError(f"{name} must be finite and > 0, got {value}")
        if self.max_paths < 1:
            raise DomainError("max_paths must be positive")

    @property
    def half_width(self) -> int:
        """Largest admissible |level| per step."""
        return (self.branching - 1) // 2

    @property
    def levels(self) -> np.ndarray:
        h = self.half_width
        return np.arange(-h, h + 1)

    @property
    def momentum_unit(self) -> float:
        return self.mass * self.dq / self.dt

    def to_dict(self) -> dict:
        return {
            "num_steps": self.num_steps,
            "dt": self.dt,
            "dq": self.dq,
            "branching": self.branching,
            "mass": self.mass,
            "endpoint_start": self.endpoint_start,
            "endpoint_end": self.endpoint_end,
            "max_paths": self.max_paths,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LatticeSpec":
        return cls(**data)


@dataclass(frozen=True)
class QPath:
    sites: tuple[int, ...]
    direction: Direction = Direction.FORWARD


@dataclass(frozen=True)
class PPath:
    levels: tuple[int, ...]

    def momenta(self, spec: LatticeSpec) -> np.ndarray:
        return np.asarray(self.levels, dtype=float) * spec.momentum_unit

    def to_qpath(self, start: int, direction: Direction = Direction.FORWARD) -> QPath:
        """Regenerate the position path by cumulative summation from ``start``."""
        sites = np.concatenate([[start], start + np.cumsum(self.levels, dtype=np.int64)])
        return QPath(tuple(int(s) for s in sites), direction)


@dataclass
class PathSet:
    """All paths of one direction class, stored as an ``(n, num_steps+1)`` site array."""

    spec: LatticeSpec
    sites: np.ndarray
    direction: Direction = Direction.FORWARD
    ordering: str = field(default="lexicographic")

    def __post_init__(self):
        self.sites = np.asarray(self.sites, dtype=np.int64).reshape(-1, self.spec.num_steps + 1)

    def __len__(self) -> int:
        return self.sites.shape[0]

    @property
    def levels(self) -> np.ndarray:
        return np.diff(self.sites, axis=1)

    @property
    def qpaths(self) -> list[QPath]:
        return [QPath(tuple(int(s) for s in row), self.direction) for row in self.sites]

    @property
    def ppaths(self) -> list[PPath]:
        return [PPath(tuple(int(l) for l in row)) for row in self.levels]

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "paths": [
                {
                    "sites": [int(s) for s in row],
                    "levels": [int(l) for l in lv],
                    "direction": self.direction.value,
                }
                for row, lv in zip(self.sites, self.levels)
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PathSet":
        spec = LatticeSpec.from_dict(data["spec"])
        paths = data["paths"]
        directions = {p["direction"] for p in paths}
        if len(directions) > 1:
            raise DomainError("a PathSet holds a single direction class")
        direction = Direction(directions.pop()) if directions else Direction.FORWARD
        sites = np.array([p["sites"] for p in paths], dtype=np.int64).reshape(-1, spec.num_steps + 1)
        return cls(spec, sites, direction)


def _reach_counts(spec: LatticeSpec) -> list[int]:
    """Exact walk counts per net displacement, offsets -h*n .. h*n (Python ints)."""
    k = spec.branching
    counts = [1]
    for _ in range(spec.num_steps):
        nxt = [0] * (len(counts) + k - 1)
        for i, c in enumerate(counts):
            if c:
                for j in range(k):
                    nxt[i + j] += c
        counts = nxt
    return counts


def count_paths(spec: LatticeSpec) -> int:
    """Number of admissible paths, computed without materializing them."""
    if spec.endpoint_end is None:
        return spec.branching**spec.num_steps
    span = spec.half_width * spec.num_steps
    offset = spec.endpoint_end - spec.endpoint_start
    if abs(offset) > span:
        return 0
    return _reach_counts(spec)[offset + span]


def _extend(spec: LatticeSpec, prefixes: np.ndarray, steps_done: int) -> np.ndarray:
    levels = spec.levels
    k = len(levels)
    last = prefixes[:, -1]
    nxt = (last[:, None] + levels[None, :]).reshape(-1)
    grown = np.concatenate([np.repeat(prefixes, k, axis=0), nxt[:, None]], axis=1)
    if spec.endpoint_end is not None:
        remaining = spec.num_steps - steps_done - 1
        ok = np.abs(spec.endpoint_end - nxt) <= spec.half_width * remaining
        grown = grown[ok]
    return grown


def enumerate_subtree(spec: LatticeSpec, first_level: int) -> np.ndarray:
    """Site array of every admissible path whose first step is ``first_level``.

    Subtrees for increasing ``first_level`` concatenate to the full
    lexicographic listing, so workers can enumerate them independently.
    """
    if abs(first_level) > spec.half_width:
        raise StepOutOfRange(f"level {first_level} outside +-{spec.half_width}")
    prefixes = np.array([[spec.endpoint_start, spec.endpoint_start + first_level]], dtype=np.int64)
    if spec.endpoint_end is not None:
        remaining = spec.num_steps - 1
        if abs(spec.endpoint_end - prefixes[0, 1]) > spec.half_width * remaining:
            return np.empty((0, spec.num_steps + 1), dtype=np.int64)
    for step in range(1, spec.num_steps):
        prefixes = _extend(spec, prefixes, step)
    return prefixes


def enumerate_paths(spec: LatticeSpec, workers: int | None = None) -> PathSet:
    """Every admissible forward path in lexicographic order of sites.

    Raises ``PathExplosion`` before materializing anything when the exact
    count exceeds ``spec.max_paths``.
    """
    total = count_paths(spec)
    if total == 0:
        raise InfeasibleEndpoints(
            f"no path joins site {spec.endpoint_start} to {spec.endpoint_end} "
            f"in {spec.num_steps} steps with |level| <= {spec.half_width}"
        )
    if total > spec.max_paths:
        raise PathExplosion(total, spec.max_paths)
    firsts = [int(l) for l in spec.levels]
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda l: enumerate_subtree(spec, l), firsts))
    else:
        parts = [enumerate_subtree(spec, l) for l in firsts]
    sites = np.concatenate(parts, axis=0)
    assert sites.shape[0] == total
    return PathSet(spec, sites, Direction.FORWARD)


def infer_p_path(qpath: QPath, spec: LatticeSpec) -> PPath:
    """Momentum levels implied by ``qdot = p / m`` (forward differences)."""
    sites = np.asarray(qpath.sites, dtype=np.int64)
    if sites.shape != (spec.num_steps + 1,):
        raise DomainError(f"expected {spec.num_steps + 1} sites, got {sites.size}")
    levels = np.diff(sites)
    bad = np.abs(levels) > spec.half_width
    if bad.any():
        j = int(np.argmax(bad))
        raise StepOutOfRange(f"step {j} moves {int(levels[j])} sites, limit is {spec.half_width}")
    return PPath(tuple(int(l) for l in levels))


def time_reverse(pathset: PathSet) -> PathSet:
    """The backward-evolving class: every site sequence reversed."""
    if pathset.direction is not Direction.FORWARD:
        raise DomainError("time_reverse expects the forward class")
    return PathSet(pathset.spec, pathset.sites[:, ::-1].copy(), Direction.BACKWARD)
