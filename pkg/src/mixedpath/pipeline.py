"""End-to-end runs: enumerate -> action matrix -> solve -> amplitudes -> K.

``run_lattice`` works on an explicitly enumerated path set between two
lattice endpoints.  ``phase_propagator_row`` builds a physical propagator
on a position grid: each one-slice kernel entry is the action-phase
amplitude of the single lattice path joining its endpoints, scaled so the
zero-displacement entry matches the exact one-slice free kernel, and
slices are joined by kernel multiplication.  Summing over every
multi-slice lattice path this way weights each path by ``exp(i S / hbar)``
with a common magnitude, up to the convergence tapers.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import game
from .action import ActionMatrix, HamiltonianModel, build_action_matrix, matched_actions
from .amplitude import (
    AmplitudeMode,
    AmplitudeSet,
    BalancedPair,
    Propagator,
    PropagatorGrid,
    assign_paper_phases,
    balance_rotation,
    build_amplitudes,
    compose_propagators,
    sum_propagator,
)
from .errors import DomainError, NormModeError
from .game import MixedPathPair, NormMode
from .lattice import LatticeSpec, PathSet, enumerate_paths, time_reverse
from .reference import GridSpec, free_particle_propagator
from .windows import Regularization


class SolverMode(enum.Enum):
    EQUAL = "equal"
    STATIONARY = "stationary"
    MINIMAX = "minimax"


@dataclass
class SolverOptions:
    mode: SolverMode = SolverMode.EQUAL
    norm_mode: NormMode = NormMode.SUM
    tol: float = 1e-10
    max_iter: int = 100_000


@dataclass
class AmplitudeOptions:
    mode: AmplitudeMode = AmplitudeMode.PAPER_PHASES
    include_backward: bool = False


def normalize_pair(pair: MixedPathPair, mode: NormMode) -> MixedPathPair:
    """Rescale ``pair`` so it satisfies ``mode``'s constraint."""
    probe = MixedPathPair(pair.alpha, pair.beta, mode, pair.provenance)
    c = probe.constraint_value()
    if c <= 0:
        raise DomainError(f"pair cannot be scaled onto the {mode.value} constraint")
    k = 1.0 / np.sqrt(c)
    return MixedPathPair(pair.alpha * k, pair.beta * k, mode, pair.provenance)


def solve(matrix: ActionMatrix, opts: SolverOptions) -> tuple[MixedPathPair, dict]:
    """Run the configured solver; returns the pair and a JSON-ready report."""
    if opts.mode is SolverMode.EQUAL:
        pair = game.solve_equal_component(matrix, opts.norm_mode)
        report = {"solver": "equal", "residual": game.stationarity_residual(matrix, pair)}
    elif opts.mode is SolverMode.STATIONARY:
        res = game.solve_stationary(matrix, tol=opts.tol, max_iter=opts.max_iter, norm_mode=opts.norm_mode)
        pair = res.pair
        report = {"solver": "stationary", **res.to_dict()}
        del report["pair"]
    else:
        mm = game.solve_minimax(matrix)
        pair = normalize_pair(game.minimax_pair(mm), opts.norm_mode)
        report = {"solver": "minimax", **mm.to_dict()}
    report["generalized_action"] = game.generalized_action(pair, matrix)
    report["total_probability"] = game.total_probability(pair)
    report["within_bounds"] = pair.within_bounds()
    return pair, report


def pair_magnitude(pair: MixedPathPair) -> float:
    """Common per-path magnitude ``|a| = sqrt((|alpha|^2 + |beta|^2) / n)``."""
    return float(np.sqrt((pair.alpha @ pair.alpha + pair.beta @ pair.beta) / pair.n))


@dataclass
class LatticeRun:
    pathset: PathSet
    matrix: ActionMatrix
    pair: MixedPathPair
    report: dict
    amplitudes: AmplitudeSet
    propagator: Propagator
    balanced: BalancedPair | None = None
    backward: AmplitudeSet | None = None
    extras: dict = field(default_factory=dict)


def run_lattice(
    spec: LatticeSpec,
    model: HamiltonianModel,
    solver: SolverOptions = SolverOptions(),
    amplitude: AmplitudeOptions = AmplitudeOptions(),
) -> LatticeRun:
    pathset = enumerate_paths(spec)
    matrix = build_action_matrix(pathset, model)
    pair, report = solve(matrix, solver)
    balanced = None
    backward = None
    if amplitude.mode is AmplitudeMode.FROM_ROTATION:
        if pair.norm_mode is not NormMode.NORM:
            raise NormModeError("rotation amplitudes need solver norm_mode = norm")
        balanced = balance_rotation(pair)
        amps = build_amplitudes(balanced)
        if amplitude.include_backward:
            backward = amps
    else:
        amps = assign_paper_phases(np.diag(matrix.entries), model, pair_magnitude(pair))
        if amplitude.include_backward:
            reversed_set = time_reverse(pathset)
            backward = assign_paper_phases(matched_actions(reversed_set, model), model, amps.scale)
    endpoints = (spec.endpoint_start, 0.0, spec.endpoint_end, spec.num_steps * spec.dt)
    k = sum_propagator(amps, endpoints, backward=backward)
    extras = {}
    if pair.norm_mode is NormMode.NORM:
        extras["mode_phase_gap"] = amplitude_mode_gap(pair, matrix, model)
    return LatticeRun(pathset, matrix, pair, report, amps, k, balanced, backward, extras)


def amplitude_mode_gap(pair: MixedPathPair, matrix: ActionMatrix, model: HamiltonianModel) -> dict:
    """Per-path phase difference between the rotation and action-phase amplitudes.

    The two constructions are not reconciled; this only reports how far apart
    they are (differences wrapped to ``(-pi, pi]``).
    """
    rot = build_amplitudes(balance_rotation(pair))
    ref = assign_paper_phases(np.diag(matrix.entries), model, rot.scale)
    gap = np.angle(np.exp(1j * (rot.phases - ref.phases)))
    return {"phase_difference": gap.tolist(), "max_abs": float(np.abs(gap).max())}


def _grid_sites(grid: GridSpec) -> np.ndarray:
    offset = grid.x_min / grid.spacing
    if abs(offset - round(offset)) > 1e-9 * max(1.0, abs(offset)):
        raise DomainError("grid points must be integer multiples of the spacing (lattice sites)")
    return int(round(offset)) + np.arange(grid.num_points)


def slice_prefactor(model: HamiltonianModel, dt: float) -> complex:
    """Calibration: the exact one-slice free kernel at zero displacement."""
    return free_particle_propagator(model.mass, dt, 0.0, 0.0, model.hbar)


def phase_slice_kernel(
    grid: GridSpec, model: HamiltonianModel, dt: float, reg: Regularization | None = Regularization()
) -> PropagatorGrid:
    """One-slice kernel whose entries come from enumerated one-step lattice paths."""
    dx = grid.spacing
    sites = _grid_sites(grid)
    lo, hi = sites[0], sites[-1]
    if reg is None:
        half = int(hi - lo)
    else:
        half = min(int(hi - lo), reg.max_level(dt, dx, model.mass, model.hbar))

    # one lattice path per endpoint pair: a 1x1 game whose balanced magnitude sets |a|
    single = game.solve_equal_component(np.zeros((1, 1)), NormMode.NORM)
    magnitude = balance_rotation(single).magnitude
    pref = slice_prefactor(model, dt)
    scale = abs(pref) * magnitude
    phase = pref / abs(pref)

    values = np.zeros((grid.num_points, grid.num_points), dtype=complex)
    for i, start in enumerate(sites):
        spec = LatticeSpec(
            num_steps=1,
            dt=dt,
            dq=dx,
            branching=2 * half + 1,
            mass=model.mass,
            endpoint_start=int(start),
            max_paths=2 * half + 1,
        )
        paths = enumerate_paths(spec)
        ends = paths.sites[:, 1]
        inside = (ends >= lo) & (ends <= hi)
        paths = PathSet(spec, paths.sites[inside])
        amps = assign_paper_phases(matched_actions(paths, model), model, scale)
        weight = 1.0
        if reg is not None:
            weight = reg.jump_weight(np.abs(paths.levels[:, 0]) * dx, dt, dx, model.mass, model.hbar)
        values[i, paths.sites[:, 1] - lo] = phase * amps.phis * weight
    return PropagatorGrid(values, grid.points, grid.points, 0.0, dt)


def phase_propagator_row(
    grid: GridSpec,
    model: HamiltonianModel,
    T: float,
    slices: int,
    x_a: float,
    reg: Regularization | None = Regularization(),
) -> PropagatorGrid:
    """``K(x_a, 0; x, T)`` for all grid points ``x`` by composing one-slice kernels."""
    if slices < 1:
        raise DomainError("slices must be >= 1")
    dt = T / slices
    kernel = phase_slice_kernel(grid, model, dt, reg)
    ia = grid.index_of(x_a)
    row = PropagatorGrid(kernel.values[ia : ia + 1], [grid.points[ia]], grid.points, 0.0, dt)
    weights = None if reg is None else reg.edge_weights(grid.points)
    for step in range(1, slices):
        shifted = PropagatorGrid(kernel.values, grid.points, grid.points, step * dt, (step + 1) * dt)
        row = compose_propagators(row, shifted, grid.spacing, weights)
    return row


def phase_propagator(grid, model, T, slices, x_a, x_b, reg=Regularization()) -> complex:
    return phase_propagator_row(grid, model, T, slices, x_a, reg).at(x_a, x_b)
