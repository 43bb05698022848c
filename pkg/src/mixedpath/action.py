"""Classical actions on lattice path pairs and the action matrix.

Quadrature is a rectangle rule per slice.  On slice ``j`` the momentum
``p_j`` sits on the half slot, ``qdot_j`` is the forward difference of the
position path and the Hamiltonian is evaluated at the midpoint
``qbar_j = (q_j + q_{j+1}) / 2``::

    S = sum_j [p_j * qdot_j - H(p_j, qbar_j)] * dt
    R = -sum_{j=1}^{n-1} q_j * (p_j - p_{j-1}) - sum_j H(p_j, qbar_j) * dt

In ``R`` the momentum derivative is taken at the integer slots where ``q``
is sampled, with no contribution from the two end slots.  With this
staggering ``S - R = p_{n-1} q_n - p_0 q_0`` holds exactly.
"""

from __future__ import annotations

import csv
import enum
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, DomainError, MatrixTooLarge, ModelDomain
from .lattice import LatticeSpec, PathSet, PPath, QPath

DEFAULT_MATRIX_CAP = 4096


class ModelKind(enum.Enum):
    FREE = "free"
    HARMONIC = "harmonic"
    TABULATED = "tabulated"


@dataclass(frozen=True)
class HamiltonianModel:
    kind: ModelKind = ModelKind.FREE
    mass: float = 1.0
    omega: float = 0.0
    potential_table: dict[int, float] | None = field(default=None, hash=False)
    hbar: float = 1.0

    def __post_init__(self):
        if not (self.mass > 0 and np.isfinite(self.mass)):
            raise DomainError(f"mass must be > 0, got {self.mass}")
        if not (self.hbar > 0 and np.isfinite(self.hbar)):
            raise DomainError(f"hbar must be > 0, got {self.hbar}")
        if self.omega < 0:
            raise DomainError(f"omega must be >= 0, got {self.omega}")
        if self.kind is ModelKind.TABULATED and not self.potential_table:
            raise DomainError("tabulated model needs a potential table")

    @property
    def h(self) -> float:
        return 2.0 * np.pi * self.hbar

    def potential_at_midpoints(self, sites: np.ndarray, dq: float) -> np.ndarray:
        """V at the slice midpoints of ``sites`` (last axis is time)."""
        sites = np.asarray(sites)
        if self.kind is ModelKind.FREE:
            return np.zeros(sites.shape[:-1] + (sites.shape[-1] - 1,))
        if self.kind is ModelKind.HARMONIC:
            qbar = 0.5 * (sites[..., :-1] + sites[..., 1:]) * dq
            return 0.5 * self.mass * self.omega**2 * qbar**2
        # linear interpolation of the table at the half-integer midpoint
        table = self.potential_table
        try:
            values = np.vectorize(lambda s: table[int(s)], otypes=[float])(sites)
        except KeyError as exc:
            raise ModelDomain(f"potential table has no entry for site {exc.args[0]}") from None
        return 0.5 * (values[..., :-1] + values[..., 1:])

    def kinetic(self, p: np.ndarray) -> np.ndarray:
        return p**2 / (2.0 * self.mass)

    def to_dict(self) -> dict:
        out = {"kind": self.kind.value, "mass": self.mass, "omega": self.omega, "hbar": self.hbar}
        if self.potential_table is not None:
            out["potential_table"] = {str(k): v for k, v in sorted(self.potential_table.items())}
        return out


def _check_pair(ppath: PPath, qpath: QPath, spec: LatticeSpec):
    if len(ppath.levels) != spec.num_steps or len(qpath.sites) != spec.num_steps + 1:
        raise DimensionMismatch(
            f"path lengths {len(ppath.levels)}/{len(qpath.sites)} do not match num_steps={spec.num_steps}"
        )


def _s_entries(momenta, sites, model: HamiltonianModel, spec: LatticeSpec):
    """Action S for broadcast-compatible momentum rows and site rows."""
    qdot = np.diff(sites, axis=-1) * (spec.dq / spec.dt)
    v = model.potential_at_midpoints(sites, spec.dq)
    integrand = momenta * qdot - model.kinetic(momenta) - v
    return np.sum(integrand, axis=-1) * spec.dt


def evaluate_action_S(ppath: PPath, qpath: QPath, model: HamiltonianModel, spec: LatticeSpec) -> float:
    _check_pair(ppath, qpath, spec)
    p = ppath.momenta(spec)
    sites = np.asarray(qpath.sites, dtype=float)
    return float(_s_entries(p, sites, model, spec))


def evaluate_action_R(ppath: PPath, qpath: QPath, model: HamiltonianModel, spec: LatticeSpec) -> float:
    _check_pair(ppath, qpath, spec)
    p = ppath.momenta(spec)
    sites = np.asarray(qpath.sites, dtype=float)
    q = sites * spec.dq
    hamiltonian = model.kinetic(p) + model.potential_at_midpoints(sites, spec.dq)
    boundary_free = -np.sum(q[1:-1] * np.diff(p))
    return float(boundary_free - np.sum(hamiltonian) * spec.dt)


def matched_actions(pathset: PathSet, model: HamiltonianModel) -> np.ndarray:
    """S on each matched (p_j, q_j) pair of ``pathset``; the action-matrix diagonal."""
    spec = pathset.spec
    p = pathset.levels * spec.momentum_unit
    return _s_entries(p, pathset.sites.astype(float), model, spec)


@dataclass
class ActionMatrix:
    entries: np.ndarray
    row_paths: list[str]
    col_paths: list[str]

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def from_array(cls, array) -> "ActionMatrix":
        """Wrap a bare square array (used for game-only workflows)."""
        a = np.asarray(array, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionMismatch(f"action matrix must be square, got shape {a.shape}")
        n = a.shape[0]
        return cls(a, [f"p{j}" for j in range(n)], [f"q{k}" for k in range(n)])

    def to_dict(self) -> dict:
        return {"rows": self.row_paths, "cols": self.col_paths, "entries": self.entries.tolist()}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["path", *self.col_paths])
        for rid, row in zip(self.row_paths, self.entries):
            w.writerow([rid, *(repr(float(x)) for x in row)])
        return buf.getvalue()


def build_action_matrix(
    pathset: PathSet,
    model: HamiltonianModel,
    cap: int = DEFAULT_MATRIX_CAP,
    workers: int | None = None,
) -> ActionMatrix:
    """Dense ``S_jk = S[p_j, q_k]`` over the paths of ``pathset``.

    Rows pair the momentum path of path ``j`` with every position path.
    Each row is an independent pure computation, so the threaded fill is
    bit-identical to the serial one.
    """
    n = len(pathset)
    if n == 0:
        raise DomainError("empty path set")
    if n > cap:
        raise MatrixTooLarge(f"{n} paths exceed the matrix cap {cap}")
    spec = pathset.spec
    momenta = pathset.levels * spec.momentum_unit
    sites = pathset.sites.astype(float)

    def row(j):
        return _s_entries(momenta[j][None, :], sites, model, spec)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(row, range(n)))
    else:
        rows = [row(j) for j in range(n)]
    entries = np.vstack(rows)
    return ActionMatrix(entries, [f"p{j}" for j in range(n)], [f"q{k}" for k in range(n)])
