"""Complex per-path amplitudes and propagators.

The optimal pair ``(alpha, beta)`` is rotated into a basis where
``alpha_j^2 + beta_j^2`` is the same for every component, after which
``phi_j = alpha_j + i beta_j = |a| exp(i theta_j)``.  Alternatively the
phases are assigned from the classical actions, ``theta_j = S_j / hbar``.
Propagators are sums of amplitudes and compose by kernel multiplication
over intermediate grid points.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field

import numpy as np

from .action import HamiltonianModel
from .errors import DomainError, GridMismatch, NoConvergence, NormModeError
from .game import MixedPathPair, NormMode

TWO_PI = 2.0 * np.pi
BALANCE_TOL = 1e-10


@dataclass
class BalancedPair:
    rotation: np.ndarray
    alpha_rot: np.ndarray
    beta_rot: np.ndarray
    magnitude: float
    spread: float
    rotations: int

    @property
    def orthogonality_defect(self) -> float:
        q = self.rotation
        return float(np.abs(q.T @ q - np.eye(q.shape[0])).max())


def _plane_angle(di, dj, m, target_i):
    """Angle of the (i, j) plane rotation that moves the i-th diagonal to ``target_i``.

    Under ``x_i' = c x_i + s x_j`` the new diagonal entry is
    ``mean + A cos(2t) + m sin(2t)`` with ``A = (di - dj) / 2``.
    """
    a = 0.5 * (di - dj)
    b = target_i - 0.5 * (di + dj)
    r = np.hypot(a, m)
    if r == 0.0:
        return 0.0
    phi = np.arctan2(m, a)
    acos = np.arccos(np.clip(b / r, -1.0, 1.0))
    best = None
    for two_t in (phi + acos, phi - acos):
        two_t = (two_t + np.pi) % TWO_PI - np.pi
        if best is None or abs(two_t) < abs(best) - 1e-15:
            best = two_t
    return 0.5 * best


def balance_rotation(pair: MixedPathPair, tol: float = BALANCE_TOL) -> BalancedPair:
    """Orthogonal ``Q`` making ``(Q alpha)_j^2 + (Q beta)_j^2`` constant in ``j``.

    Equivalent to equalizing the diagonal of ``M = alpha alpha^T + beta beta^T``.
    Each plane rotation pairs the largest and smallest diagonal entries and
    sets the one closer to the mean exactly to the mean; the other keeps its
    side, so at most ``n - 1`` rotations are needed.
    """
    if pair.norm_mode is not NormMode.NORM:
        raise NormModeError("balance_rotation needs a NORM-form pair (the SUM form is not rotation invariant)")
    n = pair.n
    alpha = pair.alpha.astype(float).copy()
    beta = pair.beta.astype(float).copy()
    q = np.eye(n)
    target = (alpha @ alpha + beta @ beta) / n
    limit = 100 * n
    count = 0
    while True:
        d = alpha**2 + beta**2
        dev = d - target
        i, j = int(np.argmax(dev)), int(np.argmin(dev))
        spread = float(dev[i] - dev[j])
        if spread <= tol:
            break
        if count >= limit:
            raise NoConvergence(f"diagonal spread {spread:.3e} after {count} rotations")
        m = alpha[i] * alpha[j] + beta[i] * beta[j]
        if dev[i] <= -dev[j]:
            theta = _plane_angle(d[i], d[j], m, target)
        else:
            # fixing j: the new j-th entry is d_i + d_j minus the new i-th one
            theta = _plane_angle(d[i], d[j], m, d[i] + d[j] - target)
        c, s = np.cos(theta), np.sin(theta)
        for v in (alpha, beta):
            vi, vj = v[i], v[j]
            v[i] = c * vi + s * vj
            v[j] = -s * vi + c * vj
        qi, qj = q[i].copy(), q[j].copy()
        q[i] = c * qi + s * qj
        q[j] = -s * qi + c * qj
        count += 1
    return BalancedPair(q, alpha, beta, float(np.sqrt(target)), spread, count)


class AmplitudeMode(enum.Enum):
    FROM_ROTATION = "rotation"
    PAPER_PHASES = "phases"


@dataclass
class AmplitudeSet:
    phis: np.ndarray
    scale: float
    phases: np.ndarray
    mode: AmplitudeMode

    def __len__(self) -> int:
        return self.phis.size

    def to_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "scale": self.scale,
            "amplitudes": [
                {"index": j, "re": float(p.real), "im": float(p.imag), "phase": float(t)}
                for j, (p, t) in enumerate(zip(self.phis, self.phases))
            ],
        }

    def to_csv(self) -> str:
        return _complex_table(["index"], [[j] for j in range(len(self))], self.phis)


def _wrap(theta):
    return np.mod(theta, TWO_PI)


def build_amplitudes(balanced: BalancedPair) -> AmplitudeSet:
    phis = balanced.alpha_rot + 1j * balanced.beta_rot
    phases = _wrap(np.arctan2(balanced.beta_rot, balanced.alpha_rot))
    return AmplitudeSet(phis, balanced.magnitude, phases, AmplitudeMode.FROM_ROTATION)


def assign_paper_phases(diagonal_actions, model: HamiltonianModel, scale: float) -> AmplitudeSet:
    """``phi_j = scale * exp(2 pi i S_j / h)`` from the matched-pair actions."""
    if not scale > 0:
        raise DomainError(f"scale must be > 0, got {scale}")
    actions = np.atleast_1d(np.asarray(diagonal_actions, dtype=float))
    phases = _wrap(TWO_PI * actions / model.h)
    return AmplitudeSet(scale * np.exp(1j * phases), float(scale), phases, AmplitudeMode.PAPER_PHASES)


@dataclass
class Propagator:
    value: complex
    endpoints: tuple
    conjugate: complex | None = None

    @property
    def probability(self) -> float:
        return probability(self)

    def to_dict(self) -> dict:
        out = {
            "endpoints": list(self.endpoints),
            "re": self.value.real,
            "im": self.value.imag,
            "modulus": abs(self.value),
            "phase": float(_wrap(np.angle(self.value))),
            "probability": self.probability,
        }
        if self.conjugate is not None:
            out["conjugate"] = {"re": self.conjugate.real, "im": self.conjugate.imag}
        return out


def sum_propagator(amps: AmplitudeSet, endpoints=(), prefactor: complex = 1.0, backward: AmplitudeSet | None = None) -> Propagator:
    """``K = prefactor * sum_j phi_j``.

    When the backward class is supplied its sum supplies ``K*``; otherwise
    ``K*`` is the complex conjugate of ``K``.
    """
    if len(amps) == 0:
        raise DomainError("cannot sum an empty amplitude set")
    k = complex(prefactor * amps.phis.sum())
    conj = None
    if backward is not None:
        conj = complex(np.conj(prefactor * backward.phis.sum()))
    return Propagator(k, tuple(endpoints), conj)


def probability(k) -> float:
    """``K K*``."""
    if isinstance(k, Propagator):
        conj = np.conj(k.value) if k.conjugate is None else k.conjugate
        return float((k.value * conj).real)
    return float(abs(complex(k)) ** 2)


@dataclass
class PropagatorGrid:
    """Kernel values ``K(x_a, t_a; x_b, t_b)`` on two point sets."""

    values: np.ndarray
    points_a: np.ndarray
    points_b: np.ndarray
    t_a: float = 0.0
    t_b: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        self.points_a = np.atleast_1d(np.asarray(self.points_a, dtype=float))
        self.points_b = np.atleast_1d(np.asarray(self.points_b, dtype=float))
        if self.values.shape != (self.points_a.size, self.points_b.size):
            raise GridMismatch(f"values {self.values.shape} vs points {self.points_a.size}x{self.points_b.size}")

    def at(self, x_a: float, x_b: float) -> complex:
        i = int(np.argmin(np.abs(self.points_a - x_a)))
        j = int(np.argmin(np.abs(self.points_b - x_b)))
        return complex(self.values[i, j])

    def to_dict(self) -> dict:
        return {
            "t_a": self.t_a,
            "t_b": self.t_b,
            "points_a": self.points_a.tolist(),
            "points_b": self.points_b.tolist(),
            "re": self.values.real.tolist(),
            "im": self.values.imag.tolist(),
        }

    def to_csv(self) -> str:
        xa, xb = np.meshgrid(self.points_a, self.points_b, indexing="ij")
        keys = [[float(a), float(b)] for a, b in zip(xa.ravel(), xb.ravel())]
        return _complex_table(["x_a", "x_b"], keys, self.values.ravel())


def compose_propagators(k_ab: PropagatorGrid, k_bc: PropagatorGrid, measure: float, weights=None) -> PropagatorGrid:
    """``K_ac(a, c) = sum_b K_ab(a, b) w_b K_bc(b, c) * measure``.

    ``weights`` (default all ones) multiplies each intermediate point; a
    smooth window that vanishes at the grid edges acts as a convergence
    factor for the oscillatory sum.
    """
    if not measure > 0:
        raise DomainError(f"measure must be > 0, got {measure}")
    if k_ab.points_b.size != k_bc.points_a.size or not np.allclose(
        k_ab.points_b, k_bc.points_a, rtol=0.0, atol=1e-9 * max(1.0, measure)
    ):
        raise GridMismatch("inner grids of the two kernels differ")
    if not np.isclose(k_ab.t_b, k_bc.t_a):
        raise GridMismatch(f"intermediate times differ: {k_ab.t_b} vs {k_bc.t_a}")
    left = k_ab.values
    if weights is not None:
        w = np.asarray(weights, dtype=float)
        if w.shape != k_ab.points_b.shape:
            raise GridMismatch("weights do not match the intermediate grid")
        left = left * w[None, :]
    values = (left @ k_bc.values) * measure
    return PropagatorGrid(values, k_ab.points_a, k_bc.points_b, k_ab.t_a, k_bc.t_b)


def _complex_table(key_names, keys, values) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([*key_names, "re", "im", "modulus", "phase"])
    for key, z in zip(keys, np.asarray(values, dtype=complex)):
        w.writerow([*key, repr(float(z.real)), repr(float(z.imag)), repr(float(abs(z))), repr(float(_wrap(np.angle(z))))])
    return buf.getvalue()
