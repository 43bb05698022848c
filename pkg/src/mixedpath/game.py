"""Mixed-path vectors, the generalized action and its extremization.

Two normalizations are supported:

* ``SUM``:  (sum alpha)^2 + (sum beta)^2 = 1
* ``NORM``: |alpha|^2 + |beta|^2 = 1, which survives orthogonal rotation.

Three solvers produce pairs: the equal-component closed form, constrained
first-order stationarity, and the classical zero-sum LP for comparison.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .action import ActionMatrix
from .errors import DimensionMismatch, DomainError, NoConvergence, NumericalError

NORMALIZATION_TOL = 1e-10


class NormMode(enum.Enum):
    SUM = "sum"
    NORM = "norm"


class Provenance(enum.Enum):
    EQUAL_COMPONENT = "equal_component"
    STATIONARY = "stationary"
    MINIMAX_LP = "minimax_lp"
    MANUAL = "manual"


@dataclass
class MixedPathPair:
    alpha: np.ndarray
    beta: np.ndarray
    norm_mode: NormMode = NormMode.SUM
    provenance: Provenance = Provenance.MANUAL

    def __post_init__(self):
        self.alpha = np.atleast_1d(np.asarray(self.alpha, dtype=float))
        self.beta = np.atleast_1d(np.asarray(self.beta, dtype=float))
        if self.alpha.shape != self.beta.shape or self.alpha.ndim != 1:
            raise DimensionMismatch(f"alpha {self.alpha.shape} and beta {self.beta.shape} differ")

    @property
    def n(self) -> int:
        return self.alpha.size

    def constraint_value(self) -> float:
        if self.norm_mode is NormMode.SUM:
            return float(self.alpha.sum() ** 2 + self.beta.sum() ** 2)
        return float(self.alpha @ self.alpha + self.beta @ self.beta)

    def is_normalized(self, tol: float = NORMALIZATION_TOL) -> bool:
        return abs(self.constraint_value() - 1.0) <= tol

    def within_bounds(self) -> bool:
        """Post-hoc check of the component bounds -1 <= alpha_j, beta_k <= 1."""
        return bool(np.all(np.abs(self.alpha) <= 1.0) and np.all(np.abs(self.beta) <= 1.0))

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha.tolist(),
            "beta": self.beta.tolist(),
            "norm_mode": self.norm_mode.value,
            "provenance": self.provenance.value,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MixedPathPair":
        return cls(
            np.asarray(data["alpha"], dtype=float),
            np.asarray(data["beta"], dtype=float),
            NormMode(data["norm_mode"]),
            Provenance(data.get("provenance", "manual")),
        )


def _entries(matrix) -> np.ndarray:
    if isinstance(matrix, ActionMatrix):
        return matrix.entries
    return np.asarray(matrix, dtype=float)


def _check_dims(pair: MixedPathPair, s: np.ndarray):
    if s.shape != (pair.n, pair.n):
        raise DimensionMismatch(f"pair of length {pair.n} against matrix {s.shape}")


def generalized_action(pair: MixedPathPair, matrix) -> float:
    """The bilinear form ``alpha^T S beta``."""
    s = _entries(matrix)
    _check_dims(pair, s)
    return float(pair.alpha @ s @ pair.beta)


def total_probability(pair: MixedPathPair) -> float:
    """``(sum alpha)^2 + (sum beta)^2``; for one path this is alpha^2 + beta^2."""
    return float(pair.alpha.sum() ** 2 + pair.beta.sum() ** 2)


def solve_equal_component(matrix, norm_mode: NormMode = NormMode.SUM) -> MixedPathPair:
    """Closed-form pair with all alpha equal and all beta equal.

    ``a * b * sum(S)`` is extremized on the constraint, which forces
    ``|a| = |b|``.  Sign convention: ``a >= 0`` and ``b`` carries the sign of
    ``sum(S)`` (non-negative on ties).
    """
    s = _entries(matrix)
    n = s.shape[0]
    if n < 1 or s.shape != (n, n):
        raise DimensionMismatch(f"expected a non-empty square matrix, got {s.shape}")
    if norm_mode is NormMode.SUM:
        a = 1.0 / (n * np.sqrt(2.0))
    else:
        a = 1.0 / np.sqrt(2.0 * n)
    b = -a if s.sum() < 0 else a
    return MixedPathPair(np.full(n, a), np.full(n, b), norm_mode, Provenance.EQUAL_COMPONENT)


def _constraint_normal(alpha, beta, norm_mode):
    if norm_mode is NormMode.SUM:
        return np.concatenate([np.full(alpha.size, alpha.sum()), np.full(beta.size, beta.sum())])
    return np.concatenate([alpha, beta])


def _projected_gradient(s, alpha, beta, norm_mode):
    g = np.concatenate([s @ beta, s.T @ alpha])
    normal = _constraint_normal(alpha, beta, norm_mode)
    nn = normal @ normal
    if nn > 0:
        g = g - (g @ normal / nn) * normal
    return g


def stationarity_residual(matrix, pair: MixedPathPair) -> float:
    """Size of the constrained gradient of ``alpha^T S beta`` at ``pair``.

    The pair is first scaled onto the constraint surface.  The gradient
    ``(S beta, S^T alpha)`` is projected onto the tangent space and the
    larger of the two blocks' Euclidean norms is returned, so the value is
    zero exactly at first-order stationary points.
    """
    s = _entries(matrix)
    _check_dims(pair, s)
    alpha, beta = pair.alpha, pair.beta
    c = pair.constraint_value()
    if c > 0:
        alpha, beta = alpha / np.sqrt(c), beta / np.sqrt(c)
    g = _projected_gradient(s, alpha, beta, pair.norm_mode)
    n = pair.n
    return float(max(np.linalg.norm(g[:n]), np.linalg.norm(g[n:])))


@dataclass(frozen=True)
class Inertia:
    positive: int
    negative: int
    zero: int

    @property
    def kind(self) -> str:
        if self.negative == 0 and self.zero == 0:
            return "minimum"
        if self.positive == 0 and self.zero == 0:
            return "maximum"
        if self.zero:
            return "degenerate"
        return "saddle"


def extremum_inertia(matrix, pair: MixedPathPair, tol: float = 1e-9) -> Inertia:
    """Inertia of the Lagrangian Hessian restricted to the constraint tangent space."""
    s = _entries(matrix)
    _check_dims(pair, s)
    n = pair.n
    x = np.concatenate([pair.alpha, pair.beta])
    hess_f = np.block([[np.zeros((n, n)), s], [s.T, np.zeros((n, n))]])
    grad_f = hess_f @ x
    grad_c = 2.0 * _constraint_normal(pair.alpha, pair.beta, pair.norm_mode)
    if pair.norm_mode is NormMode.SUM:
        ones = np.ones((n, n))
        hess_c = 2.0 * np.block([[ones, np.zeros((n, n))], [np.zeros((n, n)), ones]])
    else:
        hess_c = 2.0 * np.eye(2 * n)
    gc2 = grad_c @ grad_c
    lam = (grad_f @ grad_c) / gc2 if gc2 > 0 else 0.0
    hess_l = hess_f - lam * hess_c
    if gc2 > 0:
        # orthonormal basis of the tangent space
        _, _, vt = np.linalg.svd(grad_c[None, :])
        z = vt[1:].T
    else:
        z = np.eye(2 * n)
    eig = np.linalg.eigvalsh(z.T @ hess_l @ z)
    scale = max(1.0, np.abs(eig).max(initial=0.0))
    return Inertia(
        positive=int(np.sum(eig > tol * scale)),
        negative=int(np.sum(eig < -tol * scale)),
        zero=int(np.sum(np.abs(eig) <= tol * scale)),
    )


@dataclass
class StationaryResult:
    pair: MixedPathPair
    residual: float
    iterations: int
    converged: bool
    degenerate: bool
    inertia: Inertia | None = None

    def to_dict(self) -> dict:
        out = {
            "pair": self.pair.to_dict(),
            "residual": self.residual,
            "iterations": self.iterations,
            "converged": self.converged,
            "degenerate": self.degenerate,
        }
        if self.inertia is not None:
            out["inertia"] = {
                "positive": self.inertia.positive,
                "negative": self.inertia.negative,
                "zero": self.inertia.zero,
                "kind": self.inertia.kind,
            }
        return out


def _normalize_norm(alpha, beta):
    total = np.sqrt(alpha @ alpha + beta @ beta)
    return alpha / total, beta / total


def _top_singular_gap(s) -> bool:
    sv = np.linalg.svd(s, compute_uv=False)
    if sv.size < 2 or sv[0] == 0:
        return sv.size >= 2
    return (sv[0] - sv[1]) <= 1e-9 * sv[0]


def _stationary_norm(s, init, tol, max_iter):
    alpha, beta = init.alpha.copy(), init.beta.copy()
    if not np.any(s @ beta) and not np.any(s.T @ alpha):
        # init annihilated by S; restart from a fixed pseudo-random direction
        rng = np.random.default_rng(0)
        alpha = rng.standard_normal(s.shape[0])
        beta = rng.standard_normal(s.shape[0])
    alpha, beta = _normalize_norm(alpha, beta)
    probe = MixedPathPair(alpha, beta, NormMode.NORM, Provenance.STATIONARY)
    best = (stationarity_residual(s, probe), probe)
    if best[0] <= tol:
        return best[1], best[0], 0, True
    half = 1.0 / np.sqrt(2.0)
    for it in range(1, max_iter + 1):
        v = s.T @ alpha
        nv = np.linalg.norm(v)
        if nv == 0:
            break
        beta = v / nv
        u = s @ beta
        nu = np.linalg.norm(u)
        if nu == 0:
            break
        alpha = u / nu
        cand = MixedPathPair(alpha * half, beta * half, NormMode.NORM, Provenance.STATIONARY)
        r = stationarity_residual(s, cand)
        if r < best[0]:
            best = (r, cand)
        if r <= tol:
            return cand, r, it, True
    return best[1], best[0], max_iter, False


def _stationary_sum(s, init):
    n = s.shape[0]
    ones = np.ones(n)
    try:
        w = np.linalg.solve(s, ones)
        z = np.linalg.solve(s.T, ones)
    except np.linalg.LinAlgError:
        return None
    sigma = ones @ w
    if not np.isfinite(sigma) or abs(sigma) < 1e-14 * max(1.0, np.abs(s).max()):
        return None
    scale = 1.0 / (np.sqrt(2.0) * abs(sigma))
    alpha = z * scale
    candidates = [(alpha, w * scale), (alpha, -w * scale)]
    x0 = np.concatenate([init.alpha, init.beta])

    def key(c):
        return (float(np.concatenate(c) @ x0), float(c[0] @ s @ c[1]))

    a, b = max(candidates, key=key)
    return MixedPathPair(a, b, NormMode.SUM, Provenance.STATIONARY)


def solve_stationary(
    matrix,
    init: MixedPathPair | None = None,
    tol: float = 1e-10,
    max_iter: int = 100_000,
    norm_mode: NormMode | None = None,
) -> StationaryResult:
    """Constrained stationary pair of ``alpha^T S beta``.

    Under ``NORM`` the first-order conditions are ``S beta = lam alpha`` and
    ``S^T alpha = lam beta`` (a singular pair); alternating power sweeps
    converge to the dominant one reachable from ``init``.  Under ``SUM`` the
    conditions say ``S beta`` and ``S^T alpha`` are constant vectors, which is
    solved directly: ``beta ~ S^-1 1``, ``alpha ~ S^-T 1``.

    Raises ``NoConvergence`` (carrying the best iterate) if the residual stays
    above ``tol``.
    """
    if tol <= 0:
        raise DomainError("tol must be > 0")
    s = _entries(matrix)
    n = s.shape[0]
    if s.shape != (n, n) or n < 1:
        raise DimensionMismatch(f"expected a non-empty square matrix, got {s.shape}")
    mode = norm_mode or (init.norm_mode if init is not None else NormMode.SUM)
    if init is None:
        init = solve_equal_component(s, mode)
    elif init.n != n:
        raise DimensionMismatch(f"init of length {init.n} against matrix {s.shape}")

    degenerate = _top_singular_gap(s)
    if mode is NormMode.NORM:
        pair, residual, iters, ok = _stationary_norm(s, init, tol, max_iter)
    else:
        pair = _stationary_sum(s, init)
        if pair is None:
            # singular S: the starting pair may already be stationary (e.g. all entries equal)
            fallback = MixedPathPair(init.alpha, init.beta, NormMode.SUM, Provenance.STATIONARY)
            r0 = stationarity_residual(s, fallback)
            if r0 > tol:
                result = StationaryResult(fallback, r0, 0, False, True)
                raise NoConvergence("SUM-form conditions are singular for this matrix", result)
            pair, degenerate = fallback, True
        residual, iters = stationarity_residual(s, pair), 1
        ok = residual <= tol
    result = StationaryResult(pair, residual, iters, ok, degenerate, extremum_inertia(s, pair))
    if not ok:
        raise NoConvergence(f"residual {residual:.3e} above tol {tol:.1e} after {iters} iterations", result)
    return result


@dataclass
class MinimaxResult:
    row_strategy: np.ndarray
    col_strategy: np.ndarray
    value: float

    def to_dict(self) -> dict:
        return {
            "row_strategy": self.row_strategy.tolist(),
            "col_strategy": self.col_strategy.tolist(),
            "value": self.value,
        }


def _lp_strategy(payoff: np.ndarray) -> np.ndarray:
    """Maximizing row strategy of a game with non-negative payoff."""
    m, n = payoff.shape
    # variables (x_1..x_m, v); maximize v s.t. payoff^T x >= v, sum x = 1
    c = np.zeros(m + 1)
    c[-1] = -1.0
    a_ub = np.hstack([-payoff.T, np.ones((n, 1))])
    a_eq = np.concatenate([np.ones(m), [0.0]])[None, :]
    res = linprog(
        c,
        A_ub=a_ub,
        b_ub=np.zeros(n),
        A_eq=a_eq,
        b_eq=[1.0],
        bounds=[(0, None)] * m + [(None, None)],
        method="highs",
    )
    if not res.success:
        raise NumericalError(f"LP solver failed: {res.message}")
    x = np.clip(res.x[:m], 0.0, None)
    return x / x.sum()


def solve_minimax(matrix) -> MinimaxResult:
    """Optimal mixed strategies of the zero-sum game with payoff ``S``.

    The row player (rows index momentum paths) maximizes, the column player
    minimizes.  The matrix is shifted so its minimum is zero before the LP, so
    adding a constant to every entry leaves the strategies unchanged.
    """
    s = _entries(matrix)
    if s.ndim != 2 or s.size == 0:
        raise DimensionMismatch(f"expected a non-empty matrix, got {s.shape}")
    shift = s.min()
    shifted = s - shift
    x = _lp_strategy(shifted)
    y = _lp_strategy(-shifted.T + shifted.max())
    lower = float((x @ shifted).min())
    upper = float((shifted @ y).max())
    value = 0.5 * (lower + upper) + shift
    return MinimaxResult(x, y, float(value))


def minimax_pair(result: MinimaxResult) -> MixedPathPair:
    """Scale LP strategies by 1/sqrt(2) so they satisfy the SUM normalization."""
    half = 1.0 / np.sqrt(2.0)
    return MixedPathPair(result.row_strategy * half, result.col_strategy * half, NormMode.SUM, Provenance.MINIMAX_LP)
