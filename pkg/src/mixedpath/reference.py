"""Independent propagator oracles: closed forms and a time-sliced grid sum.

The square-root branch is fixed everywhere to ``sqrt(1/i) = exp(-i pi/4)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .action import HamiltonianModel, ModelKind
from .errors import Caustic, DomainError, GridTooCoarse
from .windows import Regularization

_SQRT_INV_I = np.exp(-0.25j * np.pi)
CAUSTIC_TOL = 1e-9


@dataclass(frozen=True)
class GridSpec:
    x_min: float
    x_max: float
    num_points: int

    def __post_init__(self):
        if self.num_points < 3:
            raise DomainError("a grid needs at least 3 points")
        if not self.x_min < self.x_max:
            raise DomainError("x_min must be below x_max")

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / (self.num_points - 1)

    @property
    def points(self) -> np.ndarray:
        return self.x_min + self.spacing * np.arange(self.num_points)

    @classmethod
    def symmetric(cls, half_width: float, spacing: float) -> "GridSpec":
        """Origin-centred grid with the given spacing reaching at least +-``half_width``."""
        half = int(np.ceil(half_width / spacing - 1e-9))
        return cls(-half * spacing, half * spacing, 2 * half + 1)

    def index_of(self, x: float) -> int:
        i = int(round((x - self.x_min) / self.spacing))
        if i < 0 or i >= self.num_points or abs(self.x_min + i * self.spacing - x) > 1e-9 * max(1.0, abs(x)):
            raise DomainError(f"point {x} is not on the grid")
        return i

    def to_dict(self) -> dict:
        return {"x_min": self.x_min, "x_max": self.x_max, "num_points": self.num_points}


def _positive(**values):
    for name, v in values.items():
        if not (np.isfinite(v) and v > 0):
            raise DomainError(f"{name} must be > 0, got {v}")


def free_particle_propagator(m, T, x_a, x_b, hbar=1.0) -> complex:
    _positive(m=m, T=T, hbar=hbar)
    pref = np.sqrt(m / (2.0 * np.pi * hbar * T)) * _SQRT_INV_I
    return complex(pref * np.exp(1j * m * (x_b - x_a) ** 2 / (2.0 * hbar * T)))


def harmonic_propagator(m, omega, T, x_a, x_b, hbar=1.0) -> complex:
    _positive(m=m, omega=omega, T=T, hbar=hbar)
    s = np.sin(omega * T)
    if abs(s) < CAUSTIC_TOL:
        raise Caustic(f"sin(omega T) = {s:.2e}: caustic at omega T = {omega * T}")
    c = np.cos(omega * T)
    ratio = m * omega / (2.0 * np.pi * hbar * s)
    # sqrt of a possibly negative real times 1/i; keep the principal branch of 1/i
    pref = np.sqrt(complex(ratio)) * _SQRT_INV_I
    phase = m * omega / (2.0 * hbar * s) * ((x_a**2 + x_b**2) * c - 2.0 * x_a * x_b)
    return complex(pref * np.exp(1j * phase))


def _potential(model: HamiltonianModel, x: np.ndarray) -> np.ndarray:
    if model.kind is ModelKind.FREE:
        return np.zeros_like(x)
    if model.kind is ModelKind.HARMONIC:
        return 0.5 * model.mass * model.omega**2 * x**2
    raise DomainError("time_sliced_propagator supports the free and harmonic models")


def slice_kernel(model: HamiltonianModel, grid: GridSpec, eps: float, reg: Regularization | None) -> np.ndarray:
    """One-slice kernel ``k(x, y)`` on the grid (values are densities, no measure)."""
    x = grid.points
    xx, yy = np.meshgrid(x, x, indexing="ij")
    m, hb = model.mass, model.hbar
    phase = (m * (yy - xx) ** 2 / (2.0 * eps) - eps * _potential(model, 0.5 * (xx + yy))) / hb
    k = np.sqrt(m / (2.0 * np.pi * hb * eps)) * _SQRT_INV_I * np.exp(1j * phase)
    if reg is not None:
        k = k * reg.jump_weight(np.abs(yy - xx), eps, grid.spacing, m, hb)
    return k


def time_sliced_propagator(
    model: HamiltonianModel,
    grid: GridSpec,
    slices: int,
    T: float,
    x_a: float,
    x_b: float,
    reg: Regularization | None = Regularization(),
) -> complex:
    """Grid transfer-matrix approximation of ``K(x_a, 0; x_b, T)``.

    ``reg=None`` gives the bare hard-truncated sum; the default applies the
    jump taper and the edge window from :mod:`mixedpath.windows`, without
    which the real-time sum does not converge on practical grids.
    """
    if slices < 1:
        raise DomainError("slices must be >= 1")
    _positive(T=T)
    eps = T / slices
    dx = grid.spacing
    if dx**2 * model.mass / (model.hbar * eps) > 1.0:
        warnings.warn(
            f"spacing {dx:g} under-resolves the slice phase (dx^2 m / (hbar eps) = "
            f"{dx**2 * model.mass / (model.hbar * eps):.3g} > 1)",
            GridTooCoarse,
            stacklevel=2,
        )
    return complex(time_sliced_row(model, grid, slices, T, x_a, reg)[grid.index_of(x_b)])


def _edge(grid: GridSpec, reg: Regularization | None) -> np.ndarray:
    return np.ones(grid.num_points) if reg is None else reg.edge_weights(grid.points)


def time_sliced_row(model, grid, slices, T, x_a, reg=Regularization()) -> np.ndarray:
    """``K(x_a, 0; x, T)`` for every grid point ``x``."""
    eps = T / slices
    k = slice_kernel(model, grid, eps, reg)
    edge = _edge(grid, reg)
    row = k[grid.index_of(x_a)].copy()
    for _ in range(slices - 1):
        row = ((row * edge) @ k) * grid.spacing
    return row


def time_sliced_matrix(model, grid, slices, T, reg=Regularization()) -> np.ndarray:
    """Full kernel matrix ``K(x, 0; y, T)`` over the grid."""
    eps = T / slices
    k = slice_kernel(model, grid, eps, reg)
    edge = _edge(grid, reg)
    out = k.copy()
    for _ in range(slices - 1):
        out = ((out * edge[None, :]) @ k) * grid.spacing
    return out
