"""Convergence factors for real-time lattice sums.

A sampled real-time kernel ``exp(i m (y - x)^2 / (2 hbar eps))`` is a chirp
whose local frequency grows with the jump ``|y - x|``.  On a grid of spacing
``dx`` it is resolvable only for jumps below ``pi hbar eps / (m dx)``; beyond
that the lattice sum aliases and repeated composition diverges.  Likewise a
hard grid edge leaves an O(1) Fresnel boundary term.  Two C-infinity
flat-top tapers cure both:

* a jump taper, equal to one for short jumps and vanishing smoothly before
  the aliasing limit (a soft cap on the momentum levels per step);
* an edge window, equal to one in the interior and vanishing smoothly at
  the grid edges (an absorbing layer for outgoing amplitude).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError


def smooth_step(s):
    """C-infinity step: 0 for s <= 0, 1 for s >= 1."""
    s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(s > 0.0, np.exp(-1.0 / np.where(s > 0.0, s, 1.0)), 0.0)
        b = np.where(s < 1.0, np.exp(-1.0 / np.where(s < 1.0, 1.0 - s, 1.0)), 0.0)
    return a / (a + b)


def flat_top(u, flat: float):
    """1 for |u| <= flat, smooth decay to 0 at |u| = 1."""
    u = np.abs(np.asarray(u, dtype=float))
    return 1.0 - smooth_step((u - flat) / (1.0 - flat))


@dataclass(frozen=True)
class Regularization:
    jump_fraction: float = 0.8
    flat_fraction: float = 0.3
    edge_layer: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.jump_fraction <= 1.0:
            raise DomainError("jump_fraction must lie in (0, 1]")
        if not 0.0 <= self.flat_fraction < 1.0:
            raise DomainError("flat_fraction must lie in [0, 1)")
        if not 0.0 < self.edge_layer <= 1.0:
            raise DomainError("edge_layer must lie in (0, 1]")

    def max_jump(self, dt: float, dx: float, mass: float, hbar: float) -> float:
        return self.jump_fraction * np.pi * hbar * dt / (mass * dx)

    def max_level(self, dt: float, dx: float, mass: float, hbar: float) -> int:
        """Largest momentum level with non-zero weight."""
        lam = self.max_jump(dt, dx, mass, hbar)
        return max(0, int(np.ceil(lam / dx)) - 1)

    def jump_weight(self, jump, dt: float, dx: float, mass: float, hbar: float):
        return flat_top(np.asarray(jump, dtype=float) / self.max_jump(dt, dx, mass, hbar), self.flat_fraction)

    def edge_weights(self, points) -> np.ndarray:
        x = np.asarray(points, dtype=float)
        lo, hi = x.min(), x.max()
        layer = self.edge_layer * 0.5 * (hi - lo)
        dist = np.minimum(x - lo, hi - x)
        return smooth_step(dist / layer)

    def to_dict(self) -> dict:
        return asdict(self)
