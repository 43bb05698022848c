"""Exact Grassmann (anticommuting) algebra on at most 16 generators.

Elements map ascending generator-index tuples to real coefficients; the
empty tuple is the scalar part.  Products concatenate index sequences,
vanish on a repeated index and pick up the sign of the sorting
permutation, counted as inversions.
"""

from __future__ import annotations

import enum
from bisect import bisect_right
from itertools import combinations

import numpy as np

from .errors import DomainError, GeneratorMismatch, IndexOutOfRange

MAX_GENERATORS = 16


class Parity(enum.Enum):
    EVEN = "even"
    ODD = "odd"
    MIXED = "mixed"


class GrassmannElement:
    __slots__ = ("num_generators", "terms")

    def __init__(self, num_generators: int, terms: dict | None = None):
        if not 0 <= num_generators <= MAX_GENERATORS:
            raise DomainError(f"num_generators must be in 0..{MAX_GENERATORS}")
        self.num_generators = num_generators
        clean = {}
        for key, coeff in (terms or {}).items():
            key = tuple(key)
            if any(b <= a for a, b in zip(key, key[1:])):
                raise DomainError(f"monomial {key} is not strictly ascending")
            if key and (key[0] < 1 or key[-1] > num_generators):
                raise IndexOutOfRange(f"monomial {key} outside 1..{num_generators}")
            if coeff != 0:
                clean[key] = float(coeff)
        self.terms = clean

    def _same_algebra(self, other):
        if not isinstance(other, GrassmannElement):
            return NotImplemented
        if other.num_generators != self.num_generators:
            raise GeneratorMismatch(f"{self.num_generators} vs {other.num_generators} generators")
        return other

    def __add__(self, other):
        return g_add(self, other)

    def __sub__(self, other):
        return g_add(self, g_scale(-1.0, other))

    def __neg__(self):
        return g_scale(-1.0, self)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return g_scale(other, self)
        return g_mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return g_scale(other, self)
        return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, GrassmannElement):
            return NotImplemented
        return self.num_generators == other.num_generators and self.terms == other.terms

    def __hash__(self):
        return hash((self.num_generators, frozenset(self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    def __repr__(self):
        return f"GrassmannElement({self.num_generators}, {self.terms!r})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for key in sorted(self.terms, key=lambda k: (len(k), k)):
            c = self.terms[key]
            mono = "".join(f"η{i}" for i in key)
            parts.append(f"{c:g}·{mono}" if mono else f"{c:g}")
        return " + ".join(parts)

    def to_json(self) -> list[dict]:
        return [
            {"indices": list(key), "coefficient": self.terms[key]}
            for key in sorted(self.terms, key=lambda k: (len(k), k))
        ]

    @classmethod
    def from_json(cls, num_generators: int, data: list[dict]) -> "GrassmannElement":
        return cls(num_generators, {tuple(d["indices"]): d["coefficient"] for d in data})


def g_zero(n: int) -> GrassmannElement:
    return GrassmannElement(n)


def g_scalar(c: float, n: int) -> GrassmannElement:
    return GrassmannElement(n, {(): c})


def g_generator(i: int, n: int) -> GrassmannElement:
    if not 1 <= i <= n:
        raise IndexOutOfRange(f"generator {i} outside 1..{n}")
    return GrassmannElement(n, {(i,): 1.0})


def _monomial_product(a: tuple, b: tuple):
    """Sorted union and sign of ``eta_a * eta_b``; None when they share an index."""
    if set(a) & set(b):
        return None
    inversions = sum(len(a) - bisect_right(a, y) for y in b)
    return tuple(sorted(a + b)), (-1.0 if inversions % 2 else 1.0)


def g_mul(a: GrassmannElement, b: GrassmannElement) -> GrassmannElement:
    a._same_algebra(b)
    out: dict = {}
    for ka, ca in a.terms.items():
        for kb, cb in b.terms.items():
            prod = _monomial_product(ka, kb)
            if prod is None:
                continue
            key, sign = prod
            out[key] = out.get(key, 0.0) + sign * ca * cb
    return GrassmannElement(a.num_generators, out)


def g_add(a: GrassmannElement, b: GrassmannElement) -> GrassmannElement:
    a._same_algebra(b)
    out = dict(a.terms)
    for key, c in b.terms.items():
        out[key] = out.get(key, 0.0) + c
    return GrassmannElement(a.num_generators, out)


def g_scale(c: float, a: GrassmannElement) -> GrassmannElement:
    return GrassmannElement(a.num_generators, {k: c * v for k, v in a.terms.items()})


def g_parity(a: GrassmannElement) -> Parity:
    sizes = {len(k) % 2 for k in a.terms}
    if sizes == {1}:
        return Parity.ODD
    if sizes <= {0}:
        return Parity.EVEN
    return Parity.MIXED


def odd_monomials(n: int):
    """Every monomial of odd degree over ``n`` generators, coefficient 1."""
    for size in range(1, n + 1, 2):
        for key in combinations(range(1, n + 1), size):
            yield GrassmannElement(n, {key: 1.0})


def odd_element(coefficients, first: int, n: int) -> GrassmannElement:
    """``sum_j c_j eta_{first + j}``: an odd element on consecutive generators."""
    return GrassmannElement(n, {(first + j,): c for j, c in enumerate(coefficients)})


def grassmann_generalized_action(alpha, matrix, beta) -> GrassmannElement:
    """Grassmann-valued ``sum_jk alpha_j S_jk beta_k`` with anticommuting weights.

    ``alpha_j`` rides on generator ``j`` and ``beta_k`` on generator ``n + k``,
    so at most 8 paths fit in the 16-generator cap.
    """
    s = np.asarray(getattr(matrix, "entries", matrix), dtype=float)
    n = s.shape[0]
    if 2 * n > MAX_GENERATORS:
        raise DomainError(f"{n} paths need {2 * n} generators (cap {MAX_GENERATORS})")
    a = odd_element(alpha, 1, 2 * n)
    b = odd_element(beta, n + 1, 2 * n)
    total = g_zero(2 * n)
    for j in range(n):
        aj = GrassmannElement(2 * n, {(j + 1,): a.terms.get((j + 1,), 0.0)})
        row = GrassmannElement(2 * n, {(n + k + 1,): s[j, k] * b.terms.get((n + k + 1,), 0.0) for k in range(n)})
        total = total + aj * row
    return total


def check_identities(max_generators: int = 4) -> dict:
    """Exhaustive anticommutation and nilpotency checks over odd monomial pairs."""
    checked = 0
    failures = []
    for n in range(1, max_generators + 1):
        monos = list(odd_monomials(n))
        for x in monos:
            if not (x * x).is_zero():
                failures.append({"n": n, "identity": "a*a=0", "a": str(x)})
            for y in monos:
                checked += 1
                if not (x * y + y * x).is_zero():
                    failures.append({"n": n, "identity": "ab+ba=0", "a": str(x), "b": str(y)})
    return {"max_generators": max_generators, "pairs_checked": checked, "failures": failures}
