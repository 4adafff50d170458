"""Dirichlet characters modulo a small prime, held exactly.

A character chi_j sends n to exp(2*pi*i * j*ind(n) / (p-1)), where ind is the
discrete logarithm to the least primitive root. Values are carried as the
integer exponent j*ind(n) mod (p-1); only final accumulations go through
complex floating point. These tables are desk-scale oracles for the analytic
bounds, so moduli are capped at 10^5.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from . import ntcore
from .ntcore import FactorMap

TABLE_CAP = 10**5
INDICATOR_TOL = 1e-6


class NumericalResidualError(ArithmeticError):
    """An indicator sum landed too far from an integer."""


class FormulaMismatchError(AssertionError):
    """Character-formula count disagrees with the brute-force count."""


@dataclass(frozen=True, eq=False)
class CharacterTable:
    p: int
    g: int
    ind: tuple[int, ...]  # ind[n] for 0 <= n < p; ind[0] unused (-1)
    fac: FactorMap = field(repr=False)

    @property
    def modulus_order(self) -> int:
        return self.p - 1

    @cached_property
    def ind_array(self) -> np.ndarray:
        return np.asarray(self.ind, dtype=np.int64)

    def character(self, j: int) -> "Character":
        return Character(self, j % (self.p - 1))


def build_table(p: int) -> CharacterTable:
    if p > TABLE_CAP:
        raise ValueError(f"character tables are capped at p <= {TABLE_CAP}")
    if not ntcore.is_prime(p):
        raise ValueError(f"{p} is not prime")
    fac = ntcore.factorize(p - 1)
    g = ntcore.least_primitive_root(p, fac)
    m = p - 1
    ind = [-1] * p
    x = 1
    for k in range(1, m + 1):
        x = x * g % p
        ind[x] = k
    return CharacterTable(p, g, tuple(ind), fac)


@dataclass(frozen=True)
class Character:
    table: CharacterTable
    j: int

    @property
    def order(self) -> int:
        m = self.table.p - 1
        return m // math.gcd(self.j, m)

    @property
    def is_principal(self) -> bool:
        return self.j == 0

    def exponent(self, n: int) -> int | None:
        """chi(n) = exp(2 pi i e/(p-1)); None when p | n."""
        p = self.table.p
        n %= p
        if n == 0:
            return None
        return self.j * self.table.ind[n] % (p - 1)

    def __call__(self, n: int) -> complex:
        e = self.exponent(n)
        if e is None:
            return 0j
        return cmath.exp(2j * math.pi * e / (self.table.p - 1))

    def values(self) -> np.ndarray:
        """Values at n = 0..p-1 as a complex vector."""
        return value_matrix(self.table, [self.j])[0]


def _roots(m: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(m) / m)


def value_matrix(table: CharacterTable, js) -> np.ndarray:
    """Rows chi_j(n) for n = 0..p-1, one row per j in js."""
    p, m = table.p, table.p - 1
    js = np.asarray(list(js), dtype=np.int64)
    ind = table.ind_array.copy()
    ind[0] = 0
    out = _roots(m)[(js[:, None] * ind[None, :]) % m]
    out[:, 0] = 0
    return out


def characters_of_order(table: CharacterTable, d: int) -> list[Character]:
    """The phi(d) characters of exact order d."""
    m = table.p - 1
    if d < 1 or m % d:
        raise ValueError(f"{d} does not divide p-1 = {m}")
    step = m // d
    return [Character(table, step * t) for t in range(d) if math.gcd(t, d) == 1]


def gamma_sum(table: CharacterTable, d: int, n: int) -> complex:
    """Sum of chi(n) over the characters of order d."""
    return sum((chi(n) for chi in characters_of_order(table, d)), 0j)


def _round_indicator(v: complex, what: str) -> int:
    r = round(v.real)
    if abs(v.imag) >= INDICATOR_TOL or abs(v.real - r) >= INDICATOR_TOL or r not in (0, 1):
        raise NumericalResidualError(f"{what}: {v} is not within {INDICATOR_TOL} of 0 or 1")
    return int(r)


def _indicator(table: CharacterTable, e: int, n: int) -> complex:
    fe = ntcore.factorize(e)
    total = 0j
    for d in ntcore.divisors(fe):
        mu = ntcore.mobius(d)
        if mu:
            total += mu / ntcore.euler_phi(d) * gamma_sum(table, d, n)
    return ntcore.euler_phi(fe) / e * total


def pr_indicator(table: CharacterTable, n: int) -> int:
    """1 if n is a primitive root mod p, else 0, by the character sum."""
    if not 1 <= n <= table.p - 1:
        raise ValueError("n must lie in [1, p-1]")
    return _round_indicator(_indicator(table, table.p - 1, n), f"pr_indicator(p={table.p}, n={n})")


def efree_indicator(table: CharacterTable, e: int, n: int) -> int:
    """1 if n is e-free mod p, else 0, by the character sum."""
    if e < 1 or (table.p - 1) % e:
        raise ValueError(f"{e} does not divide p-1")
    if not 1 <= n <= table.p - 1:
        raise ValueError("n must lie in [1, p-1]")
    return _round_indicator(_indicator(table, e, n), f"efree_indicator(p={table.p}, e={e}, n={n})")


@lru_cache(maxsize=4096)
def _dth_powers(p: int, d: int) -> frozenset[int]:
    return frozenset(pow(y, d, p) for y in range(1, p))


def is_efree_direct(p: int, e: int, n: int) -> bool:
    """No divisor d > 1 of e makes y^d = n (mod p) soluble; brute force."""
    n %= p
    if n == 0:
        raise ValueError("n must be coprime to p")
    if p > TABLE_CAP:
        raise ValueError(f"brute-force solubility is capped at p <= {TABLE_CAP}")
    for d in ntcore.divisors(ntcore.factorize(e)):
        if d > 1 and n in _dth_powers(p, d):
            return False
    return True


def _squarefree_units(p: int, x: int) -> list[int]:
    return [n for n in range(1, min(x, p - 1) + 1) if ntcore.is_squarefree(n)]


def _formula_count(table: CharacterTable, e: int, x: int) -> int:
    """phi(e)/e * sum_{d|e} mu(d)/phi(d) sum_{chi in Gamma_d} sum_{n<=x sq-free} chi(n)."""
    ns = np.asarray(_squarefree_units(table.p, x), dtype=np.int64)
    if ns.size == 0:
        return 0
    fe = ntcore.factorize(e)
    total = 0j
    for d in ntcore.divisors(fe):
        mu = ntcore.mobius(d)
        if not mu:
            continue
        js = [chi.j for chi in characters_of_order(table, d)]
        s = value_matrix(table, js)[:, ns].sum()
        total += mu / ntcore.euler_phi(d) * s
    v = ntcore.euler_phi(fe) / e * total
    r = round(v.real)
    if abs(v.imag) > INDICATOR_TOL * max(1, x) or abs(v.real - r) > INDICATOR_TOL * max(1, x):
        raise NumericalResidualError(f"count formula residual too large: {v}")
    return int(r)


def count_squarefree_efree(p: int, e: int, x: int, table: CharacterTable | None = None) -> int:
    """Square-free e-free n <= x (units only); brute force checked against the formula."""
    if (p - 1) % e:
        raise ValueError(f"{e} does not divide p-1")
    table = table or build_table(p)
    brute = sum(1 for n in _squarefree_units(p, x) if is_efree_direct(p, e, n))
    formula = _formula_count(table, e, x)
    if brute != formula:
        raise FormulaMismatchError(f"N_e(p={p}, e={e}, x={x}): brute {brute} != formula {formula}")
    return brute


def count_squarefree_pr(p: int, x: int, table: CharacterTable | None = None) -> int:
    """Square-free primitive roots n <= x; brute force checked against the formula."""
    table = table or build_table(p)
    brute = sum(1 for n in _squarefree_units(p, x) if ntcore.is_primitive_root(n, p, table.fac))
    formula = _formula_count(table, p - 1, x)
    if brute != formula:
        raise FormulaMismatchError(f"N(p={p}, x={x}): brute {brute} != formula {formula}")
    return brute


def partial_sums(values: np.ndarray, n_max: int) -> np.ndarray:
    """S(N) = sum_{1<=n<=N} chi(n) for N = 1..n_max, given one period of values.

    `values` may be a single row or a matrix of rows (one per character).
    """
    v = np.atleast_2d(values)
    p = v.shape[1]
    reps = n_max // p + 2
    tiled = np.tile(v, (1, reps))[:, 1 : n_max + 1]
    out = np.cumsum(tiled, axis=1)
    return out[0] if values.ndim == 1 else out


def char_partial_sum_max(character: Character, n_max: int) -> float:
    """max over 1 <= N <= n_max of |sum_{n<=N} chi(n)|."""
    if character.is_principal:
        raise ValueError("character must be non-principal")
    return float(np.abs(partial_sums(character.values(), n_max)).max())


def squarefree_char_sums(table: CharacterTable, x_max: int) -> np.ndarray:
    """Matrix T[j-1, x-1] = |sum_{n<=x, n sq-free} chi_j(n)| for non-principal j."""
    m = table.p - 1
    vals = value_matrix(table, range(1, m))
    mask = np.zeros(table.p, dtype=bool)
    mask[_squarefree_units(table.p, table.p - 1)] = True
    vals = vals * mask
    return np.abs(np.cumsum(vals[:, 1 : x_max + 1], axis=1))
