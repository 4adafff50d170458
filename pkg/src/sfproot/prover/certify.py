"""Finding and re-checking square-free primitive roots below p^alpha."""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

from .. import ntcore
from ..bounds import log_nat
from ..ntcore import FactorMap

# Relative margin on log comparisons before falling back to exact integers.
LOG_MARGIN = 1e-9
EXPONENT_DENOMINATOR = 4096


@lru_cache(maxsize=64)
def _rational_below(alpha: float) -> Fraction:
    """The largest a/b <= alpha with b <= 4096."""
    exact = Fraction(alpha)
    best = Fraction(0)
    for b in range(1, EXPONENT_DENOMINATOR + 1):
        f = Fraction(math.floor(exact * b), b)
        if f > best:
            best = f
    return best


def below_alpha_power(g: int, p: int, alpha: float) -> bool:
    """Conservative test of g < p^alpha.

    Clear cases are settled on logarithms. Near-ties are settled exactly by
    g^b < p^a for a rational a/b <= alpha, which can only reject a true
    answer, never accept a false one.
    """
    if g < 1 or p < 2:
        raise ValueError("need g >= 1 and p >= 2")
    if g == 1:
        return True
    lhs = math.log(g)
    rhs = alpha * log_nat(p)
    if lhs < rhs * (1 - LOG_MARGIN):
        return True
    if lhs > rhs * (1 + LOG_MARGIN):
        return False
    f = _rational_below(alpha)
    return g**f.denominator < p**f.numerator


def is_certified_root(g: int, p: int, alpha: float, fac: FactorMap | None = None) -> bool:
    """All three predicates re-checked from scratch."""
    if p == 2:
        return g == 1
    return (
        ntcore.is_primitive_root(g, p, fac)
        and ntcore.is_squarefree(g)
        and below_alpha_power(g, p, alpha)
    )


def sfpr(p: int, alpha: float, fac: FactorMap | None = None) -> int | None:
    """A square-free primitive root of p below p^alpha, or None.

    Tries the least primitive root g0, then g0^k mod p for k = 2, 3, ...
    coprime to p-1, which runs through every primitive root. None is only
    returned once all of them have been rejected.
    """
    if p == 2:
        return 1
    fac = fac if fac is not None else ntcore.factorize(p - 1)
    g0 = ntcore.least_primitive_root(p, fac)
    if below_alpha_power(g0, p, alpha) and ntcore.is_squarefree(g0):
        return g0
    m = p - 1
    for k in range(2, m):
        if math.gcd(k, m) != 1:
            continue
        g = ntcore.powmod(g0, k, p)
        if below_alpha_power(g, p, alpha) and ntcore.is_squarefree(g):
            return g
    return None


def verify_small(limit: int, alpha: float, verbose: bool = False) -> bool:
    """True iff every prime p <= limit has a square-free primitive root < p^alpha."""
    ok = True
    for p in ntcore.primes_upto(limit):
        g = sfpr(p, alpha)
        if verbose:
            print(f"{p} {g if g is not None else 'none'}")
        if g is None:
            ok = False
    return ok


def failing_primes(limit: int, alpha: float) -> list[int]:
    return [p for p in ntcore.primes_upto(limit) if sfpr(p, alpha) is None]
