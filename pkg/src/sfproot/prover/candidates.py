"""Block sieves over k for candidates p = k * prodX + 1.

Everything runs on int64 numpy blocks, so k must stay below 2^62.
"""

from __future__ import annotations

import math
from typing import Iterator, Sequence

import numpy as np

from .. import ntcore

BLOCK = 1 << 18
SMALL_BOUND = 1 << 16
K_LIMIT = 1 << 62

_SMALL_PRIMES = np.asarray(ntcore.primes_upto(SMALL_BOUND), dtype=np.int64)
_LOG_BOUND = math.log(SMALL_BOUND)


def _blocks(a: int, b: int, size: int) -> Iterator[tuple[int, int]]:
    lo = a
    while lo <= b:
        hi = min(lo + size - 1, b)
        yield lo, hi
        lo = hi + 1


def sieve_interval(a: int, b: int, Y: Sequence[int], block: int = BLOCK) -> Iterator[int]:
    """Every k in [a, b] divisible by no prime of Y, ascending, block by block."""
    if a > b:
        return
    if b >= K_LIMIT or a < 0:
        raise OverflowError("sieve_interval works on 0 <= k < 2^62")
    for lo, hi in _blocks(a, b, block):
        alive = np.ones(hi - lo + 1, dtype=bool)
        for y in Y:
            alive[(-lo) % y :: y] = False
        yield from (lo + np.flatnonzero(alive)).tolist()


class CandidateSieve:
    """Filters k so that p = k*prodX + 1 can be prime with omega(p-1) = n.

    Survivors are exactly the k that pass three necessary conditions:
    no Y prime divides k; no small prime below p_min divides p; and the
    count of distinct primes of k outside X is consistent with n once the
    primes up to 2^16 have been stripped from k. The caller still has to
    test primality and the exact omega.
    """

    def __init__(self, n: int, X: Sequence[int], Y: Sequence[int], p_min: int):
        self.n = n
        self.X = tuple(X)
        self.Y = tuple(Y)
        self.prodX = math.prod(self.X)
        self.need = n - len(self.X)
        xs = set(self.X)
        ys = set(self.Y)
        small = [int(q) for q in _SMALL_PRIMES if q not in xs]
        self.count_primes = [q for q in small if q not in ys]
        # residue t with q | t*prodX + 1; only meaningful for q < p_min
        self.p_tests = [
            (q, (-pow(self.prodX, -1, q)) % q) for q in small if q < p_min
        ]

    def survivors(self, k_lo: int, k_hi: int, block: int = BLOCK) -> Iterator[int]:
        if k_lo > k_hi or self.need < 0:
            return
        if k_hi >= K_LIMIT:
            raise OverflowError("k range exceeds the int64 enumerator")
        k_lo = max(k_lo, 1)
        for lo, hi in _blocks(k_lo, k_hi, block):
            yield from self._block(lo, hi)

    def _block(self, lo: int, hi: int) -> list[int]:
        size = hi - lo + 1
        ks = np.arange(lo, hi + 1, dtype=np.int64)
        alive = np.ones(size, dtype=bool)
        for y in self.Y:
            alive[(-lo) % y :: y] = False
        for q, t in self.p_tests:
            st = (t - lo) % q
            if st < size:
                alive[st::q] = False

        rem = ks.copy()
        cnt = np.zeros(size, dtype=np.int16)
        for q in self.X:
            _strip(rem, lo, hi, q)
        for q in self.count_primes:
            if q > hi:
                break
            st = (-lo) % q
            if st >= size:
                continue
            cnt[st::q] += 1
            _strip(rem, lo, hi, q)

        r = self.need - cnt.astype(np.int64)
        ok = alive & (r >= 0)
        is_one = rem == 1
        is_prime_rem = (rem > 1) & (rem < SMALL_BOUND * SMALL_BOUND)
        big = rem >= SMALL_BOUND * SMALL_BOUND
        ok &= ~is_one | (r == 0)
        ok &= ~is_prime_rem | (r == 1)
        if big.any():
            with np.errstate(divide="ignore"):
                max_r = np.floor(np.log(np.maximum(rem, 1)) / _LOG_BOUND + 1e-9)
            ok &= ~big | ((r >= 1) & (r <= max_r))
        return ks[ok].tolist()


def _strip(rem: np.ndarray, lo: int, hi: int, q: int) -> None:
    """Divide out every power of q from the entries of rem (k = lo + index)."""
    size = hi - lo + 1
    pw = q
    while pw <= hi:
        st = (-lo) % pw
        if st >= size:
            break
        rem[st::pw] //= q
        pw *= q
