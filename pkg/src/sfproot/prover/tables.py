"""Which values of omega(p-1) survive the unsieved and sieved criteria."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .. import bounds, ntcore
from ..bounds import BoundConfig, SieveParams
from .tree import optimal_s

DEFAULT_N_MAX = 12000


@dataclass(frozen=True)
class OmegaRow:
    """One value n = omega(p-1) and whether the criterion settles it."""

    n: int
    lower: int  # least p that needs the criterion: max(covered_below, primorial(n)+1)
    dispatched: bool
    s: int | None = None
    delta: float | None = None
    threshold_log: float | None = None  # log of the positivity threshold

    @property
    def threshold(self) -> str:
        return "" if self.threshold_log is None else bounds.format_log(self.threshold_log)


def _lower_bounds(n_max: int, cfg: BoundConfig):
    """(n, lower, log(lower - 1)) for n = 1..n_max, built incrementally."""
    prod = 1
    for n, q in enumerate(ntcore.first_primes(n_max), start=1):
        prod *= q
        lower = max(cfg.covered_below, prod + 1)
        yield n, lower, bounds.log_nat(lower - 1)


def unsieved_rows(alpha: float, cfg: BoundConfig | None = None, n_max: int = DEFAULT_N_MAX,
                  thresholds: bool = False) -> list[OmegaRow]:
    """For each n <= n_max: is G(p) >= 0 already at p = lower - 1?

    That is the root finder's first test; when it holds the whole range
    p >= lower is settled, and the root finder is never started.
    """
    cfg = (cfg or BoundConfig()).replace(alpha=alpha)
    rows = []
    for n, lower, L in _lower_bounds(n_max, cfg):
        lc = bounds.unsieved_log_coef(n)
        ok = bounds.margin_from_log(L, lc, cfg) >= 0
        thr = bounds.G_threshold_log(n, cfg) if thresholds and not ok else None
        rows.append(OmegaRow(n, lower, ok, threshold_log=thr))
    return rows


def _span(rows) -> tuple[int, int] | None:
    left = [r.n for r in rows if not r.dispatched]
    return (min(left), max(left)) if left else None


def unsieved_interval(alpha: float, cfg: BoundConfig | None = None,
                      n_max: int = DEFAULT_N_MAX) -> tuple[int, int] | None:
    """(a, b): smallest and largest n the unsieved criterion leaves open."""
    rows = unsieved_rows(alpha, cfg, n_max)
    if rows and not rows[-1].dispatched:
        raise ArithmeticError(f"n = {n_max} is still open; raise n_max")
    return _span(rows)


def sieved_rows(alpha: float, cfg: BoundConfig | None = None, n_max: int = DEFAULT_N_MAX,
                thresholds: bool = False) -> list[OmegaRow]:
    """Worst-case sieve for every n the unsieved criterion leaves open."""
    cfg = (cfg or BoundConfig()).replace(alpha=alpha)
    span = unsieved_interval(alpha, cfg, n_max)
    if span is None:
        return []
    a, b = span
    primes = ntcore.first_primes(b)
    lowers = {n: (lo, L) for n, lo, L in _lower_bounds(b, cfg)}
    rows = []
    for n in range(a, b + 1):
        L_n = primes[:n]
        s = optimal_s(n, L_n, cfg)
        params = SieveParams.worst_case(n, s, L_n)
        lower, logp = lowers[n]
        ok = bounds.margin_from_log(logp, params.log_coef, cfg) >= 0
        thr = bounds.G_s_threshold_log(params, cfg) if thresholds and not ok else None
        rows.append(OmegaRow(n, lower, ok, s=s, delta=params.delta, threshold_log=thr))
    return rows


def sieved_cases(alpha: float, cfg: BoundConfig | None = None, n_max: int = DEFAULT_N_MAX) -> set[int]:
    """Values of omega(p-1) that still need the tree search."""
    return {r.n for r in sieved_rows(alpha, cfg, n_max) if not r.dispatched}


def sieved_threshold(n: int, alpha: float, cfg: BoundConfig | None = None,
                     s: int | None = None, Y=()) -> float:
    """Positivity threshold of G_s for the worst case with omega(p-1) = n.

    L is the first n primes outside Y; s defaults to optimal_s. Returned
    as a float (an overestimate by at most one part in 10^15).
    """
    cfg = (cfg or BoundConfig()).replace(alpha=alpha)
    L = ntcore.first_primes(n, Y)
    s = s if s is not None else optimal_s(n, L, cfg)
    params = SieveParams.worst_case(n, s, L)
    return math.exp(bounds.G_s_threshold_log(params, cfg))


def unsieved_threshold(omega_pm1: int, alpha: float, cfg: BoundConfig | None = None) -> float:
    cfg = (cfg or BoundConfig()).replace(alpha=alpha)
    return math.exp(bounds.G_threshold_log(omega_pm1, cfg))
