"""Overestimating root finders for an eventually-positive function of p."""

from __future__ import annotations

import math
from typing import Callable

from .. import bounds
from ..bounds import BoundConfig

Evaluator = Callable[[int], float]


class RootFinderDivergence(ArithmeticError):
    """The zigzag search exceeded its evaluation budget."""


class ParentBoundViolation(AssertionError):
    """A node's root lies above its parent's by more than the search precision."""


def _step(inc, div):
    # integer steps stay exact; anything else falls back to float division
    if isinstance(inc, int) and isinstance(div, int):
        q = abs(inc) // div
        return q if inc > 0 else -q
    return inc / div


def zigzag_root(
    F: Evaluator,
    num: int,
    inc: int,
    inc_div: int = 10,
    inc_end: int = 1,
    max_evals: int = 10**6,
) -> int:
    """Walk up until F > 0, back down until F < 0, with shrinking steps.

    Each reversal divides the step by inc_div. Once the step is at most
    inc_end the walk finishes on an upward pass, so the returned point has
    F > 0 and sits at most inc_end above the last sign change it crossed.
    The walk never goes below 1.
    """
    if inc == 0:
        raise ValueError("inc must be non-zero")
    evals = 0

    def f(x):
        nonlocal evals
        evals += 1
        if evals > max_evals:
            raise RootFinderDivergence(f"no root found after {max_evals} evaluations (at {x})")
        return F(x)

    while True:
        if inc < 0:
            while f(num) >= 0:
                num += inc
                if num < 1:
                    num = 1
                    break
        else:
            while f(num) <= 0:
                num += inc
        if abs(inc) <= inc_end:
            if inc > 0:
                return num
            inc = -inc
            continue
        nxt = _step(-inc, inc_div)
        if nxt == 0:
            nxt = 1 if inc < 0 else -1
        inc = nxt


def sieved_evaluator(s: int, delta: float, core_omega: int, cfg: BoundConfig) -> Evaluator:
    """p -> log-margin of G_s, with -inf wherever the bound is undefined.

    Treating an undefined bound as non-positive keeps the root finder
    conservative: it only stops where positivity has been shown.
    """
    log_coef = bounds.sieved_log_coef(core_omega, bounds.big_delta(s, delta))

    def F(p: int) -> float:
        try:
            return bounds.log_margin(p, log_coef, cfg)
        except (ValueError, ArithmeticError):
            return -math.inf

    return F


def find_sign_change(
    n: int,
    s: int,
    delta: float,
    core_omega: int,
    lb: int,
    parent_ub: int | None,
    cfg: BoundConfig,
) -> int:
    """Upper bound U with G_s(p) > 0 for every p >= U.

    Returns lb - 1 (or parent_ub if smaller) at once when G_s(lb - 1) >= 0. Otherwise refines a
    zigzag search from lb down the precision ladder in cfg. A result above
    parent_ub (None means unbounded) is replaced by parent_ub after checking
    the overshoot is within the precision reached.
    """
    if delta <= 0:
        raise bounds.NonPositiveDeltaError(f"delta = {delta} <= 0")
    if not 1 <= s <= n:
        raise ValueError("need 1 <= s <= n")
    F = sieved_evaluator(s, delta, core_omega, cfg)
    if F(lb - 1) >= 0:
        # empty interval; the parent bound can be lower still when Y raised lb
        return lb - 1 if parent_ub is None else min(lb - 1, parent_ub)
    start, prec = cfg.rf_start_inc, cfg.rf_start_prec
    num = zigzag_root(F, lb, start, cfg.rf_inc_div, prec, cfg.rf_max_evals)
    start, prec = prec, _step(prec, cfg.rf_prec_div) or 1
    while start >= cfg.rf_final_prec:
        if cfg.rf_early_exit and num - lb > start:
            break
        num = zigzag_root(F, num, start, cfg.rf_inc_div, prec, cfg.rf_max_evals)
        start, prec = prec, _step(prec, cfg.rf_prec_div) or 1

    if parent_ub is not None and num > parent_ub:
        if num - parent_ub > start:
            raise ParentBoundViolation(
                f"root {num} exceeds parent bound {parent_ub} by more than {start}"
            )
        return parent_ub
    return num
