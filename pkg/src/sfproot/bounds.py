"""Explicit analytic bounds: PV constant, character-sum bound, E, G and G_s.

All quantities that depend on p depend on it only through log p, so the
functions accept arbitrarily large integers. Positivity decisions are made
on a log-scale margin (log main term - log error term), which keeps its sign
even when the terms themselves overflow a double.
"""

from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from . import ntcore

SQRT2PI = math.pi * math.sqrt(2)
SIX_OVER_PI2 = 6 / math.pi**2
PI2_OVER_SIX = math.pi**2 / 6
LOG2 = math.log(2)
ALPHA_MIN = math.log(2) / math.log(3)

CIPU_CONSTANTS = (0.679091, 0.1333, 0.036438, 0.02767)
PV_VARIANTS = ("general", "primitive_even_odd")


class DegenerateIntervalError(ValueError):
    """x is too small relative to c*sqrt(p)*log(p): D <= 1."""


class NonPositiveDeltaError(ValueError):
    pass


@dataclass(frozen=True)
class BoundConfig:
    alpha: float = 0.9
    A: float = 0.679091
    sf_lower_const: float = 0.104
    pv_variant: str = "general"
    covered_below: int = 2_500_000_000_000_000
    range_limit: int = 10**6
    # nodes branch only while |X| < ceil(0.8 n) + x_gate_offset
    x_gate_offset: int = 0
    # root-finder ladder
    rf_start_inc: int = 10**21
    rf_start_prec: int = 10**17
    rf_inc_div: int = 10
    rf_prec_div: int = 100
    rf_final_prec: int = 10**9
    rf_early_exit: bool = False
    rf_max_evals: int = 10**6

    def __post_init__(self) -> None:
        if not ALPHA_MIN < self.alpha < 1:
            raise ValueError(f"alpha must lie in (log2/log3, 1), got {self.alpha}")
        if self.A not in CIPU_CONSTANTS:
            raise ValueError(f"A must be one of {CIPU_CONSTANTS}")
        if self.pv_variant not in PV_VARIANTS:
            raise ValueError(f"pv_variant must be one of {PV_VARIANTS}")
        if self.range_limit < 0 or self.covered_below < 1 or self.x_gate_offset < 0:
            raise ValueError("range_limit and x_gate_offset must be >= 0, covered_below >= 1")
        if self.rf_inc_div <= 1 or self.rf_prec_div <= 1:
            raise ValueError("root-finder divisors must exceed 1")

    def replace(self, **changes) -> "BoundConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        """JSON-safe snapshot; integers wider than 53 bits become strings."""
        out = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, int) and not isinstance(v, bool) and abs(v) >= 2**53:
                v = str(v)
            out[f.name] = v
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "BoundConfig":
        kw = {}
        for f in dataclasses.fields(cls):
            if f.name in d:
                kw[f.name] = coerce_field(f, d[f.name])
        return cls(**kw)

    @classmethod
    def from_env(cls, prefix: str = "SFPR_", environ=None, **overrides) -> "BoundConfig":
        """Defaults, then PREFIX<FIELD> environment variables, then overrides."""
        env = os.environ if environ is None else environ
        kw = {}
        for f in dataclasses.fields(cls):
            key = prefix + f.name.upper()
            if key in env:
                kw[f.name] = coerce_field(f, env[key])
        kw.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**kw)


def coerce_field(f: dataclasses.Field, raw):
    """Convert a raw (usually string) value to the type of a config field."""
    kind = type(f.default)
    if kind is bool:
        if isinstance(raw, str):
            return raw.strip().lower() in ("1", "true", "yes", "on")
        return bool(raw)
    if kind is int:
        return parse_nat(raw) if isinstance(raw, str) else int(raw)
    if kind is float:
        return float(raw)
    return raw


def parse_nat(text: str | int) -> int:
    """Decimal or scientific notation natural number, converted exactly.

    '2.5e15' is accepted; '2.55555e2' is rejected because it is not integral.
    """
    if isinstance(text, int):
        return text
    from decimal import Decimal, InvalidOperation

    try:
        d = Decimal(text.strip().replace("_", ""))
    except InvalidOperation:
        raise ValueError(f"not a number: {text!r}") from None
    if not d.is_finite() or d != d.to_integral_value() or d < 0:
        raise ValueError(f"not a natural number: {text!r}")
    return int(d)


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def log_nat(p: int | float) -> float:
    """Natural log of a (possibly huge) positive number to double precision."""
    if isinstance(p, int) and p.bit_length() > 64:
        shift = p.bit_length() - 64
        return shift * LOG2 + math.log(p >> shift)
    return math.log(p)


def _logaddexp(a: float, b: float) -> float:
    if a == -math.inf:
        return b
    if b == -math.inf:
        return a
    hi, lo = max(a, b), min(a, b)
    return hi + math.log1p(math.exp(lo - hi))


# ---------------------------------------------------------------------------
# Polya-Vinogradov constant and the character-sum bound
# ---------------------------------------------------------------------------

def _pv_from_log(L: float, variant: str = "general") -> float:
    if variant == "general":
        if L <= math.log(100):
            raise ValueError("PV constant needs p > 100")
        return 1 / SQRT2PI + 6 / (SQRT2PI * L) + 1 / L
    if variant == "primitive_even_odd":
        if L < math.log(1200):
            raise ValueError("even/odd PV constant needs p >= 1200")
        return 2 / math.pi**2 + 1 / L
    raise ValueError(f"unknown PV variant {variant!r}")


def pv_constant(p: int | float, variant: str = "general") -> float:
    """c with |sum_{n<=x} chi(n)| < c sqrt(p) log p for non-principal chi mod p."""
    return _pv_from_log(log_nat(p), variant)


@dataclass(frozen=True)
class CharSumBoundParts:
    D: float
    d0: int
    Dhat: float
    B: float


def char_sum_bound(
    x: float, p: int | float, A: float = 0.679091, variant: str = "general"
) -> CharSumBoundParts:
    """Bound on |sum over square-free n <= x of chi(n)|, any non-principal chi.

    Splits the Mobius expansion at d0 = floor(D), D = sqrt(x / (c sqrt(p) log p)),
    using the PV bound below d0 and the trivial bound x/d^2 above it.
    """
    if x < 1:
        raise ValueError("x must be >= 1")
    L = log_nat(p)
    c = _pv_from_log(L, variant)
    K = c * math.sqrt(p) * L
    D = math.sqrt(x / K)
    if D <= 1:
        raise DegenerateIntervalError(f"D = {D} <= 1 for x = {x}, p = {p}")
    d0 = math.floor(D)
    B = (
        SIX_OVER_PI2 * d0 * K
        + SIX_OVER_PI2 * x / d0
        - SIX_OVER_PI2 * math.sqrt(x)
        + A * math.sqrt(d0) * K
        - A * x**0.25 / 3
        + 7 / 3 * A * x * d0**-1.5
    )
    return CharSumBoundParts(D=D, d0=d0, Dhat=D / (D - 1), B=B)


def _E_from_log(L: float, alpha: float, A: float, variant: str) -> float:
    """char_sum_bound(p^alpha, p).B / p^(alpha/2 + 1/4), evaluated without overflow.

    With K = c sqrt(p) log p and r = d0/D, every term of B divided by
    sqrt(x) p^(1/4) reduces to an expression in log p, c and r.
    """
    c = _pv_from_log(L, variant)
    log_D = ((alpha - 0.5) * L - math.log(c * L)) / 2
    if log_D <= 0:
        raise DegenerateIntervalError(f"D <= 1 at log p = {L}")
    if log_D < 36:
        D = math.exp(log_D)
        r = math.floor(D) / D
    else:
        r = 1.0  # floor(D)/D is 1 to double precision
    mid = math.exp((0.125 - alpha / 4) * L)
    return (
        SIX_OVER_PI2 * (r + 1 / r) * math.sqrt(c * L)
        - SIX_OVER_PI2 * math.exp(-L / 4)
        + A * c**0.75 * L**0.75 * mid * (math.sqrt(r) + 7 / 3 * r**-1.5)
        - A / 3 * math.exp(-(alpha + 1) * L / 4)
    )


def error_term_E(p: int | float, cfg: BoundConfig) -> float:
    return _E_from_log(log_nat(p), cfg.alpha, cfg.A, cfg.pv_variant)


def sf_lower_term(p: int | float, cfg: BoundConfig) -> float:
    """The 0.104 / p^(1/4) term."""
    return cfg.sf_lower_const * math.exp(-log_nat(p) / 4)


# ---------------------------------------------------------------------------
# unsieved and sieved criteria
# ---------------------------------------------------------------------------

def margin_from_log(L: float, log_coef: float, cfg: BoundConfig) -> float:
    """log(main term) - log(error term); its sign is the sign of G."""
    E = _E_from_log(L, cfg.alpha, cfg.A, cfg.pv_variant)
    err = _logaddexp(math.log(cfg.sf_lower_const) - L / 4, log_coef + math.log(E))
    return (cfg.alpha / 2 - 0.25) * L - (math.log(PI2_OVER_SIX) + err)


def log_margin(p: int | float, log_coef: float, cfg: BoundConfig) -> float:
    """Sign-exact margin for an arbitrary error coefficient exp(log_coef)."""
    return margin_from_log(log_nat(p), log_coef, cfg)


def _value(L: float, log_coef: float, cfg: BoundConfig) -> float:
    E = _E_from_log(L, cfg.alpha, cfg.A, cfg.pv_variant)
    main_log = (cfg.alpha / 2 - 0.25) * L
    err_log = math.log(PI2_OVER_SIX) + _logaddexp(
        math.log(cfg.sf_lower_const) - L / 4, log_coef + math.log(E)
    )
    if max(main_log, err_log) < 700:
        return math.exp(main_log) - math.exp(err_log)
    return math.inf if main_log > err_log else -math.inf


def unsieved_log_coef(omega_pm1: int) -> float:
    """log(2^omega - 1), the number of square-free divisors d > 1 of p-1."""
    if omega_pm1 < 0:
        raise ValueError("omega must be >= 0")
    if omega_pm1 == 0:
        return -math.inf
    return omega_pm1 * LOG2 + math.log1p(-(2.0**-omega_pm1))


def G(p: int | float, omega_pm1: int, cfg: BoundConfig) -> float:
    """Unsieved criterion at x = p^alpha; positive means N(p, p^alpha) > 0.

    Values too large for a double come back as +-inf with the right sign.
    """
    return _value(log_nat(p), unsieved_log_coef(omega_pm1), cfg)


def G_margin(p: int | float, omega_pm1: int, cfg: BoundConfig) -> float:
    return margin_from_log(log_nat(p), unsieved_log_coef(omega_pm1), cfg)


def delta_exact(sieving_primes: Iterable[int]) -> Fraction:
    return 1 - sum((Fraction(1, q) for q in sieving_primes), Fraction(0))


EXACT_DELTA_MAX = 64


def delta(sieving_primes: Iterable[int]) -> float:
    """1 - sum of reciprocals.

    Up to 64 primes the sum is exact and rounded once; longer lists use
    fsum, whose error (about 1e-16 relative) is far below any tolerance.
    """
    ps = list(sieving_primes)
    if len(ps) <= EXACT_DELTA_MAX:
        return float(delta_exact(ps))
    return 1.0 - math.fsum(1.0 / q for q in ps)


def big_delta(s: int, dlt: float) -> float:
    if dlt <= 0:
        raise NonPositiveDeltaError(f"delta = {dlt} <= 0")
    return (s - 1) / dlt + 2


@dataclass(frozen=True)
class SieveParams:
    n: int
    s: int
    core_omega: int
    sieving_primes: tuple[int, ...]
    delta: float
    big_delta: float

    @classmethod
    def build(cls, n: int, core_omega: int, sieving_primes: Sequence[int]) -> "SieveParams":
        sp = tuple(sieving_primes)
        if len(set(sp)) != len(sp):
            raise ValueError("sieving primes must be distinct")
        d = delta(sp)
        return cls(n, len(sp), core_omega, sp, d, big_delta(len(sp), d))

    @classmethod
    def worst_case(cls, n: int, s: int, L: Sequence[int] | None = None) -> "SieveParams":
        """Core = smallest n-s primes of L, sieving primes = largest s."""
        L = list(L) if L is not None else ntcore.first_primes(n)
        if len(L) != n or not 1 <= s <= n:
            raise ValueError("need |L| = n and 1 <= s <= n")
        return cls.build(n, n - s, L[n - s :])

    @property
    def log_coef(self) -> float:
        """log(2^omega(k) * Delta + 1)."""
        return sieved_log_coef(self.core_omega, self.big_delta)

    @property
    def coef(self) -> float:
        return 2.0**self.core_omega * self.big_delta + 1


def sieved_log_coef(core_omega: int, big_dlt: float) -> float:
    return _logaddexp(core_omega * LOG2 + math.log(big_dlt), 0.0)


def _check(params: SieveParams) -> None:
    if params.delta <= 0:
        raise NonPositiveDeltaError(f"delta = {params.delta} <= 0")


def G_s(p: int | float, core_omega: int, params: SieveParams, cfg: BoundConfig) -> float:
    """Sieved criterion at x = p^alpha; positive means a square-free
    primitive root below p^alpha exists for every p with this sieve shape.

    `core_omega` is omega(k), which may differ from params.core_omega when
    the core is only known up to the primes fixed at a tree node.
    """
    _check(params)
    return _value(log_nat(p), sieved_log_coef(core_omega, params.big_delta), cfg)


def G_s_margin(p: int | float, core_omega: int, params: SieveParams, cfg: BoundConfig) -> float:
    _check(params)
    return margin_from_log(log_nat(p), sieved_log_coef(core_omega, params.big_delta), cfg)


def node_lower_bound(n: int, Y: Iterable[int], cfg: BoundConfig) -> int:
    """max(covered_below, 1 + product of the first n primes outside Y)."""
    return max(cfg.covered_below, 1 + math.prod(ntcore.first_primes(n, Y)))


# ---------------------------------------------------------------------------
# thresholds for reporting
# ---------------------------------------------------------------------------

def min_valid_log_p(cfg: BoundConfig) -> float:
    """Smallest log p at which E is defined (p > 100 or 1200, and D > 1)."""
    lo = math.log(1200 if cfg.pv_variant == "primitive_even_odd" else 100) + 1e-9
    hi = lo
    while True:
        try:
            _E_from_log(hi, cfg.alpha, cfg.A, cfg.pv_variant)
            break
        except DegenerateIntervalError:
            lo, hi = hi, hi * 2
    if hi == lo:
        return lo
    for _ in range(100):
        mid = (lo + hi) / 2
        try:
            _E_from_log(mid, cfg.alpha, cfg.A, cfg.pv_variant)
            hi = mid
        except DegenerateIntervalError:
            lo = mid
    return hi


def threshold_log(margin: Callable[[float], float], lo: float, hi: float | None = None, iters: int = 200) -> float:
    """Log of the point above which margin > 0, by bisection on log p.

    Assumes one sign change on [lo, hi]. Returns the upper end of the final
    bracket, so exp() of the result over-estimates the threshold.
    """
    if margin(lo) > 0:
        return lo
    if hi is None:
        hi = max(2 * lo, 64.0)
        while margin(hi) <= 0:
            lo, hi = hi, hi * 2
            if hi > 1e7:
                raise ArithmeticError("no positivity threshold below log p = 1e7")
    for _ in range(iters):
        mid = (lo + hi) / 2
        if margin(mid) > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-15 * hi:
            break
    return hi


def G_threshold_log(omega_pm1: int, cfg: BoundConfig) -> float:
    lc = unsieved_log_coef(omega_pm1)
    return threshold_log(lambda L: margin_from_log(L, lc, cfg), min_valid_log_p(cfg))


def G_s_threshold_log(params: SieveParams, cfg: BoundConfig) -> float:
    _check(params)
    lc = params.log_coef
    return threshold_log(lambda L: margin_from_log(L, lc, cfg), min_valid_log_p(cfg))


def format_log(L: float, digits: int = 3) -> str:
    """exp(L) in scientific notation, even when it overflows a double."""
    e10 = L / math.log(10)
    exp = math.floor(e10)
    mant = 10 ** (e10 - exp)
    s = f"{mant:.{digits - 1}f}"
    if s.startswith("10"):
        exp += 1
        s = f"{mant / 10:.{digits - 1}f}"
    return f"{s}e+{exp:02d}" if exp >= 0 else f"{s}e{exp:03d}"
