import math
from fractions import Fraction

import gmpy2
import pytest
from hypothesis import given, settings, strategies as st

from sfproot import ntcore
from sfproot.bounds import ALPHA_MIN
from sfproot.prover.certify import (
    _rational_below,
    below_alpha_power,
    failing_primes,
    is_certified_root,
    sfpr,
    verify_small,
)


def test_sfpr_examples():
    assert sfpr(3, 0.631) == 2
    assert sfpr(7, 0.88) == 3
    assert sfpr(7, 0.5) is None
    assert sfpr(2, 0.7) == 1


def test_sfpr_skips_non_squarefree_least_root():
    # the first prime whose least primitive root is not square-free
    p = next(q for q in ntcore.primes_upto(10**5) if not ntcore.is_squarefree(ntcore.least_primitive_root(q)))
    g = sfpr(p, 0.99)
    assert g is not None and g != ntcore.least_primitive_root(p)
    assert is_certified_root(g, p, 0.99)


def test_sfpr_exhausts_before_giving_up():
    # at exponent 1/2, 2 > sqrt(3) and both primitive roots of 7 exceed sqrt(7)
    assert failing_primes(7, 0.5) == [3, 7]
    assert not verify_small(7, 0.5)


def test_verify_small():
    assert verify_small(2, 0.7)
    assert verify_small(3, 0.631)
    assert verify_small(2791, ALPHA_MIN + 1e-5)


def test_p3_obstruction():
    # 2 < 3^alpha exactly when alpha > log 2 / log 3
    assert not below_alpha_power(2, 3, ALPHA_MIN - 1e-12)
    assert below_alpha_power(2, 3, ALPHA_MIN + 1e-6)


def test_rational_below():
    for alpha in (0.9, 0.88, ALPHA_MIN + 1e-5, 0.63093, 0.5):
        f = _rational_below(alpha)
        assert f <= Fraction(alpha)
        assert f.denominator <= 4096
        assert Fraction(alpha) - f < Fraction(1, 4096)


@settings(deadline=None)
@given(
    p=st.integers(min_value=2, max_value=10**30),
    g=st.integers(min_value=1, max_value=10**28),
    alpha=st.floats(min_value=0.5, max_value=0.999),
)
def test_below_alpha_power_never_accepts_false(p, g, alpha):
    if below_alpha_power(g, p, alpha):
        with gmpy2.context(precision=256):
            assert gmpy2.log(g) < gmpy2.mpfr(alpha) * gmpy2.log(p)


@settings(deadline=None)
@given(p=st.integers(min_value=10**6, max_value=10**25), alpha=st.floats(min_value=0.64, max_value=0.99))
def test_below_alpha_power_near_threshold(p, alpha):
    # integers straddling p^alpha: acceptance must agree with a 256-bit comparison
    with gmpy2.context(precision=256):
        t = int(gmpy2.floor(gmpy2.exp(gmpy2.mpfr(alpha) * gmpy2.log(p))))
        for g in (t - 1, t, t + 1, t + 2):
            if g >= 1 and below_alpha_power(g, p, alpha):
                assert gmpy2.log(g) < gmpy2.mpfr(alpha) * gmpy2.log(p)


def test_near_tie_is_rejected():
    # g = floor(p^alpha) rounded up lands just above the threshold
    p, alpha = 10**15 + 37, 0.9
    g = math.ceil(p**alpha)
    assert not below_alpha_power(g + 1, p, alpha)
    assert below_alpha_power(g - 10**4, p, alpha)


def test_certified_roots_recheck():
    for p in ntcore.primes_upto(3000):
        g = sfpr(p, 0.9)
        assert g is not None
        assert is_certified_root(g, p, 0.9)
    assert not is_certified_root(4, 7, 0.99)
    assert not is_certified_root(2, 7, 0.99)


def test_bad_arguments():
    with pytest.raises(ValueError):
        below_alpha_power(0, 7, 0.9)
