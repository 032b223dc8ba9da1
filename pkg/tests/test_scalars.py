from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modvoa.errors import CharacteristicMismatch, DenominatorDivisibleByP
from modvoa.scalars import (QQ, Field, Scalar, binomial_int, binomial_mod,
                            is_prime, lucas_binomial, reduce_rational)

PRIMES = st.sampled_from([2, 3, 5, 7, 11, 13, 101])


def test_reduce_rational_examples():
    assert reduce_rational(Fraction(1, 2), 5) == 3
    assert reduce_rational(0, 7) == 0
    with pytest.raises(DenominatorDivisibleByP):
        reduce_rational(Fraction(1, 5), 5)


def test_reduce_rational_negative_and_integral():
    assert reduce_rational(-1, 5) == 4
    assert reduce_rational(Fraction(-3, 4), 7) == (-3 * pow(4, -1, 7)) % 7


def test_binomial_int_examples():
    assert binomial_int(4, 2) == 6
    assert binomial_int(-1, 3) == -1
    for n in range(-5, 6):
        assert binomial_int(n, 0) == 1


def test_binomial_int_falling_factorial():
    # direct falling factorial as an independent route
    for n in range(-8, 9):
        for j in range(0, 7):
            num = 1
            for t in range(j):
                num *= n - t
            den = 1
            for t in range(1, j + 1):
                den *= t
            assert binomial_int(n, j) == num // den


def test_binomial_mod_examples():
    assert binomial_mod(5, 2, 5) == 0
    assert binomial_mod(8, 1, 7) == 1
    assert binomial_mod(6, 3, 5) == 0
    assert lucas_binomial(6, 3, 5) == 0


@settings(max_examples=200)
@given(n=st.integers(0, 3000), j=st.integers(0, 3000), p=PRIMES)
def test_binomial_mod_matches_lucas(n, j, p):
    if j > n:
        j = n
    assert binomial_mod(n, j, p) == lucas_binomial(n, j, p)


@settings(max_examples=200)
@given(n=st.integers(-60, 60), j=st.integers(1, 30))
def test_pascal_identity(n, j):
    assert binomial_int(n, j) == binomial_int(n - 1, j) + binomial_int(n - 1, j - 1)


def _p_free(p):
    return st.builds(Fraction, st.integers(-500, 500),
                     st.integers(1, 500).filter(lambda d: d % p))


@settings(max_examples=150)
@given(data=st.data(), p=PRIMES)
def test_reduction_is_ring_homomorphism(data, p):
    a = data.draw(_p_free(p))
    b = data.draw(_p_free(p))
    ra, rb = reduce_rational(a, p), reduce_rational(b, p)
    assert reduce_rational(a + b, p) == (ra + rb) % p
    assert reduce_rational(a * b, p) == ra * rb % p


def test_scalar_arithmetic_and_mixing():
    a = Scalar(3, 5)
    b = Scalar(4, 5)
    assert (a + b).value == 2
    assert (a * b).value == 2
    assert (a / b) * b == a
    assert Scalar(Fraction(1, 2), 0) * 2 == 1
    with pytest.raises(CharacteristicMismatch):
        _ = a + Scalar(1, 7)
    with pytest.raises(CharacteristicMismatch):
        Field(5)(Scalar(1, 7))


def test_field_coercion():
    f5 = Field(5)
    assert f5(Fraction(1, 2)) == 3
    assert f5(-1) == 4
    assert QQ(Fraction(4, 2)) == 2 and isinstance(QQ(Fraction(4, 2)), int)
    assert f5.inv(2) == 3
    with pytest.raises(ValueError):
        Field(6)


def test_is_prime():
    assert [n for n in range(20) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19]
