import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dampmap.errors import DomainError, NonCancellableSingularity
from dampmap.specfun import (
    gamma_int,
    gen_binomial,
    hyp1f1_terminating,
    hyp3f2_regularized,
    laguerre_assoc,
)


@pytest.mark.parametrize("n, expected", [(4, 6), (1, 1), (8, 5040)])
def test_gamma_int(n, expected):
    assert gamma_int(n) == expected
    assert isinstance(gamma_int(n), Fraction)


@pytest.mark.parametrize("n", [0, -3])
def test_gamma_int_domain(n):
    with pytest.raises(DomainError):
        gamma_int(n)


@pytest.mark.parametrize("a, j, expected", [(5, 2, 10), (-3, 1, -3), (-4, 0, 1), (-3, 3, -10), (2, 5, 0)])
def test_gen_binomial(a, j, expected):
    assert gen_binomial(a, j) == expected


def test_gen_binomial_rejects_negative_lower():
    with pytest.raises(DomainError):
        gen_binomial(3, -1)


@pytest.mark.parametrize("n, b, x, expected", [(0, 1, 7.3, 1.0), (1, 1, 2, -1.0), (2, 1, 1, -0.5)])
def test_hyp1f1_examples(n, b, x, expected):
    assert hyp1f1_terminating(n, b, x) == pytest.approx(expected, abs=1e-15)


def test_hyp1f1_vectorized_and_domain():
    x = np.linspace(0, 3, 7)
    assert np.allclose(hyp1f1_terminating(1, 1, x), 1 - x)
    with pytest.raises(DomainError):
        hyp1f1_terminating(3, -1, 0.5)


@pytest.mark.parametrize("n, a, x, expected", [(0, 0, 4.2, 1.0), (1, 0, 2, -1.0), (2, 1, 0, 3.0)])
def test_laguerre_examples(n, a, x, expected):
    assert laguerre_assoc(n, a, x) == pytest.approx(expected, abs=1e-15)


def test_hyp3f2_zero_term_series():
    assert hyp3f2_regularized(0, 4, 4, 1, 4, prefactor_binom=(-4, 0)) == 1


def test_hyp3f2_two_term_value():
    # binom(-3, 1) * (1 - 16/3) = 13
    assert hyp3f2_regularized(1, 4, 4, 1, 3, prefactor_binom=(-3, 1)) == 13


def test_hyp3f2_cancellation_at_vanishing_lower_parameter():
    # n = 4: lower parameter 4 - n = 0, finite only through the binomial prefactor
    assert hyp3f2_regularized(4, 4, 4, 1, 0, prefactor_binom=(0, 4)) == 309
    assert hyp3f2_regularized(5, 4, 4, 1, -1, prefactor_binom=(1, 5)) == 561


def test_hyp3f2_reports_surviving_singularity():
    with pytest.raises(NonCancellableSingularity) as info:
        hyp3f2_regularized(3, 4, 4, 1, -1)
    assert info.value.term == 2


@given(n=st.integers(0, 12), a=st.integers(0, 8), x=st.floats(0, 20))
def test_laguerre_equals_scaled_1f1(n, a, x):
    lag = laguerre_assoc(n, a, x)
    f = math.comb(n + a, n) * hyp1f1_terminating(n, a + 1, x)
    # scale by the size of the summands: cancellation near roots is absolute
    size = sum(math.comb(n + a, n - j) * x**j / math.factorial(j) for j in range(n + 1))
    assert abs(lag - f) <= 1e-12 * size


@given(a=st.integers(0, 40), data=st.data())
def test_gen_binomial_matches_classical(a, data):
    j = data.draw(st.integers(0, a))
    assert gen_binomial(a, j) == math.comb(a, j)


@given(n=st.integers(0, 10), l=st.integers(0, 5))
def test_rational_kernel_is_exact_and_repeatable(n, l):
    a = hyp3f2_regularized(n, l + 4, 4, l + 1, 4 - n, prefactor_binom=(n - 4, n))
    b = hyp3f2_regularized(n, l + 4, 4, l + 1, 4 - n, prefactor_binom=(n - 4, n))
    assert isinstance(a, Fraction) and a == b
