import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from laguerre_mzi.errors import DimensionError, DomainError
from laguerre_mzi.series import (
    PAIRS,
    MultiSeries,
    QuadraticExponent,
    extract_Dn,
    series_exp,
    series_from_quadratic,
)

finite = st.floats(-2.0, 2.0, allow_nan=False)
cplx = st.builds(complex, finite, finite)


def random_quadratic(rng, scale=0.7):
    return QuadraticExponent({p: scale * complex(*rng.normal(size=2)) for p in PAIRS})


class TestQuadraticExponent:
    def test_key_spellings_are_canonical(self):
        q = QuadraticExponent({"tau*x": 1.0, "xtau": 2.0, ("tau", "x"): 0.5})
        assert q.pair_coefficients == {("x", "tau"): 3.5 + 0j}
        assert q["x*tau"] == q["taux"] == 3.5

    def test_rejects_non_pairs(self):
        with pytest.raises(KeyError):
            QuadraticExponent({"xyz": 1.0})
        with pytest.raises(KeyError):
            QuadraticExponent({"q": 1.0})

    def test_from_product_expands_bilinear_form(self):
        q = QuadraticExponent.from_product({"x": 2.0, "y": 1.0}, {"x": 1.0, "tau": 3.0}, scale=0.5)
        assert q["xx"] == 1.0
        assert q["xtau"] == 3.0
        assert q["xy"] == 0.5
        assert q["ytau"] == 1.5
        assert q["tt"] == 0

    def test_sum_and_conj(self):
        a = QuadraticExponent({"xy": 1 + 1j})
        b = QuadraticExponent({"yx": 2.0, "tt": -1j})
        s = (a + b).conj()
        assert s["xy"] == 3 - 1j
        assert s["tt"] == 1j


class TestSeriesFromQuadratic:
    def test_single_pair(self):
        s = series_from_quadratic(QuadraticExponent({"xy": 1}), 2)
        expected = np.zeros((3,) * 4, dtype=complex)
        expected[1, 1, 0, 0] = 1
        np.testing.assert_array_equal(s.coefficients, expected)

    def test_empty_is_zero(self):
        s = series_from_quadratic(QuadraticExponent(), 3)
        assert s.coefficients.shape == (4, 4, 4, 4)
        assert not s.coefficients.any()

    def test_square_above_cap_is_dropped(self):
        s = series_from_quadratic(QuadraticExponent({"xx": 2 + 1j}), 1)
        assert not s.coefficients.any()

    def test_negative_cap(self):
        with pytest.raises(DomainError):
            series_from_quadratic(QuadraticExponent(), -1)


class TestSeriesExp:
    def test_scalar_exponential(self):
        s = series_exp(series_from_quadratic(QuadraticExponent({"xy": 1}), 2))
        c = s.coefficients
        assert c[0, 0, 0, 0] == 1
        assert c[1, 1, 0, 0] == 1
        assert c[2, 2, 0, 0] == pytest.approx(0.5)
        assert np.count_nonzero(c) == 3

    @pytest.mark.parametrize("n", range(0, 6))
    def test_factorized_coefficient(self, n):
        a, b = 0.8 - 0.3j, -1.7
        s = series_exp(series_from_quadratic(QuadraticExponent({"xy": a, "ttau": b}), n))
        assert s.coefficient(n, n, n, n) == pytest.approx(a**n * b**n / math.factorial(n) ** 2, rel=1e-13)

    def test_requires_zero_constant(self):
        with pytest.raises(DomainError):
            series_exp(MultiSeries.one(2))

    def test_matches_product_expansion(self):
        # exp(q) exp(-q) = 1 within the cap
        rng = np.random.default_rng(4)
        q = random_quadratic(rng)
        pos = series_exp(series_from_quadratic(q, 3))
        neg = series_exp(series_from_quadratic(QuadraticExponent({k: -v for k, v in q.pair_coefficients.items()}), 3))
        np.testing.assert_allclose((pos * neg).coefficients, MultiSeries.one(3).coefficients, atol=1e-12)


class TestExtractDn:
    def test_unit_example(self):
        s = series_exp(series_from_quadratic(QuadraticExponent({"xy": 1, "ttau": 1}), 1))
        assert extract_Dn(s, 1) == pytest.approx(1.0)

    def test_second_order_example(self):
        s = series_exp(series_from_quadratic(QuadraticExponent({"xy": 2, "ttau": 3}), 2))
        assert extract_Dn(s, 2) == pytest.approx(36.0, rel=1e-14)

    def test_missing_monomial(self):
        assert extract_Dn(MultiSeries.one(1), 1) == 0

    def test_cap_below_n(self):
        with pytest.raises(DimensionError):
            extract_Dn(MultiSeries.zeros(1), 2)

    def test_n_zero_reads_constant(self):
        assert extract_Dn(MultiSeries.one(0) * 2.5, 0) == 2.5


class TestMultiSeries:
    def test_shape_validation(self):
        with pytest.raises(DimensionError):
            MultiSeries(np.zeros((2, 2, 3, 2)))
        with pytest.raises(DimensionError):
            MultiSeries.zeros(1) + MultiSeries.zeros(2)

    def test_immutable(self):
        s = MultiSeries.zeros(1)
        with pytest.raises(ValueError):
            s.coefficients[0, 0, 0, 0] = 1

    def test_out_of_cap_coefficient_is_zero(self):
        assert MultiSeries.one(1).coefficient(2, 0, 0, 0) == 0
        assert MultiSeries.one(1).coefficient(-1, 0, 0, 0) == 0

    def test_product_truncates(self):
        x = series_from_quadratic(QuadraticExponent({"xy": 1.0}), 1)
        assert not (x * x).coefficients.any()


@settings(max_examples=40, deadline=None)
@given(alpha=cplx, seed=st.integers(0, 2**16), n=st.integers(0, 3))
def test_extract_is_linear(alpha, seed, n):
    rng = np.random.default_rng(seed)
    s1 = series_exp(series_from_quadratic(random_quadratic(rng), n))
    s2 = series_exp(series_from_quadratic(random_quadratic(rng), n))
    lhs = extract_Dn(alpha * s1 + s2, n)
    rhs = alpha * extract_Dn(s1, n) + extract_Dn(s2, n)
    assert abs(lhs - rhs) <= 1e-12 * (1 + abs(rhs))


@settings(max_examples=40, deadline=None)
@given(a=cplx, b=cplx, n=st.integers(0, 5))
def test_factorized_exponent_gives_power_product(a, b, n):
    s = series_exp(series_from_quadratic(QuadraticExponent({"xy": a, "ttau": b}), n))
    expected = a**n * b**n
    assert abs(extract_Dn(s, n) - expected) <= 1e-12 * (1 + abs(expected))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**16), n=st.integers(0, 3), extra=st.integers(1, 2))
def test_raising_cap_does_not_change_result(seed, n, extra):
    q = random_quadratic(np.random.default_rng(seed))
    low = extract_Dn(series_exp(series_from_quadratic(q, n)), n)
    high = extract_Dn(series_exp(series_from_quadratic(q, n + extra)), n)
    assert abs(low - high) <= 1e-12 * (1 + abs(low))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**16), n=st.integers(0, 3))
def test_conjugation_commutes(seed, n):
    q = random_quadratic(np.random.default_rng(seed))
    direct = extract_Dn(series_exp(series_from_quadratic(q.conj(), n)), n)
    via = np.conj(extract_Dn(series_exp(series_from_quadratic(q, n)), n))
    assert abs(direct - via) <= 1e-12 * (1 + abs(via))
