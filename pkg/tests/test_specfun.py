import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coe.errors import ConvergenceError, DomainError, PoleError, RegionOfConvergenceError
from coe.specfun import (
    EULER_GAMMA,
    KdfParams,
    SeriesEvaluation,
    harmonic,
    hyp_pfq,
    jacobi_p,
    kdf,
    log_gamma,
    polygamma,
    script_h,
)
from oracles import hyp_pfq_mp, kdf_brute

CLOSED = KdfParams((2, 2.5), (1, 0.5), (1,), (3, 4), (1.5,), ())


def jacobi_finite_sum(n, a, b, x):
    """Explicit finite-sum representation in powers of (x - 1)/2 and (x + 1)/2."""
    with mpmath.workdps(40):
        x = mpmath.mpf(x)
        total = mpmath.mpf(0)
        for s in range(n + 1):
            total += (
                mpmath.binomial(n + a, n - s) * mpmath.binomial(n + b, s)
                * ((x - 1) / 2) ** s * ((x + 1) / 2) ** (n - s)
            )
        return float(total)


class TestLogGamma:
    @pytest.mark.parametrize("x, expected", [(1.0, 0.0), (2.0, 0.0), (0.5, math.log(math.sqrt(math.pi)))])
    def test_values(self, x, expected):
        assert log_gamma(x) == pytest.approx(expected, abs=1e-14)

    @pytest.mark.parametrize("x", [1e-3, 0.37, 7.5, 123.25, 1e6])
    def test_relative_accuracy(self, x):
        ref = float(mpmath.loggamma(x))
        assert abs(log_gamma(x) - ref) <= 1e-13 * max(1.0, abs(ref))

    @pytest.mark.parametrize("x", [0.0, -1.0, -0.5])
    def test_domain(self, x):
        with pytest.raises(DomainError):
            log_gamma(x)


class TestPolygamma:
    def test_anchors(self):
        assert polygamma(0, 1.0) == pytest.approx(-EULER_GAMMA, abs=1e-14)
        assert polygamma(1, 1.0) == pytest.approx(math.pi ** 2 / 6, abs=1e-14)
        assert polygamma(0, 2.0) == pytest.approx(1 - EULER_GAMMA, abs=1e-14)

    @pytest.mark.parametrize("x", [0.5, 0.73, 1.5, 3.2, 9.99, 10.0, 47.0, 1e4])
    def test_against_mpmath(self, x):
        assert abs(polygamma(0, x) - float(mpmath.digamma(x))) <= 1e-12
        assert abs(polygamma(1, x) - float(mpmath.psi(1, x))) <= 1e-12

    @pytest.mark.parametrize("z", [0.5, 1.0, 2.5, 10.0])
    def test_duplication(self, z):
        lhs = 2 * polygamma(0, 2 * z)
        rhs = 2 * math.log(2) + polygamma(0, z) + polygamma(0, z + 0.5)
        assert lhs == pytest.approx(rhs, abs=1e-11)

    def test_vectorized(self):
        x = np.array([1.0, 2.0, 30.0])
        np.testing.assert_allclose(polygamma(0, x), [polygamma(0, v) for v in x], rtol=0, atol=0)

    def test_errors(self):
        with pytest.raises(DomainError):
            polygamma(0, 0.0)
        with pytest.raises(DomainError):
            polygamma(2, 1.0)


class TestHarmonic:
    @pytest.mark.parametrize("n, expected", [(0, 0.0), (1, 1.0), (4, 25 / 12)])
    def test_values(self, n, expected):
        assert harmonic(n) == pytest.approx(expected, abs=1e-15)

    @pytest.mark.parametrize("n", [63, 64, 65, 500, 10 ** 5])
    def test_large(self, n):
        assert harmonic(n) == pytest.approx(float(mpmath.harmonic(n)), rel=1e-14)

    @pytest.mark.parametrize("k, expected", [(0, 1.0), (1, 4 / 3), (2, 49 / 20 - 11 / 12)])
    def test_script_h(self, k, expected):
        assert script_h(k) == pytest.approx(expected, abs=1e-14)

    def test_script_h_digamma_identity(self):
        k = np.arange(0, 201)
        rhs = 0.5 * polygamma(0, k + 0.5) + math.log(2) + (2 * EULER_GAMMA * k + EULER_GAMMA + 2) / (4 * k + 2)
        np.testing.assert_allclose(script_h(k), rhs, rtol=0, atol=1e-11)


class TestJacobi:
    def test_low_degrees(self):
        assert jacobi_p(0, 1.3, 0.2, 0.7) == 1.0
        a, b, x = 1.5, 0.5, 0.3
        assert jacobi_p(1, a, b, x) == pytest.approx((a + 1) + (a + b + 2) * (x - 1) / 2, abs=1e-15)
        assert jacobi_p(2, 0, 0, 0.5) == pytest.approx(-0.125, abs=1e-15)

    @pytest.mark.parametrize("D", [0, 1, 5, 13, 20])
    def test_against_finite_sum(self, D):
        xs = np.linspace(-1, 1, 11)
        for n in (0, 1, 7, 24, 40):
            ours = jacobi_p(n, D, D, xs)
            ref = np.array([jacobi_finite_sum(n, D, D, x) for x in xs])
            scale = np.max(np.abs(ref))
            # relative to the polynomial's size on [-1, 1]; pointwise near zeros
            np.testing.assert_allclose(ours, ref, rtol=1e-10, atol=1e-10 * scale)

    def test_domain(self):
        with pytest.raises(DomainError):
            jacobi_p(3, -1.0, 0.0, 0.2)


class TestHypPfq:
    def test_trivial(self):
        assert hyp_pfq([1, 1, 1.5], [2, 3], 0.0, tol=1e-12).value == 1.0
        assert hyp_pfq([1], [], 0.5, tol=1e-12).value == pytest.approx(2.0, abs=1e-12)

    def test_reference_value(self):
        res = hyp_pfq([1, 1, 1.5], [2, 3], 0.75, tol=1e-10)
        assert res.converged
        assert abs(res.value - hyp_pfq_mp([1, 1, 1.5], [2, 3], 0.75)) <= 1e-8

    @pytest.mark.parametrize("z", [-0.9, -0.3, 0.2, 0.6, 0.95])
    def test_tail_bound_honest(self, z):
        res = hyp_pfq([1, 1, 0.5], [2, 3], z, tol=1e-12)
        assert abs(res.value - hyp_pfq_mp([1, 1, 0.5], [2, 3], z)) <= max(res.tail_bound, 1e-14) + 1e-15

    def test_unit_circle_convergent(self):
        # 3F2(1,1,1/2;2,3;1) converges (parameter excess 5/2)
        res = hyp_pfq([1, 1, 0.5], [2, 3], 1.0, tol=1e-8)
        assert abs(res.value - hyp_pfq_mp([1, 1, 0.5], [2, 3], 1.0)) <= 1e-7

    def test_errors(self):
        with pytest.raises(RegionOfConvergenceError):
            hyp_pfq([1], [], 1.5)
        with pytest.raises(PoleError):
            hyp_pfq([1], [-2.0], 0.5)
        with pytest.raises(ConvergenceError):
            hyp_pfq([1], [], 0.999, tol=1e-15, max_terms=50)

    def test_budget_without_raise(self):
        res = hyp_pfq([1], [], 0.999, tol=1e-15, max_terms=50, raise_on_budget=False)
        assert not res.converged and res.terms_used <= 51

    def test_deterministic(self):
        a = hyp_pfq([1, 1, 1.5], [2, 3], 0.75)
        b = hyp_pfq([1, 1, 1.5], [2, 3], 0.75)
        assert a == b


class TestKdf:
    def test_origin(self):
        assert kdf(CLOSED, 0.0, 0.0).value == 1.0

    @pytest.mark.parametrize("x, y", [(0.3, 0.3), (0.5, 0.2), (-0.4, 0.6)])
    def test_against_brute_force(self, x, y):
        res = kdf(CLOSED, x, y, tol=1e-12)
        ref = kdf_brute(CLOSED.a_top, CLOSED.b_row, CLOSED.c_row, CLOSED.alpha_bot, CLOSED.beta_bot,
                        CLOSED.gamma_bot, x, y, n=90)
        assert abs(res.value - ref) <= 1e-10

    def test_reduces_to_pfq(self):
        x = 0.6
        res = kdf(CLOSED, x, 0.0, tol=1e-13)
        ref = hyp_pfq([2, 2.5, 1, 0.5], [3, 4, 1.5], x, tol=1e-14)
        assert res.value == pytest.approx(ref.value, abs=1e-12)

    def test_boundary_refused(self):
        with pytest.raises(RegionOfConvergenceError):
            kdf(CLOSED, 1.0, 1.0)
        with pytest.raises(RegionOfConvergenceError):
            kdf(CLOSED, 0.2, -1.0)

    def test_p_greater_than_l_region(self):
        params = KdfParams((1, 1), (), (), (1,), (), ())
        with pytest.raises(RegionOfConvergenceError):
            kdf(params, 0.5, 0.5)  # sqrt-norm condition |x| + |y| < 1 fails
        # F = sum (1)_{r+s}^2/((1)_{r+s} r! s!) x^r y^s = 1/(1 - x - y)
        assert kdf(params, 0.2, 0.3, tol=1e-13).value == pytest.approx(2.0, abs=1e-11)

    def test_entire_case(self):
        params = KdfParams((), (), (), (), (), ())
        assert kdf(params, 1.5, -0.7, tol=1e-14).value == pytest.approx(math.exp(0.8), abs=1e-12)

    def test_pole(self):
        with pytest.raises(PoleError):
            KdfParams((1,), (), (), (0,), (), ())

    def test_near_boundary_fast(self):
        res = kdf(CLOSED, 0.99, 0.99, tol=1e-10)
        assert res.converged


class TestSeriesEvaluation:
    def test_negative_tail_rejected(self):
        with pytest.raises(ValueError):
            SeriesEvaluation(1.0, 3, -1e-3, True)

    def test_float(self):
        assert float(SeriesEvaluation(0.25, 3, 0.0, True)) == 0.25


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 200.0))
def test_digamma_recurrence(x):
    assert polygamma(0, x + 1) - polygamma(0, x) == pytest.approx(1 / x, abs=1e-11)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 300))
def test_harmonic_exact_small(n):
    if n <= 64:
        exact = float(sum((Fraction(1, j) for j in range(1, n + 1)), Fraction(0)))
        assert harmonic(n) == exact
    else:
        assert harmonic(n) == pytest.approx(harmonic(n - 1) + 1 / n, rel=1e-14)
