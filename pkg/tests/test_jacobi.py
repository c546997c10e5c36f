import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy import integrate, special

from conic_fourier.errors import DomainError, ParameterError
from conic_fourier.jacobi import (
    JacobiParams,
    eval_jacobi,
    eval_Zn,
    gauss_jacobi_rule,
    gauss_legendre_rule,
    gegenbauer_measure,
    gegenbauer_poisson_sum,
    gegenbauer_Z,
    jacobi_norm,
    jacobi_series,
    jacobi_table,
    jacobi_tail_mass,
    symmetric_cdf,
    z_scale,
    z_scale_product,
    z_table,
)

params = st.tuples(st.floats(-0.95, 4.0), st.floats(-0.95, 4.0))
PAIRS = [(0.0, 0.0), (1.5, -0.5), (2.5, -0.5), (-0.5, 1.0), (3.0, 2.0)]


def oracle_norm(n, a, b):
    """Normalized ``h_n`` by adaptive quadrature of ``P_n^2`` against the algebraic weight."""
    val, _ = integrate.quad(lambda t: special.eval_jacobi(n, a, b, t) ** 2, -1, 1,
                            weight="alg", wvar=(b, a), limit=200, epsabs=0, epsrel=1e-13)
    mass, _ = integrate.quad(lambda t: 1.0, -1, 1, weight="alg", wvar=(b, a))
    return val / mass


class TestParams:
    def test_constants(self):
        p = JacobiParams(1.5, -0.5)
        assert p.c == pytest.approx(math.gamma(3) / (math.gamma(2.5) * math.gamma(0.5)))
        assert p.c_prime == pytest.approx(p.c / 2**2)

    @pytest.mark.parametrize("a,b", PAIRS)
    def test_c_prime_normalizes(self, a, b):
        mass, _ = integrate.quad(lambda t: 1.0, -1, 1, weight="alg", wvar=(b, a))
        assert JacobiParams(a, b).c_prime * mass == pytest.approx(1.0, rel=1e-12)

    @pytest.mark.parametrize("a,b", [(-1.0, 0.0), (0.0, -1.5), (math.nan, 0.0)])
    def test_rejects(self, a, b):
        with pytest.raises(ParameterError):
            JacobiParams(a, b)

    def test_degenerate_only_at_limit(self):
        with pytest.raises(ParameterError):
            JacobiParams(0.0, -0.5, True)
        assert gegenbauer_measure(-0.5).degenerate_beta
        assert gegenbauer_measure(1.0) == JacobiParams(0.5, 0.5)


class TestEvaluation:
    @pytest.mark.parametrize("a,b", PAIRS)
    def test_matches_scipy(self, a, b):
        t = np.linspace(-1, 1, 41)
        p = JacobiParams(a, b)
        tab = jacobi_table(25, p, t)
        for n in range(26):
            assert_allclose(tab[n], special.eval_jacobi(n, a, b, t), rtol=1e-11, atol=1e-11)
            assert_allclose(eval_jacobi(n, p, t), tab[n], rtol=1e-14, atol=1e-14)

    def test_value_at_one(self):
        p = JacobiParams(2.5, -0.5)
        for n in range(10):
            assert eval_jacobi(n, p, 1.0) == pytest.approx(special.binom(n + 2.5, n))

    @given(params, st.integers(0, 30), st.floats(-1, 1))
    @settings(max_examples=60, deadline=None)
    def test_property_vs_scipy(self, ab, n, t):
        a, b = ab
        ref = special.eval_jacobi(n, a, b, t)
        got = float(eval_jacobi(n, JacobiParams(a, b), t))
        assert got == pytest.approx(ref, rel=1e-9, abs=1e-9 * max(1.0, special.binom(n + max(a, b), n)))

    def test_shape_and_scalar(self):
        p = JacobiParams(0.0, 0.0)
        assert jacobi_table(4, p, np.zeros((3, 2))).shape == (5, 3, 2)
        assert np.ndim(eval_jacobi(2, p, 0.3)) == 0

    def test_domain(self):
        with pytest.raises(DomainError):
            eval_jacobi(2, JacobiParams(0, 0), 1.1)
        with pytest.raises(ParameterError):
            eval_jacobi(-1, JacobiParams(0, 0), 0.0)
        with pytest.raises(ParameterError):
            eval_jacobi(1.5, JacobiParams(0, 0), 0.0)


class TestNorms:
    @pytest.mark.parametrize("a,b", PAIRS)
    def test_against_quadrature_oracle(self, a, b):
        p = JacobiParams(a, b)
        for n in (0, 1, 2, 5, 9):
            assert jacobi_norm(n, p) == pytest.approx(oracle_norm(n, a, b), rel=1e-9)

    def test_large_degree_finite(self):
        assert np.isfinite(jacobi_norm(5000, JacobiParams(3.0, 2.0)))

    @pytest.mark.parametrize("a,b", PAIRS)
    def test_z_reproduces_at_one(self, a, b):
        # Z_n integrates against P_m to P_m(1) delta_nm
        p = JacobiParams(a, b)
        rule = gauss_jacobi_rule(20, p)
        Z = z_table(8, p, rule.nodes)
        P = jacobi_table(8, p, rule.nodes)
        G = (Z * rule.weights) @ P.T
        assert_allclose(G, np.diag(jacobi_table(8, p, np.array(1.0))), atol=1e-11)

    def test_eval_zn_matches_table(self):
        p = JacobiParams(1.0, 0.5)
        t = np.linspace(-1, 1, 7)
        assert_allclose(eval_Zn(6, p, t), z_table(6, p, t)[6], rtol=1e-14)


class TestQuadrature:
    @pytest.mark.parametrize("a,b", PAIRS)
    def test_against_scipy_roots(self, a, b):
        x, w = special.roots_jacobi(15, a, b)
        rule = gauss_jacobi_rule(15, JacobiParams(a, b))
        assert_allclose(rule.nodes, x, atol=1e-13)
        assert_allclose(rule.weights, w / w.sum(), rtol=1e-10)
        assert rule.exactness_degree == 29

    @given(params, st.integers(1, 12), st.integers(0, 2**31))
    @settings(max_examples=40, deadline=None)
    def test_exactness(self, ab, m, seed):
        a, b = ab
        p = JacobiParams(a, b)
        coef = np.random.default_rng(seed).standard_normal(2 * m)
        rule = gauss_jacobi_rule(m, p)
        fine = gauss_jacobi_rule(m + 20, p)
        approx = rule.integrate(np.polynomial.polynomial.polyval(rule.nodes, coef))
        exact = fine.integrate(np.polynomial.polynomial.polyval(fine.nodes, coef))
        assert approx == pytest.approx(exact, abs=1e-10 * np.abs(coef).sum())

    def test_limit_measure(self):
        rule = gauss_jacobi_rule(5, JacobiParams.limit_measure())
        assert_allclose(rule.nodes, [-1, 1])
        assert_allclose(rule.weights, [0.5, 0.5])

    def test_legendre(self):
        x, w = special.roots_legendre(9)
        rule = gauss_legendre_rule(9)
        assert_allclose(rule.nodes, x, atol=1e-14)
        assert_allclose(rule.weights, w / 2, rtol=1e-12)

    def test_bad_count(self):
        with pytest.raises(ParameterError):
            gauss_jacobi_rule(0, JacobiParams(0, 0))


class TestDistributions:
    @pytest.mark.parametrize("a,b", PAIRS)
    def test_tail_mass(self, a, b):
        p = JacobiParams(a, b)
        for x in (-0.7, 0.0, 0.4, 0.95):
            ref, _ = integrate.quad(lambda t: p.c_prime * p.weight(t), x, 1, limit=200)
            assert jacobi_tail_mass(p, x) == pytest.approx(ref, rel=1e-8)
        assert jacobi_tail_mass(p, -1.0) == pytest.approx(1.0)
        assert jacobi_tail_mass(p, 1.0) == 0.0

    def test_symmetric_cdf(self):
        assert symmetric_cdf(0.5, 0.3) == pytest.approx(0.65)
        assert symmetric_cdf(1.0, 0.0) == pytest.approx(0.5)
        assert symmetric_cdf(-0.5, 0.2) == 0.5


class TestGegenbauer:
    @pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
    def test_against_scipy(self, lam):
        t = np.linspace(-1, 1, 21)
        for n in range(12):
            ref = (n + lam) / lam * special.eval_gegenbauer(n, lam, t)
            assert_allclose(gegenbauer_Z(n, lam, t), ref, rtol=1e-11, atol=1e-11)

    @pytest.mark.parametrize("a", [0.5, 1.5, 2.5])
    def test_quadratic_transformation(self, a):
        theta = np.linspace(0, np.pi, 50)
        for n in range(16):
            lhs = eval_Zn(n, JacobiParams(a, -0.5), np.cos(2 * theta))
            rhs = gegenbauer_Z(2 * n, a + 0.5, np.cos(theta))
            assert_allclose(lhs, rhs, rtol=1e-11, atol=1e-11 * abs(rhs[0]))

    def test_poisson_sum(self):
        u = np.linspace(-1, 1, 11)
        series = sum(gegenbauer_Z(n, 1.5, u) * 0.4**n for n in range(120))
        assert_allclose(gegenbauer_poisson_sum(1.5, 0.4, u), series, rtol=1e-12)


def test_series_shapes():
    p = JacobiParams(0.5, 0.0)
    t = np.linspace(-1, 1, 5)
    one = jacobi_series([1.0, 0.0, 2.0], p, t)
    assert one.shape == (5,)
    two = jacobi_series(np.array([[1.0, 0.0, 2.0], [0.0, 1.0, 0.0]]), p, t)
    assert two.shape == (5, 2)
    assert_allclose(two[:, 0], one)


@pytest.mark.parametrize("a,b", PAIRS + [(-0.5, -0.5)])
def test_z_scale_product(a, b):
    p = JacobiParams(a, b)
    assert_allclose(z_scale_product(150, p).astype(float), z_scale(150, p), rtol=1e-12)


def test_extended_series_matches_float():
    p = JacobiParams(1.5, 0.5)
    t = np.linspace(-1, 1, 31)
    c = np.random.default_rng(2).standard_normal(20)
    assert_allclose(jacobi_series(c, p, t, np.longdouble), jacobi_series(c, p, t), rtol=1e-11, atol=1e-11)
    assert jacobi_series(c, p, t, np.longdouble).dtype == np.float64
