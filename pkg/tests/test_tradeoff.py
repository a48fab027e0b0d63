import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

import oracles
from gdpmech.calibrate import laplace_b_freq
from gdpmech.errors import DataError, DomainError
from gdpmech.tradeoff import (
    BiLaplace,
    Empirical,
    EpsDeltaDP,
    EpsDP,
    FreqLaplace,
    GaussianGDP,
    UniLaplace,
    dominates,
    empirical_tradeoff,
    eps_from_mu,
    evaluate,
    mu_from_eps,
    tradeoff_table,
    write_curve_csv,
)

GRID = np.linspace(0.0, 1.0, 1001)
pos = st.floats(0.01, 6.0)


def curves():
    return st.one_of(
        pos.map(GaussianGDP),
        pos.map(EpsDP),
        st.tuples(pos, st.floats(0, 0.5)).map(lambda t: EpsDeltaDP(*t)),
        st.floats(0, 6).map(UniLaplace),
        st.tuples(st.floats(0, 5), st.floats(0, 5)).map(lambda t: BiLaplace(*t)),
        st.floats(0.15, 20).map(FreqLaplace),
    )


def delta_method_se(mu, alpha, n):
    """SE of an empirical GDP curve at ``alpha`` from both samples."""
    z = stats.norm.isf(alpha)
    slope = stats.norm.pdf(z - mu) / stats.norm.pdf(z)
    beta = oracles.gdp(mu, alpha)
    return np.sqrt((beta * (1 - beta) + slope**2 * alpha * (1 - alpha)) / n)


class TestExamples:
    def test_gaussian(self):
        g = GaussianGDP(1.0)
        assert g(0.0) == 1.0
        assert g(1.0) == 0.0
        assert g(0.30853754) == pytest.approx(0.30853754, abs=1e-8)
        np.testing.assert_allclose(g(GRID[1:-1]), oracles.gdp(1.0, GRID[1:-1]), atol=1e-15)

    def test_unilaplace(self):
        assert UniLaplace(1.0)(0.5) == pytest.approx(math.exp(-1) / 2, abs=1e-15)
        assert UniLaplace(1.0)(0.5) == pytest.approx(0.18393972, abs=1e-8)

    def test_bilaplace_first_branch(self):
        assert BiLaplace(1, 1)(0.02) == pytest.approx(1 - math.exp(2) * 0.02, abs=1e-15)
        assert BiLaplace(1, 1)(0.02) == pytest.approx(0.8522189, abs=1e-7)

    def test_freq_fixed_point(self):
        fp = 0.25 * math.exp(-1) * 3
        assert FreqLaplace(1.0)(fp) == pytest.approx(fp, abs=1e-12)
        assert FreqLaplace(1.0)(0.27590958) == pytest.approx(0.27590958, abs=1e-8)

    def test_eps_and_epsdelta(self):
        e = EpsDP(1.0)
        assert e(0.0) == 1.0 and e(1.0) == 0.0
        assert e(0.1) == pytest.approx(1 - math.e * 0.1)
        ed = EpsDeltaDP(1.0, 0.1)
        assert ed(0.0) == pytest.approx(0.9)
        assert ed(0.95) == 0.0
        assert EpsDeltaDP(1.0, 0.0)(0.3) == pytest.approx(EpsDP(1.0)(0.3))

    def test_evaluate_alias(self):
        assert evaluate(GaussianGDP(2.0), 0.1) == GaussianGDP(2.0)(0.1)

    @pytest.mark.parametrize("alpha", [-0.01, 1.01, np.nan])
    def test_alpha_domain(self, alpha):
        with pytest.raises(DomainError):
            GaussianGDP(1.0)(alpha)

    def test_parameter_domain(self):
        for bad in (lambda: GaussianGDP(0.0), lambda: EpsDP(-1.0), lambda: EpsDeltaDP(1.0, 1.5),
                    lambda: UniLaplace(-0.1), lambda: FreqLaplace(0.0), lambda: BiLaplace(np.inf, 1)):
            with pytest.raises(DomainError):
                bad()

    def test_array_shape_preserved(self):
        a = np.full((3, 4), 0.2)
        for c in (GaussianGDP(1), BiLaplace(1, 2), FreqLaplace(2.0), UniLaplace(1)):
            assert c(a).shape == (3, 4)


class TestClosedFormsAgainstOracles:
    @pytest.mark.parametrize("d1,d2", [(1, 1), (2, 0.7), (0.3, 0.0), (4, 3), (0.01, 0.01)])
    def test_bilaplace_parametric(self, d1, d2):
        a, b = oracles.bilap_curve_param(max(d1, d2), min(d1, d2), 2001)
        np.testing.assert_allclose(BiLaplace(d1, d2)(a), b, atol=1e-12)

    @pytest.mark.parametrize("b", [0.2, 0.7, 1.0, 3.0, 25.0])
    def test_freq_parametric(self, b):
        a, beta = oracles.freq_curve_param(b, 2001)
        np.testing.assert_allclose(FreqLaplace(b)(a), beta, atol=1e-12)

    @pytest.mark.parametrize("b", [0.3, 1.0, 2.5, 10.0])
    def test_freq_equals_bilaplace_equal_shifts(self, b):
        np.testing.assert_allclose(FreqLaplace(b)(GRID), BiLaplace(1 / b, 1 / b)(GRID), atol=1e-13)

    def test_bilaplace_zero_second_shift_is_unilaplace(self):
        np.testing.assert_allclose(BiLaplace(1.3, 0.0)(GRID), UniLaplace(1.3)(GRID), atol=1e-12)

    def test_canonicalisation(self):
        c = BiLaplace(-0.5, 2.0)
        assert (c.delta1, c.delta2) == (2.0, 0.5)
        assert c == BiLaplace(2.0, -0.5)
        np.testing.assert_array_equal(c(GRID), BiLaplace(0.5, 2.0)(GRID))


class TestProperties:
    @given(curves())
    def test_tradeoff_axioms(self, curve):
        b = curve(GRID)
        assert b[0] <= 1.0
        assert np.all(np.diff(b) <= 1e-12)
        assert np.all(b <= 1.0 - GRID + 1e-12)
        assert np.all(b[:-2] - 2 * b[1:-1] + b[2:] >= -1e-9)

    @given(st.one_of(st.floats(0.15, 20).map(FreqLaplace),
                     st.tuples(st.floats(0, 5), st.floats(0, 5)).map(lambda t: BiLaplace(*t))))
    def test_self_inverse(self, curve):
        a = GRID
        np.testing.assert_allclose(curve(curve(a)), a, atol=1e-9)
        fp = curve.fixed_point
        assert curve(curve(fp)) == pytest.approx(fp, abs=1e-9)

    @given(st.floats(0.05, 6.0))
    def test_domination_chain(self, mu):
        g = GaussianGDP(mu)
        b = laplace_b_freq(mu).scale
        delta = -2 * math.log(2 * stats.norm.cdf(-mu / 2))
        for f in (FreqLaplace(b), UniLaplace(delta), EpsDP(eps_from_mu(mu))):
            assert np.min(f(GRID) - g(GRID)) >= -1e-9

    @given(st.floats(0, 4), st.floats(0, 4))
    def test_bilaplace_above_unilaplace(self, d1, d2):
        diff = BiLaplace(d1, d2)(GRID) - UniLaplace(d1 + d2)(GRID)
        assert np.min(diff) >= -1e-9

    @given(st.floats(0.05, 4), st.floats(0.05, 4))
    def test_bilaplace_strict_at_reference_point(self, d1, d2):
        a0 = 0.5 * math.exp(-(d1 + d2) / 2)
        assert BiLaplace(d1, d2)(a0) - UniLaplace(d1 + d2)(a0) > 1e-4 * min(d1, d2) ** 2


class TestDominates:
    def test_monotone_in_mu(self):
        res = dominates(GaussianGDP(0.5), GaussianGDP(1.0))
        assert res.ok and res.min_gap > 0

    def test_eps_dp_touches_at_kink(self):
        eps = eps_from_mu(1.0)
        res = dominates(EpsDP(eps), GaussianGDP(1.0))
        assert res.ok
        assert abs(res.min_gap) < 1e-12
        assert res.argmin_alpha == pytest.approx(1 / (1 + math.exp(eps)), abs=1e-12)

    def test_laplace_beyond_threshold_fails(self):
        mu = 1.0
        delta = -2 * math.log(2 * stats.norm.cdf(-mu / 2))
        a0 = stats.norm.cdf(-mu / 2)
        res = dominates(UniLaplace(delta * 1.01), GaussianGDP(mu))
        assert not res.ok and res.min_gap < 0
        assert res.argmin_alpha == pytest.approx(a0, abs=0.01)
        assert dominates(UniLaplace(delta * 0.99), GaussianGDP(mu)).ok
        exact = dominates(UniLaplace(delta), GaussianGDP(mu))
        assert exact.ok and exact.min_gap < 1e-6

    def test_grid_size_validation(self):
        with pytest.raises(DomainError):
            dominates(GaussianGDP(1), GaussianGDP(2), grid_size=2)


class TestEmpirical:
    def test_identity_for_equal_distributions(self):
        sampler = lambda rng, n: rng.standard_normal(n)
        curve = empirical_tradeoff(lambda x: 0.3 * x, sampler, sampler, 100_000, seed=3)
        a = np.linspace(0.01, 0.99, 99)
        se = np.sqrt(2 * a * (1 - a) / 100_000)
        assert np.all(np.abs(curve(a) - (1 - a)) < 4 * se + 1e-12)

    def test_gaussian_pair(self):
        n = 1_000_000
        curve = empirical_tradeoff(
            lambda x: x - 0.5,
            lambda rng, k: rng.standard_normal(k),
            lambda rng, k: 1.0 + rng.standard_normal(k),
            n, seed=11,
        )
        a = np.linspace(0.01, 0.99, 99)
        err = np.abs(curve(a) - oracles.gdp(1.0, a))
        assert np.all(err < 3.5 * delta_method_se(1.0, a, n))

    def test_bilaplace_pair(self):
        n = 1_000_000
        shift = np.array([1.0, 1.0])
        llr = lambda x: np.sum(np.abs(x) - np.abs(x - shift), axis=1)
        curve = empirical_tradeoff(
            llr,
            lambda rng, k: rng.laplace(size=(k, 2)),
            lambda rng, k: shift + rng.laplace(size=(k, 2)),
            n, seed=12,
        )
        a = np.linspace(0.01, 0.99, 99)
        err = np.abs(curve(a) - BiLaplace(1, 1)(a))
        assert np.max(err) < 0.003

    def test_affine_invariance(self):
        A = np.array([[2.0, 0.5], [-0.3, 1.0]])
        c = np.array([5.0, -1.0])
        delta = np.array([0.6, 0.8])
        n = 200_000
        base = empirical_tradeoff(
            lambda x: x @ delta - 0.5,
            lambda rng, k: rng.standard_normal((k, 2)),
            lambda rng, k: delta + rng.standard_normal((k, 2)),
            n, seed=5,
        )
        Ainv = np.linalg.inv(A)
        moved = empirical_tradeoff(
            lambda y: ((y - c) @ Ainv.T) @ delta - 0.5,
            lambda rng, k: rng.standard_normal((k, 2)) @ A.T + c,
            lambda rng, k: (delta + rng.standard_normal((k, 2))) @ A.T + c,
            n, seed=6,
        )
        a = np.linspace(0.02, 0.98, 49)
        tol = 3 * np.sqrt(2) * delta_method_se(1.0, a, n)
        assert np.all(np.abs(base(a) - moved(a)) < tol)

    def test_multivariate_gaussian_is_gdp(self):
        d = np.array([0.5, -0.3, 0.7])
        mu = float(np.linalg.norm(d))
        n = 300_000
        curve = empirical_tradeoff(
            lambda x: x @ d,
            lambda rng, k: rng.standard_normal((k, 3)),
            lambda rng, k: d + rng.standard_normal((k, 3)),
            n, seed=9,
        )
        a = np.linspace(0.01, 0.99, 99)
        assert np.all(np.abs(curve(a) - oracles.gdp(mu, a)) < 3.5 * delta_method_se(mu, a, n))

    def test_deterministic(self):
        s = lambda rng, k: rng.standard_normal(k)
        c1 = empirical_tradeoff(lambda x: x, s, s, 10_000, seed=1)
        c2 = empirical_tradeoff(lambda x: x, s, s, 10_000, seed=1)
        np.testing.assert_array_equal(c1.alpha, c2.alpha)
        np.testing.assert_array_equal(c1.beta, c2.beta)

    def test_atoms_interpolated(self):
        # score with only two values: a single randomised test line
        s0 = lambda rng, k: (rng.random(k) < 0.3).astype(float)
        s1 = lambda rng, k: (rng.random(k) < 0.6).astype(float)
        c = empirical_tradeoff(lambda x: x, s0, s1, 50_000, seed=2)
        assert len(c.points) == 3
        a0, b0 = c.points[1]
        assert c(a0 / 2) == pytest.approx((1 + b0) / 2)

    def test_nonfinite_rejected(self):
        s = lambda rng, k: rng.standard_normal(k)
        with pytest.raises(DataError), np.errstate(invalid="ignore"):
            empirical_tradeoff(lambda x: np.log(x), s, s, 10_000, seed=0)

    def test_sample_size_floor(self):
        s = lambda rng, k: rng.standard_normal(k)
        with pytest.raises(DomainError):
            empirical_tradeoff(lambda x: x, s, s, 9_999)

    def test_invalid_points(self):
        with pytest.raises(DataError):
            Empirical(np.array([0.0, 0.5, 0.5]), np.array([1.0, 0.5, 0.2]))
        with pytest.raises(DataError):
            Empirical(np.array([0.0, 1.0]), np.array([0.0, 1.0]))


class TestConversions:
    def test_eps_from_mu_oracle(self):
        for mu in (0.1, 1.0, 2.0, 5.0, 30.0):
            assert eps_from_mu(mu) == pytest.approx(oracles.eps_from_mu(mu), rel=1e-12)
        assert eps_from_mu(2.0) == pytest.approx(1.66827, abs=1e-5)

    def test_mu_from_eps_oracle(self):
        for eps in (0.01, 1.0, 3.0, 20.0):
            assert mu_from_eps(eps) == pytest.approx(oracles.mu_from_eps(eps), rel=1e-12)

    def test_small_limits(self):
        assert 0 < eps_from_mu(1e-8) < 1e-7
        assert 0 < mu_from_eps(1e-8) < 1e-7

    @given(st.floats(1e-6, 30))
    def test_round_trip(self, eps):
        assert eps_from_mu(mu_from_eps(eps)) == pytest.approx(eps, abs=1e-10, rel=1e-10)

    @given(st.floats(1e-4, 20), st.floats(1e-3, 1))
    def test_monotone(self, x, h):
        assert eps_from_mu(x + h) > eps_from_mu(x)
        assert mu_from_eps(x + h) > mu_from_eps(x)

    @pytest.mark.parametrize("bad", [0.0, -1.0, np.nan])
    def test_domain(self, bad):
        with pytest.raises(DomainError):
            eps_from_mu(bad)
        with pytest.raises(DomainError):
            mu_from_eps(bad)


class TestExport:
    def test_csv_default_grid(self):
        buf = io.StringIO()
        text = write_curve_csv(GaussianGDP(1.0), buf)
        lines = text.strip().split("\n")
        assert lines[0] == "alpha,beta"
        assert len(lines) == 1002
        assert buf.getvalue() == text

    def test_table(self):
        t = tradeoff_table(UniLaplace(1.0), 5)
        np.testing.assert_allclose(t[:, 0], [0, 0.25, 0.5, 0.75, 1.0])
        assert t[0, 1] == 1.0 and t[-1, 1] == 0.0

    def test_kinks_inside_unit_interval(self):
        for c in (BiLaplace(2, 1), FreqLaplace(0.8), UniLaplace(0.4), EpsDeltaDP(1, 0.2)):
            ks = c.kinks()
            assert all(0 < k < 1 for k in ks)
