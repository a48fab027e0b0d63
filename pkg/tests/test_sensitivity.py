import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import null_space

from gdpmech.errors import DomainError
from gdpmech.sensitivity import (
    SensitivitySpec,
    bounded_mean_spec,
    centering_projection,
    custom_spec,
    frequency_table_spec,
    helmert_basis,
)


class TestFrequencyTable:
    def test_p4(self):
        s = frequency_table_spec(4)
        assert (s.delta1, s.d_theta, s.p) == (2.0, 3, 4)
        assert s.delta2 == pytest.approx(1.41421356, abs=1e-8)
        assert s.rank_deficient and s.kind == "frequency"

    def test_p2(self):
        s = frequency_table_spec(2)
        assert s.d_theta == 1
        np.testing.assert_allclose(np.abs(s.basis[:, 0]), [1 / math.sqrt(2)] * 2, atol=1e-15)
        assert s.basis[0, 0] == pytest.approx(-s.basis[1, 0])

    @pytest.mark.parametrize("p", [2, 3, 7, 20])
    def test_differences_in_span(self, p):
        u = frequency_table_spec(p).basis
        proj = u @ u.T
        for i, j in itertools.permutations(range(p), 2):
            d = np.zeros(p)
            d[i], d[j] = 1.0, -1.0
            np.testing.assert_allclose(proj @ d, d, atol=1e-12)
            assert np.linalg.norm(d, 1) == 2.0
            assert np.linalg.norm(d) == math.sqrt(2.0)

    @given(st.integers(2, 40))
    def test_orthogonal_to_ones(self, p):
        assert np.max(np.abs(frequency_table_spec(p).basis.T @ np.ones(p))) < 1e-12

    def test_domain(self):
        with pytest.raises(DomainError):
            frequency_table_spec(1)


class TestBoundedMean:
    @pytest.mark.parametrize("p,n,d1,d2", [(4, 100, 0.04, 0.02), (1, 1, 1, 1), (9, 3, 3, 1)])
    def test_examples(self, p, n, d1, d2):
        s = bounded_mean_spec(p, n)
        assert s.delta1 == pytest.approx(d1, rel=1e-15)
        assert s.delta2 == pytest.approx(d2, rel=1e-15)
        assert s.d_theta == p and s.basis is None and not s.rank_deficient

    def test_domain(self):
        with pytest.raises(DomainError):
            bounded_mean_spec(0, 5)


class TestHelmert:
    def test_p4_columns(self):
        r2, r6, r12 = math.sqrt(2), math.sqrt(6), math.sqrt(12)
        expected = np.array([
            [1 / r2, 1 / r6, 1 / r12],
            [-1 / r2, 1 / r6, 1 / r12],
            [0, -2 / r6, 1 / r12],
            [0, 0, -3 / r12],
        ])
        np.testing.assert_allclose(helmert_basis(4), expected, atol=1e-15)

    @pytest.mark.parametrize("p", range(2, 51))
    def test_projector(self, p):
        h = helmert_basis(p)
        np.testing.assert_allclose(h.T @ h, np.eye(p - 1), atol=1e-12)
        np.testing.assert_allclose(h.sum(axis=0), 0.0, atol=1e-12)
        np.testing.assert_allclose(h @ h.T, centering_projection(p), atol=1e-10)

    def test_domain(self):
        with pytest.raises(DomainError):
            helmert_basis(1)


class TestCenteringProjection:
    def test_examples(self):
        np.testing.assert_array_equal(centering_projection(2), [[0.5, -0.5], [-0.5, 0.5]])
        np.testing.assert_array_equal(centering_projection(1), [[0.0]])

    @given(st.integers(1, 30))
    def test_properties(self, p):
        P = centering_projection(p)
        np.testing.assert_allclose(P @ P, P, atol=1e-12)
        np.testing.assert_array_equal(P, P.T)
        assert np.trace(P) == pytest.approx(p - 1)
        np.testing.assert_allclose(P @ np.ones(p), 0.0, atol=1e-12)


class TestSpecValidation:
    def test_delta_order(self):
        with pytest.raises(DomainError):
            SensitivitySpec(3, 1.0, 2.0, 3)

    def test_nonpositive(self):
        with pytest.raises(DomainError):
            SensitivitySpec(3, 1.0, 0.0, 3)

    def test_basis_required(self):
        with pytest.raises(DomainError):
            SensitivitySpec(4, 2.0, 1.0, 3)

    def test_basis_shape_and_orthonormality(self):
        with pytest.raises(DomainError):
            SensitivitySpec(4, 2.0, 1.0, 3, np.ones((4, 2)))
        with pytest.raises(DomainError):
            SensitivitySpec(4, 2.0, 1.0, 3, 1.01 * helmert_basis(4))

    def test_basis_read_only(self):
        s = frequency_table_spec(5)
        with pytest.raises(ValueError):
            s.basis[0, 0] = 1.0

    def test_basis_override_same_span(self):
        s = frequency_table_spec(6)
        alt = null_space(np.ones((1, 6)))
        t = s.with_basis(alt)
        np.testing.assert_allclose(t.basis @ t.basis.T, centering_projection(6), atol=1e-12)

    def test_basis_override_other_span(self):
        s = frequency_table_spec(4)
        with pytest.raises(DomainError):
            s.with_basis(np.eye(4)[:, :3])

    def test_custom(self):
        s = custom_spec(3, 3.0, 2.0)
        assert s.d_theta == 3 and s.kind == "custom"
        d = s.to_dict()
        assert d == {"kind": "custom", "p": 3, "delta1": 3.0, "delta2": 2.0, "d_theta": 3}
