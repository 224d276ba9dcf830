import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from parcopula.pseudo_obs import DataError, check_data, normalized_ranks


class TestValidation:
    @pytest.mark.parametrize("shape", [(10,), (10, 1), (10, 3), (2, 5, 2)])
    def test_wrong_shape(self, shape):
        with pytest.raises(DataError, match="expected 2 numeric columns"):
            check_data(np.zeros(shape))

    @pytest.mark.parametrize("bad", [np.nan, np.inf, -np.inf])
    def test_non_finite(self, bad):
        X = np.ones((5, 2))
        X[2, 1] = bad
        with pytest.raises(DataError, match="non-finite"):
            normalized_ranks(X)

    def test_too_few_rows(self):
        with pytest.raises(DataError):
            normalized_ranks(np.ones((1, 2)))


class TestRanks:
    def test_small_example(self):
        X = [[3.0, 10.0], [1.0, 30.0], [2.0, 20.0], [5.0, 0.0]]
        np.testing.assert_array_equal(
            normalized_ranks(X), np.array([[3, 2], [1, 4], [2, 3], [4, 1]]) / 5.0
        )

    def test_ties_get_average_rank(self):
        X = [[1.0, 0.0], [2.0, 0.0], [2.0, 1.0], [3.0, 1.0]]
        U = normalized_ranks(X)
        np.testing.assert_array_equal(U[:, 0], np.array([1, 2.5, 2.5, 4]) / 5)
        np.testing.assert_array_equal(U[:, 1], np.array([1.5, 1.5, 3.5, 3.5]) / 5)

    def test_monotone_transform_invariance(self, rng):
        X = rng.normal(size=(500, 2))
        Y = np.column_stack([np.exp(X[:, 0]), 3.0 * X[:, 1] ** 3 - 7.0])
        np.testing.assert_array_equal(normalized_ranks(X), normalized_ranks(Y))

    @settings(max_examples=100, deadline=None)
    @given(hnp.arrays(np.float64, st.tuples(st.integers(2, 60), st.just(2)),
                      elements=st.floats(-1e6, 1e6)))
    def test_properties(self, X):
        U = normalized_ranks(X)
        n = X.shape[0]
        assert ((U > 0) & (U < 1)).all()
        # ranks always sum to n(n+1)/2, ties or not
        np.testing.assert_allclose(U.sum(axis=0) * (n + 1), n * (n + 1) / 2)
        # ordering is preserved within each column
        for j in range(2):
            order = np.argsort(X[:, j], kind="stable")
            assert (np.diff(U[order, j]) >= 0).all()
