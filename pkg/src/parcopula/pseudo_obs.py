"""Rank transform of raw data into pseudo-observations."""

import numpy as np
from scipy.stats import rankdata


class DataError(ValueError):
    """Input data matrix is malformed."""


def check_data(X, min_rows: int = 2) -> np.ndarray:
    """Validate an ``(N, 2)`` finite data matrix and return it as floats."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != 2:
        raise DataError(f"expected 2 numeric columns, got array of shape {X.shape}")
    if X.shape[0] < min_rows:
        raise DataError(f"need at least {min_rows} rows, got {X.shape[0]}")
    if not np.isfinite(X).all():
        raise DataError("data contain non-finite values")
    return X


def normalized_ranks(X) -> np.ndarray:
    """Column-wise ranks divided by ``N + 1``.

    Tied values receive the average of the ranks they span, so the output
    depends on the data only through the within-column ordering.

    Examples
    --------
    >>> normalized_ranks([[3.1, 0.0], [1.2, 1.0], [7.5, 2.0]])[:, 0]
    array([0.5 , 0.25, 0.75])
    """
    X = check_data(X)
    n = X.shape[0]
    return rankdata(X, method="average", axis=0) / (n + 1)
