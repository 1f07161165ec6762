"""Input validation helpers for the estimator front ends.

The estimators are univariate in X; a single-column 2-D array is accepted
and flattened so that they compose with pipeline code that always passes
``(n_samples, n_features)`` matrices.
"""

from __future__ import annotations

import numpy as np


def as_float_1d(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ValueError(
            f"{name} must be one-dimensional (univariate); got shape {np.shape(values)}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_fit_data(X, y) -> tuple[np.ndarray, np.ndarray]:
    x = as_float_1d(X, "X")
    y = as_float_1d(y, "y")
    if x.shape[0] != y.shape[0]:
        raise ValueError(f"X and y have inconsistent lengths: {x.shape[0]} vs {y.shape[0]}")
    if x.shape[0] == 0:
        raise ValueError("cannot fit on an empty sample")
    return x, y


def check_eval_points(X) -> np.ndarray:
    return as_float_1d(X, "X")
