"""Streaming semi-recursive regression estimators and the batch baseline.

The streaming estimator keeps two arrays on a fixed evaluation grid: a
response-weighted kernel recursion ``a`` and a density recursion ``f``.
Each new observation updates both in O(len(grid)); the regression estimate
is ``a / f`` with a zero fallback wherever the density estimate vanishes.
The closed-form evaluation reproduces the same values from stored data and
doubles as the streaming path's oracle.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .kernels import KernelSpec
from .sequences import PowerSequence, ProductRatios, StepsizeConfig

__all__ = [
    "DENOMINATOR_FLOOR",
    "Dataset",
    "RecursiveRegressionState",
    "closed_form_fit",
    "make_dataset",
    "nw_fit",
    "ratio_with_zero_fallback",
    "recursive_fit",
]

#: density values with magnitude at or below this are treated as exact zeros
#: when forming the regression ratio, to keep denormal underflow from
#: producing spurious huge values
DENOMINATOR_FLOOR = 1e-30


class Dataset(NamedTuple):
    xs: np.ndarray
    ys: np.ndarray


def make_dataset(xs, ys) -> Dataset:
    """Validated pair of response/covariate arrays (finite, equal length >= 1)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.ndim != 1 or ys.ndim != 1:
        raise ValueError("xs and ys must be one-dimensional")
    if xs.shape != ys.shape:
        raise ValueError(f"length mismatch: {xs.shape[0]} xs vs {ys.shape[0]} ys")
    if xs.size == 0:
        raise ValueError("dataset must contain at least one observation")
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
        raise ValueError("dataset contains non-finite values")
    return Dataset(xs, ys)


def ratio_with_zero_fallback(
    numerator: np.ndarray, denominator: np.ndarray, floor: float = DENOMINATOR_FLOOR
) -> np.ndarray:
    out = np.zeros_like(numerator)
    ok = np.abs(denominator) > floor
    out[ok] = numerator[ok] / denominator[ok]
    return out


class RecursiveRegressionState:
    """Streaming estimator state over a fixed evaluation grid.

    Starts from ``a = f = 0``; ``update`` consumes one observation in
    O(len(grid)) regardless of how many observations came before.  Updates
    are order-dependent by construction, so a state has a single writer;
    reading between updates is safe.
    """

    def __init__(self, grid, config: StepsizeConfig, bandwidth: PowerSequence, kernel: KernelSpec):
        if not config.is_recursive:
            raise ValueError("streaming state needs a recursive configuration")
        self.grid = np.array(grid, dtype=float, copy=True)
        if self.grid.ndim != 1 or self.grid.size == 0:
            raise ValueError("grid must be a non-empty one-dimensional array")
        self.a_vals = np.zeros_like(self.grid)
        self.f_vals = np.zeros_like(self.grid)
        self.n = 0
        self.config = config
        self.bandwidth = bandwidth
        self.kernel = kernel

    def update(self, x_obs: float, y_obs: float) -> "RecursiveRegressionState":
        """Consume one (x, y) pair; rejects non-finite input without mutating."""
        if not (np.isfinite(x_obs) and np.isfinite(y_obs)):
            raise ValueError(f"observations must be finite, got ({x_obs}, {y_obs})")
        n = self.n + 1
        h = self.bandwidth.value(n)
        beta = self.config.beta.value(n)
        gamma = self.config.gamma.value(n)
        kval = self.kernel.eval((self.grid - x_obs) / h) / h
        self.a_vals = (1.0 - beta) * self.a_vals + beta * y_obs * kval
        self.f_vals = (1.0 - gamma) * self.f_vals + gamma * kval
        self.n = n
        return self

    def update_many(self, xs, ys) -> "RecursiveRegressionState":
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        if xs.shape != ys.shape:
            raise ValueError("xs and ys must have equal length")
        for x, y in zip(xs, ys):
            self.update(float(x), float(y))
        return self

    def regression(self) -> np.ndarray:
        """``a / f`` on the grid, 0 wherever the density estimate is zero."""
        return ratio_with_zero_fallback(self.a_vals, self.f_vals)

    def density(self) -> np.ndarray:
        return self.f_vals.copy()


def closed_form_fit(
    data: Dataset,
    config: StepsizeConfig,
    bandwidth: PowerSequence,
    grid,
    kernel: KernelSpec,
) -> tuple[np.ndarray, np.ndarray]:
    """Batch evaluation of the streaming recursions at arbitrary points.

    Returns ``(a_vals, f_vals)`` equal (up to rounding) to feeding the
    observations through ``update`` in order.  Cost O(n * len(grid)).
    """
    if not config.is_recursive:
        raise ValueError("closed form needs a recursive configuration")
    xs, ys = data
    n = xs.size
    grid = np.asarray(grid, dtype=float)
    h = bandwidth.values(n)
    w_a = ProductRatios(config.beta, n).ratios_to(n) * config.beta.values(n)
    w_f = ProductRatios(config.gamma, n).ratios_to(n) * config.gamma.values(n)
    kmat = kernel.eval((grid[None, :] - xs[:, None]) / h[:, None]) / h[:, None]
    a_vals = (w_a * ys) @ kmat
    f_vals = w_f @ kmat
    return a_vals, f_vals


def recursive_fit(
    data: Dataset,
    config: StepsizeConfig,
    bandwidth: PowerSequence,
    grid,
    kernel: KernelSpec,
) -> np.ndarray:
    """Regression values of the semi-recursive estimator at ``grid``."""
    a_vals, f_vals = closed_form_fit(data, config, bandwidth, grid, kernel)
    return ratio_with_zero_fallback(a_vals, f_vals)


def nw_fit(data: Dataset, h: float, grid, kernel: KernelSpec) -> np.ndarray:
    """Nadaraya-Watson estimate at ``grid`` with the zero-denominator fallback."""
    if h <= 0:
        raise ValueError(f"bandwidth must be positive, got {h}")
    xs, ys = data
    if xs.size == 0:
        raise ValueError("dataset must contain at least one observation")
    grid = np.asarray(grid, dtype=float)
    kmat = kernel.eval((grid[None, :] - xs[:, None]) / h)
    scale = 1.0 / (xs.size * h)
    a_tilde = scale * (ys @ kmat)
    f_tilde = scale * kmat.sum(axis=0)
    return ratio_with_zero_fallback(a_tilde, f_tilde)
