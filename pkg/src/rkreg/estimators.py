"""Scikit-learn style front ends for the two regression estimators.

Both estimators select their bandwidth automatically by default (plug-in
minimisation of the asymptotic weighted risk) and expose the usual
``fit`` / ``predict`` / ``get_params`` surface so they compose with
pipelines, grid search and ``clone``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from ._validation import check_eval_points, check_fit_data
from .asymptotics import PluginSelectionError
from .bandwidth import (
    estimate_functionals_nonrecursive,
    estimate_functionals_recursive,
    fallback_coefficient,
    plugin_bandwidth,
)
from .kernels import KernelSpec, gaussian_kernel
from .recursive import (
    RecursiveRegressionState,
    make_dataset,
    nw_fit,
    recursive_fit,
)
from .sequences import PowerSequence, StepsizeConfig

__all__ = ["NadarayaWatson", "SemiRecursiveRegression"]


def _check_fitted(estimator, attr: str) -> None:
    if not hasattr(estimator, attr):
        raise RuntimeError(
            f"{type(estimator).__name__} instance is not fitted yet; call fit first"
        )


class NadarayaWatson(RegressorMixin, BaseEstimator):
    """Batch kernel regression with automatic plug-in bandwidth.

    Parameters
    ----------
    bandwidth : "plugin" or float, default="plugin"
        Fixed bandwidth h, or automatic selection minimising the asymptotic
        weighted integrated squared error.
    kernel : KernelSpec or None, default=None
        Smoothing kernel; the standard normal kernel when None.

    Attributes
    ----------
    bandwidth_ : float
        Bandwidth used for prediction (h(n) at the training sample size).
    coefficient_ : float
        Plug-in coefficient C with h(n) = C * n**(-1/5) (plugin mode only).
    used_fallback_ : bool
        True when selection fell back to the robust pilot scale.
    """

    def __init__(self, bandwidth="plugin", kernel: KernelSpec | None = None):
        self.bandwidth = bandwidth
        self.kernel = kernel

    def fit(self, X, y):
        x, y = check_fit_data(X, y)
        kernel = self.kernel if self.kernel is not None else gaussian_kernel()
        data = make_dataset(x, y)
        n = x.size
        if self.bandwidth == "plugin":
            functionals = estimate_functionals_nonrecursive(data, kernel)
            config = StepsizeConfig.nadaraya_watson()
            try:
                self.coefficient_ = plugin_bandwidth(functionals, config, kernel).coefficient
                self.used_fallback_ = False
            except PluginSelectionError:
                self.coefficient_ = fallback_coefficient(functionals.pilot_scale, n)
                self.used_fallback_ = True
            self.bandwidth_ = self.coefficient_ * n ** -0.2
        else:
            h = float(self.bandwidth)
            if h <= 0:
                raise ValueError(f"bandwidth must be positive, got {h}")
            self.bandwidth_ = h
            self.used_fallback_ = False
        self.kernel_ = kernel
        self.X_ = x
        self.y_ = y
        return self

    def predict(self, X):
        _check_fitted(self, "bandwidth_")
        points = check_eval_points(X)
        return nw_fit(make_dataset(self.X_, self.y_), self.bandwidth_, points, self.kernel_)


class SemiRecursiveRegression(RegressorMixin, BaseEstimator):
    """Semi-recursive kernel regression driven by stochastic-approximation
    stepsizes.

    Observations are consumed in order (the estimator is order-dependent);
    ``predict`` evaluates the equivalent closed-form weights at arbitrary
    points, and :meth:`streaming_state` hands out an online state that can
    keep absorbing observations in O(grid) per arrival.

    Parameters
    ----------
    stepsizes : str or StepsizeConfig, default="Recursive1"
        One of "Recursive1".."Recursive4" or an explicit configuration.
    bandwidth : "plugin", float, or PowerSequence, default="plugin"
        Automatic plug-in selection, a fixed coefficient C for
        h(n) = C * n**(-1/5), or an explicit bandwidth sequence.
    kernel : KernelSpec or None, default=None
        Smoothing kernel; the standard normal kernel when None.

    Attributes
    ----------
    config_ : StepsizeConfig
    bandwidth_sequence_ : PowerSequence
    coefficient_ : float
        Plug-in coefficient (plugin mode only).
    used_fallback_ : bool
    """

    def __init__(self, stepsizes="Recursive1", bandwidth="plugin",
                 kernel: KernelSpec | None = None):
        self.stepsizes = stepsizes
        self.bandwidth = bandwidth
        self.kernel = kernel

    def _resolve_config(self) -> StepsizeConfig:
        if isinstance(self.stepsizes, StepsizeConfig):
            config = self.stepsizes
        else:
            config = StepsizeConfig.by_name(self.stepsizes)
        if not config.is_recursive:
            raise ValueError("SemiRecursiveRegression needs a recursive configuration; "
                             "use NadarayaWatson for the batch baseline")
        return config

    def fit(self, X, y):
        x, y = check_fit_data(X, y)
        kernel = self.kernel if self.kernel is not None else gaussian_kernel()
        config = self._resolve_config()
        data = make_dataset(x, y)
        if isinstance(self.bandwidth, PowerSequence):
            sequence = self.bandwidth
            self.used_fallback_ = False
        elif self.bandwidth == "plugin":
            functionals = estimate_functionals_recursive(data, config, kernel)
            try:
                self.coefficient_ = plugin_bandwidth(functionals, config, kernel).coefficient
                self.used_fallback_ = False
            except PluginSelectionError:
                self.coefficient_ = fallback_coefficient(functionals.pilot_scale,
                                                         len(x))
                self.used_fallback_ = True
            sequence = PowerSequence(self.coefficient_, 0.2)
        else:
            coefficient = float(self.bandwidth)
            if coefficient <= 0:
                raise ValueError(f"bandwidth coefficient must be positive, got {coefficient}")
            self.coefficient_ = coefficient
            sequence = PowerSequence(coefficient, 0.2)
            self.used_fallback_ = False
        self.config_ = config
        self.bandwidth_sequence_ = sequence
        self.kernel_ = kernel
        self.X_ = x
        self.y_ = y
        return self

    def predict(self, X):
        _check_fitted(self, "config_")
        points = check_eval_points(X)
        return recursive_fit(make_dataset(self.X_, self.y_), self.config_,
                             self.bandwidth_sequence_, points, self.kernel_)

    def streaming_state(self, grid, replay: bool = True) -> RecursiveRegressionState:
        """An online state over ``grid`` using the fitted configuration.

        With ``replay=True`` the training observations are pushed through
        the state first, so subsequent ``update`` calls continue the same
        stream.
        """
        _check_fitted(self, "config_")
        state = RecursiveRegressionState(grid, self.config_, self.bandwidth_sequence_,
                                         self.kernel_)
        if replay:
            state.update_many(self.X_, self.y_)
        return state
