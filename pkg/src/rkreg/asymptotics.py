"""Closed-form asymptotic calculators: bias/variance constants, the weighted
integrated squared error (wMISE) and its minimising bandwidth coefficient.

Notation used throughout: with f the covariate density, r the regression
function and a = r * f,

    i1 = int (a'')^2 f        i2 = int a'' f'' r f       i3 = int (f'')^2 r^2 f
    i4 = int E[Y^2|X=x] f^2   i5 = int r^2 f^2

The leading risk of every estimator is a variance term proportional to
``beta(n)/h(n)`` plus a squared-bias term proportional to ``h(n)^4``, each
weighted by a configuration-specific combination of the five integrals;
this module evaluates those combinations and everything built from them.
The formulas are derived for gamma(n) = 1/n (density recursion tuned for
integrated error) and gamma(n) = (1-a)/n (tuned for variance).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .kernels import KernelSpec, QuadratureError
from .sequences import StepsizeConfig

__all__ = [
    "ModelTruth",
    "PluginSelectionError",
    "TrueFunctionals",
    "bias_coefficient",
    "cosine_model",
    "logistic_model",
    "mwise",
    "mwise_ratio",
    "optimal_h_coefficient",
    "optimal_mwise",
    "risk_combinations",
    "true_functionals",
    "variance_coefficient",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)


class PluginSelectionError(ValueError):
    """The functional combinations entering the optimal bandwidth were not
    both positive, so no finite minimiser exists."""

    def __init__(self, variance_combination: float, curvature_combination: float):
        self.variance_combination = float(variance_combination)
        self.curvature_combination = float(curvature_combination)
        super().__init__(
            "bandwidth selection needs positive functional combinations, got "
            f"variance={variance_combination:.6g}, curvature={curvature_combination:.6g}"
        )


# ---------------------------------------------------------------------------
# model ground truth


def _central_second_difference(fn: Callable, step: float = 1e-4) -> Callable:
    def dd(x):
        return (fn(x + step) - 2.0 * fn(x) + fn(x - step)) / (step * step)

    return dd


@dataclass(frozen=True)
class ModelTruth:
    """Ground truth for a regression model with known density.

    ``a_fn = r * f`` and ``cond_second_moment(x) = E[Y^2 | X = x]``; for an
    additive-noise model the latter is ``r(x)^2 + sigma^2``.
    """

    r: Callable
    f: Callable
    a_fn: Callable
    a2: Callable
    f2: Callable
    cond_second_moment: Callable
    sigma: float

    @classmethod
    def additive(
        cls,
        r: Callable,
        f: Callable,
        sigma: float,
        r1: Callable | None = None,
        r2: Callable | None = None,
        f1: Callable | None = None,
        f2: Callable | None = None,
    ) -> "ModelTruth":
        """Y = r(X) + noise with noise sd ``sigma``.

        Missing derivatives fall back to central differences with step 1e-4
        (about 8 accurate digits for smooth functions).
        """
        if sigma < 0:
            raise ValueError(f"noise standard deviation must be >= 0, got {sigma}")

        def a_fn(x):
            return r(x) * f(x)

        if r1 is not None and r2 is not None and f1 is not None and f2 is not None:
            def a2(x):
                return r2(x) * f(x) + 2.0 * r1(x) * f1(x) + r(x) * f2(x)
        else:
            a2 = _central_second_difference(a_fn)
        if f2 is None:
            f2 = _central_second_difference(f)

        def cond_second_moment(x):
            return r(x) ** 2 + sigma**2

        return cls(r=r, f=f, a_fn=a_fn, a2=a2, f2=f2,
                   cond_second_moment=cond_second_moment, sigma=sigma)


def _std_normal_pdf(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * x * x) / _SQRT_2PI


def _std_normal_pdf_d1(x):
    return -np.asarray(x, dtype=float) * _std_normal_pdf(x)


def _std_normal_pdf_d2(x):
    x = np.asarray(x, dtype=float)
    return (x * x - 1.0) * _std_normal_pdf(x)


def cosine_model(sigma: float) -> ModelTruth:
    """Y = cos(X) + noise, X standard normal."""
    return ModelTruth.additive(
        r=np.cos, f=_std_normal_pdf, sigma=sigma,
        r1=lambda x: -np.sin(x), r2=lambda x: -np.cos(x),
        f1=_std_normal_pdf_d1, f2=_std_normal_pdf_d2,
    )


def logistic_model(sigma: float) -> ModelTruth:
    """Y = 1/(1 + exp(X)) + noise, X standard normal."""

    def r(x):
        return 1.0 / (1.0 + np.exp(np.asarray(x, dtype=float)))

    def r1(x):
        v = r(x)
        return -v * (1.0 - v)

    def r2(x):
        v = r(x)
        return v * (1.0 - v) * (1.0 - 2.0 * v)

    return ModelTruth.additive(
        r=r, f=_std_normal_pdf, sigma=sigma,
        r1=r1, r2=r2, f1=_std_normal_pdf_d1, f2=_std_normal_pdf_d2,
    )


@dataclass(frozen=True)
class TrueFunctionals:
    i1: float
    i2: float
    i3: float
    i4: float
    i5: float


def _model_integral(fn: Callable, atol: float = 1e-8) -> float:
    value, err = quad(fn, -np.inf, np.inf, epsabs=1e-10, epsrel=1e-10, limit=400)
    if err > atol:
        raise QuadratureError(
            f"model functional quadrature did not converge: error {err:.3e} > {atol:.0e}"
        )
    return value


def true_functionals(truth: ModelTruth) -> TrueFunctionals:
    """The five population integrals evaluated by adaptive quadrature."""
    return TrueFunctionals(
        i1=_model_integral(lambda x: truth.a2(x) ** 2 * truth.f(x)),
        i2=_model_integral(lambda x: truth.a2(x) * truth.f2(x) * truth.r(x) * truth.f(x)),
        i3=_model_integral(lambda x: truth.f2(x) ** 2 * truth.r(x) ** 2 * truth.f(x)),
        i4=_model_integral(lambda x: truth.cond_second_moment(x) * truth.f(x) ** 2),
        i5=_model_integral(lambda x: truth.r(x) ** 2 * truth.f(x) ** 2),
    )


# ---------------------------------------------------------------------------
# per-configuration constants


def _gamma_is_unit(config: StepsizeConfig) -> bool:
    gamma = config.gamma
    if gamma.exponent != 1.0:
        raise ValueError(
            "asymptotic constants are derived for gamma(n) = 1/n or (1-a)/n only"
        )
    if math.isclose(gamma.coefficient, 1.0, rel_tol=1e-12):
        return True
    if math.isclose(gamma.coefficient, 1.0 - config.bandwidth_exponent, rel_tol=1e-12):
        return False
    raise ValueError(
        "asymptotic constants are derived for gamma(n) = 1/n or (1-a)/n only; "
        f"got coefficient {gamma.coefficient}"
    )


def _variance_coefficients(config: StepsizeConfig) -> tuple[float, float]:
    """Coefficients (c4, c5) of i4 and i5 in the leading variance term."""
    a = config.bandwidth_exponent
    xi = config.xi
    beta_exp = config.beta.exponent
    denom = 2.0 - (beta_exp - a) * xi
    if denom <= 0:
        raise ValueError(f"variance constant is singular: 2 - (beta-a)*xi = {denom:.4g}")
    c4 = 1.0 / denom
    if _gamma_is_unit(config):
        c5 = 2.0 * xi / (1.0 + a * xi) - xi / (1.0 + a)
    else:
        c5 = (1.0 - a) * xi
    return c4, c5


def _curvature_coefficients(config: StepsizeConfig) -> tuple[float, float, float]:
    """Coefficients (c1, c3, c2) of i1, i3 and i2 in the squared-bias term."""
    a = config.bandwidth_exponent
    xi = config.xi
    d_a = 1.0 - 2.0 * a * xi
    if d_a == 0:
        raise ValueError("bias constant is singular: 1 - 2*a*xi = 0")
    if _gamma_is_unit(config):
        d_f = 1.0 - 2.0 * a
        if d_f == 0:
            raise ValueError("bias constant is singular: 1 - 2*a = 0")
        ratio_f = 1.0 / d_f
    else:
        d_f = 1.0 - 3.0 * a
        if d_f == 0:
            raise ValueError("bias constant is singular: 1 - 3*a = 0")
        ratio_f = (1.0 - a) / d_f
    return 1.0 / d_a**2, ratio_f**2, -2.0 * ratio_f / d_a


def risk_combinations(functionals, config: StepsizeConfig) -> tuple[float, float]:
    """(variance, curvature) combinations of i1..i5 for a configuration.

    The leading risk is ``beta(n)/h(n) * variance * R(K)`` plus
    ``h(n)^4 / 4 * curvature * mu2(K)^2``; for the non-recursive baseline
    the combinations reduce to ``i4 - i5`` and ``i1 + i3 - 2 i2``.
    """
    i1, i2, i3, i4, i5 = (functionals.i1, functionals.i2, functionals.i3,
                          functionals.i4, functionals.i5)
    if not config.is_recursive:
        return i4 - i5, i1 + i3 - 2.0 * i2
    c4, c5 = _variance_coefficients(config)
    c1, c3, c2 = _curvature_coefficients(config)
    return c4 * i4 - c5 * i5, c1 * i1 + c3 * i3 + c2 * i2


def bias_coefficient(config: StepsizeConfig, truth: ModelTruth, x: float,
                     kernel: KernelSpec) -> float:
    """Coefficient of h(n)^2 in the pointwise bias at x."""
    fx = float(truth.f(x))
    if fx <= 0:
        raise ValueError(f"density must be positive at the evaluation point, f({x}) = {fx}")
    a2x = float(truth.a2(x))
    rf2x = float(truth.r(x)) * float(truth.f2(x))
    if not config.is_recursive:
        return 0.5 * (a2x - rf2x) / fx * kernel.mu2
    a = config.bandwidth_exponent
    xi = config.xi
    d_a = 1.0 - 2.0 * a * xi
    if d_a == 0:
        raise ValueError("bias constant is singular: 1 - 2*a*xi = 0")
    if _gamma_is_unit(config):
        if 1.0 - 2.0 * a == 0:
            raise ValueError("bias constant is singular: 1 - 2*a = 0")
        f_term = rf2x / (1.0 - 2.0 * a)
    else:
        if 1.0 - 3.0 * a == 0:
            raise ValueError("bias constant is singular: 1 - 3*a = 0")
        f_term = (1.0 - a) / (1.0 - 3.0 * a) * rf2x
    return 0.5 / fx * (a2x / d_a - f_term) * kernel.mu2


def variance_coefficient(config: StepsizeConfig, truth: ModelTruth, x: float,
                         kernel: KernelSpec) -> float:
    """Coefficient of beta(n)/h(n) (or 1/(n h(n)) for the baseline) in the
    pointwise variance at x."""
    fx = float(truth.f(x))
    if fx <= 0:
        raise ValueError(f"density must be positive at the evaluation point, f({x}) = {fx}")
    m2x = float(truth.cond_second_moment(x))
    r2x = float(truth.r(x)) ** 2
    if not config.is_recursive:
        return (m2x - r2x) / fx * kernel.R
    c4, c5 = _variance_coefficients(config)
    return (c4 * m2x - c5 * r2x) / fx * kernel.R


def _beta0_or_unit(config: StepsizeConfig) -> float:
    return config.beta0 if config.is_recursive else 1.0


def _check_balanced_regime(config: StepsizeConfig) -> None:
    # variance and bias contribute at the same order only when 5a equals the
    # stepsize decay (1 for the baseline)
    beta_exp = config.beta.exponent if config.is_recursive else 1.0
    if not math.isclose(5.0 * config.bandwidth_exponent, beta_exp, rel_tol=1e-12):
        raise ValueError(
            "risk expansion holds in the balanced regime only: bandwidth exponent "
            f"{config.bandwidth_exponent} must equal beta decay {beta_exp} / 5"
        )


def mwise(config: StepsizeConfig, functionals, kernel: KernelSpec, n: int,
          h_coeff: float) -> float:
    """Leading mean weighted integrated squared error E int (r_n - r)^2 f^3
    for bandwidth ``h(n) = h_coeff * n**(-1/5)``."""
    if h_coeff <= 0:
        raise ValueError(f"bandwidth coefficient must be positive, got {h_coeff}")
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")
    _check_balanced_regime(config)
    var_comb, curv_comb = risk_combinations(functionals, config)
    beta0 = _beta0_or_unit(config)
    rate = float(n) ** -0.8
    variance = beta0 / h_coeff * var_comb * kernel.R * rate
    bias_sq = 0.25 * curv_comb * h_coeff**4 * kernel.mu2**2 * rate
    return variance + bias_sq


def optimal_h_coefficient(functionals, config: StepsizeConfig, kernel: KernelSpec) -> float:
    """The coefficient C such that ``h(n) = C * n**(-1/5)`` minimises the
    leading weighted risk.

    Shared by the theory path (true functionals) and the plug-in path
    (estimated functionals).

    Raises
    ------
    PluginSelectionError
        If either functional combination fails to be positive.
    """
    var_comb, curv_comb = risk_combinations(functionals, config)
    if var_comb <= 0 or curv_comb <= 0:
        raise PluginSelectionError(var_comb, curv_comb)
    beta0 = _beta0_or_unit(config)
    return (beta0 * var_comb / curv_comb) ** 0.2 * (kernel.R / kernel.mu2**2) ** 0.2


def optimal_mwise(config: StepsizeConfig, functionals, kernel: KernelSpec, n: int) -> float:
    """The weighted risk at the optimal bandwidth coefficient,
    ``(5/4) * beta0^(4/5) * variance^(4/5) * curvature^(1/5) * theta * n^(-4/5)``."""
    var_comb, curv_comb = risk_combinations(functionals, config)
    if var_comb <= 0 or curv_comb <= 0:
        raise PluginSelectionError(var_comb, curv_comb)
    beta0 = _beta0_or_unit(config)
    return (1.25 * beta0**0.8 * var_comb**0.8 * curv_comb**0.2
            * kernel.theta * float(n) ** -0.8)


def mwise_ratio(config: StepsizeConfig) -> float | None:
    """Minimised weighted risk of a recursive configuration relative to the
    non-recursive baseline, when the comparison is functional-free.

    The ratio is a pure constant only when the configuration's variance and
    curvature combinations are proportional to the baseline's ``i4 - i5``
    and ``i1 + i3 - 2 i2``; otherwise the two risks involve different
    functionals and ``None`` is returned.
    """
    if not config.is_recursive:
        raise ValueError("ratio is defined relative to the non-recursive baseline")
    c4, c5 = _variance_coefficients(config)
    c1, c3, c2 = _curvature_coefficients(config)
    proportional = (
        math.isclose(c5, c4, rel_tol=1e-12)
        and math.isclose(c3, c1, rel_tol=1e-12)
        and math.isclose(c2, -2.0 * c1, rel_tol=1e-12)
    )
    if not proportional:
        return None
    return config.beta0**0.8 * c4**0.8 * c1**0.2
