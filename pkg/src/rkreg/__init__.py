"""Streaming semi-recursive kernel regression with automatic plug-in
bandwidth selection, a Nadaraya-Watson baseline, closed-form asymptotic
calculators and a Monte-Carlo benchmark harness."""

__version__ = "0.1.0"

from .asymptotics import (
    ModelTruth,
    PluginSelectionError,
    TrueFunctionals,
    bias_coefficient,
    cosine_model,
    logistic_model,
    mwise,
    mwise_ratio,
    optimal_h_coefficient,
    optimal_mwise,
    risk_combinations,
    true_functionals,
    variance_coefficient,
)
from .bandwidth import (
    CURVATURE_PILOT_EXPONENT,
    VARIANCE_PILOT_EXPONENT,
    BandwidthPlan,
    PluginFunctionals,
    estimate_functionals_nonrecursive,
    estimate_functionals_recursive,
    fallback_coefficient,
    pilot_bandwidth,
    plugin_bandwidth,
    quartiles,
    robust_scale,
)
from .estimators import NadarayaWatson, SemiRecursiveRegression
from .kernels import KernelSpec, QuadratureError, gaussian_kernel, kernel_functional
from .recursive import (
    Dataset,
    RecursiveRegressionState,
    closed_form_fit,
    make_dataset,
    nw_fit,
    ratio_with_zero_fallback,
    recursive_fit,
)
from .sequences import (
    PowerSequence,
    ProductRatios,
    StepsizeConfig,
    product_ratio,
    product_series,
    xi_limit,
)
from .simulation import (
    ESTIMATOR_NAMES,
    ResultRow,
    ResultTable,
    SimulationConfig,
    StreamingBenchmark,
    anderson_darling,
    clt_diagnostic,
    fit_estimator,
    generate,
    mse,
    run_experiment,
    streaming_benchmark,
)

__all__ = [
    "BandwidthPlan",
    "CURVATURE_PILOT_EXPONENT",
    "Dataset",
    "ESTIMATOR_NAMES",
    "VARIANCE_PILOT_EXPONENT",
    "KernelSpec",
    "ModelTruth",
    "NadarayaWatson",
    "PluginFunctionals",
    "PluginSelectionError",
    "PowerSequence",
    "ProductRatios",
    "QuadratureError",
    "RecursiveRegressionState",
    "ResultRow",
    "ResultTable",
    "SemiRecursiveRegression",
    "SimulationConfig",
    "StepsizeConfig",
    "StreamingBenchmark",
    "TrueFunctionals",
    "anderson_darling",
    "bias_coefficient",
    "clt_diagnostic",
    "closed_form_fit",
    "cosine_model",
    "estimate_functionals_nonrecursive",
    "estimate_functionals_recursive",
    "fallback_coefficient",
    "fit_estimator",
    "generate",
    "gaussian_kernel",
    "kernel_functional",
    "logistic_model",
    "make_dataset",
    "mse",
    "mwise",
    "mwise_ratio",
    "nw_fit",
    "optimal_h_coefficient",
    "optimal_mwise",
    "pilot_bandwidth",
    "plugin_bandwidth",
    "product_ratio",
    "product_series",
    "quartiles",
    "ratio_with_zero_fallback",
    "recursive_fit",
    "risk_combinations",
    "robust_scale",
    "run_experiment",
    "streaming_benchmark",
    "true_functionals",
    "variance_coefficient",
    "xi_limit",
]
