"""Semiparametric cumulative probability models for outcomes with
detection limits: fitting, inference, derived conditional quantities,
comparator estimators, and a Monte Carlo study harness."""

__version__ = "0.1.0"

from .data import (
    AnchorSet,
    CensorCode,
    CensoredObservation,
    ValidatedDataset,
    build_anchor_set,
    dataset_from_arrays,
    validate_dataset,
)
from .links import LinkFunction, get_link
from .likelihood import BandedHessian, ParameterVector, gradient, hessian, log_likelihood
from .solver import FitOptions, ModelFit, fit
from .inference import (
    TestResult,
    WilcoxonStats,
    likelihood_ratio_test,
    score_test_binary,
    wald_interval,
)
from .quantities import (
    ConditionalCDF,
    QuantileValue,
    cdf_curve,
    conditional_cdf,
    conditional_quantile,
    conditional_quantile_interval,
    probabilistic_index,
)
from .comparators import (
    ImputationRule,
    ParametricFit,
    censored_lognormal_mle,
    substitute_and_fit,
)
from .simulation import (
    MetricsRow,
    ScenarioSpec,
    StudyResult,
    generate_multi_dl,
    generate_single_dl,
    run_study,
)
