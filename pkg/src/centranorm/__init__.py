"""Robust fitting of Box-Cox / Yeo-Johnson transformations.

Estimates the transform parameter so that the central bulk of a variable
becomes approximately standard normal while outliers are allowed to remain
outlying, and ships the simulation harness used to study the estimators.
"""

from ._backend import BACKEND
from .errors import (
    CentranormError,
    CentranormWarning,
    DegenerateDataError,
    DomainError,
    OptimizationError,
    SpecificationError,
    TransformRangeError,
)
from .estimators import (
    EstimatorSpec,
    FittedTransform,
    PrestandardizationRecord,
    apply,
    apply_inverse,
    fit,
    fit_carroll,
    fit_ml,
    fit_mtl,
    fit_rawml,
    fit_rewml,
    fit_wml,
    hard_rejection_weights,
    prestandardize,
    robust_criterion,
)
from .optimize import SearchConfig, minimize_scalar
from .robust import (
    HuberEstimates,
    huber_m,
    mad,
    median,
    normal_quantile,
    plotting_positions,
    rho_bw,
)
from .simulation import (
    BiasMseResult,
    SensitivityCurve,
    SimulationScenario,
    false_positive_calibration,
    generate,
    run_bias_mse,
    sensitivity_curve,
    stylized_sample,
    tuning_delta_check,
)
from .transforms import (
    BOXCOX,
    YEOJOHNSON,
    TransformFamily,
    derivative,
    evaluate,
    inverse,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BOXCOX",
    "YEOJOHNSON",
    "BiasMseResult",
    "CentranormError",
    "CentranormWarning",
    "DegenerateDataError",
    "DomainError",
    "EstimatorSpec",
    "FittedTransform",
    "HuberEstimates",
    "OptimizationError",
    "PrestandardizationRecord",
    "SearchConfig",
    "SpecificationError",
    "SensitivityCurve",
    "SimulationScenario",
    "TransformFamily",
    "TransformRangeError",
    "apply",
    "apply_inverse",
    "derivative",
    "evaluate",
    "false_positive_calibration",
    "fit",
    "fit_carroll",
    "fit_ml",
    "fit_mtl",
    "fit_rawml",
    "fit_rewml",
    "fit_wml",
    "generate",
    "hard_rejection_weights",
    "huber_m",
    "inverse",
    "mad",
    "median",
    "minimize_scalar",
    "normal_quantile",
    "plotting_positions",
    "prestandardize",
    "rho_bw",
    "robust_criterion",
    "run_bias_mse",
    "sensitivity_curve",
    "stylized_sample",
    "tuning_delta_check",
    "__version__",
]
