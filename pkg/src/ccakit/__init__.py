"""Scalable CCA: first-order augmented-gradient solvers, exact references,
approximate-whitening baselines, kernel CCA, and a benchmark harness."""

from .appgrad import (
    AppGradState,
    StepSizes,
    appgrad_step,
    appgrad_step_rank1,
    error_metric,
    random_init,
    run_appgrad,
    theoretical_step_size,
)
from .baselines import dw_cca, nw_cca, pca_cca
from .harness import SolverConfig, run_experiment
from .kernels import KernelGram, KernelSpec, kernel_cca, kernel_gram
from .linalg import (
    DataMatrix,
    DegenerateIterateError,
    SingularMatrixError,
    cross_covariance,
    gram,
    induced_norm,
    randomized_svd,
    sym_inv_sqrt,
)
from .metrics import RunReport, pcc, principal_angles, tcc
from .planted import PlantedParams, generate_planted
from .reference import CcaModel, als_cca, naive_gradient_step, qr_cca, spectral_cca
from .stochastic import (
    MinibatchPlan,
    StepSchedule,
    cross_validate_step,
    run_stochastic,
    sample_minibatch,
    stochastic_appgrad_step,
)

__all__ = [
    "AppGradState", "CcaModel", "DataMatrix", "DegenerateIterateError",
    "KernelGram", "KernelSpec", "MinibatchPlan", "PlantedParams", "RunReport",
    "SingularMatrixError", "SolverConfig", "StepSchedule", "StepSizes",
    "als_cca", "appgrad_step", "appgrad_step_rank1", "cross_covariance",
    "cross_validate_step", "dw_cca", "error_metric", "generate_planted",
    "gram", "induced_norm", "kernel_cca", "kernel_gram", "naive_gradient_step",
    "nw_cca", "pca_cca", "pcc", "principal_angles", "qr_cca", "random_init",
    "randomized_svd", "run_appgrad", "run_experiment", "run_stochastic",
    "sample_minibatch", "spectral_cca", "stochastic_appgrad_step",
    "sym_inv_sqrt", "tcc", "theoretical_step_size",
]
