"""Consistent regression: closed-form linear and kernel models that trade
prediction accuracy against statistical independence from sensitive variables.
"""

from .data import (
    CsvSchemaError,
    Dataset,
    SensitiveMode,
    SynthConfig,
    gen_synthetic,
    load_csv,
    save_csv,
    train_test_split,
)
from .hsic import HsicValue, hsic_kernel, hsic_linear
from .kernels import (
    CenteringStats,
    GramPair,
    KernelFamily,
    KernelSpec,
    build_gram,
    center_columns,
    center_kernel,
    center_test_rows,
    cross_kernel,
    kernel_eval,
    median_heuristic,
)
from .regressors import (
    CkrModel,
    ClrModel,
    FitProblem,
    ModelKind,
    SingularSystemError,
    ckr_objective,
    ckr_objective_terms,
    ckr_penalty_term,
    clr_objective,
    clr_objective_terms,
    clr_penalty_term,
    fit_ckr,
    fit_clr,
    predict_ckr,
    predict_clr,
    solve_ckr_dual,
)
from .selection import (
    CvConfig,
    GridResult,
    SweepRecord,
    grid_search,
    kfold_indices,
    rmse,
    sweep_mu,
)

__version__ = "0.1.0"

__all__ = [
    "CenteringStats",
    "CkrModel",
    "ClrModel",
    "CsvSchemaError",
    "CvConfig",
    "Dataset",
    "FitProblem",
    "GramPair",
    "GridResult",
    "HsicValue",
    "KernelFamily",
    "KernelSpec",
    "ModelKind",
    "SensitiveMode",
    "SingularSystemError",
    "SweepRecord",
    "SynthConfig",
    "build_gram",
    "center_columns",
    "center_kernel",
    "center_test_rows",
    "ckr_objective",
    "ckr_objective_terms",
    "ckr_penalty_term",
    "clr_objective",
    "clr_objective_terms",
    "clr_penalty_term",
    "cross_kernel",
    "fit_ckr",
    "fit_clr",
    "gen_synthetic",
    "grid_search",
    "hsic_kernel",
    "hsic_linear",
    "kernel_eval",
    "kfold_indices",
    "load_csv",
    "median_heuristic",
    "predict_ckr",
    "predict_clr",
    "rmse",
    "save_csv",
    "solve_ckr_dual",
    "sweep_mu",
    "train_test_split",
]
