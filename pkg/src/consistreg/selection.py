"""Cross-validated hyperparameter selection and the accuracy/consistency sweep.

For each value of the consistency weight mu, grid_search picks the ridge
weight (and RBF bandwidth, for the kernel model) minimizing mean validation
RMSE across folds; mu itself is never selected by CV since it encodes the
caller's consistency preference. Ties break toward the largest ridge weight,
then the largest bandwidth. sweep_mu strings the per-mu selections into a
trade-off curve.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

import numpy as np

from .data import Dataset
from .hsic import hsic_linear
from .kernels import KernelSpec, median_heuristic
from .regressors import (
    CkrModel,
    ClrModel,
    FitProblem,
    ModelKind,
    SingularSystemError,
    ckr_penalty_term,
    clr_penalty_term,
    fit_ckr,
    fit_clr,
    predict_ckr,
    predict_clr,
)

MEDIAN_SENTINEL = "median"

# mirrors the orders-of-magnitude axis of a trade-off curve
DEFAULT_MU_GRID = (0.0,) + tuple(10.0**k for k in range(-2, 11))
DEFAULT_LAMBDA_GRID = (1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0)


@dataclass
class CvConfig:
    """K-fold cross-validation settings and hyperparameter grids.

    bandwidth_grid entries are positive reals or the string "median", which
    resolves to the median heuristic on the training drivers at search time.
    """

    k_folds: int = 5
    seed: int = 0
    lambda_grid: Sequence[float] = DEFAULT_LAMBDA_GRID
    bandwidth_grid: Sequence[float | str] = (MEDIAN_SENTINEL,)

    def __post_init__(self) -> None:
        if self.k_folds < 2:
            raise ValueError(f"k_folds must be >= 2, got {self.k_folds}")
        if not self.lambda_grid or not self.bandwidth_grid:
            raise ValueError("hyperparameter grids must be non-empty")
        if any(lam <= 0 for lam in self.lambda_grid):
            raise ValueError("lambda grid entries must be positive")
        for bw in self.bandwidth_grid:
            if isinstance(bw, str):
                if bw != MEDIAN_SENTINEL:
                    raise ValueError(f"unknown bandwidth sentinel '{bw}'")
            elif bw <= 0:
                raise ValueError("bandwidth grid entries must be positive")


@dataclass(frozen=True)
class SweepRecord:
    """One row of the trade-off curve."""

    mu: float
    lambda_selected: float
    bandwidth_selected: float
    rmse_train: float
    rmse_test: float
    hsic_pred_s: float
    penalty_term: float


class GridResult(NamedTuple):
    lam: float
    bandwidth: float
    cv_rmse: float


def rmse(pred: np.ndarray, target: np.ndarray) -> float:
    """Root mean square error over all entries."""
    pred = np.asarray(pred, dtype=float)
    target = np.asarray(target, dtype=float)
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {target.shape}")
    return float(np.sqrt(np.mean((pred - target) ** 2)))


def kfold_indices(
    n: int, k: int, seed: int
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Deterministic shuffled k-fold partition of range(n); fold sizes differ by <= 1."""
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if k > n:
        raise ValueError(f"k = {k} exceeds the number of samples n = {n}")
    perm = np.random.default_rng(seed).permutation(n)
    parts = np.array_split(perm, k)
    folds = []
    for i in range(k):
        val = np.sort(parts[i])
        train = np.sort(np.concatenate([parts[j] for j in range(k) if j != i]))
        folds.append((train, val))
    return folds


def _fit_and_predict(
    train: Dataset,
    x_eval: np.ndarray,
    lam: float,
    mu: float,
    model_kind: ModelKind,
    kernel_x: KernelSpec | None,
    kernel_s: KernelSpec | None,
) -> np.ndarray:
    problem = FitProblem(x=train.x, s=train.s, y=train.y, lam=lam, mu=mu)
    if model_kind is ModelKind.CLR:
        return predict_clr(fit_clr(problem), x_eval)
    model = fit_ckr(problem, kernel_x, kernel_s)
    return predict_ckr(model, x_eval)


def _resolve_bandwidths(
    grid: Sequence[float | str], train: Dataset
) -> list[float]:
    resolved = []
    for bw in grid:
        if isinstance(bw, str):
            resolved.append(median_heuristic(train.x))
        else:
            resolved.append(float(bw))
    return resolved


def _default_kernel_s(train: Dataset) -> KernelSpec:
    if train.q == 0:
        return KernelSpec.rbf(1.0)
    return KernelSpec.rbf(median_heuristic(train.s))


def grid_search(
    train: Dataset,
    mu: float,
    cfg: CvConfig,
    model_kind: ModelKind,
    kernel_x_base: KernelSpec | None = None,
    kernel_s: KernelSpec | None = None,
) -> GridResult:
    """Pick (lambda, bandwidth) minimizing mean validation RMSE at fixed mu.

    kernel_x_base supplies the kernel family for the CKR model; its bandwidth
    field is replaced by each grid value. Defaults to RBF. kernel_s defaults
    to an RBF kernel with the median-heuristic bandwidth on the sensitive
    block. Grid points whose fits fail as singular are skipped; if every
    point fails, the collected failures are raised.
    """
    folds = kfold_indices(train.n, cfg.k_folds, cfg.seed)
    fold_data = [(train.take(tr), train.take(va)) for tr, va in folds]
    if kernel_x_base is None:
        kernel_x_base = KernelSpec.rbf(1.0)
    if kernel_s is None and model_kind is ModelKind.CKR:
        kernel_s = _default_kernel_s(train)
    bandwidths = _resolve_bandwidths(cfg.bandwidth_grid, train)

    best: tuple[float, float, float] | None = None  # (cv_rmse, lam, bw)
    failures: list[str] = []
    for lam in sorted(set(float(v) for v in cfg.lambda_grid)):
        for bw in sorted(set(bandwidths)):
            kernel_x = replace(kernel_x_base, bandwidth=bw)
            errors = []
            try:
                for tr, va in fold_data:
                    pred = _fit_and_predict(
                        tr, va.x, lam, mu, model_kind, kernel_x, kernel_s
                    )
                    errors.append(rmse(pred, va.y))
            except SingularSystemError as err:
                failures.append(f"lambda={lam:g}, bandwidth={bw:g}: {err}")
                continue
            cv_rmse = float(np.mean(errors))
            if best is None:
                best = (cv_rmse, lam, bw)
            else:
                b_rmse, b_lam, b_bw = best
                if cv_rmse < b_rmse or (
                    cv_rmse == b_rmse
                    and (lam > b_lam or (lam == b_lam and bw > b_bw))
                ):
                    best = (cv_rmse, lam, bw)
    if best is None:
        raise SingularSystemError(
            "all grid points failed to fit:\n  " + "\n  ".join(failures)
        )
    return GridResult(lam=best[1], bandwidth=best[2], cv_rmse=best[0])


def sweep_mu(
    train: Dataset,
    test: Dataset,
    mu_grid: Sequence[float],
    cfg: CvConfig,
    model_kind: ModelKind,
    kernel_x_base: KernelSpec | None = None,
    kernel_s: KernelSpec | None = None,
) -> list[SweepRecord]:
    """Trade-off curve: one record per mu with CV-selected hyperparameters.

    Records train/test RMSE, the linear HSIC between test predictions and the
    test sensitive block, and the fitted model's mu-free penalty factor on
    the training data, in mu_grid order.
    """
    mu_grid = [float(m) for m in mu_grid]
    if not mu_grid:
        raise ValueError("mu grid must be non-empty")
    if any(m < 0 for m in mu_grid):
        raise ValueError("mu grid entries must be non-negative")
    if any(mu_grid[i] > mu_grid[i + 1] for i in range(len(mu_grid) - 1)):
        raise ValueError("mu grid must be sorted ascending")
    if kernel_s is None and model_kind is ModelKind.CKR:
        kernel_s = _default_kernel_s(train)

    records = []
    for mu in mu_grid:
        try:
            chosen = grid_search(train, mu, cfg, model_kind, kernel_x_base, kernel_s)
            base = kernel_x_base if kernel_x_base is not None else KernelSpec.rbf(1.0)
            kernel_x = replace(base, bandwidth=chosen.bandwidth)
            problem = FitProblem(x=train.x, s=train.s, y=train.y, lam=chosen.lam, mu=mu)
            if model_kind is ModelKind.CLR:
                model: ClrModel | CkrModel = fit_clr(problem)
                pred_train = predict_clr(model, train.x)
                pred_test = predict_clr(model, test.x)
                penalty = clr_penalty_term(model, train.x, train.s)
            else:
                model = fit_ckr(problem, kernel_x, kernel_s)
                pred_train = predict_ckr(model, train.x)
                pred_test = predict_ckr(model, test.x)
                penalty = ckr_penalty_term(model, train.s)
        except SingularSystemError as err:
            raise SingularSystemError(f"sweep failed at mu = {mu:g}: {err}") from err
        if test.q > 0:
            hsic_pred = hsic_linear(pred_test, test.s).value
        else:
            hsic_pred = 0.0
        records.append(
            SweepRecord(
                mu=mu,
                lambda_selected=chosen.lam,
                bandwidth_selected=chosen.bandwidth,
                rmse_train=rmse(pred_train, train.y),
                rmse_test=rmse(pred_test, test.y),
                hsic_pred_s=hsic_pred,
                penalty_term=penalty,
            )
        )
    return records
