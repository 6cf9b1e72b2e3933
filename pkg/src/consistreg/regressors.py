"""Closed-form consistent regression: linear (CLR) and kernel (CKR) models.

Both models minimize a squared-error objective with a ridge term and an
independence penalty weighted by mu. The penalty measures second-order
dependence between the fitted predictions and the sensitive block S, so
mu = 0 reduces CLR to ridge regression and CKR to kernel ridge regression.

CLR solves  (Xc^T Xc + lam I + (mu/n^2) Xc^T Sc Sc^T Xc) W = Xc^T Yc
CKR solves  (Kc + lam I + (mu/n^2) Ks_c Kc) L = Yc

where the subscript c denotes column-centered data blocks and doubly
centered Gram matrices. Targets are centered during fitting and the stored
mean is restored at prediction time. The CKR system matrix is non-symmetric
for mu > 0, so solves go through an LU factorization with a condition
estimate, one step of iterative refinement, and a back-substitution residual
check.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

from .kernels import (
    CenteringStats,
    KernelSpec,
    build_gram,
    center_columns,
    center_kernel,
    center_test_rows,
    cross_kernel,
)

COND_LIMIT = 1e12
RESIDUAL_RTOL = 1e-8
MIN_CKR_LAMBDA = 1e-12


class ModelKind(Enum):
    CLR = "clr"
    CKR = "ckr"


class SingularSystemError(RuntimeError):
    """Raised when a regression system is singular or too ill-conditioned to trust."""


@dataclass(frozen=True)
class FitProblem:
    """Row-aligned training blocks plus the two penalty weights.

    x: drivers (n x d), s: sensitive variables (n x q), y: targets (n x c).
    lam is the ridge weight, mu the independence-penalty weight.
    """

    x: np.ndarray
    s: np.ndarray
    y: np.ndarray
    lam: float
    mu: float

    def __post_init__(self) -> None:
        for name in ("x", "s", "y"):
            a = np.asarray(getattr(self, name), dtype=float)
            if a.ndim == 1:
                a = a[:, None]
            if a.ndim != 2:
                raise ValueError(f"{name} must be 2-d, got shape {a.shape}")
            object.__setattr__(self, name, a)
        n = self.x.shape[0]
        if self.s.shape[0] != n or self.y.shape[0] != n:
            raise ValueError(
                f"row-aligned blocks required: x has {n} rows, "
                f"s has {self.s.shape[0]}, y has {self.y.shape[0]}"
            )
        if n < 2:
            raise ValueError(f"need at least 2 samples, got {n}")
        for name in ("x", "s", "y"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} contains non-finite values")
        if self.lam < 0 or self.mu < 0:
            raise ValueError("lam and mu must be non-negative")
        if self.mu > 0 and self.s.shape[1] == 0:
            raise ValueError("mu > 0 requires at least one sensitive column")

    @property
    def n(self) -> int:
        return self.x.shape[0]


@dataclass(frozen=True)
class ClrModel:
    """Linear model: weights plus the column means needed at prediction time."""

    weights: np.ndarray
    x_stats: CenteringStats
    s_stats: CenteringStats
    y_stats: CenteringStats
    lam: float
    mu: float


@dataclass(frozen=True)
class CkrModel:
    """Kernel model: dual coefficients plus retained training inputs and kernels."""

    dual: np.ndarray
    x_train: np.ndarray
    kernel_x: KernelSpec
    kernel_s: KernelSpec
    k_raw_train: np.ndarray
    y_stats: CenteringStats
    lam: float
    mu: float


def _solve_checked(a: np.ndarray, rhs: np.ndarray, label: str) -> np.ndarray:
    """LU solve with condition estimate, one refinement step, and residual check."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # exact-singular warning; rcond check below
        lu, piv = sla.lu_factor(a)
    anorm = np.linalg.norm(a, 1)
    rcond, _ = lapack.dgecon(lu, anorm, norm="1")
    pivot = float(np.abs(np.diag(lu)).min())
    if not np.isfinite(rcond) or rcond < 1.0 / COND_LIMIT:
        cond = 1.0 / rcond if rcond > 0 else np.inf
        raise SingularSystemError(
            f"{label}: condition estimate {cond:.3e} exceeds {COND_LIMIT:.0e} "
            f"(smallest LU pivot {pivot:.3e})"
        )
    x = sla.lu_solve((lu, piv), rhs)
    x = x + sla.lu_solve((lu, piv), rhs - a @ x)
    resid = np.linalg.norm(rhs - a @ x)
    rhs_norm = np.linalg.norm(rhs)
    if resid > RESIDUAL_RTOL * rhs_norm:
        raise SingularSystemError(
            f"{label}: back-substitution residual {resid:.3e} exceeds "
            f"{RESIDUAL_RTOL:.0e} * ||rhs|| = {RESIDUAL_RTOL * rhs_norm:.3e} "
            f"(smallest LU pivot {pivot:.3e})"
        )
    return x


def fit_clr(p: FitProblem) -> ClrModel:
    """Fit the consistent linear model in closed form."""
    xc, x_stats = center_columns(p.x)
    sc, s_stats = center_columns(p.s)
    yc, y_stats = center_columns(p.y)
    d = xc.shape[1]
    a = xc.T @ xc + p.lam * np.eye(d)
    if p.mu > 0 and sc.shape[1] > 0:
        cross = xc.T @ sc
        a = a + (p.mu / p.n**2) * (cross @ cross.T)
    weights = _solve_checked(a, xc.T @ yc, "CLR normal equations")
    return ClrModel(
        weights=weights,
        x_stats=x_stats,
        s_stats=s_stats,
        y_stats=y_stats,
        lam=p.lam,
        mu=p.mu,
    )


def predict_clr(m: ClrModel, x_new: np.ndarray) -> np.ndarray:
    """Predict targets for new driver rows."""
    x_new = np.asarray(x_new, dtype=float)
    if x_new.ndim == 1:
        x_new = x_new[:, None]
    d = m.weights.shape[0]
    if x_new.shape[1] != d:
        raise ValueError(f"expected {d} driver columns, got {x_new.shape[1]}")
    return (x_new - m.x_stats.column_means) @ m.weights + m.y_stats.column_means


def solve_ckr_dual(
    k_centered: np.ndarray,
    k_s_centered: np.ndarray | None,
    y_centered: np.ndarray,
    lam: float,
    mu: float,
) -> np.ndarray:
    """Solve (Kc + lam I + (mu/n^2) Ks_c Kc) L = Yc for the dual coefficients."""
    n = k_centered.shape[0]
    if lam < MIN_CKR_LAMBDA:
        raise SingularSystemError(
            f"CKR requires lam >= {MIN_CKR_LAMBDA:.0e}: the centered Gram matrix "
            f"annihilates the constant vector, so the lam = 0 system is singular"
        )
    m = k_centered + lam * np.eye(n)
    if mu > 0 and k_s_centered is not None:
        m = m + (mu / n**2) * (k_s_centered @ k_centered)
    return _solve_checked(m, y_centered, "CKR dual system")


def fit_ckr(p: FitProblem, kernel_x: KernelSpec, kernel_s: KernelSpec) -> CkrModel:
    """Fit the consistent kernel model in closed form (dual coefficients)."""
    gram_x = build_gram(p.x, kernel_x)
    yc, y_stats = center_columns(p.y)
    k_s_centered = None
    if p.mu > 0 and p.s.shape[1] > 0:
        k_s_centered = build_gram(p.s, kernel_s).k_centered
    dual = solve_ckr_dual(gram_x.k_centered, k_s_centered, yc, p.lam, p.mu)
    return CkrModel(
        dual=dual,
        x_train=p.x.copy(),
        kernel_x=kernel_x,
        kernel_s=kernel_s,
        k_raw_train=gram_x.k_raw,
        y_stats=y_stats,
        lam=p.lam,
        mu=p.mu,
    )


def predict_ckr(m: CkrModel, x_new: np.ndarray) -> np.ndarray:
    """Predict targets for new driver rows via centered cross-kernel rows."""
    x_new = np.asarray(x_new, dtype=float)
    if x_new.ndim == 1:
        x_new = x_new[:, None]
    if x_new.shape[1] != m.x_train.shape[1]:
        raise ValueError(
            f"expected {m.x_train.shape[1]} driver columns, got {x_new.shape[1]}"
        )
    k_star = cross_kernel(x_new, m.x_train, m.kernel_x)
    k_star_c = center_test_rows(k_star, m.k_raw_train)
    return k_star_c @ m.dual + m.y_stats.column_means


def clr_objective_terms(
    weights: np.ndarray, p: FitProblem
) -> tuple[float, float, float]:
    """Decompose the CLR objective into (fit, ridge, penalty) factors.

    The objective is fit + lam * ridge + mu * penalty, with
    fit = ||Yc - Xc W||_F^2, ridge = ||W||_F^2, and
    penalty = (1/n^2) ||Sc^T Xc W||_F^2.
    """
    weights = np.asarray(weights, dtype=float)
    if weights.ndim == 1:
        weights = weights[:, None]
    if weights.shape != (p.x.shape[1], p.y.shape[1]):
        raise ValueError(
            f"weights shape {weights.shape} does not match "
            f"({p.x.shape[1]}, {p.y.shape[1]})"
        )
    xc, _ = center_columns(p.x)
    sc, _ = center_columns(p.s)
    yc, _ = center_columns(p.y)
    pred = xc @ weights
    fit = float(((yc - pred) ** 2).sum())
    ridge = float((weights**2).sum())
    if sc.shape[1] == 0:
        penalty = 0.0
    else:
        cross = sc.T @ pred
        penalty = float((cross**2).sum()) / p.n**2
    return fit, ridge, penalty


def clr_objective(weights: np.ndarray, p: FitProblem) -> float:
    """Evaluate the CLR objective; its stationary point is the fit_clr solution."""
    fit, ridge, penalty = clr_objective_terms(weights, p)
    return fit + p.lam * ridge + p.mu * penalty


def ckr_objective_terms(
    dual: np.ndarray,
    p: FitProblem,
    k_centered: np.ndarray,
    k_s_centered: np.ndarray | None,
) -> tuple[float, float, float]:
    """Decompose the CKR objective into (fit, ridge, penalty) factors.

    fit = ||Yc - Kc L||_F^2, ridge = Tr(L^T Kc L), and
    penalty = (1/n^2) Tr(L^T Kc Ks_c Kc L).
    """
    dual = np.asarray(dual, dtype=float)
    if dual.ndim == 1:
        dual = dual[:, None]
    if dual.shape != (p.n, p.y.shape[1]):
        raise ValueError(
            f"dual shape {dual.shape} does not match ({p.n}, {p.y.shape[1]})"
        )
    if k_centered.shape != (p.n, p.n):
        raise ValueError(f"Gram shape {k_centered.shape} does not match n = {p.n}")
    yc, _ = center_columns(p.y)
    pred = k_centered @ dual
    fit = float(((yc - pred) ** 2).sum())
    ridge = float((dual * pred).sum())
    if k_s_centered is None or p.s.shape[1] == 0:
        penalty = 0.0
    else:
        penalty = float((pred * (k_s_centered @ pred)).sum()) / p.n**2
    return fit, ridge, penalty


def ckr_objective(
    dual: np.ndarray,
    p: FitProblem,
    k_centered: np.ndarray,
    k_s_centered: np.ndarray | None,
) -> float:
    """Evaluate the CKR dual objective; the closed-form dual is a stationary point."""
    fit, ridge, penalty = ckr_objective_terms(dual, p, k_centered, k_s_centered)
    return fit + p.lam * ridge + p.mu * penalty


def clr_penalty_term(m: ClrModel, x: np.ndarray, s: np.ndarray) -> float:
    """Mu-free penalty factor of a fitted linear model on the given training blocks."""
    xc, _ = center_columns(np.asarray(x, dtype=float))
    sc, _ = center_columns(np.asarray(s, dtype=float))
    if sc.shape[1] == 0:
        return 0.0
    cross = sc.T @ (xc @ m.weights)
    return float((cross**2).sum()) / xc.shape[0] ** 2


def ckr_penalty_term(m: CkrModel, s: np.ndarray) -> float:
    """Mu-free penalty factor of a fitted kernel model on its training data."""
    s = np.asarray(s, dtype=float)
    if s.ndim == 1:
        s = s[:, None]
    n = m.k_raw_train.shape[0]
    if s.shape[1] == 0:
        return 0.0
    k_c = center_kernel(m.k_raw_train)
    k_s_c = build_gram(s, m.kernel_s).k_centered
    pred = k_c @ m.dual
    return float((pred * (k_s_c @ pred)).sum()) / n**2
