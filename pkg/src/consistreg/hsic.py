"""Empirical dependence estimation between two row-aligned samples.

Both estimators compute the squared Hilbert-Schmidt norm of the empirical
cross-covariance with the biased 1/n^2 normalization, which is exactly the
quantity the regression solvers penalize. Values within 1e-12 of zero are
clamped to 0 so near-independent results do not carry sign noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ZERO_CLAMP = 1e-12
CENTERING_TOL = 1e-6


@dataclass(frozen=True)
class HsicValue:
    """Dependence estimate (non-negative) and the sample count it came from."""

    value: float
    n: int


def _clamp(v: float, context: str) -> float:
    if v < -1e-9:
        raise ValueError(f"{context}: estimate {v:.3e} is negative beyond tolerance")
    return 0.0 if v < ZERO_CLAMP else v


def hsic_linear(a: np.ndarray, b: np.ndarray) -> HsicValue:
    """Linear-kernel estimate: (1/n^2) ||A_c^T B_c||_F^2 with column-centered blocks.

    Zero exactly when the empirical cross-covariance between a and b vanishes.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if b.ndim == 1:
        b = b[:, None]
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"row-count mismatch: {a.shape[0]} vs {b.shape[0]}")
    n = a.shape[0]
    if n < 2:
        raise ValueError("need at least 2 samples")
    ac = a - a.mean(axis=0)
    bc = b - b.mean(axis=0)
    cross = ac.T @ bc
    value = float((cross * cross).sum()) / float(n) ** 2
    return HsicValue(value=_clamp(value, "hsic_linear"), n=n)


def hsic_kernel(k_a_centered: np.ndarray, k_b_centered: np.ndarray) -> HsicValue:
    """General-kernel estimate: (1/n^2) Tr(Ka Kb) on centered Gram matrices.

    Inputs must already be centered (H K H); passing uncentered matrices is a
    caller bug and raises rather than silently re-centering.
    """
    ka = np.asarray(k_a_centered, dtype=float)
    kb = np.asarray(k_b_centered, dtype=float)
    if ka.shape != kb.shape or ka.ndim != 2 or ka.shape[0] != ka.shape[1]:
        raise ValueError(f"size mismatch: {ka.shape} vs {kb.shape}")
    n = ka.shape[0]
    for name, k in (("first", ka), ("second", kb)):
        if np.abs(k.sum(axis=1)).max() > CENTERING_TOL:
            raise ValueError(f"{name} Gram matrix is not centered (row sums exceed {CENTERING_TOL})")
        if not np.allclose(k, k.T, atol=1e-9, rtol=0.0):
            raise ValueError(f"{name} Gram matrix is not symmetric")
    value = float(np.einsum("ij,ji->", ka, kb)) / float(n) ** 2
    return HsicValue(value=_clamp(value, "hsic_kernel"), n=n)
