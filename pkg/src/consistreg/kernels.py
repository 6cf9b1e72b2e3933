"""Kernel evaluation, Gram matrix construction, and feature-space centering.

Centering a Gram matrix K as H K H with H = I - (1/n) 1 1^T is implemented
by subtracting column means and then row means; the same ordering is reused
when centering cross-kernel rows for test points so that a test point equal
to a training point reproduces the corresponding centered training row.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.spatial.distance import pdist


class KernelFamily(Enum):
    LINEAR = "linear"
    RBF = "rbf"
    POLYNOMIAL = "polynomial"


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus parameters.

    bandwidth is the RBF length scale sigma in exp(-||x-z||^2 / (2 sigma^2)).
    degree and offset parameterize the polynomial kernel (x.z + offset)^degree.
    Parameters not used by the family are ignored.
    """

    family: KernelFamily
    bandwidth: float = 1.0
    degree: int = 2
    offset: float = 0.0

    def __post_init__(self) -> None:
        if self.family is KernelFamily.RBF and not self.bandwidth > 0:
            raise ValueError(f"RBF bandwidth must be positive, got {self.bandwidth}")
        if self.family is KernelFamily.POLYNOMIAL and self.degree < 1:
            raise ValueError(f"polynomial degree must be >= 1, got {self.degree}")

    @classmethod
    def linear(cls) -> "KernelSpec":
        return cls(KernelFamily.LINEAR)

    @classmethod
    def rbf(cls, bandwidth: float) -> "KernelSpec":
        return cls(KernelFamily.RBF, bandwidth=float(bandwidth))

    @classmethod
    def polynomial(cls, degree: int, offset: float = 0.0) -> "KernelSpec":
        return cls(KernelFamily.POLYNOMIAL, degree=int(degree), offset=float(offset))


@dataclass(frozen=True)
class CenteringStats:
    """Column means subtracted from a data block, plus the row count they came from."""

    column_means: np.ndarray
    n_train: int


@dataclass(frozen=True)
class GramPair:
    """Raw Gram matrix together with its doubly centered version."""

    k_raw: np.ndarray
    k_centered: np.ndarray


def _as_2d(a: np.ndarray, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise ValueError(f"{name} must be a 2-d array, got shape {a.shape}")
    return a


def kernel_eval(x: np.ndarray, z: np.ndarray, spec: KernelSpec) -> float:
    """Evaluate the kernel on a single pair of vectors."""
    x = np.asarray(x, dtype=float).ravel()
    z = np.asarray(z, dtype=float).ravel()
    if x.shape != z.shape:
        raise ValueError(f"dimension mismatch: {x.shape[0]} vs {z.shape[0]}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(z))):
        raise ValueError("kernel inputs must be finite")
    if spec.family is KernelFamily.LINEAR:
        return float(x @ z)
    if spec.family is KernelFamily.POLYNOMIAL:
        return float((x @ z + spec.offset) ** spec.degree)
    diff = x - z
    return float(np.exp(-(diff @ diff) / (2.0 * spec.bandwidth**2)))


def cross_kernel(a: np.ndarray, b: np.ndarray, spec: KernelSpec) -> np.ndarray:
    """Pairwise kernel evaluations between the rows of a (m x d) and b (n x d)."""
    a = _as_2d(a, "a")
    b = _as_2d(b, "b")
    if a.shape[1] != b.shape[1]:
        raise ValueError(
            f"dimension mismatch: a has {a.shape[1]} columns, b has {b.shape[1]}"
        )
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("kernel inputs must be finite")
    if spec.family is KernelFamily.LINEAR:
        return a @ b.T
    if spec.family is KernelFamily.POLYNOMIAL:
        return (a @ b.T + spec.offset) ** spec.degree
    sq = (a * a).sum(axis=1)[:, None] + (b * b).sum(axis=1)[None, :] - 2.0 * (a @ b.T)
    np.clip(sq, 0.0, None, out=sq)
    return np.exp(-sq / (2.0 * spec.bandwidth**2))


def center_kernel(k: np.ndarray) -> np.ndarray:
    """Doubly center a square Gram matrix (equivalent to H K H)."""
    k = np.asarray(k, dtype=float)
    if k.ndim != 2 or k.shape[0] != k.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {k.shape}")
    t = k - k.mean(axis=0)
    return t - t.mean(axis=1, keepdims=True)


def build_gram(x: np.ndarray, spec: KernelSpec) -> GramPair:
    """Build the raw and centered Gram matrices over the rows of x.

    Requires n >= 2; centering a single-sample Gram matrix is degenerate.
    """
    x = _as_2d(x, "x")
    n = x.shape[0]
    if n < 2:
        raise ValueError(f"need at least 2 samples to build a Gram matrix, got {n}")
    k_raw = cross_kernel(x, x, spec)
    if spec.family is KernelFamily.RBF:
        # self-distances are exactly zero; pin the diagonal against rounding
        np.fill_diagonal(k_raw, 1.0)
    return GramPair(k_raw=k_raw, k_centered=center_kernel(k_raw))


def center_test_rows(k_star: np.ndarray, k_raw_train: np.ndarray) -> np.ndarray:
    """Center cross-kernel rows consistently with the training Gram centering.

    k_star holds kernel evaluations between m test points (rows) and the n
    training points (columns). Returns (k_star - (1/n) 1 1^T K) H, so a test
    row equal to training row i reproduces row i of center_kernel(K).
    """
    k_star = np.asarray(k_star, dtype=float)
    if k_star.ndim == 1:
        k_star = k_star[None, :]
    k_raw_train = np.asarray(k_raw_train, dtype=float)
    n = k_raw_train.shape[0]
    if k_star.shape[1] != n:
        raise ValueError(
            f"cross-kernel has {k_star.shape[1]} columns but training Gram is {n} x {n}"
        )
    t = k_star - k_raw_train.mean(axis=0)
    return t - t.mean(axis=1, keepdims=True)


def median_heuristic(x: np.ndarray) -> float:
    """Median of pairwise Euclidean distances; falls back to 1.0 when it is zero."""
    x = _as_2d(x, "x")
    if x.shape[0] < 2:
        raise ValueError("median heuristic needs at least 2 samples")
    med = float(np.median(pdist(x)))
    return med if med > 0.0 else 1.0


def center_columns(m: np.ndarray) -> tuple[np.ndarray, CenteringStats]:
    """Subtract column means; returns the centered matrix and the means."""
    m = _as_2d(m, "m")
    if m.shape[0] < 1:
        raise ValueError("cannot center an empty matrix")
    means = m.mean(axis=0)
    return m - means, CenteringStats(column_means=means, n_train=m.shape[0])
