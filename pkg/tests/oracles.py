"""Independent test oracles: loop-based estimators, finite differences,
steepest descent, and direct solver baselines. Nothing here shares code with
the library paths it checks.
"""

from __future__ import annotations

import numpy as np


def hsic_linear_loops(a: np.ndarray, b: np.ndarray) -> float:
    """Elementwise-loop evaluation of (1/n^2) Tr(A_c^T B_c B_c^T A_c)."""
    a = np.atleast_2d(np.asarray(a, dtype=float).T).T
    b = np.atleast_2d(np.asarray(b, dtype=float).T).T
    n, p = a.shape
    q = b.shape[1]
    ac = np.empty_like(a)
    bc = np.empty_like(b)
    for j in range(p):
        ac[:, j] = a[:, j] - sum(a[i, j] for i in range(n)) / n
    for j in range(q):
        bc[:, j] = b[:, j] - sum(b[i, j] for i in range(n)) / n
    total = 0.0
    for k in range(p):
        for l in range(q):
            dot = 0.0
            for i in range(n):
                dot += ac[i, k] * bc[i, l]
            total += dot * dot
    return total / n**2


def hsic_kernel_loops(ka: np.ndarray, kb: np.ndarray) -> float:
    """Elementwise-loop evaluation of (1/n^2) Tr(Ka Kb)."""
    n = ka.shape[0]
    total = 0.0
    for i in range(n):
        for j in range(n):
            total += ka[i, j] * kb[j, i]
    return total / n**2


def fd_gradient(objective, w: np.ndarray, step: float | None = None) -> np.ndarray:
    """Central-difference gradient of a scalar objective at w."""
    w = np.asarray(w, dtype=float)
    if step is None:
        step = 1e-5 * max(1.0, float(np.abs(w).max()))
    grad = np.zeros_like(w)
    it = np.nditer(w, flags=["multi_index"])
    while not it.finished:
        idx = it.multi_index
        wp = w.copy()
        wm = w.copy()
        wp[idx] += step
        wm[idx] -= step
        grad[idx] = (objective(wp) - objective(wm)) / (2.0 * step)
        it.iternext()
    return grad


def steepest_descent(
    grad,
    x0: np.ndarray,
    target: np.ndarray | None = None,
    target_rtol: float = 1e-7,
    grad_tol: float = 1e-13,
    max_iter: int = 2_000_000,
    check_every: int = 500,
) -> tuple[np.ndarray, int]:
    """Exact-line-search steepest descent for objectives with affine gradients.

    The gradient of a quadratic objective is affine, so the curvature along
    the descent direction is grad(x + g) - grad(x) and the exact step length
    follows without touching any closed-form solver. Stops when the gradient
    norm collapses or, if a target is supplied, when the iterate is within
    target_rtol of it in relative distance.
    """
    x = np.asarray(x0, dtype=float).copy()
    g = grad(x)
    g0 = float(np.linalg.norm(g))
    target_norm = float(np.linalg.norm(target)) if target is not None else 0.0
    for it in range(max_iter):
        gn2 = float((g * g).sum())
        if np.sqrt(gn2) <= grad_tol * (1.0 + g0):
            return x, it
        if target is not None and it % check_every == 0:
            if np.linalg.norm(x - target) <= target_rtol * target_norm:
                return x, it
        curvature = float((g * (grad(x + g) - g)).sum())
        if curvature <= 0:
            return x, it
        x = x - (gn2 / curvature) * g
        g = grad(x)
    return x, max_iter


def ridge_solve(x: np.ndarray, y: np.ndarray, lam: float) -> np.ndarray:
    """Direct ridge regression on column-centered blocks."""
    xc = x - x.mean(axis=0)
    yc = y - y.mean(axis=0)
    return np.linalg.solve(xc.T @ xc + lam * np.eye(x.shape[1]), xc.T @ yc)


def krr_solve(x: np.ndarray, y: np.ndarray, lam: float, bandwidth: float) -> np.ndarray:
    """Direct kernel ridge regression with an explicitly centered RBF Gram."""
    n = x.shape[0]
    sq = (
        (x * x).sum(axis=1)[:, None]
        + (x * x).sum(axis=1)[None, :]
        - 2.0 * (x @ x.T)
    )
    np.clip(sq, 0.0, None, out=sq)
    k = np.exp(-sq / (2.0 * bandwidth**2))
    np.fill_diagonal(k, 1.0)
    h = np.eye(n) - np.ones((n, n)) / n
    kc = h @ k @ h
    yc = y - y.mean(axis=0)
    return np.linalg.solve(kc + lam * np.eye(n), yc)


def center_gram_explicit(k: np.ndarray) -> np.ndarray:
    """H K H with the centering matrix materialized."""
    n = k.shape[0]
    h = np.eye(n) - np.ones((n, n)) / n
    return h @ k @ h
