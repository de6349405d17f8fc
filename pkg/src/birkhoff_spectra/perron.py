"""Perron-Frobenius data of nonnegative irreducible matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

__all__ = ["PerronData", "perron", "log_perron_root", "power_iteration"]


@dataclass
class PerronData:
    """Perron root and positive eigenvectors.

    ``lower``/``upper`` are Collatz-Wielandt bounds on the root computed from
    the returned right vector; ``log_scale`` is added back when the matrix
    was given in log form.
    """

    root: float
    log_root: float
    right: np.ndarray
    left: np.ndarray
    lower: float
    upper: float
    iterations: int = 0


def _cw_bounds(W, r):
    y = W @ r
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = y / r
    ratio = ratio[r > 0]
    return float(ratio.min()), float(ratio.max())


def power_iteration(W, tol=1e-13, max_iter=1_000_000, x0=None):
    """Perron root of an irreducible nonnegative matrix by power iteration.

    Iterates on ``W + I``, which is primitive with root ``rho + 1``, and stops
    once the Collatz-Wielandt bracket has relative width below ``tol``.

    Returns
    -------
    root, vector, (lower, upper), iterations
    """
    W = np.asarray(W, dtype=float)
    n = W.shape[0]
    x = np.full(n, 1.0 / n) if x0 is None else np.asarray(x0, dtype=float).copy()
    lo = hi = np.nan
    for it in range(1, max_iter + 1):
        y = W @ x + x
        s = y.sum()
        if s == 0.0:
            raise ValueError("matrix is nilpotent on the start vector")
        y /= s
        if it % 8 == 0 or it == 1:
            lo, hi = _cw_bounds(W, y)
            if hi - lo <= tol * max(abs(hi), 1e-300):
                return 0.5 * (lo + hi), y, (lo, hi), it
        x = y
    return 0.5 * (lo + hi), x, (lo, hi), max_iter


def _refine(W, root, r, l, steps=2):
    """Inverse iteration just above ``root``; sharpens both vectors."""
    n = W.shape[0]
    sigma = root * (1.0 + 1e-11) + 1e-300
    lu = lu_factor(sigma * np.eye(n) - W, check_finite=False)
    for _ in range(steps):
        r = np.abs(lu_solve(lu, r, check_finite=False))
        r /= r.sum()
        l = np.abs(lu_solve(lu, l, trans=1, check_finite=False))
        l /= l.sum()
    if not (np.all(np.isfinite(r)) and np.all(np.isfinite(l))):
        raise FloatingPointError("inverse iteration failed")
    root = float(l @ (W @ r) / (l @ r))
    return root, r, l


def perron(W, log_scale: float = 0.0, dense_limit: int = 600) -> PerronData:
    """Perron data of a nonnegative irreducible matrix ``W``.

    Small matrices go through a dense eigensolver and are then polished by
    a few power steps; larger ones use :func:`power_iteration` directly.
    The true matrix is ``exp(log_scale) * W``.
    """
    W = np.asarray(W, dtype=float)
    n = W.shape[0]
    if n == 1:
        r = np.ones(1)
        root = float(W[0, 0])
        return PerronData(root, log_scale + np.log(root), r, r.copy(), root, root)
    if n <= dense_limit:
        vals, vecs = np.linalg.eig(W)
        i = int(np.argmax(vals.real))
        root = float(vals[i].real)
        r = np.abs(vecs[:, i].real)
        r /= r.sum()
        lvals, lvecs = np.linalg.eig(W.T)
        j = int(np.argmax(lvals.real))
        l = np.abs(lvecs[:, j].real)
        l /= l.sum()
        lo, hi = _cw_bounds(W, r) if (r > 0).all() else (root, root)
        if not (lo <= root <= hi) or hi - lo > 1e-9 * max(root, 1e-300):
            root, r, (lo, hi), _ = power_iteration(W, x0=r if (r > 0).all() else None)
            _, l, _, _ = power_iteration(W.T)
        root, r, l = _refine(W, root, r, l)
        lo, hi = _cw_bounds(W, r)
        return PerronData(root, log_scale + float(np.log(root)), r, l, lo, hi)
    root, r, (lo, hi), it = power_iteration(W)
    _, l, _, _ = power_iteration(W.T)
    return PerronData(root, log_scale + float(np.log(root)), r, l, lo, hi, it)


def log_perron_root(logW, mask) -> PerronData:
    """Perron data of ``exp(logW)`` restricted to ``mask`` without overflow."""
    logW = np.where(mask, logW, -np.inf)
    shift = float(np.max(logW[mask]))
    W = np.where(mask, np.exp(logW - shift), 0.0)
    return perron(W, log_scale=shift)
