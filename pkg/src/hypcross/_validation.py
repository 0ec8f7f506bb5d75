"""Input validation helpers for the estimator-style API."""

from __future__ import annotations

import numpy as np
from sklearn.utils import check_array


def check_points(X, d: int | None = None) -> np.ndarray:
    """Return ``X`` as a float ``(m, d)`` array of torus points."""
    from .sampling_recovery import PointSet

    if isinstance(X, PointSet):
        X = X.values
    X = check_array(X, dtype=np.float64, ensure_2d=True, ensure_min_samples=1)
    if d is not None and X.shape[1] != d:
        raise ValueError(f"points have dimension {X.shape[1]}, expected {d}")
    return X


def check_samples(y, m: int) -> np.ndarray:
    """Complex sample values, shape ``(m,)`` or ``(m, k)`` for batched right-hand sides."""
    y = np.asarray(y)
    if y.ndim not in (1, 2):
        raise ValueError(f"samples must be 1-D or 2-D, got shape {y.shape}")
    if y.shape[0] != m:
        raise ValueError(f"{y.shape[0]} sample values for {m} points")
    y = y.astype(complex, copy=False)
    if not np.all(np.isfinite(y)):
        raise ValueError("sample values contain NaN or inf")
    return y


def check_weights(w, m: int) -> np.ndarray:
    w = np.asarray(w, dtype=float).reshape(-1)
    if w.shape[0] != m:
        raise ValueError(f"{w.shape[0]} weights for {m} points")
    if np.any(~np.isfinite(w)) or np.any(w <= 0):
        raise ValueError("weights must be positive and finite")
    return w
