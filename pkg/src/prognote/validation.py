"""Input validation helpers used across estimators and metric functions."""
from __future__ import annotations

import numpy as np


def as_score_label_arrays(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    """Validate a pooled (score, label) set and return float64/int64 arrays.

    Scores must lie in [0, 1]; labels must be binary 0/1. Raises ValueError
    otherwise, including for empty input.
    """
    s = np.asarray(scores, dtype=np.float64).ravel()
    y = np.asarray(labels).ravel()
    if s.size == 0:
        raise ValueError("empty score set")
    if s.size != y.size:
        raise ValueError(f"scores and labels differ in length: {s.size} != {y.size}")
    if not np.all(np.isfinite(s)):
        raise ValueError("scores contain non-finite values")
    if s.min() < 0.0 or s.max() > 1.0:
        raise ValueError("scores must lie in [0, 1]")
    y = y.astype(np.int64)
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    return s, y


def as_float_vector(x, name: str = "vector") -> np.ndarray:
    v = np.asarray(x, dtype=np.float64).ravel()
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite values")
    return v


def check_fractions(fractions) -> tuple[float, float, float]:
    """Validate a (train, val, test) fraction triple summing to 1."""
    fr = tuple(float(f) for f in fractions)
    if len(fr) != 3:
        raise ValueError("expected three split fractions (train, val, test)")
    if any(f <= 0.0 for f in fr):
        raise ValueError("split fractions must be positive")
    if abs(sum(fr) - 1.0) > 1e-9:
        raise ValueError(f"fractions must sum to 1, got {sum(fr)!r}")
    return fr


def check_positive(value, name: str):
    if value <= 0:
        raise ValueError(f"{name} must be positive, got {value!r}")
    return value
