"""Metrics over pooled per-visit predictions: PR curve, average precision,
Brier score, and calibration bins."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .validation import as_score_label_arrays


@dataclass(frozen=True)
class PrCurve:
    """Operating points of a precision-recall curve.

    ``recall[0] == 0`` and ``precision[0] == 1`` form the conventional anchor;
    every following point corresponds to one distinct score threshold
    (descending, ties grouped), so ``len(thresholds) == len(recall) - 1``.
    The final point is (1, prevalence).
    """

    recall: np.ndarray
    precision: np.ndarray
    thresholds: np.ndarray


def pr_curve(scores, labels) -> PrCurve:
    """Precision-recall curve with one point per distinct score threshold.

    Predicting positive means ``score >= threshold``. Requires at least one
    positive label, otherwise recall is undefined.
    """
    s, y = as_score_label_arrays(scores, labels)
    n_pos = int(y.sum())
    if n_pos == 0:
        raise ValueError("undefined recall: no positive labels in score set")
    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    y_sorted = y[order]
    tp_cum = np.cumsum(y_sorted)
    # last index of each tied-score group = one operating point per threshold
    boundary = np.nonzero(np.diff(s_sorted))[0]
    idx = np.concatenate([boundary, [s.size - 1]])
    tp = tp_cum[idx].astype(np.float64)
    predicted = (idx + 1).astype(np.float64)
    recall = np.concatenate([[0.0], tp / n_pos])
    precision = np.concatenate([[1.0], tp / predicted])
    return PrCurve(recall=recall, precision=precision, thresholds=s_sorted[idx])


def average_precision(curve: PrCurve) -> float:
    """Area under the PR curve as average precision: sum of
    (recall_k - recall_{k-1}) * precision_k over threshold steps."""
    return float(np.sum(np.diff(curve.recall) * curve.precision[1:]))


def brier_score(scores, labels) -> float:
    """Mean squared difference between scores and binary labels."""
    s, y = as_score_label_arrays(scores, labels)
    return float(np.mean((s - y) ** 2))


@dataclass(frozen=True)
class CalibrationBin:
    lo: float
    hi: float
    count: int
    mean_score: float | None  # None when the bin is empty
    event_rate: float | None


def calibration_bins(scores, labels, n_bins: int = 10) -> list[CalibrationBin]:
    """Equal-width calibration bins on [0, 1]; the last bin is right-closed.

    Empty bins are emitted with count 0 and undefined (None) rates.
    """
    if n_bins < 2:
        raise ValueError(f"n_bins must be >= 2, got {n_bins}")
    s, y = as_score_label_arrays(scores, labels)
    idx = np.minimum((s * n_bins).astype(np.int64), n_bins - 1)
    bins: list[CalibrationBin] = []
    for k in range(n_bins):
        mask = idx == k
        count = int(mask.sum())
        if count:
            mean_score = float(s[mask].mean())
            event_rate = float(y[mask].mean())
        else:
            mean_score = None
            event_rate = None
        bins.append(
            CalibrationBin(lo=k / n_bins, hi=(k + 1) / n_bins, count=count,
                           mean_score=mean_score, event_rate=event_rate)
        )
    return bins


def evaluation_report(scores, labels, n_bins: int = 10,
                      positive: str = "survival") -> dict:
    """Bundle AUC-PR, Brier, prevalence, curve, and calibration into one dict.

    ``positive`` selects which class counts as the PR-positive class:
    "survival" keeps label 1 (survives beyond the horizon) positive;
    "death" flips both scores and labels so the within-horizon death class
    is ranked instead.
    """
    if positive not in ("survival", "death"):
        raise ValueError(f"positive must be 'survival' or 'death', got {positive!r}")
    s, y = as_score_label_arrays(scores, labels)
    if positive == "death":
        s, y = 1.0 - s, 1 - y
    curve = pr_curve(s, y)
    bins = calibration_bins(s, y, n_bins=n_bins)
    return {
        "positive": positive,
        "n": int(s.size),
        "prevalence": float(y.mean()),
        "auc_pr": average_precision(curve),
        "brier": brier_score(s, y),
        "curve": [
            {
                "recall": float(r),
                "precision": float(p),
                "threshold": None if k == 0 else float(curve.thresholds[k - 1]),
            }
            for k, (r, p) in enumerate(zip(curve.recall, curve.precision))
        ],
        "calibration": [
            {
                "lo": b.lo,
                "hi": b.hi,
                "count": b.count,
                "mean_score": b.mean_score,
                "event_rate": b.event_rate,
            }
            for b in bins
        ],
    }


def format_report_table(report: dict) -> str:
    """Plain-text summary table for an evaluation report."""
    lines = [
        f"n pairs        {report['n']}",
        f"positive class {report['positive']}",
        f"prevalence     {report['prevalence']:.4f}",
        f"AUC-PR         {report['auc_pr']:.4f}",
        f"Brier          {report['brier']:.4f}",
        "",
        "calibration (bin, count, mean score, event rate)",
    ]
    for b in report["calibration"]:
        if b["count"]:
            lines.append(
                f"  [{b['lo']:.2f}, {b['hi']:.2f})  {b['count']:6d}  "
                f"{b['mean_score']:.4f}  {b['event_rate']:.4f}"
            )
        else:
            lines.append(f"  [{b['lo']:.2f}, {b['hi']:.2f})  {b['count']:6d}  -       -")
    return "\n".join(lines)
