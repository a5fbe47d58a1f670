"""Scikit-learn style estimator around the sequence model, plus the glue that
turns a patient timeline into a survival curve."""
from __future__ import annotations

import datetime as dt
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .cohort import PatientTimeline
from .dictionary import ControlledDictionary
from .embedding import SkipGramEmbedding
from .lstm import (ModelParams, TrainConfig, TrainingSequence, sequence_forward,
                   train_model)
from .text import normalize_text


class SurvivalSequenceModel(BaseEstimator):
    """Per-visit survival probability estimator over note-vector sequences.

    ``fit`` consumes one (T_i, D) float array per patient plus per-step labels
    in {1, 0, -1} (-1 marks censored-within-horizon steps excluded from the
    loss); ``predict_proba`` returns one probability array per sequence.
    """

    def __init__(self, hidden_size: int = 64, lr: float = 0.05, epochs: int = 30,
                 grad_clip: float = 5.0, tbptt_len: int = 32, seed: int = 0,
                 init_scale: float = 0.08, head_input: str = "top",
                 y0: float = 0.5, class_weights: tuple[float, float] | None = None):
        self.hidden_size = hidden_size
        self.lr = lr
        self.epochs = epochs
        self.grad_clip = grad_clip
        self.tbptt_len = tbptt_len
        self.seed = seed
        self.init_scale = init_scale
        self.head_input = head_input
        self.y0 = y0
        self.class_weights = class_weights

    def _train_config(self) -> TrainConfig:
        return TrainConfig(
            class_weights=self.class_weights, lr=self.lr, epochs=self.epochs,
            grad_clip=self.grad_clip, tbptt_len=self.tbptt_len, seed=self.seed,
            init_scale=self.init_scale, hidden_size=self.hidden_size,
            head_input=self.head_input, y0=self.y0)

    def fit(self, X: Sequence[np.ndarray], y: Sequence[np.ndarray],
            patient_ids: Sequence[str] | None = None):
        if len(X) != len(y):
            raise ValueError(f"got {len(X)} sequences but {len(y)} label arrays")
        ids = patient_ids or [f"seq{i}" for i in range(len(X))]
        sequences = [
            TrainingSequence(patient_id=pid,
                             xs=np.asarray(xs, dtype=np.float64),
                             labels=np.asarray(labels, dtype=np.int64))
            for pid, xs, labels in zip(ids, X, y)
        ]
        self.params_, self.history_ = train_model(sequences, self._train_config())
        return self

    def _check_fitted(self):
        if not hasattr(self, "params_"):
            raise NotFittedError("SurvivalSequenceModel is not fitted")

    def predict_proba(self, X: Sequence[np.ndarray]) -> list[np.ndarray]:
        """Per-step survival probabilities, one array per input sequence."""
        self._check_fitted()
        return [sequence_forward(np.asarray(xs, dtype=np.float64), self.params_).probs
                for xs in X]

    def predict(self, X: Sequence[np.ndarray]) -> list[np.ndarray]:
        """Per-step binary labels at the 0.5 operating point."""
        return [(p >= 0.5).astype(np.int64) for p in self.predict_proba(X)]


@dataclass(frozen=True)
class CurvePoint:
    date: dt.date
    probability: float
    note_types: tuple[str, ...]


@dataclass(frozen=True)
class SurvivalCurve:
    """Per-visit probability of surviving beyond the horizon, over calendar time."""

    patient_id: str
    points: tuple[CurvePoint, ...]

    def to_json_dict(self) -> dict:
        return {
            "patient_id": self.patient_id,
            "points": [
                {
                    "date": p.date.isoformat(),
                    "probability": p.probability,
                    "note_types": list(p.note_types),
                }
                for p in self.points
            ],
        }


def vectorize_timeline(timeline: PatientTimeline, dictionary: ControlledDictionary,
                       embedding: SkipGramEmbedding) -> np.ndarray:
    """One mean-pooled note vector per visit group: (n_groups, D)."""
    if not timeline.groups:
        return np.zeros((0, embedding.dim))
    return np.stack([
        embedding.embed_note(normalize_text(g.combined_text, dictionary)).values
        for g in timeline.groups
    ])


def predict_curve(timeline: PatientTimeline, dictionary: ControlledDictionary,
                  embedding: SkipGramEmbedding, params: ModelParams) -> SurvivalCurve:
    """Full text -> tokens -> concepts -> vectors -> model pipeline for one patient."""
    xs = vectorize_timeline(timeline, dictionary, embedding)
    if xs.shape[0] == 0:
        return SurvivalCurve(patient_id=timeline.patient_id, points=())
    probs = sequence_forward(xs, params).probs
    points = tuple(
        CurvePoint(date=group.date, probability=float(prob), note_types=group.note_types)
        for group, prob in zip(timeline.groups, probs)
    )
    return SurvivalCurve(patient_id=timeline.patient_id, points=points)
