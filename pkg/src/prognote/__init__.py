"""Per-visit survival probability curves from longitudinal clinical notes.

The pipeline normalizes free-text visit notes against a controlled
dictionary, embeds them as dense vectors, runs a two-layer stateful recurrent
model that emits a survival probability at every visit, and evaluates with
PR-AUC, Brier score, and calibration bins.
"""

__version__ = "0.1.0"

from .cohort import (DIED, EXCLUDED, SURVIVED, Outcome, PatientTimeline,
                     VisitGroup, VisitRecord, assemble_timeline, label_visits,
                     split_cohort)
from .dictionary import ControlledDictionary, bundled_dictionary, load_dictionary
from .embedding import NoteVector, SkipGramEmbedding, build_vocab, cosine
from .estimator import (CurvePoint, SurvivalCurve, SurvivalSequenceModel,
                        predict_curve)
from .explain import Finding, extract_findings, visit_summary
from .lstm import (LstmLayerParams, ModelParams, StepState, TrainConfig,
                   lstm_cell, sequence_backward, sequence_forward,
                   sequence_loss, train_model)
from .metrics import (PrCurve, average_precision, brier_score,
                      calibration_bins, evaluation_report, pr_curve)
from .synth import SynthConfig, generate_cohort
from .text import TokenizedNote, map_terms, normalize_text, tokenize

__all__ = [
    "__version__",
    "ControlledDictionary", "bundled_dictionary", "load_dictionary",
    "TokenizedNote", "tokenize", "map_terms", "normalize_text",
    "NoteVector", "SkipGramEmbedding", "build_vocab", "cosine",
    "VisitRecord", "Outcome", "VisitGroup", "PatientTimeline",
    "assemble_timeline", "label_visits", "split_cohort",
    "SURVIVED", "DIED", "EXCLUDED",
    "SynthConfig", "generate_cohort",
    "LstmLayerParams", "ModelParams", "StepState", "TrainConfig",
    "lstm_cell", "sequence_forward", "sequence_loss", "sequence_backward",
    "train_model",
    "SurvivalSequenceModel", "SurvivalCurve", "CurvePoint", "predict_curve",
    "PrCurve", "pr_curve", "average_precision", "brier_score",
    "calibration_bins", "evaluation_report",
    "Finding", "extract_findings", "visit_summary",
]
