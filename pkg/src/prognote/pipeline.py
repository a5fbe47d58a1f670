"""Orchestration of the pipeline stages behind the CLI subcommands."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .artifacts import (DatasetSequence, load_dataset, load_embedding,
                        load_model, save_dataset, save_embedding, save_model)
from .atomic import atomic_write_text
from .cohort import (PatientTimeline, assemble_cohort, label_visits, load_notes,
                     load_outcomes, split_cohort)
from .config import PipelineConfig
from .dictionary import ControlledDictionary, bundled_dictionary, load_dictionary
from .embedding import SkipGramEmbedding
from .estimator import predict_curve, vectorize_timeline
from .exceptions import PipelineError
from .explain import visit_summary
from .lstm import TrainConfig, TrainingSequence, sequence_forward, train_model
from .metrics import evaluation_report, format_report_table
from .text import normalize_text

EMBEDDING_FILE = "embedding.bin"
MODEL_FILE = "model.bin"
DATASET_FILE = "dataset.bin"
SPLITS_FILE = "splits.json"
HISTORY_FILE = "history.json"
REPORT_FILE = "report.json"
SUMMARY_FILE = "summary.txt"
VOCAB_REPORT_FILE = "vocab_report.json"

SPLIT_NAMES = ("train", "val", "test")


def _dictionary_for(cfg: PipelineConfig) -> ControlledDictionary:
    if cfg.dictionary_path is not None:
        return load_dictionary(cfg.dictionary_path)
    return bundled_dictionary()


def _load_timelines(cfg: PipelineConfig) -> list[PatientTimeline]:
    records = load_notes(cfg.notes_path)
    outcomes = load_outcomes(cfg.outcomes_path)
    return assemble_cohort(records, outcomes)


def run_train_embed(cfg: PipelineConfig) -> Path:
    """Normalize the whole note corpus and train the embedding; writes the
    embedding artifact and a small vocabulary report."""
    dictionary = _dictionary_for(cfg)
    records = load_notes(cfg.notes_path)
    corpus = [normalize_text(r.text, dictionary) for r in records]
    e = cfg.embedding
    est = SkipGramEmbedding(dim=e.dim, window=e.window, negatives=e.negatives,
                            min_count=e.min_count, epochs=e.epochs, lr=e.lr,
                            min_lr=e.min_lr, ns_exponent=e.ns_exponent, seed=e.seed)
    try:
        est.fit(corpus)
    except ValueError as exc:
        raise PipelineError(str(exc)) from exc
    out = cfg.artifacts_dir / EMBEDDING_FILE
    save_embedding(est, out)
    total_tokens = sum(len(n) for n in corpus)
    in_vocab = sum(sum(1 for t in n.tokens if t in est.vocab_) for n in corpus)
    report = {
        "vocab_size": est.vocab_size_,
        "corpus_notes": len(corpus),
        "corpus_tokens": total_tokens,
        "in_vocab_token_fraction": round(in_vocab / max(1, total_tokens), 6),
        "dim": e.dim,
        "seed": e.seed,
        "dictionary_version": dictionary.version,
    }
    atomic_write_text(cfg.artifacts_dir / VOCAB_REPORT_FILE,
                      json.dumps(report, indent=2) + "\n")
    return out


def run_build_dataset(cfg: PipelineConfig) -> Path:
    """Vectorize and label every patient timeline; writes the dataset artifact
    and the patient-level split manifest."""
    dictionary = _dictionary_for(cfg)
    embedding = load_embedding(cfg.artifacts_dir / EMBEDDING_FILE)
    timelines = _load_timelines(cfg)
    train, val, test = split_cohort(timelines, cfg.cohort.split, cfg.cohort.split_seed)
    membership = {
        timeline.patient_id: name
        for name, part in zip(SPLIT_NAMES, (train, val, test))
        for timeline in part
    }
    sequences: list[DatasetSequence] = []
    for timeline in timelines:
        labels = np.array(label_visits(timeline, cfg.cohort.horizon_days),
                          dtype=np.int64)
        xs = vectorize_timeline(timeline, dictionary, embedding)
        coverage = np.array([
            embedding.embed_note(normalize_text(g.combined_text, dictionary)).coverage
            for g in timeline.groups
        ])
        sequences.append(DatasetSequence(
            patient_id=timeline.patient_id,
            dates=tuple(g.date for g in timeline.groups),
            labels=labels, coverage=coverage, xs=xs))
    out = cfg.artifacts_dir / DATASET_FILE
    save_dataset(sequences, embedding.dim, out, seed=cfg.cohort.split_seed)
    manifest = {
        "seed": cfg.cohort.split_seed,
        "fractions": list(cfg.cohort.split),
        "horizon_days": cfg.cohort.horizon_days,
        **{name: sorted(t.patient_id for t in part)
           for name, part in zip(SPLIT_NAMES, (train, val, test))},
    }
    atomic_write_text(cfg.artifacts_dir / SPLITS_FILE,
                      json.dumps(manifest, indent=2) + "\n")
    return out


def _load_split(cfg: PipelineConfig, name: str) -> list[DatasetSequence]:
    if name not in SPLIT_NAMES:
        raise PipelineError(f"unknown split {name!r}, expected one of {SPLIT_NAMES}")
    sequences, _, _ = load_dataset(cfg.artifacts_dir / DATASET_FILE)
    manifest = json.loads((cfg.artifacts_dir / SPLITS_FILE).read_text())
    wanted = set(manifest[name])
    return [s for s in sequences if s.patient_id in wanted]


def run_train(cfg: PipelineConfig) -> Path:
    """Train the sequence model on the train split; writes the model artifact
    and the per-epoch loss history."""
    sequences, dim, _ = load_dataset(cfg.artifacts_dir / DATASET_FILE)
    embedding_dim = load_embedding(cfg.artifacts_dir / EMBEDDING_FILE).dim
    if dim != embedding_dim:
        raise PipelineError(
            f"dataset dim {dim} does not match embedding dim {embedding_dim}"
        )
    train_split = _load_split(cfg, "train")
    t = cfg.train
    config = TrainConfig(class_weights=t.class_weights, lr=t.lr, epochs=t.epochs,
                         grad_clip=t.grad_clip, tbptt_len=t.tbptt_len, seed=t.seed,
                         init_scale=t.init_scale, hidden_size=t.hidden_size,
                         head_input=t.head_input, y0=t.y0)
    training = [TrainingSequence(s.patient_id, s.xs, s.labels) for s in train_split]
    try:
        params, history = train_model(training, config)
    except ValueError as exc:
        raise PipelineError(str(exc)) from exc
    out = cfg.artifacts_dir / MODEL_FILE
    save_model(params, out, seed=t.seed)
    atomic_write_text(cfg.artifacts_dir / HISTORY_FILE, json.dumps({
        "epochs": len(history),
        "mean_loss": history,
        "seed": t.seed,
    }, indent=2) + "\n")
    return out


def _check_dims(cfg: PipelineConfig) -> None:
    embedding = load_embedding(cfg.artifacts_dir / EMBEDDING_FILE)
    params, _ = load_model(cfg.artifacts_dir / MODEL_FILE)
    _, dataset_dim, _ = load_dataset(cfg.artifacts_dir / DATASET_FILE)
    if params.input_size != embedding.dim:
        raise PipelineError(
            f"model input dim {params.input_size} does not match embedding "
            f"dim {embedding.dim}"
        )
    if dataset_dim != embedding.dim:
        raise PipelineError(
            f"dataset dim {dataset_dim} does not match embedding dim {embedding.dim}"
        )


def run_evaluate(cfg: PipelineConfig, split: str = "test") -> dict:
    """Score a split with the trained model and write report.json plus a
    plain-text summary table."""
    _check_dims(cfg)
    params, _ = load_model(cfg.artifacts_dir / MODEL_FILE)
    sequences = _load_split(cfg, split)
    if not sequences:
        raise PipelineError(f"split {split!r} contains no patients")
    scores: list[float] = []
    labels: list[int] = []
    for seq in sequences:
        if len(seq.xs) == 0:
            continue
        probs = sequence_forward(seq.xs, params).probs
        for p, label in zip(probs, seq.labels):
            if label >= 0:
                scores.append(float(p))
                labels.append(int(label))
    if not scores:
        raise PipelineError(f"split {split!r} has no supervised steps")
    report = evaluation_report(scores, labels, n_bins=cfg.report.bins,
                               positive=cfg.report.positive)
    report.update({
        "split": split,
        "config_digest": cfg.digest(),
        "package_version": __version__,
        "seeds": {"embedding": cfg.embedding.seed, "train": cfg.train.seed,
                  "split": cfg.cohort.split_seed},
    })
    atomic_write_text(cfg.artifacts_dir / REPORT_FILE,
                      json.dumps(report, indent=2, sort_keys=True) + "\n")
    atomic_write_text(cfg.artifacts_dir / SUMMARY_FILE,
                      format_report_table(report) + "\n")
    return report


def run_predict(cfg: PipelineConfig, patient_id: str) -> dict:
    """Survival curve JSON for one patient in the configured cohort."""
    dictionary = _dictionary_for(cfg)
    embedding = load_embedding(cfg.artifacts_dir / EMBEDDING_FILE)
    params, _ = load_model(cfg.artifacts_dir / MODEL_FILE)
    if params.input_size != embedding.dim:
        raise PipelineError(
            f"model input dim {params.input_size} does not match embedding "
            f"dim {embedding.dim}"
        )
    timelines = {t.patient_id: t for t in _load_timelines(cfg)}
    if patient_id not in timelines:
        raise PipelineError(f"unknown patient {patient_id!r}")
    curve = predict_curve(timelines[patient_id], dictionary, embedding, params)
    return curve.to_json_dict()


@dataclass
class ServiceState:
    """Everything the read-only HTTP service needs, loaded once at startup."""

    dictionary: ControlledDictionary
    timelines: dict[str, PatientTimeline]
    curves: dict[str, dict]
    meta: dict
    groups: dict[str, dict[str, object]] = field(default_factory=dict)

    def summary_for(self, patient_id: str, date_iso: str) -> dict | None:
        by_date = self.groups.get(patient_id, {})
        group = by_date.get(date_iso)
        if group is None:
            return None
        probability = next(
            point["probability"] for point in self.curves[patient_id]["points"]
            if point["date"] == date_iso
        )
        return visit_summary(group, self.dictionary, probability, group.date)


def build_service_state(cfg: PipelineConfig) -> ServiceState:
    _check_dims(cfg)
    dictionary = _dictionary_for(cfg)
    embedding = load_embedding(cfg.artifacts_dir / EMBEDDING_FILE)
    params, _ = load_model(cfg.artifacts_dir / MODEL_FILE)
    timelines = {t.patient_id: t for t in _load_timelines(cfg)}
    curves = {
        pid: predict_curve(t, dictionary, embedding, params).to_json_dict()
        for pid, t in timelines.items()
    }
    groups = {
        pid: {g.date.isoformat(): g for g in t.groups}
        for pid, t in timelines.items()
    }
    meta = {
        "package_version": __version__,
        "config_digest": cfg.digest(),
        "dictionary_version": dictionary.version,
        "embedding_dim": embedding.dim,
        "hidden_size": params.hidden_size,
        "n_patients": len(timelines),
        "seeds": {"embedding": cfg.embedding.seed, "train": cfg.train.seed,
                  "split": cfg.cohort.split_seed},
    }
    return ServiceState(dictionary=dictionary, timelines=timelines,
                        curves=curves, meta=meta, groups=groups)
