"""Synthetic longitudinal cohort generator with a planted outcome process.

Each patient carries a latent health score in [0, 1] following a bounded
random walk across visits; note text is sampled from decline, stable, and
neutral token pools with decline terms becoming more likely as the score
falls, and a per-visit hazard of death rising as the score falls. The
generator keeps the latent score per visit so tests can select patients by
ground-truth trajectory.
"""
from __future__ import annotations

import datetime as dt
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .atomic import atomic_write_text
from .cohort import (EVENT_CENSORED, EVENT_DEATH, Outcome, VisitRecord,
                     assemble_cohort, label_visits, save_notes, save_outcomes,
                     DIED, SURVIVED)
from .validation import check_positive

# Surface phrases; the bundled dictionary collapses their lexical variants
# onto shared concept ids before embedding.
DECLINE_PHRASES = (
    "sob", "short of breath", "progression", "progressed",
    "hospice referral", "hospice consult", "comfort care", "goals of care",
    "dnr", "wt loss", "losing weight", "cachectic", "bedbound", "bed bound",
    "ecog 3", "ecog 4", "poor appetite", "no appetite", "uncontrolled pain",
    "intractable pain", "brain mets", "cord compression", "confused", "ams",
    "actively dying", "end stage", "palliative care consult",
    "pleural effusion", "ascites", "somnolent", "transfusion dependent",
    "elevated calcium", "declining", "deteriorating", "fatigued",
)
STABLE_PHRASES = (
    "stable disease", "ned", "no evidence of disease", "partial response",
    "complete response", "tolerating chemo", "tolerated well", "improving",
    "improved", "no new lesions", "labs wnl", "ecog 0", "ecog 1",
    "eating well", "appetite intact", "ambulating independently",
    "walking daily", "asx", "no complaints", "doing well",
)
NEUTRAL_WORDS = (
    "pt", "seen", "today", "clinic", "visit", "oncology", "review", "systems",
    "exam", "performed", "discussed", "plan", "continue", "return", "weeks",
    "medications", "reviewed", "vital", "signs", "noted", "hx", "metastatic",
    "ca", "dx", "tx", "cycle", "chemo", "imaging", "ct", "scan", "chest",
    "abdomen", "pelvis", "mri", "bone", "lab", "results", "blood", "count",
    "scr", "within", "limits", "assessment", "f/u", "scheduled", "appointment",
    "nurse", "consent", "obtained", "denies", "fever", "chills", "nausea",
    "sleep", "po", "prn", "home", "spouse", "present", "questions", "answered",
)
NOTE_TYPES = ("oncologist_note", "radiology_report", "discharge_summary")


@dataclass(frozen=True)
class SynthConfig:
    visits_min: int = 6
    visits_max: int = 18
    gap_min_days: int = 1
    gap_max_days: int = 60
    tokens_min: int = 18
    tokens_max: int = 32
    start_health: tuple[float, float] = (0.60, 0.95)
    decline_fraction: float = 0.6
    # health moves per calendar day (scaled by the visit gap), so time to
    # death is governed by the health level rather than the visit schedule
    decline_rate_day: tuple[float, float] = (0.0035, 0.0045)
    stable_rate_day: tuple[float, float] = (-0.0002, 0.0002)
    noise_sd: float = 0.015
    hazard_scale: float = 0.97
    hazard_center: float = 0.22
    hazard_width: float = 0.02
    death_delay_days: tuple[int, int] = (3, 15)
    followup_extension_days: tuple[int, int] = (20, 240)
    second_note_prob: float = 0.12
    base_date: dt.date = dt.date(2016, 1, 4)


@dataclass(frozen=True)
class HealthPoint:
    patient_id: str
    date: dt.date
    health: float


@dataclass
class SynthCohort:
    records: list[VisitRecord]
    outcomes: dict[str, Outcome]
    truth: list[HealthPoint]
    metadata: dict = field(default_factory=dict)


def _hazard(s: float, cfg: SynthConfig) -> float:
    # near-threshold hazard: fires almost surely once health falls below
    # hazard_center, so death timing tracks the health trajectory
    return min(0.98, cfg.hazard_scale / (1.0 + np.exp((s - cfg.hazard_center) / cfg.hazard_width)))


def _pool_weights(s: float) -> np.ndarray:
    decline = 0.05 + 0.85 * (1.0 - s) ** 2
    stable = 0.05 + 0.85 * s ** 2
    neutral = 0.9
    w = np.array([decline, stable, neutral])
    return w / w.sum()


def _note_text(s: float, cfg: SynthConfig, rng: np.random.Generator) -> str:
    n_tokens = int(rng.integers(cfg.tokens_min, cfg.tokens_max + 1))
    weights = _pool_weights(s)
    pools = (DECLINE_PHRASES, STABLE_PHRASES, NEUTRAL_WORDS)
    words: list[str] = []
    for _ in range(n_tokens):
        pool = pools[int(rng.choice(3, p=weights))]
        words.append(pool[int(rng.integers(len(pool)))])
    # sentence breaks every 6-9 words, leading capitals, to exercise tokenization
    out: list[str] = []
    until_break = int(rng.integers(6, 10))
    sentence_start = True
    for word in words:
        out.append(word.capitalize() if sentence_start and word[0].isalpha() else word)
        sentence_start = False
        until_break -= 1
        if until_break == 0:
            out[-1] += "."
            until_break = int(rng.integers(6, 10))
            sentence_start = True
    text = " ".join(out)
    return text if text.endswith(".") else text + "."


def _generate_once(n_patients: int, seed: int, cfg: SynthConfig) -> SynthCohort:
    rng = np.random.default_rng(seed)
    records: list[VisitRecord] = []
    outcomes: dict[str, Outcome] = {}
    truth: list[HealthPoint] = []
    for p in range(n_patients):
        pid = f"p{p:04d}"
        s = float(rng.uniform(*cfg.start_health))
        declining = rng.random() < cfg.decline_fraction
        rate_day = (-float(rng.uniform(*cfg.decline_rate_day)) if declining
                    else float(rng.uniform(*cfg.stable_rate_day)))
        date = cfg.base_date + dt.timedelta(days=int(rng.integers(0, 60)))
        n_visits = int(rng.integers(cfg.visits_min, cfg.visits_max + 1))
        death_date = None
        note_serial = 0
        for _ in range(n_visits):
            n_notes = 2 if rng.random() < cfg.second_note_prob else 1
            for _ in range(n_notes):
                note_type = NOTE_TYPES[int(rng.choice(3, p=(0.6, 0.3, 0.1)))]
                records.append(VisitRecord(
                    patient_id=pid,
                    note_id=f"{pid}-n{note_serial:03d}",
                    date=date,
                    note_type=note_type,
                    text=_note_text(s, cfg, rng),
                ))
                note_serial += 1
            truth.append(HealthPoint(patient_id=pid, date=date, health=s))
            if rng.random() < _hazard(s, cfg):
                death_date = date + dt.timedelta(
                    days=int(rng.integers(cfg.death_delay_days[0],
                                          cfg.death_delay_days[1] + 1)))
                break
            gap = int(rng.integers(cfg.gap_min_days, cfg.gap_max_days + 1))
            date = date + dt.timedelta(days=gap)
            s = float(np.clip(s + rate_day * gap + rng.normal(0.0, cfg.noise_sd),
                              0.01, 0.99))
        if death_date is not None:
            outcomes[pid] = Outcome(kind=EVENT_DEATH, date=death_date)
        else:
            extension = int(rng.integers(cfg.followup_extension_days[0],
                                         cfg.followup_extension_days[1] + 1))
            outcomes[pid] = Outcome(kind=EVENT_CENSORED,
                                    date=date + dt.timedelta(days=extension))
    return SynthCohort(records=records, outcomes=outcomes, truth=truth)


def _label_counts(cohort: SynthCohort) -> dict[int, int]:
    counts = {SURVIVED: 0, DIED: 0}
    for timeline in assemble_cohort(cohort.records, cohort.outcomes):
        for label in label_visits(timeline):
            if label in counts:
                counts[label] += 1
    return counts


def generate_cohort(n_patients: int, seed: int = 0,
                    config: SynthConfig | None = None) -> SynthCohort:
    """Generate a synthetic cohort; bit-identical for a fixed seed.

    If one of the two label classes comes out empty the generation is retried
    with an incremented seed; the metadata records both the requested and the
    effective seed.
    """
    check_positive(n_patients, "n_patients")
    cfg = config or SynthConfig()
    effective = seed
    for _ in range(16):
        cohort = _generate_once(n_patients, effective, cfg)
        counts = _label_counts(cohort)
        if cfg.hazard_scale == 0.0 or all(counts[k] > 0 for k in (SURVIVED, DIED)):
            break
        effective += 1
    cohort.metadata = {
        "n_patients": n_patients,
        "requested_seed": seed,
        "seed": effective,
        "label_counts": {"survived": counts[SURVIVED], "died": counts[DIED]},
    }
    return cohort


def save_truth(truth: list[HealthPoint], path: str | Path) -> None:
    lines = [
        json.dumps({
            "patient_id": point.patient_id,
            "date": point.date.isoformat(),
            "health": round(point.health, 6),
        })
        for point in truth
    ]
    atomic_write_text(path, "\n".join(lines) + "\n" if lines else "")


def load_truth(path: str | Path) -> list[HealthPoint]:
    points = []
    with Path(path).open(encoding="utf-8") as fh:
        for raw in fh:
            if raw.strip():
                obj = json.loads(raw)
                points.append(HealthPoint(
                    patient_id=obj["patient_id"],
                    date=dt.date.fromisoformat(obj["date"]),
                    health=float(obj["health"]),
                ))
    return points


def write_cohort_files(cohort: SynthCohort, out_dir: str | Path) -> dict[str, Path]:
    """Write notes.jsonl, outcomes.jsonl, truth.jsonl, and meta.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "notes": out / "notes.jsonl",
        "outcomes": out / "outcomes.jsonl",
        "truth": out / "truth.jsonl",
        "meta": out / "meta.json",
    }
    save_notes(cohort.records, paths["notes"])
    save_outcomes(cohort.outcomes, paths["outcomes"])
    save_truth(cohort.truth, paths["truth"])
    atomic_write_text(paths["meta"], json.dumps(cohort.metadata, indent=2) + "\n")
    return paths
