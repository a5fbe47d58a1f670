"""Visit-note cohort model: timelines, per-visit horizon labels, patient-level
splits, and the JSONL interchange files."""
from __future__ import annotations

import datetime as dt
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .atomic import atomic_write_text
from .exceptions import CohortError
from .validation import check_fractions, check_positive

# per-visit label values
SURVIVED = 1          # outcome date more than `horizon` days past the visit
DIED = 0              # death within `horizon` days of the visit
EXCLUDED = -1         # censored within the horizon: no supervision

DEFAULT_HORIZON_DAYS = 90

EVENT_DEATH = "death"
EVENT_CENSORED = "censored"


@dataclass(frozen=True)
class VisitRecord:
    patient_id: str
    note_id: str
    date: dt.date
    note_type: str
    text: str


@dataclass(frozen=True)
class Outcome:
    kind: str  # EVENT_DEATH or EVENT_CENSORED
    date: dt.date

    def __post_init__(self):
        if self.kind not in (EVENT_DEATH, EVENT_CENSORED):
            raise CohortError(f"unknown outcome kind {self.kind!r}")


@dataclass(frozen=True)
class VisitGroup:
    """All notes for one patient on one calendar day."""

    date: dt.date
    records: tuple[VisitRecord, ...]

    @property
    def combined_text(self) -> str:
        return "\n".join(r.text for r in self.records)

    @property
    def note_types(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for r in self.records:
            seen.setdefault(r.note_type)
        return tuple(seen)


@dataclass(frozen=True)
class PatientTimeline:
    patient_id: str
    groups: tuple[VisitGroup, ...]
    outcome: Outcome


def assemble_timeline(records: Sequence[VisitRecord], outcome: Outcome) -> PatientTimeline:
    """Sort records by (date, note_id) and merge same-day notes into one group.

    All records must share one patient id, and no record may be dated after
    the outcome date.
    """
    patient_ids = {r.patient_id for r in records}
    if len(patient_ids) > 1:
        raise CohortError(f"records span multiple patients: {sorted(patient_ids)}")
    for r in records:
        if r.date > outcome.date:
            raise CohortError(
                f"visit after outcome: note {r.note_id} dated {r.date.isoformat()} "
                f"but outcome {outcome.kind} on {outcome.date.isoformat()}"
            )
    ordered = sorted(records, key=lambda r: (r.date, r.note_id))
    groups: list[VisitGroup] = []
    for r in ordered:
        if groups and groups[-1].date == r.date:
            groups[-1] = VisitGroup(date=r.date, records=groups[-1].records + (r,))
        else:
            groups.append(VisitGroup(date=r.date, records=(r,)))
    patient_id = records[0].patient_id if records else ""
    return PatientTimeline(patient_id=patient_id, groups=tuple(groups), outcome=outcome)


def label_visits(timeline: PatientTimeline,
                 horizon_days: int = DEFAULT_HORIZON_DAYS) -> list[int]:
    """Per-visit horizon labels.

    A visit is SURVIVED when the outcome date lies more than `horizon_days`
    past it (either outcome kind proves survival). A death within the horizon
    gives DIED; a censoring within the horizon gives EXCLUDED since survival
    is unknown there.
    """
    check_positive(horizon_days, "horizon_days")
    labels = []
    for group in timeline.groups:
        delta = (timeline.outcome.date - group.date).days
        if delta > horizon_days:
            labels.append(SURVIVED)
        elif timeline.outcome.kind == EVENT_DEATH:
            labels.append(DIED)
        else:
            labels.append(EXCLUDED)
    return labels


def split_cohort(patients: Sequence[PatientTimeline], fractions, seed: int):
    """Deterministic patient-level split into (train, val, test) lists.

    Sizes are floor-rounded from the fractions with the remainder assigned to
    train; every patient lands in exactly one split.
    """
    fr = check_fractions(fractions)
    n = len(patients)
    if n < 3:
        raise CohortError(f"need at least 3 patients to split, got {n}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    n_train = int(fr[0] * n)
    n_val = int(fr[1] * n)
    n_test = int(fr[2] * n)
    n_train += n - (n_train + n_val + n_test)
    train = [patients[i] for i in order[:n_train]]
    val = [patients[i] for i in order[n_train:n_train + n_val]]
    test = [patients[i] for i in order[n_train + n_val:]]
    return train, val, test


# --- JSONL interchange -----------------------------------------------------

_NOTE_FIELDS = ("patient_id", "note_id", "date", "note_type", "text")
_OUTCOME_FIELDS = ("patient_id", "event", "date")


def _parse_date(value: str, where: str) -> dt.date:
    try:
        return dt.date.fromisoformat(value)
    except (TypeError, ValueError):
        raise CohortError(f"{where}: invalid date {value!r}, expected YYYY-MM-DD") from None


def _parse_line(raw: str, where: str) -> dict:
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise CohortError(f"{where}: invalid JSON ({exc.msg})") from None
    if not isinstance(obj, dict):
        raise CohortError(f"{where}: expected a JSON object")
    return obj


def load_notes(path: str | Path) -> list[VisitRecord]:
    """Read a notes JSONL file; errors carry `path:line`."""
    path = Path(path)
    records: list[VisitRecord] = []
    seen_ids: dict[str, int] = {}
    with path.open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            where = f"{path}:{lineno}"
            obj = _parse_line(raw, where)
            missing = [k for k in _NOTE_FIELDS if k not in obj]
            if missing:
                raise CohortError(f"{where}: missing fields {missing}")
            note_id = str(obj["note_id"])
            if note_id in seen_ids:
                raise CohortError(
                    f"{where}: duplicate note_id {note_id!r} "
                    f"(first seen on line {seen_ids[note_id]})"
                )
            seen_ids[note_id] = lineno
            records.append(VisitRecord(
                patient_id=str(obj["patient_id"]),
                note_id=note_id,
                date=_parse_date(obj["date"], where),
                note_type=str(obj["note_type"]),
                text=str(obj["text"]),
            ))
    return records


def load_outcomes(path: str | Path) -> dict[str, Outcome]:
    """Read an outcomes JSONL file into a patient_id -> Outcome map."""
    path = Path(path)
    outcomes: dict[str, Outcome] = {}
    with path.open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            where = f"{path}:{lineno}"
            obj = _parse_line(raw, where)
            missing = [k for k in _OUTCOME_FIELDS if k not in obj]
            if missing:
                raise CohortError(f"{where}: missing fields {missing}")
            pid = str(obj["patient_id"])
            if pid in outcomes:
                raise CohortError(f"{where}: duplicate outcome for patient {pid!r}")
            event = str(obj["event"])
            if event not in (EVENT_DEATH, EVENT_CENSORED):
                raise CohortError(
                    f"{where}: event must be '{EVENT_DEATH}' or '{EVENT_CENSORED}', "
                    f"got {event!r}"
                )
            outcomes[pid] = Outcome(kind=event, date=_parse_date(obj["date"], where))
    return outcomes


def save_notes(records: Iterable[VisitRecord], path: str | Path) -> None:
    lines = [
        json.dumps({
            "patient_id": r.patient_id,
            "note_id": r.note_id,
            "date": r.date.isoformat(),
            "note_type": r.note_type,
            "text": r.text,
        }, ensure_ascii=False)
        for r in records
    ]
    atomic_write_text(path, "\n".join(lines) + "\n" if lines else "")


def save_outcomes(outcomes: Mapping[str, Outcome], path: str | Path) -> None:
    lines = [
        json.dumps({
            "patient_id": pid,
            "event": outcomes[pid].kind,
            "date": outcomes[pid].date.isoformat(),
        })
        for pid in sorted(outcomes)
    ]
    atomic_write_text(path, "\n".join(lines) + "\n" if lines else "")


def assemble_cohort(records: Sequence[VisitRecord],
                    outcomes: Mapping[str, Outcome]) -> list[PatientTimeline]:
    """Group records per patient and build timelines, sorted by patient id."""
    by_patient: dict[str, list[VisitRecord]] = {}
    for r in records:
        by_patient.setdefault(r.patient_id, []).append(r)
    missing = sorted(set(by_patient) - set(outcomes))
    if missing:
        raise CohortError(f"patients without outcome: {missing[:5]}")
    return [assemble_timeline(by_patient[pid], outcomes[pid])
            for pid in sorted(by_patient)]
