import datetime as dt

import numpy as np
import pytest

from prognote import ControlledDictionary, VisitRecord
from prognote.cohort import EVENT_DEATH, Outcome


@pytest.fixture(scope="session")
def medium_pipeline(tmp_path_factory):
    """A complete trained pipeline on a 200-patient synthetic cohort.

    Sized for fast structural tests (service, curve prediction); metric
    thresholds belong to the acceptance suite, which trains at full defaults.
    """
    from prognote import pipeline as pl
    from prognote.config import PipelineConfig
    from prognote.synth import generate_cohort, write_cohort_files

    base = tmp_path_factory.mktemp("pipeline")
    cohort = generate_cohort(200, seed=0)
    write_cohort_files(cohort, base / "cohort")

    cfg = PipelineConfig(base_dir=base)
    cfg.paths.notes = "cohort/notes.jsonl"
    cfg.paths.outcomes = "cohort/outcomes.jsonl"
    cfg.paths.artifacts = "artifacts"
    cfg.embedding.dim = 32
    cfg.embedding.min_count = 3
    cfg.embedding.epochs = 3
    cfg.train.hidden_size = 24
    cfg.train.epochs = 12

    pl.run_train_embed(cfg)
    pl.run_build_dataset(cfg)
    pl.run_train(cfg)
    report = pl.run_evaluate(cfg, "test")
    return {"base": base, "cfg": cfg, "cohort": cohort, "report": report}


@pytest.fixture(scope="session")
def small_dictionary():
    return ControlledDictionary.from_pairs([
        ("sob", "dyspnea"),
        ("short of breath", "dyspnea"),
        ("c/o", "complains_of"),
        ("c o", "complains_of"),
        ("hospice referral", "hospice_referral"),
        ("mets", "metastasis"),
        ("breath", "respiration"),
    ], version="test-1")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_record(text, date=dt.date(2020, 1, 1), note_id="n0", patient_id="p0",
                note_type="oncologist_note"):
    return VisitRecord(patient_id=patient_id, note_id=note_id, date=date,
                       note_type=note_type, text=text)


def death_on(date):
    return Outcome(kind=EVENT_DEATH, date=date)
