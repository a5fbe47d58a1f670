import numpy as np
import pytest

from prognote import bundled_dictionary, generate_cohort, label_visits
from prognote.cohort import DIED, EVENT_CENSORED, SURVIVED, assemble_cohort
from prognote.synth import SynthConfig, write_cohort_files
from prognote.text import normalize_text, tokenize


class TestDeterminism:
    def test_fixed_seed_bit_identical(self):
        a = generate_cohort(40, seed=0)
        b = generate_cohort(40, seed=0)
        assert a.records == b.records
        assert a.outcomes == b.outcomes
        assert a.truth == b.truth

    def test_files_byte_identical(self, tmp_path):
        paths_a = write_cohort_files(generate_cohort(25, seed=1), tmp_path / "a")
        paths_b = write_cohort_files(generate_cohort(25, seed=1), tmp_path / "b")
        for key in ("notes", "outcomes", "truth", "meta"):
            assert paths_a[key].read_bytes() == paths_b[key].read_bytes()

    def test_different_seeds_differ(self):
        a = generate_cohort(25, seed=1)
        b = generate_cohort(25, seed=2)
        assert a.records != b.records


class TestOutcomeProcess:
    def test_zero_hazard_means_all_censored(self):
        cohort = generate_cohort(30, seed=0, config=SynthConfig(hazard_scale=0.0))
        assert all(o.kind == EVENT_CENSORED for o in cohort.outcomes.values())

    def test_both_label_classes_present_at_default_config(self):
        cohort = generate_cohort(50, seed=0)
        counts = cohort.metadata["label_counts"]
        assert counts["survived"] > 0 and counts["died"] > 0

    @pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
    def test_died_step_fraction_in_band(self, seed):
        cohort = generate_cohort(500, seed=seed)
        died = survived = 0
        for timeline in assemble_cohort(cohort.records, cohort.outcomes):
            for label in label_visits(timeline):
                if label == DIED:
                    died += 1
                elif label == SURVIVED:
                    survived += 1
        fraction = died / (died + survived)
        assert 0.05 <= fraction <= 0.6

    def test_outcome_dates_after_last_visit(self):
        cohort = generate_cohort(60, seed=3)
        for timeline in assemble_cohort(cohort.records, cohort.outcomes):
            assert timeline.outcome.date >= timeline.groups[-1].date

    def test_truth_covers_every_visit_group(self):
        cohort = generate_cohort(40, seed=5)
        truth_keys = {(p.patient_id, p.date) for p in cohort.truth}
        for timeline in assemble_cohort(cohort.records, cohort.outcomes):
            for group in timeline.groups:
                assert (timeline.patient_id, group.date) in truth_keys


class TestNoteText:
    def test_notes_tokenize_cleanly(self):
        cohort = generate_cohort(10, seed=0)
        for record in cohort.records[:50]:
            note = tokenize(record.text)
            assert len(note.tokens) >= 5

    def test_low_health_notes_carry_decline_concepts(self):
        dictionary = bundled_dictionary()
        cohort = generate_cohort(200, seed=0)
        health = {(p.patient_id, p.date): p.health for p in cohort.truth}
        decline_concepts = {"hospice_referral", "disease_progression", "dyspnea",
                            "comfort_care", "terminal_decline", "bedbound",
                            "ecog_3", "ecog_4", "pain_crisis", "anorexia"}
        low = high = 0
        low_n = high_n = 0
        for record in cohort.records:
            tokens = set(normalize_text(record.text, dictionary).tokens)
            hits = len(tokens & decline_concepts)
            if health[(record.patient_id, record.date)] < 0.3:
                low += hits
                low_n += 1
            elif health[(record.patient_id, record.date)] > 0.7:
                high += hits
                high_n += 1
        assert low_n > 10 and high_n > 10
        assert low / low_n > 4 * (high / max(1, high_n))

    def test_same_day_second_notes_occur(self):
        cohort = generate_cohort(100, seed=0)
        by_day = {}
        for record in cohort.records:
            by_day.setdefault((record.patient_id, record.date), []).append(record)
        assert any(len(v) > 1 for v in by_day.values())


class TestMetadata:
    def test_metadata_records_seeds(self):
        cohort = generate_cohort(50, seed=7)
        assert cohort.metadata["requested_seed"] == 7
        assert cohort.metadata["seed"] >= 7
        assert cohort.metadata["n_patients"] == 50

    def test_rejects_nonpositive_n(self):
        with pytest.raises(ValueError):
            generate_cohort(0, seed=0)
