import datetime as dt

import pytest

from prognote import ControlledDictionary, extract_findings, map_terms, visit_summary
from prognote.cohort import VisitGroup
from prognote.text import tokenize

from conftest import make_record


class TestExtractFindings:
    def test_no_terms_gives_empty_list(self, small_dictionary):
        record = make_record("patient resting comfortably at home")
        assert extract_findings(record, small_dictionary) == []

    def test_finding_carries_exact_surface_text_and_span(self, small_dictionary):
        text = "Reports SOB at rest."
        record = make_record(text)
        findings = extract_findings(record, small_dictionary)
        assert len(findings) == 1
        f = findings[0]
        assert f.concept_id == "dyspnea"
        assert f.surface_text == "SOB"
        assert text[f.char_span[0]:f.char_span[1]] == "SOB"

    def test_term_at_start_clips_left_context(self, small_dictionary):
        record = make_record("SOB noted again today by staff")
        f = extract_findings(record, small_dictionary, context_tokens=2)[0]
        assert f.context == "SOB noted again"

    def test_one_token_context_window(self):
        d = ControlledDictionary.from_pairs([("hospice referral", "hospice_referral")])
        record = make_record("we started hospice referral today per family")
        f = extract_findings(record, d, context_tokens=1)[0]
        assert f.context == "started hospice referral today"
        assert f.surface_text == "hospice referral"

    def test_multiword_longest_match(self, small_dictionary):
        record = make_record("c/o short of breath tonight")
        findings = extract_findings(record, small_dictionary)
        assert [f.concept_id for f in findings] == ["complains_of", "dyspnea"]
        assert findings[1].surface_text == "short of breath"

    def test_findings_sorted_and_non_overlapping(self, small_dictionary):
        record = make_record("sob then mets then sob again")
        findings = extract_findings(record, small_dictionary)
        spans = [f.char_span for f in findings]
        assert spans == sorted(spans)
        for (a, b), (c, d) in zip(spans, spans[1:]):
            assert b <= c

    def test_context_contains_surface_text(self, small_dictionary):
        record = make_record("pt with mets, c/o sob; given hospice referral today")
        for f in extract_findings(record, small_dictionary, context_tokens=3):
            assert f.surface_text in f.context

    def test_concepts_match_map_terms(self, small_dictionary):
        text = "pt c/o sob with new mets and short of breath episodes"
        record = make_record(text)
        found = {f.concept_id for f in extract_findings(record, small_dictionary)}
        mapped = map_terms(tokenize(text), small_dictionary)
        introduced = set(mapped.tokens) & small_dictionary.concept_ids
        assert found == introduced

    def test_span_casefolds_to_surface_form(self, small_dictionary):
        record = make_record("Severe SOB and new METS seen")
        for f in extract_findings(record, small_dictionary):
            folded = tuple(tokenize(f.surface_text).tokens)
            assert folded in small_dictionary.surface_lookup

    def test_negative_context_rejected(self, small_dictionary):
        with pytest.raises(ValueError):
            extract_findings(make_record("sob"), small_dictionary, context_tokens=-1)


class TestVisitSummary:
    def make_group(self):
        date = dt.date(2020, 3, 5)
        records = (
            make_record("c/o sob overnight", date=date, note_id="n1",
                        note_type="oncologist_note"),
            make_record("imaging shows new mets", date=date, note_id="n2",
                        note_type="radiology_report"),
        )
        return VisitGroup(date=date, records=records)

    def test_bundles_all_fields(self, small_dictionary):
        group = self.make_group()
        summary = visit_summary(group, small_dictionary, 0.71, group.date)
        assert summary["date"] == "2020-03-05"
        assert summary["note_types"] == ["oncologist_note", "radiology_report"]
        assert summary["probability"] == 0.71
        concepts = [f["concept_id"] for f in summary["findings"]]
        assert "dyspnea" in concepts and "metastasis" in concepts

    def test_findings_tagged_with_note_id(self, small_dictionary):
        group = self.make_group()
        summary = visit_summary(group, small_dictionary, 0.5, group.date)
        by_concept = {f["concept_id"]: f["note_id"] for f in summary["findings"]}
        assert by_concept["metastasis"] == "n2"

    def test_zero_findings_gives_empty_list(self, small_dictionary):
        date = dt.date(2020, 3, 5)
        group = VisitGroup(date=date, records=(make_record("resting", date=date),))
        summary = visit_summary(group, small_dictionary, 0.9, date)
        assert summary["findings"] == []

    def test_date_mismatch_rejected(self, small_dictionary):
        group = self.make_group()
        with pytest.raises(ValueError, match="does not match"):
            visit_summary(group, small_dictionary, 0.5, dt.date(2020, 3, 6))

    def test_probability_passed_through_unchanged(self, small_dictionary):
        group = self.make_group()
        summary = visit_summary(group, small_dictionary, 0.123456789, group.date)
        assert summary["probability"] == 0.123456789

    def test_json_schema_keys(self, small_dictionary):
        group = self.make_group()
        summary = visit_summary(group, small_dictionary, 0.5, group.date)
        for f in summary["findings"]:
            assert set(f) == {"concept_id", "surface_text", "context", "span", "note_id"}
            lo, hi = f["span"]
            assert 0 <= lo < hi
