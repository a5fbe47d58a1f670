"""Per-visit explanations: controlled terms found in the notes together with
their surrounding context snippets."""
from __future__ import annotations

from dataclasses import dataclass

from .cohort import VisitGroup, VisitRecord
from .dictionary import ControlledDictionary
from .text import tokenize


@dataclass(frozen=True)
class Finding:
    """One dictionary hit in a note, with the exact matched text and context."""

    concept_id: str
    surface_text: str
    context: str
    char_span: tuple[int, int]
    note_id: str
    note_type: str


def extract_findings(record: VisitRecord, dictionary: ControlledDictionary,
                     context_tokens: int = 8) -> list[Finding]:
    """All dictionary matches in one note, ordered by character offset.

    Matching uses the same greedy longest-match rule as term mapping, so the
    concept ids found here equal the ids that mapping introduces. The context
    snippet spans up to `context_tokens` tokens on each side, clipped at the
    note boundaries, and always contains the matched text.
    """
    if context_tokens < 0:
        raise ValueError(f"context_tokens must be >= 0, got {context_tokens}")
    note = tokenize(record.text)
    if not note.tokens or not dictionary.entries:
        return []
    lookup = dictionary.surface_lookup
    max_len = dictionary.max_surface_len
    findings: list[Finding] = []
    tokens, spans = note.tokens, note.spans
    n = len(tokens)
    i = 0
    while i < n:
        matched_len = 0
        concept = None
        for length in range(min(max_len, n - i), 0, -1):
            concept = lookup.get(tokens[i : i + length])
            if concept is not None:
                matched_len = length
                break
        if concept is None:
            i += 1
            continue
        start = spans[i][0]
        end = spans[i + matched_len - 1][1]
        ctx_lo = spans[max(0, i - context_tokens)][0]
        ctx_hi = spans[min(n - 1, i + matched_len - 1 + context_tokens)][1]
        findings.append(Finding(
            concept_id=concept,
            surface_text=record.text[start:end],
            context=record.text[ctx_lo:ctx_hi],
            char_span=(start, end),
            note_id=record.note_id,
            note_type=record.note_type,
        ))
        i += matched_len
    return findings


def visit_summary(group: VisitGroup, dictionary: ControlledDictionary,
                  probability: float, date, context_tokens: int = 8) -> dict:
    """JSON-serializable bundle for one visit: date, note types, the curve
    probability for that day, and all findings across the day's notes."""
    if date != group.date:
        raise ValueError(
            f"curve point date {date} does not match visit group date {group.date}"
        )
    findings = []
    for record in group.records:
        findings.extend(extract_findings(record, dictionary, context_tokens))
    return {
        "date": group.date.isoformat(),
        "note_types": list(group.note_types),
        "probability": probability,
        "findings": [
            {
                "concept_id": f.concept_id,
                "surface_text": f.surface_text,
                "context": f.context,
                "span": [f.char_span[0], f.char_span[1]],
                "note_id": f.note_id,
            }
            for f in findings
        ],
    }
