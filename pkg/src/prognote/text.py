"""Tokenization and dictionary-based term mapping for clinical note text."""
from __future__ import annotations

import re
from dataclasses import dataclass

from .dictionary import ControlledDictionary

# A token is either a decimal number or a word-character run; single hyphens
# joining word characters stay inside one token, all other punctuation splits.
_TOKEN_RE = re.compile(r"\d+(?:\.\d+)+|\w+(?:-\w+)*", re.UNICODE)


@dataclass(frozen=True)
class TokenizedNote:
    """Lowercased tokens plus their (start, end) character spans in the source text."""

    tokens: tuple[str, ...]
    spans: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if len(self.tokens) != len(self.spans):
            raise ValueError("tokens and spans differ in length")

    def __len__(self) -> int:
        return len(self.tokens)


def tokenize(text: str) -> TokenizedNote:
    """Split text into lowercase tokens with character spans.

    Punctuation is dropped except hyphens between word characters and decimal
    points between digits. Empty text yields an empty note.
    """
    tokens: list[str] = []
    spans: list[tuple[int, int]] = []
    for match in _TOKEN_RE.finditer(text):
        tokens.append(match.group().lower())
        spans.append(match.span())
    return TokenizedNote(tuple(tokens), tuple(spans))


def map_terms(note: TokenizedNote, dictionary: ControlledDictionary) -> TokenizedNote:
    """Replace dictionary surface forms by their concept ids.

    Matching is greedy longest-match, left to right, without overlaps. A
    replaced region's span is the union of the consumed tokens' spans;
    unmatched tokens pass through unchanged.
    """
    if not dictionary.entries or not note.tokens:
        return note
    lookup = dictionary.surface_lookup
    max_len = dictionary.max_surface_len
    out_tokens: list[str] = []
    out_spans: list[tuple[int, int]] = []
    tokens, spans = note.tokens, note.spans
    n = len(tokens)
    i = 0
    while i < n:
        matched = False
        for length in range(min(max_len, n - i), 0, -1):
            concept = lookup.get(tokens[i : i + length])
            if concept is not None:
                out_tokens.append(concept)
                out_spans.append((spans[i][0], spans[i + length - 1][1]))
                i += length
                matched = True
                break
        if not matched:
            out_tokens.append(tokens[i])
            out_spans.append(spans[i])
            i += 1
    return TokenizedNote(tuple(out_tokens), tuple(out_spans))


def normalize_text(text: str, dictionary: ControlledDictionary) -> TokenizedNote:
    """Tokenize and map in one step."""
    return map_terms(tokenize(text), dictionary)
