"""Controlled dictionary mapping surface terms to canonical concept ids.

Surface forms are lowercase token sequences (possibly multi-token); concept
ids are single canonical tokens. To guarantee that term mapping is idempotent,
a concept id may not occur as a token of any surface form: otherwise a second
mapping pass over already-mapped text could fire again.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Iterable

from .exceptions import DictionaryError

BUNDLED_DICTIONARY = "oncology_terms.tsv"


@dataclass(frozen=True)
class ControlledDictionary:
    """Immutable term dictionary: (surface token sequence) -> concept id."""

    entries: tuple[tuple[tuple[str, ...], str], ...]
    version: str = "unversioned"

    def __post_init__(self):
        seen: set[tuple[str, ...]] = set()
        concept_ids = {concept for _, concept in self.entries}
        for surface, concept in self.entries:
            if not surface:
                raise DictionaryError("empty surface form")
            for token in surface:
                if not token or token != token.lower() or any(c.isspace() for c in token):
                    raise DictionaryError(
                        f"surface form {' '.join(surface)!r} is not normalized "
                        "(lowercase, single-space separated)"
                    )
                if token in concept_ids:
                    raise DictionaryError(
                        f"concept id {token!r} occurs inside surface form "
                        f"{' '.join(surface)!r}; mapping would not be idempotent"
                    )
            if not concept or any(c.isspace() for c in concept):
                raise DictionaryError(f"invalid concept id {concept!r}")
            if surface in seen:
                raise DictionaryError(f"duplicate surface form {' '.join(surface)!r}")
            seen.add(surface)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str]], version: str = "unversioned"):
        """Build from (surface string, concept id) pairs; surfaces are split on spaces."""
        entries = tuple((tuple(surface.split()), concept) for surface, concept in pairs)
        return cls(entries=entries, version=version)

    @cached_property
    def surface_lookup(self) -> dict[tuple[str, ...], str]:
        return {surface: concept for surface, concept in self.entries}

    @cached_property
    def max_surface_len(self) -> int:
        return max((len(surface) for surface, _ in self.entries), default=0)

    @cached_property
    def concept_ids(self) -> frozenset[str]:
        return frozenset(concept for _, concept in self.entries)

    def __len__(self) -> int:
        return len(self.entries)


def load_dictionary(path: str | Path) -> ControlledDictionary:
    """Load a dictionary file: one `surface form<TAB>concept_id` per line.

    Lines starting with `#` are comments; a `# version: <str>` comment sets
    the dictionary version. Errors carry the offending line number.
    """
    path = Path(path)
    version = "unversioned"
    pairs: list[tuple[str, str]] = []
    seen: dict[str, int] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            directive = line.lstrip("#").strip()
            if directive.lower().startswith("version:"):
                version = directive.split(":", 1)[1].strip()
            continue
        if "\t" not in line:
            raise DictionaryError(f"{path}:{lineno}: expected `surface<TAB>concept_id`")
        surface_raw, concept = line.split("\t", 1)
        surface = " ".join(surface_raw.split())
        concept = concept.strip()
        if not surface or not concept:
            raise DictionaryError(f"{path}:{lineno}: empty surface form or concept id")
        if surface != surface.lower():
            raise DictionaryError(f"{path}:{lineno}: surface form {surface!r} is not lowercase")
        if surface in seen:
            raise DictionaryError(
                f"{path}:{lineno}: duplicate surface form {surface!r} "
                f"(first defined on line {seen[surface]})"
            )
        seen[surface] = lineno
        pairs.append((surface, concept))
    try:
        return ControlledDictionary.from_pairs(pairs, version=version)
    except DictionaryError as exc:
        raise DictionaryError(f"{path}: {exc}") from exc


def bundled_dictionary() -> ControlledDictionary:
    """The starter oncology dictionary shipped with the package."""
    ref = resources.files("prognote").joinpath("data", BUNDLED_DICTIONARY)
    with resources.as_file(ref) as path:
        return load_dictionary(path)
