"""Linguistic model of an object archetype: marker, key terms, queries.

A search pattern holds the archetype's domain marker plus key terms
classified by what they describe (structure, application conditions, or
functioning results).  Queries are conjunctive combinations of pattern
terms with the marker always present.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path


class TermClass(str, Enum):
    STRUCTURE = "structure"
    APPLICATION = "application"
    RESULT = "result"


@dataclass(frozen=True)
class Term:
    """A key term of the archetype's vocabulary.

    ``text`` is normalized to a lowercase token or phrase; ``weight``
    scales the term's contribution to query fitness.
    """

    text: str
    category: TermClass
    weight: float = 1.0

    def __post_init__(self):
        clean = self.text.strip().lower()
        if not clean:
            raise ValueError("term text is empty after trimming")
        object.__setattr__(self, "text", clean)
        object.__setattr__(self, "category", TermClass(self.category))
        if not 0.0 < self.weight <= 1.0:
            raise ValueError(f"term weight must be in (0, 1], got {self.weight!r}")


@dataclass(frozen=True)
class SearchPattern:
    """Marker plus vocabulary; every query derived from it keeps the marker."""

    name: str
    marker: str
    terms: tuple[Term, ...]

    def __post_init__(self):
        marker = self.marker.strip().lower()
        if not marker:
            raise ValueError("pattern marker is empty")
        object.__setattr__(self, "marker", marker)
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise ValueError("pattern needs at least one term")
        texts = [t.text for t in self.terms]
        if len(set(texts)) != len(texts):
            raise ValueError("duplicate term texts in pattern")
        if marker in texts:
            raise ValueError(f"marker {marker!r} duplicated among terms")

    @property
    def vocabulary(self) -> tuple[str, ...]:
        return tuple(t.text for t in self.terms)

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(t.weight for t in self.terms)


@dataclass(frozen=True)
class Query:
    """Conjunction of the marker with a subset of pattern terms."""

    marker: str
    terms: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    def text(self) -> str:
        return " ".join((self.marker,) + self.terms)


def marker_query(pattern_or_marker: SearchPattern | str) -> Query:
    """The baseline query consisting of the marker alone."""
    if isinstance(pattern_or_marker, SearchPattern):
        return Query(marker=pattern_or_marker.marker)
    return Query(marker=str(pattern_or_marker).strip().lower())


def load_pattern(path: str | Path) -> SearchPattern:
    """Read a pattern file: {"name", "marker", "terms": [{"text", "class", "weight"}]}."""
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    try:
        terms = tuple(
            Term(
                text=entry["text"],
                category=TermClass(entry["class"]),
                weight=float(entry.get("weight", 1.0)),
            )
            for entry in obj["terms"]
        )
        return SearchPattern(name=obj["name"], marker=obj["marker"], terms=terms)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed pattern file {path}: {exc}") from exc


def save_pattern(pattern: SearchPattern, path: str | Path) -> None:
    obj = {
        "name": pattern.name,
        "marker": pattern.marker,
        "terms": [
            {"text": t.text, "class": t.category.value, "weight": t.weight}
            for t in pattern.terms
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, ensure_ascii=False, indent=2)
        fh.write("\n")
