"""Shipped JSON schemas for every file format the pipeline emits."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

import jsonschema

KINDS = ("mass", "queries", "evolution", "scores", "report", "trend", "pattern")


@lru_cache(maxsize=None)
def load_schema(kind: str) -> dict:
    if kind not in KINDS:
        raise KeyError(f"no schema named {kind!r}; known: {KINDS}")
    ref = resources.files("innoscore").joinpath(f"schemas/{kind}.json")
    return json.loads(ref.read_text("utf-8"))


def validate(kind: str, obj) -> None:
    """Raise jsonschema.ValidationError when ``obj`` breaks the contract."""
    jsonschema.validate(obj, load_schema(kind))
