"""Search sources: offline inverted-index corpus, query-frequency log,
and a deterministic synthetic generator for experiments.

A source reports hit counts (number of documents matching a conjunctive
query) and query frequencies (how often users run analogous queries per
period).  Real web-scale sources are out of scope; the SourceAdapter
protocol documents where they would plug in.
"""

from __future__ import annotations

import csv
import datetime as dt
import json
import random
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Protocol, Sequence, runtime_checkable

from .errors import DuplicateDocument, EmptyCorpus, InvalidSpec, SourceError
from .evidence import SourceProfile
from .pattern import Query

# Unicode-alphanumeric words, lowercased, no stemming.
_TOKEN_RE = re.compile(r"[^\W_]+")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class CorpusDocument:
    id: str
    date: dt.date
    text: str


@dataclass(frozen=True)
class QueryLogEntry:
    """One aggregated log line: how often a token multiset was queried."""

    period: int
    tokens: tuple[str, ...]
    frequency: float

    def __post_init__(self):
        if self.frequency < 0:
            raise ValueError(f"negative frequency {self.frequency!r}")
        object.__setattr__(self, "tokens", tuple(self.tokens))


def _query_words(q: Query) -> tuple[list[str], list[str]]:
    """(marker words, term words) of a query, tokenized."""
    marker_words = tokenize(q.marker)
    term_words: list[str] = []
    for term in q.terms:
        term_words.extend(tokenize(term))
    return marker_words, term_words


@runtime_checkable
class SourceAdapter(Protocol):
    """Behavioral contract every search source must satisfy.

    ``capabilities`` is a subset of {"counts", "frequencies",
    "dated_counts"}.  Counts must be deterministic for a fixed source
    state and conjunctively monotone: adding a term never increases the
    count.
    """

    profile: SourceProfile

    @property
    def capabilities(self) -> frozenset[str]: ...

    def count(self, q: Query, until: dt.date | None = None) -> int: ...

    def frequency(self, q: Query, period: int) -> float: ...

    def matching_ids(self, q: Query, until: dt.date | None = None) -> tuple[str, ...]: ...

    def token_counts(self, doc_id: str) -> Mapping[str, int]: ...


class OfflineCorpusSource:
    """Inverted index over an in-memory corpus, optionally with a query log.

    Immutable after construction; concurrent reads need no synchronization.
    """

    def __init__(
        self,
        documents: Sequence[CorpusDocument],
        profile: SourceProfile | None = None,
        query_log: Sequence[QueryLogEntry] = (),
        frequency_mode: str = "analogous",
    ):
        if not documents:
            raise EmptyCorpus("cannot index an empty corpus")
        if frequency_mode not in ("analogous", "exact"):
            raise ValueError(f"unknown frequency mode {frequency_mode!r}")
        self.profile = profile or SourceProfile(id="corpus")
        self.query_log = tuple(query_log)
        self.frequency_mode = frequency_mode
        self._docs: dict[str, CorpusDocument] = {}
        self._bags: dict[str, Counter] = {}
        postings: dict[str, set[str]] = {}
        for doc in documents:
            if doc.id in self._docs:
                raise DuplicateDocument(f"duplicate document id {doc.id!r}")
            self._docs[doc.id] = doc
            bag = Counter(tokenize(doc.text))
            self._bags[doc.id] = bag
            for token in bag:
                postings.setdefault(token, set()).add(doc.id)
        self._postings = {t: frozenset(ids) for t, ids in postings.items()}

    @property
    def capabilities(self) -> frozenset[str]:
        caps = {"counts", "dated_counts"}
        if self.query_log:
            caps.add("frequencies")
        return frozenset(caps)

    def document_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self._docs))

    def postings(self, token: str) -> tuple[str, ...]:
        return tuple(sorted(self._postings.get(token.lower(), ())))

    def token_counts(self, doc_id: str) -> Mapping[str, int]:
        return self._bags[doc_id]

    def matching_ids(self, q: Query, until: dt.date | None = None) -> tuple[str, ...]:
        """Sorted ids of documents containing the marker and all query terms."""
        marker_words, term_words = _query_words(q)
        ids: frozenset[str] | None = None
        for word in marker_words + term_words:
            hits = self._postings.get(word)
            if not hits:
                return ()
            ids = hits if ids is None else ids & hits
            if not ids:
                return ()
        matched = ids or frozenset()
        if until is not None:
            matched = frozenset(i for i in matched if self._docs[i].date <= until)
        return tuple(sorted(matched))

    def count(self, q: Query, until: dt.date | None = None) -> int:
        return len(self.matching_ids(q, until))

    def frequency(self, q: Query, period: int) -> float:
        return query_frequency(self.query_log, q, period, mode=self.frequency_mode)


def build_index(
    corpus: Sequence[CorpusDocument],
    profile: SourceProfile | None = None,
    query_log: Sequence[QueryLogEntry] = (),
    frequency_mode: str = "analogous",
) -> OfflineCorpusSource:
    """Index a corpus; tokenization is Unicode-alphanumeric lowercasing."""
    return OfflineCorpusSource(corpus, profile, query_log, frequency_mode)


def count_documents(
    src: OfflineCorpusSource, q: Query, until: dt.date | None = None
) -> int:
    """Documents containing all query terms and the marker, dated <= until."""
    return src.count(q, until)


def query_frequency(
    log: Sequence[QueryLogEntry], q: Query, period: int, mode: str = "analogous"
) -> float:
    """Summed frequency of log entries analogous to ``q`` within ``period``.

    Analogous (default): the entry contains every marker word and shares
    at least one word with the query's terms (any marker-bearing entry
    matches a marker-only query).  Exact: the entry's token multiset
    equals the query's.
    """
    marker_words, term_words = _query_words(q)
    term_set = set(term_words)
    query_bag = Counter(marker_words + term_words)
    total = 0.0
    for entry in log:
        if entry.period != period:
            continue
        bag = Counter(entry.tokens)
        if mode == "exact":
            if bag == query_bag:
                total += entry.frequency
        else:
            if all(bag[w] > 0 for w in marker_words) and (
                not term_set or term_set & set(bag)
            ):
                total += entry.frequency
    return total


# --- corpus / log file formats --------------------------------------------

def load_corpus_jsonl(path: str | Path) -> list[CorpusDocument]:
    """One {"id", "date", "text"} object per line, UTF-8."""
    docs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                docs.append(
                    CorpusDocument(
                        id=str(obj["id"]),
                        date=dt.date.fromisoformat(obj["date"]),
                        text=str(obj["text"]),
                    )
                )
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise SourceError(f"{path}:{lineno}: bad corpus line: {exc}") from exc
    return docs


def load_corpus_dir(path: str | Path) -> list[CorpusDocument]:
    """Directory of .txt files with a sidecar meta.csv (file,date)."""
    root = Path(path)
    meta = root / "meta.csv"
    if not meta.is_file():
        raise SourceError(f"corpus directory {root} has no meta.csv")
    docs = []
    with open(meta, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            try:
                name, date = row["file"], dt.date.fromisoformat(row["date"])
            except (KeyError, ValueError) as exc:
                raise SourceError(f"{meta}: bad row {row!r}: {exc}") from exc
            doc_path = root / name
            if not doc_path.is_file():
                raise SourceError(f"{meta} references missing file {name!r}")
            docs.append(
                CorpusDocument(id=name, date=date, text=doc_path.read_text("utf-8"))
            )
    return docs


def load_corpus(path: str | Path) -> list[CorpusDocument]:
    p = Path(path)
    return load_corpus_dir(p) if p.is_dir() else load_corpus_jsonl(p)


def write_corpus_jsonl(docs: Iterable[CorpusDocument], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(
                json.dumps(
                    {"id": doc.id, "date": doc.date.isoformat(), "text": doc.text},
                    ensure_ascii=False,
                )
                + "\n"
            )


def load_query_log(path: str | Path) -> list[QueryLogEntry]:
    """CSV with header period,query,frequency; query is space-separated tokens."""
    entries = []
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            try:
                entries.append(
                    QueryLogEntry(
                        period=int(row["period"]),
                        tokens=tuple(tokenize(row["query"])),
                        frequency=float(row["frequency"]),
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise SourceError(f"{path}: bad log row {row!r}: {exc}") from exc
    return entries


def write_query_log(entries: Iterable[QueryLogEntry], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["period", "query", "frequency"])
        for e in entries:
            writer.writerow([e.period, " ".join(e.tokens), e.frequency])


# --- synthetic generator ---------------------------------------------------

@dataclass(frozen=True)
class SyntheticObject:
    """A planted archetype: its terms appear only in its own documents."""

    name: str
    terms: tuple[str, ...]
    novel: bool

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a deterministic corpus + query log.

    Planted novel objects get no documents in the first year and a
    coverage ramp that reaches the common rate only in the final year,
    while their query frequency grows linearly; common objects keep a
    constant document rate and query frequency throughout.
    """

    marker: str
    planted_objects: tuple[SyntheticObject, ...]
    vocab: tuple[str, ...]
    docs_per_year: int
    years: int
    noise: float = 0.1
    seed: int = 0
    start_year: int = 2000
    marker_query_frequency: float = 50.0
    common_doc_rate: int | None = None  # default: max(3, docs_per_year // 4)
    novel_peak_frequency: float = 30.0
    common_frequency: float = 10.0

    def __post_init__(self):
        object.__setattr__(self, "planted_objects", tuple(self.planted_objects))
        object.__setattr__(self, "vocab", tuple(self.vocab))
        if self.years < 1:
            raise InvalidSpec(f"years must be >= 1, got {self.years}")
        if self.docs_per_year < 0:
            raise InvalidSpec(f"docs_per_year must be >= 0, got {self.docs_per_year}")
        if not 0.0 <= self.noise < 1.0:
            raise InvalidSpec(f"noise must be in [0, 1), got {self.noise}")
        if not tokenize(self.marker):
            raise InvalidSpec("marker has no tokens")
        if len(self.vocab) < 3:
            raise InvalidSpec("need at least 3 background vocabulary words")


def synthetic_source(
    spec: SyntheticSpec,
) -> tuple[list[CorpusDocument], list[QueryLogEntry]]:
    """Deterministic corpus and query log realizing ``spec``.

    Construction guarantees (exact, not statistical): in every year a
    novel object has at most as many documents as a common one, and the
    first year has none; document counts and log frequencies are fixed
    functions of the year, randomness only shapes document wording.
    """
    rng = random.Random(spec.seed)
    common_rate = (
        spec.common_doc_rate
        if spec.common_doc_rate is not None
        else max(3, spec.docs_per_year // 4)
    )
    span = max(spec.years - 1, 1)
    corpus: list[CorpusDocument] = []
    log: list[QueryLogEntry] = []
    serial = 0

    def emit(year: int, day_slot: int, words: list[str]) -> None:
        nonlocal serial
        date = dt.date(year, 1 + day_slot % 12, 1 + (day_slot * 7) % 28)
        corpus.append(
            CorpusDocument(id=f"d{serial:06d}", date=date, text=" ".join(words))
        )
        serial += 1

    for y in range(spec.years):
        year = spec.start_year + y
        ramp = y / span
        for i in range(spec.docs_per_year):
            filler = rng.sample(spec.vocab, min(5, len(spec.vocab)))
            emit(year, i, [spec.marker] + filler)
        for obj in spec.planted_objects:
            n_docs = round(common_rate * ramp * ramp) if obj.novel else common_rate
            for i in range(n_docs):
                words = [spec.marker]
                words += [t for t in obj.terms if rng.random() >= spec.noise]
                words += rng.sample(spec.vocab, min(3, len(spec.vocab)))
                emit(year, i, words)
        log.append(
            QueryLogEntry(
                period=year,
                tokens=tuple(tokenize(spec.marker)),
                frequency=spec.marker_query_frequency,
            )
        )
        for obj in spec.planted_objects:
            freq = (
                round(spec.novel_peak_frequency * ramp, 6)
                if obj.novel
                else spec.common_frequency
            )
            tokens = tuple(tokenize(spec.marker)) + tuple(
                w for t in obj.terms for w in tokenize(t)
            )
            log.append(QueryLogEntry(period=year, tokens=tokens, frequency=freq))

    if not corpus:
        raise EmptyCorpus("synthetic spec produced no documents")
    return corpus, log
