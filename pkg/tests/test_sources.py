"""Offline corpus source, query log, and the synthetic generator."""

import datetime as dt
import random

import pytest

from innoscore.errors import DuplicateDocument, EmptyCorpus, InvalidSpec, SourceError
from innoscore.pattern import Query
from innoscore.sources import (
    CorpusDocument,
    QueryLogEntry,
    SyntheticObject,
    SyntheticSpec,
    build_index,
    count_documents,
    load_corpus,
    load_corpus_jsonl,
    load_query_log,
    query_frequency,
    synthetic_source,
    tokenize,
    write_corpus_jsonl,
    write_query_log,
)


def doc(i, text, year=2010):
    return CorpusDocument(id=f"d{i}", date=dt.date(year, 6, 1), text=text)


def fixture_corpus():
    # 5 documents, hand-checked: marker "sensor" in d1..d4, "optical" in d1, d3
    return [
        doc(1, "An optical sensor for tanks", 2001),
        doc(2, "A pressure sensor module", 2003),
        doc(3, "Optical sensor with remote display", 2005),
        doc(4, "Calibrating any sensor by hand", 2007),
        doc(5, "Unrelated gardening notes", 2009),
    ]


class TestTokenize:
    def test_lowercase_words(self):
        assert tokenize("An Optical sensor, v2!") == ["an", "optical", "sensor", "v2"]

    def test_cyrillic(self):
        assert tokenize("Электронный индикатор УРОВНЯ") == [
            "электронный",
            "индикатор",
            "уровня",
        ]

    def test_underscore_not_a_word_char(self):
        assert tokenize("a_b") == ["a", "b"]


class TestIndex:
    def test_postings_sorted(self):
        docs = [
            doc(1, "уровень сигнала"),
            doc(2, "шум и помехи"),
            doc(3, "уровень шума"),
        ]
        src = build_index(docs)
        assert src.postings("уровень") == ("d1", "d3")

    def test_duplicate_id(self):
        with pytest.raises(DuplicateDocument):
            build_index([doc(1, "a"), doc(1, "b")])

    def test_empty_corpus(self):
        with pytest.raises(EmptyCorpus):
            build_index([])

    def test_rebuild_deterministic(self):
        docs = fixture_corpus()
        a, b = build_index(docs), build_index(docs)
        assert a.document_ids() == b.document_ids()
        assert a.postings("sensor") == b.postings("sensor")


class TestCountDocuments:
    def test_marker_only_baseline(self):
        src = build_index(fixture_corpus())
        assert count_documents(src, Query("sensor")) == 4

    def test_marker_plus_term(self):
        # hand intersection: optical in d1, d3; sensor in d1..d4 -> 2
        src = build_index(fixture_corpus())
        assert count_documents(src, Query("sensor", ("optical",))) == 2

    def test_unknown_term_gives_zero(self):
        src = build_index(fixture_corpus())
        assert count_documents(src, Query("sensor", ("nonexistent",))) == 0

    def test_phrase_matches_all_words_present(self):
        src = build_index(fixture_corpus())
        assert count_documents(src, Query("sensor", ("remote display",))) == 1

    def test_until_filters_by_date(self):
        src = build_index(fixture_corpus())
        q = Query("sensor")
        assert count_documents(src, q, until=dt.date(2002, 1, 1)) == 1
        assert count_documents(src, q, until=dt.date(2004, 1, 1)) == 2
        assert count_documents(src, q, until=dt.date(2010, 1, 1)) == 4

    def test_conjunctive_monotonicity_random(self):
        rng = random.Random(7)
        vocab = ["sensor", "optical", "pressure", "remote", "display", "tanks"]
        docs = [
            doc(i, " ".join(rng.choices(vocab, k=rng.randint(2, 6))))
            for i in range(40)
        ]
        src = build_index(docs)
        for _ in range(200):
            terms = rng.sample(vocab[1:], rng.randint(0, 3))
            base = count_documents(src, Query("sensor", tuple(terms)))
            extra = rng.choice(vocab[1:])
            wider = count_documents(src, Query("sensor", tuple(terms) + (extra,)))
            assert wider <= base

    def test_marker_count_dominates_every_query(self):
        src = build_index(fixture_corpus())
        r0 = count_documents(src, Query("sensor"))
        for terms in [("optical",), ("pressure",), ("optical", "remote")]:
            assert count_documents(src, Query("sensor", terms)) <= r0

    def test_date_filter_monotone(self):
        src = build_index(fixture_corpus())
        q = Query("sensor", ("optical",))
        counts = [
            count_documents(src, q, until=dt.date(year, 12, 31))
            for year in range(2000, 2011)
        ]
        assert counts == sorted(counts)


class TestQueryFrequency:
    def test_empty_log(self):
        assert query_frequency([], Query("sensor", ("optical",)), 2010) == 0.0

    def test_exact_entry(self):
        log = [QueryLogEntry(2010, ("sensor", "optical"), 120.0)]
        assert query_frequency(log, Query("sensor", ("optical",)), 2010) == 120.0

    def test_two_analogous_entries_sum(self):
        log = [
            QueryLogEntry(2010, ("sensor", "optical"), 50.0),
            QueryLogEntry(2010, ("sensor", "optical", "tanks"), 70.0),
        ]
        assert query_frequency(log, Query("sensor", ("optical",)), 2010) == 120.0

    def test_period_filter(self):
        log = [
            QueryLogEntry(2009, ("sensor", "optical"), 50.0),
            QueryLogEntry(2010, ("sensor", "optical"), 70.0),
        ]
        assert query_frequency(log, Query("sensor", ("optical",)), 2010) == 70.0

    def test_marker_only_query_matches_all_marker_entries(self):
        log = [
            QueryLogEntry(2010, ("sensor",), 30.0),
            QueryLogEntry(2010, ("sensor", "optical"), 50.0),
            QueryLogEntry(2010, ("gardening",), 99.0),
        ]
        assert query_frequency(log, Query("sensor"), 2010) == 80.0

    def test_entry_without_term_overlap_ignored(self):
        log = [QueryLogEntry(2010, ("sensor", "pressure"), 40.0)]
        assert query_frequency(log, Query("sensor", ("optical",)), 2010) == 0.0

    def test_exact_mode(self):
        log = [
            QueryLogEntry(2010, ("sensor", "optical"), 50.0),
            QueryLogEntry(2010, ("sensor", "optical", "tanks"), 70.0),
        ]
        q = Query("sensor", ("optical",))
        assert query_frequency(log, q, 2010, mode="exact") == 50.0


class TestFileFormats:
    def test_corpus_jsonl_round_trip(self, tmp_path):
        docs = fixture_corpus()
        path = tmp_path / "corpus.jsonl"
        write_corpus_jsonl(docs, path)
        assert load_corpus_jsonl(path) == docs

    def test_corpus_dir(self, tmp_path):
        (tmp_path / "a.txt").write_text("optical sensor", encoding="utf-8")
        (tmp_path / "b.txt").write_text("pressure sensor", encoding="utf-8")
        (tmp_path / "meta.csv").write_text(
            "file,date\na.txt,2001-05-01\nb.txt,2002-06-01\n", encoding="utf-8"
        )
        docs = load_corpus(tmp_path)
        assert [d.id for d in docs] == ["a.txt", "b.txt"]
        assert docs[0].date == dt.date(2001, 5, 1)

    def test_corpus_dir_missing_meta(self, tmp_path):
        with pytest.raises(SourceError):
            load_corpus(tmp_path)

    def test_bad_jsonl_reports_line(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text('{"id": "d1", "date": "2001-01-01", "text": "x"}\nnot json\n')
        with pytest.raises(SourceError, match="2"):
            load_corpus_jsonl(path)

    def test_query_log_round_trip(self, tmp_path):
        entries = [
            QueryLogEntry(2010, ("sensor", "optical"), 12.5),
            QueryLogEntry(2011, ("sensor",), 50.0),
        ]
        path = tmp_path / "log.csv"
        write_query_log(entries, path)
        assert load_query_log(path) == entries


class TestSyntheticSource:
    def spec(self, seed=1, years=5):
        objects = (
            SyntheticObject("newthing", ("quantum", "valve"), novel=True),
            SyntheticObject("oldthing", ("steel", "pipe"), novel=False),
        )
        return SyntheticSpec(
            marker="device",
            planted_objects=objects,
            vocab=("alpha", "beta", "gamma", "delta", "epsilon"),
            docs_per_year=12,
            years=years,
            noise=0.1,
            seed=seed,
        )

    def test_deterministic(self):
        c1, l1 = synthetic_source(self.spec())
        c2, l2 = synthetic_source(self.spec())
        assert c1 == c2 and l1 == l2

    def test_seed_changes_wording_not_counts(self):
        c1, _ = synthetic_source(self.spec(seed=1))
        c2, _ = synthetic_source(self.spec(seed=2))
        assert len(c1) == len(c2)
        assert any(a.text != b.text for a, b in zip(c1, c2))

    def test_novel_has_no_first_year_docs_and_never_exceeds_common(self):
        corpus, _ = synthetic_source(self.spec())
        src = build_index(corpus)
        for year in range(2000, 2005):
            until = dt.date(year, 12, 31)
            novel = count_documents(src, Query("device", ("quantum", "valve")), until)
            common = count_documents(src, Query("device", ("steel", "pipe")), until)
            assert novel <= common
        first_year = count_documents(
            src, Query("device", ("quantum",)), dt.date(2000, 12, 31)
        )
        assert first_year == 0

    def test_novel_frequency_grows(self):
        _, log = synthetic_source(self.spec())
        q = Query("device", ("quantum", "valve"))
        freqs = [query_frequency(log, q, year) for year in range(2000, 2005)]
        assert freqs[0] == 0.0
        assert freqs == sorted(freqs) and freqs[-1] > 0

    def test_empty_spec_rejected(self):
        with pytest.raises(InvalidSpec):
            SyntheticSpec(
                marker="device",
                planted_objects=(),
                vocab=("a", "b", "c"),
                docs_per_year=1,
                years=0,
            )

    def test_no_documents_raises_empty_corpus(self):
        spec = SyntheticSpec(
            marker="device",
            planted_objects=(),
            vocab=("a", "b", "c"),
            docs_per_year=0,
            years=3,
        )
        with pytest.raises(EmptyCorpus):
            synthetic_source(spec)
