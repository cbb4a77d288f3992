"""Genetic evolution of search queries over a pattern vocabulary.

Genotypes are fixed-length binary inclusion masks over the pattern's
terms (the canonical encoding for schema analysis); every decoded query
carries the marker plus the included terms.  Fitness is the mean cosine
similarity between the pattern's weight vector and the weighted
term-frequency vectors of the best-matching documents.  The evolutionary
run returns a multiset of effective queries interpreted as the
archetype's linguistic model.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass
from itertools import product
from math import fsum
from typing import Sequence

import numpy as np

from .errors import GenotypeMismatch, InnoscoreError, SourceError, TooLarge
from .pattern import Query, SearchPattern
from .sources import SourceAdapter, tokenize

STAGNATION_LIMIT = 10  # early stop after this many non-improving generations
MAX_EXHAUSTIVE_VOCAB = 16


@dataclass(frozen=True)
class Genotype:
    """Binary inclusion mask over the pattern vocabulary; never empty."""

    mask: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "mask", tuple(int(b) for b in self.mask))
        if not self.mask:
            raise ValueError("genotype mask has zero length")
        if any(b not in (0, 1) for b in self.mask):
            raise ValueError(f"mask genes must be 0/1, got {self.mask}")
        if not any(self.mask):
            raise ValueError("empty mask: repair before constructing a Genotype")

    @property
    def cardinality(self) -> int:
        return sum(self.mask)

    def decode(self, pattern: SearchPattern) -> Query:
        if len(self.mask) != len(pattern.terms):
            raise GenotypeMismatch(
                f"mask length {len(self.mask)} != vocabulary size {len(pattern.terms)}"
            )
        terms = tuple(
            text for text, bit in zip(pattern.vocabulary, self.mask) if bit
        )
        return Query(marker=pattern.marker, terms=terms)


@dataclass(frozen=True)
class GAConfig:
    population_size: int = 30
    generations: int = 40
    crossover_rate: float = 0.9
    mutation_rate: float | None = None  # None -> 1/|V|
    elitism: int = 2
    tournament_size: int = 3
    top_m: int = 10
    fitness_top_n: int = 10
    rng_seed: int = 0

    def __post_init__(self):
        if self.population_size < 1 or self.tournament_size < 1 or self.top_m < 1:
            raise ValueError("population, tournament and top_m sizes must be >= 1")
        if self.generations < 0:
            raise ValueError("generations must be >= 0")
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ValueError(f"crossover rate {self.crossover_rate!r} outside [0, 1]")
        if self.mutation_rate is not None and not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError(f"mutation rate {self.mutation_rate!r} outside [0, 1]")
        if not 0 <= self.elitism < self.population_size:
            raise ValueError("elitism must be < population_size")
        if self.fitness_top_n < 1:
            raise ValueError("fitness_top_n must be >= 1")


@dataclass(frozen=True)
class EvolvedQuery:
    query: Query
    fitness: float
    count: int  # occurrences across all evaluated individuals


@dataclass(frozen=True)
class GenerationStats:
    generation: int
    best_fitness: float
    mean_fitness: float


@dataclass(frozen=True)
class EvolutionReport:
    best_queries: tuple[EvolvedQuery, ...]
    generations: tuple[GenerationStats, ...]
    evaluations: int


def _repair(mask: list[int], rng: random.Random) -> list[int]:
    """Keep the population free of empty masks: set one uniform gene."""
    if not any(mask):
        mask[rng.randrange(len(mask))] = 1
    return mask


def init_population(
    pattern: SearchPattern, cfg: GAConfig, rng: random.Random
) -> list[Genotype]:
    """Independent 0.5 coin per gene, empty masks repaired."""
    size = len(pattern.terms)
    population = []
    for _ in range(cfg.population_size):
        mask = [1 if rng.random() < 0.5 else 0 for _ in range(size)]
        population.append(Genotype(tuple(_repair(mask, rng))))
    return population


def crossover(
    a: Genotype, b: Genotype, rng: random.Random
) -> tuple[Genotype, Genotype]:
    """Single-point crossover at a uniform interior cut; children repaired."""
    if len(a.mask) != len(b.mask):
        raise GenotypeMismatch(f"mask lengths differ: {len(a.mask)} vs {len(b.mask)}")
    size = len(a.mask)
    if size < 2:  # no interior cut exists
        return a, b
    cut = rng.randint(1, size - 1)
    c1 = list(a.mask[:cut] + b.mask[cut:])
    c2 = list(b.mask[:cut] + a.mask[cut:])
    return Genotype(tuple(_repair(c1, rng))), Genotype(tuple(_repair(c2, rng)))


def mutate(g: Genotype, rate: float, rng: random.Random) -> Genotype:
    """Flip each gene independently with probability ``rate``."""
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"mutation rate {rate!r} outside [0, 1]")
    mask = [1 - bit if rng.random() < rate else bit for bit in g.mask]
    return Genotype(tuple(_repair(mask, rng)))


def _phrase_tf(bag, text: str) -> int:
    """Term frequency of a (possibly multi-word) term: complete word sets."""
    words = tokenize(text)
    if not words:
        return 0
    return min(bag.get(w, 0) for w in words)


class _PatternScorer:
    """Precomputed per-document cosines against the pattern weight vector.

    The cosine of a matched document does not depend on the query (the
    query only selects which documents match), so one pass over the
    corpus serves every fitness evaluation.
    """

    def __init__(self, pattern: SearchPattern, source: SourceAdapter, n_top: int):
        self.pattern = pattern
        self.source = source
        self.n_top = n_top
        vocab = (pattern.marker,) + pattern.vocabulary
        weights = np.asarray((1.0,) + pattern.weights, dtype=float)
        w_norm = float(np.linalg.norm(weights))
        self.cosines: dict[str, float] = {}
        try:
            doc_ids = source.document_ids()
            for doc_id in doc_ids:
                bag = source.token_counts(doc_id)
                tf = np.asarray([_phrase_tf(bag, v) for v in vocab], dtype=float)
                weighted = tf * weights
                norm = float(np.linalg.norm(weighted))
                if norm > 0.0:
                    # parallel vectors can exceed 1 by an ulp
                    cos = float(weighted @ weights) / (norm * w_norm)
                    self.cosines[doc_id] = min(1.0, cos)
        except InnoscoreError:
            raise
        except Exception as exc:
            raise SourceError(
                f"source {source.profile.id!r} failed while indexing: {exc}"
            ) from exc

    def score_query(self, q: Query) -> float:
        try:
            matched = self.source.matching_ids(q)
        except InnoscoreError:
            raise
        except Exception as exc:
            raise SourceError(
                f"source {self.source.profile.id!r} failed on query "
                f"{q.text()!r}: {exc}"
            ) from exc
        if not matched:
            return 0.0
        ranked = sorted(matched, key=lambda d: (-self.cosines.get(d, 0.0), d))
        top = ranked[: self.n_top]
        return fsum(self.cosines.get(d, 0.0) for d in top) / len(top)


def fitness(
    g: Genotype, pattern: SearchPattern, source: SourceAdapter, n_top: int = 10
) -> float:
    """Mean cosine of the up-to-``n_top`` best matching documents, in [0, 1]."""
    return _PatternScorer(pattern, source, n_top).score_query(g.decode(pattern))


def _tournament(fits: Sequence[float], size: int, rng: random.Random) -> int:
    contenders = [rng.randrange(len(fits)) for _ in range(size)]
    return max(contenders, key=lambda i: fits[i])


def _rank_key(mask: tuple[int, ...], fit: float):
    # best fitness first; ties to fewer terms, then lexicographic mask
    return (-fit, sum(mask), mask)


def evolve(
    pattern: SearchPattern, source: SourceAdapter, cfg: GAConfig
) -> EvolutionReport:
    """Tournament selection + elitism + crossover + mutation.

    Runs ``cfg.generations`` generations (stopping early after
    ``STAGNATION_LIMIT`` generations without best-fitness improvement)
    and returns the ``top_m`` distinct-by-mask best queries with their
    occurrence counts across all evaluated individuals (the effective
    query multiset).  Fixed seed and source state give a bit-identical
    report.
    """
    rng = random.Random(cfg.rng_seed)
    scorer = _PatternScorer(pattern, source, cfg.fitness_top_n)
    rate = (
        cfg.mutation_rate
        if cfg.mutation_rate is not None
        else 1.0 / len(pattern.terms)
    )
    evaluations = 0
    fitness_by_mask: dict[tuple[int, ...], float] = {}
    occurrences: Counter = Counter()

    def evaluate(pop: list[Genotype]) -> list[float]:
        nonlocal evaluations
        fits = []
        for g in pop:
            value = scorer.score_query(g.decode(pattern))
            evaluations += 1
            occurrences[g.mask] += 1
            fitness_by_mask[g.mask] = value
            fits.append(value)
        return fits

    population = init_population(pattern, cfg, rng)
    fits = evaluate(population)
    stats = [GenerationStats(0, max(fits), fsum(fits) / len(fits))]
    best_so_far = max(fits)
    stagnant = 0

    for generation in range(1, cfg.generations + 1):
        if stagnant >= STAGNATION_LIMIT:
            break
        ranked = sorted(
            range(len(population)),
            key=lambda i: _rank_key(population[i].mask, fits[i]),
        )
        next_pop = [population[i] for i in ranked[: cfg.elitism]]
        while len(next_pop) < cfg.population_size:
            pa = population[_tournament(fits, cfg.tournament_size, rng)]
            pb = population[_tournament(fits, cfg.tournament_size, rng)]
            if rng.random() < cfg.crossover_rate:
                child1, child2 = crossover(pa, pb, rng)
            else:
                child1, child2 = pa, pb
            next_pop.append(mutate(child1, rate, rng))
            if len(next_pop) < cfg.population_size:
                next_pop.append(mutate(child2, rate, rng))
        population = next_pop
        fits = evaluate(population)
        gen_best = max(fits)
        stats.append(GenerationStats(generation, gen_best, fsum(fits) / len(fits)))
        if gen_best > best_so_far:
            best_so_far = gen_best
            stagnant = 0
        else:
            stagnant += 1

    ranked_masks = sorted(
        fitness_by_mask, key=lambda m: _rank_key(m, fitness_by_mask[m])
    )
    best_queries = tuple(
        EvolvedQuery(
            query=Genotype(mask).decode(pattern),
            fitness=fitness_by_mask[mask],
            count=occurrences[mask],
        )
        for mask in ranked_masks[: cfg.top_m]
    )
    return EvolutionReport(
        best_queries=best_queries, generations=tuple(stats), evaluations=evaluations
    )


def exhaustive_best(
    pattern: SearchPattern, source: SourceAdapter, n_top: int = 10
) -> tuple[Query, float]:
    """Evaluate all 2^|V| - 1 masks; the GA's acceptance oracle.

    Ties break toward smaller mask cardinality, then lexicographic mask
    order.
    """
    size = len(pattern.terms)
    if size > MAX_EXHAUSTIVE_VOCAB:
        raise TooLarge(f"refusing to enumerate 2^{size} masks")
    scorer = _PatternScorer(pattern, source, n_top)
    best_mask: tuple[int, ...] | None = None
    best_fit = 0.0
    best_key = None
    for bits in product((0, 1), repeat=size):
        if not any(bits):
            continue
        value = scorer.score_query(Genotype(bits).decode(pattern))
        key = _rank_key(bits, value)
        if best_key is None or key < best_key:
            best_key, best_mask, best_fit = key, bits, value
    return Genotype(best_mask).decode(pattern), best_fit


# --- JSON wire formats ------------------------------------------------------

def evolved_query_to_dict(eq: EvolvedQuery) -> dict:
    return {
        "marker": eq.query.marker,
        "terms": list(eq.query.terms),
        "fitness": eq.fitness,
        "count": eq.count,
    }


def report_to_dict(report: EvolutionReport) -> dict:
    return {
        "evaluations": report.evaluations,
        "generations": [
            {
                "generation": s.generation,
                "best_fitness": s.best_fitness,
                "mean_fitness": s.mean_fitness,
            }
            for s in report.generations
        ],
        "best_queries": [evolved_query_to_dict(eq) for eq in report.best_queries],
    }


def queries_from_list(objs: list[dict]) -> list[EvolvedQuery]:
    return [
        EvolvedQuery(
            query=Query(marker=o["marker"], terms=tuple(o["terms"])),
            fitness=float(o["fitness"]),
            count=int(o["count"]),
        )
        for o in objs
    ]
