"""Shared oracles and random generators for the test suite.

Everything here is deliberately independent of the library's own code
paths: the combine oracle enumerates the full powerset, the trend oracle
solves the normal equations directly.
"""

import random
from itertools import combinations
from math import fsum

import numpy as np

from innoscore.evidence import Frame, MassFunction, default_labels, make_frame, make_mass


def nonempty_subsets(k: int) -> list[frozenset]:
    """All 2^k - 1 non-empty subsets of {1..k}, in a stable order."""
    base = range(1, k + 1)
    return [
        frozenset(c) for r in range(1, k + 1) for c in combinations(base, r)
    ]


def rand_mass(
    rng: random.Random,
    frame: Frame,
    include_omega: bool = True,
    dyadic: bool = False,
) -> MassFunction:
    """Random valid mass function on ``frame``.

    With ``include_omega`` the full frame always carries some mass, which
    guarantees K < 1 for any pair.  With ``dyadic`` every mass is an exact
    multiple of 1/1024, so the assignment sums to exactly 1.0 in floats.
    """
    subsets = nonempty_subsets(frame.k)
    n = rng.randint(1, min(5, len(subsets)))
    chosen = rng.sample(subsets, n)
    if include_omega and frame.omega() not in chosen:
        chosen.append(frame.omega())
    if dyadic:
        total = 1024
        cuts = sorted(rng.sample(range(1, total), len(chosen) - 1))
        parts = [b - a for a, b in zip([0] + cuts, cuts + [total])]
        weights = [p / total for p in parts]
    else:
        raw = [rng.uniform(0.05, 1.0) for _ in chosen]
        s = fsum(raw)
        weights = [w / s for w in raw]
    return make_mass(frame, zip(chosen, weights))


def rand_frame(rng: random.Random, max_k: int = 4) -> Frame:
    k = rng.randint(2, max_k)
    return make_frame(k, default_labels(k))


def oracle_combine(m1: MassFunction, m2: MassFunction) -> dict[frozenset, float]:
    """Brute-force Dempster combination over the full powerset.

    Enumerates every (B, C) subset pair, including zero-mass ones, and
    renormalizes by 1 - K with K summed over disjoint pairs.
    """
    subsets = nonempty_subsets(m1.frame.k)
    k_conflict = fsum(
        m1.mass(b) * m2.mass(c)
        for b in subsets
        for c in subsets
        if not (b & c)
    )
    out: dict[frozenset, float] = {}
    for target in subsets:
        num = fsum(
            m1.mass(b) * m2.mass(c)
            for b in subsets
            for c in subsets
            if (b & c) == target
        )
        if num:
            out[target] = num / (1.0 - k_conflict)
    return out


def oracle_trend(xs, ys) -> tuple[float, float]:
    """OLS (intercept, slope) by solving the normal equations directly."""
    x = np.asarray(xs, dtype=float)
    design = np.column_stack([np.ones_like(x), x])
    lhs = design.T @ design
    rhs = design.T @ np.asarray(ys, dtype=float)
    intercept, slope = np.linalg.solve(lhs, rhs)
    return float(intercept), float(slope)
