"""Dempster-Shafer evidence algebra over frames of grouping intervals.

The frame of discernment is a partition of [0, 1] into k grouping
intervals on a nominal presence/absence scale.  Evidence is carried by
mass functions over non-empty subsets of interval indices {1..k};
belief and plausibility bound the probability that a measured indicator
falls inside a target set.  Evidence from several sources is attenuated
by per-source reliability (classical discounting) and fused pairwise
with Dempster's rule.

All values are immutable after construction and every operation is a
pure function of its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import fsum
from typing import Iterable, Mapping, Sequence

from .errors import (
    EmptyFocal,
    EmptyGroup,
    FrameMismatch,
    InvalidAlpha,
    InvalidFrame,
    InvalidSet,
    NotNormalized,
    TotalConflict,
)

#: A focal set is a non-empty subset of interval indices {1..k}.
FocalSet = frozenset[int]

MASS_TOL = 1e-9        # normalization tolerance for sum(m) == 1
CONFLICT_TOL = 1e-12   # total-conflict detection threshold on 1 - K
MAX_INTERVALS = 16     # keeps the 2^k powerset irrelevant at this scale


def _canon(sets: Iterable[FocalSet]) -> list[FocalSet]:
    """Canonical (deterministic) ordering of focal sets."""
    return sorted(sets, key=lambda s: tuple(sorted(s)))


@dataclass(frozen=True)
class Frame:
    """Equal-width partition of [0, 1] into ``k`` labelled intervals.

    Intervals are half-open except the last, which is closed at 1.
    """

    k: int
    bounds: tuple[tuple[float, float], ...]
    labels: tuple[str, ...]

    def omega(self) -> FocalSet:
        """The full set of interval indices."""
        return frozenset(range(1, self.k + 1))

    @property
    def width(self) -> float:
        return 1.0 / self.k

    def interval_of(self, value: float) -> int:
        """1-based index of the interval containing ``value``."""
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"value {value!r} outside [0, 1]")
        for i, (lo, hi) in enumerate(self.bounds, start=1):
            if value < hi or (i == self.k and value <= hi):
                return i
        return self.k  # pragma: no cover - defended by the loop above


def make_frame(k: int, labels: Sequence[str]) -> Frame:
    """Build the equal-width frame with ``k`` intervals and their labels."""
    if not isinstance(k, int) or k < 2:
        raise InvalidFrame(f"need at least 2 grouping intervals, got {k!r}")
    if k > MAX_INTERVALS:
        raise InvalidFrame(f"at most {MAX_INTERVALS} intervals supported, got {k}")
    if len(labels) != k:
        raise InvalidFrame(f"expected {k} labels, got {len(labels)}")
    bounds = tuple((i / k, (i + 1) / k) for i in range(k))
    return Frame(k=k, bounds=bounds, labels=tuple(str(l) for l in labels))


def default_labels(k: int) -> tuple[str, ...]:
    """Nominal presence/absence scale names for common interval counts."""
    named = {
        2: ("absent", "present"),
        3: ("absent", "partial", "present"),
        4: ("fully absent", "partially absent", "partially present", "fully present"),
    }
    if k in named:
        return named[k]
    return tuple(f"level {i}/{k}" for i in range(1, k + 1))


@dataclass(frozen=True)
class MassFunction:
    """Basic probability assignment over focal sets of one frame.

    Only strictly positive masses are stored; the assignment sums to 1
    within ``MASS_TOL``.  Construct through :func:`make_mass` (or
    :func:`vacuous`) so the invariants are enforced.
    """

    frame: Frame
    masses: dict[FocalSet, float]

    def mass(self, focal: Iterable[int]) -> float:
        return self.masses.get(frozenset(focal), 0.0)

    def focal_sets(self) -> list[FocalSet]:
        return _canon(self.masses)

    def is_vacuous(self) -> bool:
        return self.masses == {self.frame.omega(): 1.0}


def _check_target(frame: Frame, target: Iterable[int]) -> FocalSet:
    t = frozenset(target)
    if not t:
        raise EmptyFocal("target/focal set must be non-empty")
    if not t <= frame.omega():
        raise InvalidSet(f"set {sorted(t)} not within intervals 1..{frame.k}")
    return t


def make_mass(
    frame: Frame, assignments: Iterable[tuple[Iterable[int], float]]
) -> MassFunction:
    """Normal-form mass function: duplicates merged, zero masses dropped.

    Raises NotNormalized unless the masses sum to 1 within ``MASS_TOL``.
    """
    merged: dict[FocalSet, float] = {}
    for focal, value in assignments:
        key = _check_target(frame, focal)
        if value < 0.0:
            raise ValueError(f"negative mass {value!r} for {sorted(key)}")
        merged[key] = merged.get(key, 0.0) + value
    total = fsum(merged.values())
    if abs(total - 1.0) > MASS_TOL:
        raise NotNormalized(f"masses sum to {total!r}, expected 1")
    positive = {s: merged[s] for s in _canon(merged) if merged[s] > 0.0}
    return MassFunction(frame=frame, masses=positive)


def vacuous(frame: Frame) -> MassFunction:
    """Total ignorance: all mass on the full frame."""
    return MassFunction(frame=frame, masses={frame.omega(): 1.0})


def bel(m: MassFunction, target: Iterable[int]) -> float:
    """Belief: total mass of focal sets contained in ``target``."""
    t = _check_target(m.frame, target)
    return fsum(v for a, v in m.masses.items() if a <= t)


def pl(m: MassFunction, target: Iterable[int]) -> float:
    """Plausibility: total mass of focal sets intersecting ``target``."""
    t = _check_target(m.frame, target)
    return fsum(v for a, v in m.masses.items() if a & t)


@dataclass(frozen=True)
class SourceProfile:
    """A named evidence source with reliability alpha in [0, 1]."""

    id: str
    reliability: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.reliability <= 1.0:
            raise InvalidAlpha(
                f"reliability for source {self.id!r} must be in [0, 1], "
                f"got {self.reliability!r}"
            )


def discount(m: MassFunction, alpha: float) -> MassFunction:
    """Classical reliability discounting.

    Every proper focal set keeps alpha * m(A); the remainder 1 - alpha
    moves to the full frame.  alpha = 1 is the identity, alpha = 0 total
    ignorance (both returned exactly).
    """
    if not 0.0 <= alpha <= 1.0:
        raise InvalidAlpha(f"discount coefficient must be in [0, 1], got {alpha!r}")
    if alpha == 1.0:
        return m
    if alpha == 0.0:
        return vacuous(m.frame)
    omega = m.frame.omega()
    out = {a: alpha * v for a, v in m.masses.items() if a != omega}
    out[omega] = (1.0 - alpha) + alpha * m.masses.get(omega, 0.0)
    return make_mass(m.frame, out.items())


def _same_frame(m1: MassFunction, m2: MassFunction) -> None:
    if m1.frame != m2.frame:
        raise FrameMismatch(
            f"cannot combine masses on different frames "
            f"(k={m1.frame.k} vs k={m2.frame.k})"
        )


def conflict(m1: MassFunction, m2: MassFunction) -> float:
    """Conflict coefficient K: total product mass on disjoint focal pairs."""
    _same_frame(m1, m2)
    return fsum(
        v1 * v2
        for a1, v1 in m1.masses.items()
        for a2, v2 in m2.masses.items()
        if not (a1 & a2)
    )


def combine_dempster(m1: MassFunction, m2: MassFunction) -> MassFunction:
    """Dempster's rule: intersect focal pairs, renormalize by 1 - K.

    A vacuous operand is the neutral element and returns the other
    operand unchanged.  Raises TotalConflict when K = 1 within
    ``CONFLICT_TOL``.
    """
    _same_frame(m1, m2)
    if m2.is_vacuous():
        return m1
    if m1.is_vacuous():
        return m2
    acc: dict[FocalSet, float] = {}
    for a1, v1 in m1.masses.items():
        for a2, v2 in m2.masses.items():
            inter = a1 & a2
            if inter:
                acc[inter] = acc.get(inter, 0.0) + v1 * v2
    surviving = fsum(acc.values())  # equals 1 - K
    if surviving <= CONFLICT_TOL:
        raise TotalConflict("sources are in total conflict (K = 1)")
    return make_mass(m1.frame, ((a, v / surviving) for a, v in acc.items()))


def combine_group(
    sources: Sequence[tuple[MassFunction, SourceProfile]]
) -> MassFunction:
    """Fold a group of sources into one conditional source.

    Each mass is first discounted by its source reliability, then the
    list is folded left to right with Dempster's rule: two sources form
    one conditional source whose evidence is combined with the next.
    """
    combined, _ = combine_group_trace(sources)
    return combined


def combine_group_trace(
    sources: Sequence[tuple[MassFunction, SourceProfile]]
) -> tuple[MassFunction, tuple[float, ...]]:
    """Like :func:`combine_group` but also returns K at every fold step."""
    if not sources:
        raise EmptyGroup("no sources to combine")
    discounted = [discount(m, profile.reliability) for m, profile in sources]
    combined = discounted[0]
    conflicts: list[float] = []
    for step, m in enumerate(discounted[1:], start=1):
        conflicts.append(conflict(combined, m))
        try:
            combined = combine_dempster(combined, m)
        except TotalConflict:
            raise TotalConflict(
                f"total conflict while folding source {step + 1} "
                f"({sources[step][1].id!r}) into the group",
                step=step,
            ) from None
    return combined, tuple(conflicts)


@dataclass(frozen=True)
class BeliefSummary:
    """(Bel, Pl) per singleton interval, plus optional caller targets."""

    singletons: tuple[tuple[float, float], ...]
    targets: tuple[tuple[FocalSet, float, float], ...] = ()


def belief_summary(
    m: MassFunction, targets: Iterable[Iterable[int]] = ()
) -> BeliefSummary:
    """Belief/plausibility interval for every singleton hypothesis."""
    singles = tuple(
        (bel(m, {i}), pl(m, {i})) for i in range(1, m.frame.k + 1)
    )
    extra = tuple(
        (t, bel(m, t), pl(m, t))
        for t in (_check_target(m.frame, raw) for raw in targets)
    )
    return BeliefSummary(singletons=singles, targets=extra)


# --- JSON wire format ----------------------------------------------------

def mass_to_dict(m: MassFunction) -> dict:
    """Serialize to the {"k", "labels", "masses"} wire format."""
    return {
        "k": m.frame.k,
        "labels": list(m.frame.labels),
        "masses": [
            {"set": sorted(a), "m": v} for a, v in sorted(
                m.masses.items(), key=lambda kv: tuple(sorted(kv[0]))
            )
        ],
    }


def mass_from_dict(obj: Mapping) -> MassFunction:
    """Parse the wire format back into a MassFunction (lossless)."""
    frame = make_frame(int(obj["k"]), list(obj["labels"]))
    return make_mass(
        frame,
        ((frozenset(entry["set"]), float(entry["m"])) for entry in obj["masses"]),
    )
