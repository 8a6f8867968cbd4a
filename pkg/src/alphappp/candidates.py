"""Place candidates: enumeration over the advising DFG and the pruning stages."""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

from .dfg import Dfg
from .log import Activity, ActivityMultiset, EventLog, Trace


@dataclass(frozen=True, order=False)
class PlaceCandidate:
    """A pair of non-empty activity sets: producers (first) and consumers (second)."""

    first: frozenset[Activity]
    second: frozenset[Activity]

    def __post_init__(self) -> None:
        if not self.first or not self.second:
            raise ValueError("place candidate sets must be non-empty")

    def activities(self) -> frozenset[Activity]:
        return self.first | self.second

    def sort_key(self) -> tuple:
        return (
            len(self.first) + len(self.second),
            tuple(sorted(a.sort_key() for a in self.first)),
            tuple(sorted(a.sort_key() for a in self.second)),
        )

    def dominated_by(self, other: PlaceCandidate) -> bool:
        """Component-wise containment; equal candidates count as dominated."""
        return self.first <= other.first and self.second <= other.second

    def describe(self) -> str:
        fmt = lambda s: "{" + ",".join(sorted(a.label() for a in s)) + "}"
        return f"({fmt(self.first)},{fmt(self.second)})"


def candidate(first: Iterable[Activity], second: Iterable[Activity]) -> PlaceCandidate:
    return PlaceCandidate(frozenset(first), frozenset(second))


def satisfies_conjuncts(dfg: Dfg, first: frozenset[Activity], second: frozenset[Activity]) -> bool:
    """The four structural requirements a candidate must meet on the advising DFG."""
    if not first or not second:
        return False
    w = dfg.weight
    # 1: every producer is directly followed by every consumer
    if any(w(a1, a2) == 0 for a1 in first for a2 in second):
        return False
    # 2: no arc from a producer into a pure producer
    if any(w(a1, a2) > 0 for a1 in first for a2 in first - second):
        return False
    # 3: no arc from a pure consumer into a consumer
    if any(w(a1, a2) > 0 for a1 in second - first for a2 in second):
        return False
    # 4: some pure producer/pure consumer pair lacks the reverse arc
    return any(
        w(a2, a1) == 0 for a1 in first - second for a2 in second - first
    )


def enumerate_candidates(
    adfg: Dfg, size_cap: int | None = None
) -> tuple[list[PlaceCandidate], bool]:
    """All candidates satisfying the four conjuncts, in canonical order.

    Candidates larger than ``size_cap`` activities in total are not explored;
    the returned flag reports whether the cap cut anything off. The search
    grows the producer set over nodes with a shared successor pool, then fills
    the consumer set inside that pool, so only structurally possible pairs are
    visited.
    """
    nodes = adfg.sorted_nodes()
    index = {node: i for i, node in enumerate(nodes)}
    n = len(nodes)
    succ = [0] * n
    pred = [0] * n
    out_edges = [0] * n  # bitmask of successors
    for (a, b), w in adfg.arcs.items():
        if w > 0:
            succ[index[a]] |= 1 << index[b]
            pred[index[b]] |= 1 << index[a]
            out_edges[index[a]] |= 1 << index[b]

    found: list[PlaceCandidate] = []
    cap_hit = False

    def bits(mask: int) -> Iterator[int]:
        while mask:
            low = mask & -mask
            yield low.bit_length() - 1
            mask ^= low

    def mask_to_set(mask: int) -> frozenset[Activity]:
        return frozenset(nodes[i] for i in bits(mask))

    def emit_if_valid(first_mask: int, second_mask: int) -> None:
        nonlocal cap_hit
        # conjunct 4: a pure producer / pure consumer pair without the reverse arc
        pure_first = first_mask & ~second_mask
        pure_second = second_mask & ~first_mask
        if not pure_first or not pure_second:
            return
        ok = any(
            pure_first & ~out_edges[j] for j in bits(pure_second)
        )
        if ok:
            found.append(PlaceCandidate(mask_to_set(first_mask), mask_to_set(second_mask)))

    def grow_second(first_mask: int, required: int, pool: int, second_mask: int, start: int) -> None:
        nonlocal cap_hit
        if second_mask and second_mask & required == required:
            emit_if_valid(first_mask, second_mask)
        total = bin(first_mask).count("1") + bin(second_mask).count("1")
        if size_cap is not None and total >= size_cap:
            if pool >> start:
                cap_hit = True
            return
        for j in bits(pool >> start << start):
            if j < start:
                continue
            bit = 1 << j
            # conjunct 3 incrementally: no arcs between pure consumers and consumers
            new_second = second_mask | bit
            pure = new_second & ~first_mask
            if any(out_edges[k] & new_second for k in bits(pure)):
                continue
            grow_second(first_mask, required, pool, new_second, j + 1)

    def grow_first(first_mask: int, common: int, start: int) -> None:
        nonlocal cap_hit
        if first_mask:
            # conjunct 2: arcs inside the producer set must point at consumers
            required = 0
            for i in bits(first_mask):
                required |= out_edges[i] & first_mask
            if required & ~common == 0:
                grow_second(first_mask, required, common, 0, 0)
        total = bin(first_mask).count("1")
        if size_cap is not None and total >= size_cap:
            if common and start < n:
                cap_hit = True
            return
        for i in range(start, n):
            new_common = (common if first_mask else ~0) & succ[i]
            if not new_common & ((1 << n) - 1):
                continue
            grow_first(first_mask | (1 << i), new_common & ((1 << n) - 1), i + 1)

    grow_first(0, 0, 0)
    found.sort(key=PlaceCandidate.sort_key)
    return found, cap_hit


def balance(candidate: PlaceCandidate, act_counts: ActivityMultiset) -> Fraction:
    """Relative imbalance between total producer and total consumer occurrences."""
    first_total = sum(act_counts[a] for a in candidate.first)
    second_total = sum(act_counts[a] for a in candidate.second)
    top = max(first_total, second_total)
    if top == 0:
        raise ValueError(f"candidate {candidate.describe()} has no occurrences at all")
    return Fraction(abs(first_total - second_total), top)


def prune_balance(
    candidates: Iterable[PlaceCandidate], act_counts: ActivityMultiset, cutoff: float
) -> list[PlaceCandidate]:
    """Keep candidates whose imbalance stays within the cutoff (inclusive)."""
    limit = Fraction(repr(float(cutoff)))
    return [c for c in candidates if balance(c, act_counts) <= limit]


def fit_trace(trace: Trace, candidate: PlaceCandidate) -> int:
    """Token count discipline of a single trace against a candidate place: 1 if clean.

    Walk the trace with a counter: pure producers raise it, pure consumers
    lower it (a consumer at zero fails immediately), activities on both sides
    or neither leave it alone. The trace fits iff it ends back at zero.
    """
    first, second = candidate.first, candidate.second
    k = 0
    for act in trace:
        produces = act in first
        consumes = act in second
        if produces and not consumes:
            k += 1
        elif consumes and not produces:
            if k == 0:
                return 0
            k -= 1
    return 1 if k == 0 else 0


def relevant_variants(log: EventLog, activities: frozenset[Activity]) -> list[tuple[Trace, int]]:
    """Variants containing at least one of the given activities."""
    return [
        (trace, count)
        for trace, count in log.variants.items()
        if not activities.isdisjoint(trace)
    ]


@dataclass(frozen=True)
class CandidateFitness:
    overall: Fraction
    minimum_per_activity: Fraction | None
    relevant_traces: int


def candidate_fitness(log: EventLog, cand: PlaceCandidate) -> CandidateFitness:
    """Trace-weighted fit over relevant traces, overall and per involved activity."""
    acts = cand.activities()
    rel_total = 0
    fit_total = 0
    per_act_rel: dict[Activity, int] = {a: 0 for a in acts}
    per_act_fit: dict[Activity, int] = {a: 0 for a in acts}
    for trace, count in log.variants.items():
        present = acts.intersection(trace)
        if not present:
            continue
        verdict = fit_trace(trace, cand)
        rel_total += count
        fit_total += verdict * count
        for a in present:
            per_act_rel[a] += count
            per_act_fit[a] += verdict * count
    if rel_total == 0:
        return CandidateFitness(Fraction(0), None, 0)
    per_activity = [
        Fraction(per_act_fit[a], per_act_rel[a]) for a in acts if per_act_rel[a] > 0
    ]
    minimum = min(per_activity) if per_activity else None
    return CandidateFitness(Fraction(fit_total, rel_total), minimum, rel_total)


def prune_fitness(
    candidates: Iterable[PlaceCandidate], log: EventLog, cutoff: float
) -> list[PlaceCandidate]:
    """Keep candidates whose overall and minimum per-activity fitness reach the cutoff."""
    limit = Fraction(repr(float(cutoff)))
    kept = []
    for cand in candidates:
        fitness = candidate_fitness(log, cand)
        if fitness.relevant_traces == 0 or fitness.minimum_per_activity is None:
            continue
        if fitness.overall >= limit and fitness.minimum_per_activity >= limit:
            kept.append(cand)
    return kept


def select_maximal(candidates: Iterable[PlaceCandidate]) -> list[PlaceCandidate]:
    """The component-wise-containment maxima, in canonical order."""
    pool = sorted(set(candidates), key=PlaceCandidate.sort_key)
    maximal = [
        c
        for c in pool
        if not any(other is not c and c.dominated_by(other) for other in pool)
    ]
    return maximal


@dataclass(frozen=True)
class StageCounts:
    enumerated: int
    after_balance: int
    after_fitness: int
    selected: int
    cap_hit: bool = False

    def to_json(self) -> dict:
        return {
            "enumerated": self.enumerated,
            "after_balance": self.after_balance,
            "after_fitness": self.after_fitness,
            "selected": self.selected,
            "cap_hit": self.cap_hit,
        }


def dump_candidates_jsonl(
    candidates: Iterable[PlaceCandidate],
    log: EventLog,
    act_counts: ActivityMultiset,
    stage: Mapping[PlaceCandidate, str],
) -> str:
    """One JSON object per candidate with its metrics and the last stage it survived."""
    lines = []
    for cand in candidates:
        fitness = candidate_fitness(log, cand)
        lines.append(
            json.dumps(
                {
                    "first": sorted(a.label() for a in cand.first),
                    "second": sorted(a.label() for a in cand.second),
                    "balance": float(balance(cand, act_counts)),
                    "overall": float(fitness.overall),
                    "min_per_activity": (
                        None
                        if fitness.minimum_per_activity is None
                        else float(fitness.minimum_per_activity)
                    ),
                    "stage_survived": stage.get(cand, "enumerated"),
                },
                ensure_ascii=False,
            )
        )
    return "\n".join(lines) + ("\n" if lines else "")
