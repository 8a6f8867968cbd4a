"""End-to-end discovery pipelines and their configuration."""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .candidates import (
    PlaceCandidate,
    StageCounts,
    enumerate_candidates,
    prune_balance,
    prune_fitness,
    select_maximal,
)
from .dfg import Dfg, DfThreshold, build_advising_dfg, build_dfg
from .log import END, START, Activity, EventLog, activity_multiset, augment
from .petri import (
    AcceptingPetriNet,
    construct_classical_net,
    construct_net,
    prune_places,
)
from .repair import RepairReport, RepairSettings, repair_log


@dataclass(frozen=True)
class DiscoveryConfig:
    """All knobs of the discovery pipeline.

    ``df_threshold`` drives loop and skip detection, ``arc_min`` and
    ``min_weight_ratio`` shape the advising DFG, ``balance_cutoff`` and
    ``fitness_cutoff`` prune candidates, ``replay_cutoff`` prunes places.
    """

    df_threshold: DfThreshold = field(default_factory=lambda: DfThreshold(2.0, "relative"))
    arc_min: int = 0
    balance_cutoff: float = 0.5
    fitness_cutoff: float = 0.5
    replay_cutoff: float = 0.5
    problem_threshold: float = 1.0
    min_weight_ratio: Fraction = Fraction(1, 100)
    candidate_size_cap: int | None = None

    def __post_init__(self) -> None:
        for name in ("balance_cutoff", "fitness_cutoff", "replay_cutoff", "problem_threshold"):
            value = getattr(self, name)
            if not 0 <= value <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if self.arc_min < 0:
            raise ValueError(f"arc_min must be non-negative, got {self.arc_min}")

    def repair_settings(self) -> RepairSettings:
        return RepairSettings(
            problem_threshold=self.problem_threshold,
            df_threshold=self.df_threshold,
        )

    def to_json(self) -> dict:
        doc = {
            "d": {"value": self.df_threshold.value, "mode": self.df_threshold.mode},
            "n": self.arc_min,
            "b": self.balance_cutoff,
            "t": self.fitness_cutoff,
            "r": self.replay_cutoff,
            "problem_threshold": self.problem_threshold,
        }
        if self.min_weight_ratio != Fraction(1, 100):
            doc["min_weight_ratio"] = float(self.min_weight_ratio)
        if self.candidate_size_cap is not None:
            doc["candidate_size_cap"] = self.candidate_size_cap
        return doc

    @staticmethod
    def from_json(doc: Mapping) -> DiscoveryConfig:
        try:
            threshold = doc.get("d", {"value": 2.0, "mode": "relative"})
            ratio = doc.get("min_weight_ratio")
            return DiscoveryConfig(
                df_threshold=DfThreshold(
                    float(threshold["value"]), str(threshold.get("mode", "absolute"))
                ),
                arc_min=int(doc.get("n", 0)),
                balance_cutoff=float(doc.get("b", 0.5)),
                fitness_cutoff=float(doc.get("t", 0.5)),
                replay_cutoff=float(doc.get("r", 0.5)),
                problem_threshold=float(doc.get("problem_threshold", 1.0)),
                min_weight_ratio=(
                    Fraction(repr(float(ratio))) if ratio is not None else Fraction(1, 100)
                ),
                candidate_size_cap=(
                    int(doc["candidate_size_cap"])
                    if doc.get("candidate_size_cap") is not None
                    else None
                ),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid discovery config: {exc}") from exc


class ConfigError(ValueError):
    """Raised for malformed configuration input."""


def _preset(d: float, b: float, t: float, r: float) -> DiscoveryConfig:
    return DiscoveryConfig(
        df_threshold=DfThreshold(d, "relative"),
        arc_min=0,
        balance_cutoff=b,
        fitness_cutoff=t,
        replay_cutoff=r,
        problem_threshold=1.0,
    )


_PRESET_GRID = [
    (0.5, 0.5, 0.5),
    (0.3, 0.7, 0.6),
    (0.2, 0.8, 0.7),
    (0.2, 0.8, 0.8),
    (0.1, 0.9, 0.9),
]

PRESETS: dict[str, DiscoveryConfig] = {
    f"{d}/b{b}t{t}r{r}": _preset(d, b, t, r)
    for d in (2.0, 4.0)
    for (b, t, r) in _PRESET_GRID
}


@dataclass(frozen=True)
class StageReport:
    """Counts and wall-clock times for every pipeline stage."""

    repair: RepairReport
    adfg_arcs_kept: int
    adfg_arcs_removed: int
    candidates: StageCounts
    places_before_pruning: int
    places_after_pruning: int
    timings: Mapping[str, float]
    repair_cache_hit: bool = False
    candidates_cache_hit: bool = False

    def to_json(self) -> dict:
        return {
            "repair": self.repair.to_json(),
            "adfg": {
                "arcs_kept": self.adfg_arcs_kept,
                "arcs_removed": self.adfg_arcs_removed,
            },
            "candidates": self.candidates.to_json(),
            "places": {
                "before_pruning": self.places_before_pruning,
                "after_pruning": self.places_after_pruning,
            },
            "funnel": self.funnel(),
            "timings": dict(self.timings),
            "cache": {
                "repair_hit": self.repair_cache_hit,
                "candidates_hit": self.candidates_cache_hit,
            },
        }

    def funnel(self) -> dict:
        """The five headline counts, enumeration through surviving places."""
        return {
            "cnd0": self.candidates.enumerated,
            "cnd1": self.candidates.after_balance,
            "cnd2": self.candidates.after_fitness,
            "sel": self.candidates.selected,
            "places": self.places_after_pruning,
        }


@dataclass(frozen=True)
class DiscoveryResult:
    net: AcceptingPetriNet
    report: StageReport
    repaired_log: EventLog
    selected: tuple[PlaceCandidate, ...]


def discover_alphappp(
    log: EventLog,
    config: DiscoveryConfig | None = None,
    prepared: PreparedRepair | None = None,
    prepared_candidates: PreparedCandidates | None = None,
) -> DiscoveryResult:
    """Run the full pipeline: repair, advising DFG, candidate pruning, net post-processing.

    ``prepared`` allows reusing an earlier repair of the same log when only
    thresholds after the repair stage changed; ``prepared_candidates``
    additionally reuses the enumeration when only b, t, or r moved.
    """
    config = config or DiscoveryConfig()
    if log.is_empty():
        raise ValueError("cannot discover a net from an empty log")
    timings: dict[str, float] = {}

    start = time.perf_counter()
    repair_hit = False
    if prepared is not None and prepared.matches(config):
        repaired, repair_report = prepared.repaired, prepared.report
        repair_hit = True
    else:
        if not log.augmented:
            log = augment(log)
        repaired, repair_report = repair_log(log, config.repair_settings())
    timings["repair"] = time.perf_counter() - start

    observed = {a for a in repaired.activities() if not a.is_endpoint}
    if not observed:
        raise ValueError("repair left no activities to discover a net over")

    candidates_hit = (
        repair_hit
        and prepared_candidates is not None
        and prepared_candidates.matches(config)
    )
    if candidates_hit:
        timings["advising_dfg"] = 0.0
        arcs_kept = prepared_candidates.adfg_arcs_kept
        arcs_removed = prepared_candidates.adfg_arcs_removed
        start = time.perf_counter()
        enumerated, cap_hit = list(prepared_candidates.candidates), prepared_candidates.cap_hit
        timings["enumerate"] = time.perf_counter() - start
    else:
        start = time.perf_counter()
        full_dfg = build_dfg(repaired)
        adfg = build_advising_dfg(full_dfg, config.arc_min, config.min_weight_ratio)
        arcs_kept = len(adfg.arcs)
        arcs_removed = len(full_dfg.arcs) - len(adfg.arcs)
        timings["advising_dfg"] = time.perf_counter() - start

        start = time.perf_counter()
        enumerated, cap_hit = enumerate_candidates(adfg, config.candidate_size_cap)
        timings["enumerate"] = time.perf_counter() - start

    start = time.perf_counter()
    counts = activity_multiset(repaired)
    balanced = prune_balance(enumerated, counts, config.balance_cutoff)
    timings["balance"] = time.perf_counter() - start

    start = time.perf_counter()
    fitting = prune_fitness(balanced, repaired, config.fitness_cutoff)
    timings["fitness"] = time.perf_counter() - start

    start = time.perf_counter()
    selected = select_maximal(fitting)
    timings["select"] = time.perf_counter() - start

    start = time.perf_counter()
    net = construct_net(selected, repaired.activities())
    pruned = prune_places(net, repaired, config.replay_cutoff)
    timings["net"] = time.perf_counter() - start

    report = StageReport(
        repair=repair_report,
        adfg_arcs_kept=arcs_kept,
        adfg_arcs_removed=arcs_removed,
        candidates=StageCounts(
            enumerated=len(enumerated),
            after_balance=len(balanced),
            after_fitness=len(fitting),
            selected=len(selected),
            cap_hit=cap_hit,
        ),
        places_before_pruning=len(net.net.places),
        places_after_pruning=len(pruned.net.places),
        timings=timings,
        repair_cache_hit=repair_hit,
        candidates_cache_hit=candidates_hit,
    )
    return DiscoveryResult(pruned, report, repaired, tuple(selected))


@dataclass(frozen=True)
class PreparedRepair:
    """A cached repair stage, reusable across configs that share its inputs."""

    repaired: EventLog
    report: RepairReport
    problem_threshold: float
    df_threshold: DfThreshold

    def matches(self, config: DiscoveryConfig) -> bool:
        return (
            config.problem_threshold == self.problem_threshold
            and config.df_threshold == self.df_threshold
        )


def prepare_repair(log: EventLog, config: DiscoveryConfig) -> PreparedRepair:
    if not log.augmented:
        log = augment(log)
    repaired, report = repair_log(log, config.repair_settings())
    return PreparedRepair(
        repaired, report, config.problem_threshold, config.df_threshold
    )


@dataclass(frozen=True)
class PreparedCandidates:
    """A cached enumeration stage, valid while the repair and aDFG knobs stand still."""

    candidates: tuple[PlaceCandidate, ...]
    cap_hit: bool
    adfg_arcs_kept: int
    adfg_arcs_removed: int
    problem_threshold: float
    df_threshold: DfThreshold
    arc_min: int
    min_weight_ratio: Fraction
    size_cap: int | None

    def matches(self, config: DiscoveryConfig) -> bool:
        return (
            config.problem_threshold == self.problem_threshold
            and config.df_threshold == self.df_threshold
            and config.arc_min == self.arc_min
            and config.min_weight_ratio == self.min_weight_ratio
            and config.candidate_size_cap == self.size_cap
        )


def prepare_candidates(prepared: PreparedRepair, config: DiscoveryConfig) -> PreparedCandidates:
    """Enumerate once against a prepared repair, for reuse across b/t/r changes."""
    full_dfg = build_dfg(prepared.repaired)
    adfg = build_advising_dfg(full_dfg, config.arc_min, config.min_weight_ratio)
    enumerated, cap_hit = enumerate_candidates(adfg, config.candidate_size_cap)
    return PreparedCandidates(
        candidates=tuple(enumerated),
        cap_hit=cap_hit,
        adfg_arcs_kept=len(adfg.arcs),
        adfg_arcs_removed=len(full_dfg.arcs) - len(adfg.arcs),
        problem_threshold=config.problem_threshold,
        df_threshold=config.df_threshold,
        arc_min=config.arc_min,
        min_weight_ratio=config.min_weight_ratio,
        size_cap=config.candidate_size_cap,
    )


def discover_alpha_classic(log: EventLog) -> AcceptingPetriNet:
    """The unthresholded classical construction on a raw (un-augmented) log.

    Candidate pairs are bicliques of the directly-follows relation whose sides
    are both free of internal directly-follows arcs; only the component-wise
    maximal ones become places.
    """
    if log.augmented:
        raise ValueError("classical discovery expects an un-augmented log")
    if log.is_empty():
        raise ValueError("cannot discover a net from an empty log")
    dfg = build_dfg(log)  # augments internally; endpoint arcs give start/end activities

    acts = sorted(
        (a for a in dfg.nodes if not a.is_endpoint), key=Activity.sort_key
    )
    n = len(acts)
    index = {a: i for i, a in enumerate(acts)}
    succ = [0] * n
    for (a, b), w in dfg.arcs.items():
        if w > 0 and not a.is_endpoint and not b.is_endpoint:
            succ[index[a]] |= 1 << index[b]

    # sets with no internal directly-follows arc (self-arcs included)
    independent: list[int] = []

    def grow(mask: int, out_union: int, start: int) -> None:
        if mask:
            independent.append(mask)
        for i in range(start, n):
            bit = 1 << i
            if out_union & bit or succ[i] & (mask | bit):
                continue
            grow(mask | bit, out_union | succ[i], i + 1)

    grow(0, 0, 0)

    def members(mask: int) -> frozenset[Activity]:
        return frozenset(acts[i] for i in range(n) if mask >> i & 1)

    candidates: list[PlaceCandidate] = []
    full = (1 << n) - 1
    for first_mask in independent:
        common = full
        probe = first_mask
        while probe:
            i = (probe & -probe).bit_length() - 1
            common &= succ[i]
            probe ^= probe & -probe
        if not common:
            continue
        for second_mask in independent:
            if second_mask & ~common == 0:
                candidates.append(
                    PlaceCandidate(members(first_mask), members(second_mask))
                )
    selected = select_maximal(candidates)

    starts = {b for (a, b) in dfg.arcs if a == START}
    ends = {a for (a, b) in dfg.arcs if b == END}
    return construct_classical_net(selected, acts, starts, ends)


def config_to_json_text(config: DiscoveryConfig) -> str:
    return json.dumps(config.to_json(), ensure_ascii=False)
