"""Log repair: problematic-activity removal, loop repair, and skip repair.

The repairs rewrite traces so that downstream place candidates do not have to
explain loop-backs and skipped optional steps directly; both get an artificial
activity injected that later becomes a silent transition.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .dfg import Dfg, DfThreshold, build_dfg, restrict
from .log import (
    END,
    START,
    Activity,
    ActivityKind,
    EventLog,
    Trace,
    project,
)


def problem_score(dfg: Dfg, activity: Activity) -> Fraction:
    """Fraction of an activity's directly-follows neighbourhood that runs in both directions.

    Endpoint markers are ignored as neighbours. An activity with no neighbours
    scores 0.
    """
    if activity.is_endpoint:
        raise ValueError("endpoint markers have no problem score")
    if activity not in dfg.nodes:
        raise ValueError(f"activity {activity.label()!r} does not occur in the graph")
    neighbours = {
        other
        for other in (dfg.successors(activity) | dfg.predecessors(activity))
        if other != activity and not other.is_endpoint
    }
    if not neighbours:
        return Fraction(0)
    both = sum(
        1
        for other in neighbours
        if dfg.weight(activity, other) > 0 and dfg.weight(other, activity) > 0
    )
    return Fraction(both, len(neighbours))


def select_activities(log: EventLog, threshold: float) -> set[Activity]:
    """Activities whose problem score stays within the threshold, plus the endpoint markers."""
    dfg = build_dfg(log)
    cutoff = Fraction(repr(float(threshold)))
    keep = {
        act
        for act in dfg.nodes
        if act.is_endpoint or problem_score(dfg, act) <= cutoff
    }
    return keep | {START, END}


def detect_loops(dfg: Dfg, threshold: DfThreshold) -> set[tuple[Activity, Activity]]:
    """Loop-back arcs: pairs (b, a) where b closes a cycle that starts at a.

    An arc (b, a) of weight >= d counts as a loop-back iff b can be reached
    from a over arcs that carry at least as much weight as the loop-back
    itself (and at least d). Requiring the cycle body to be at least as well
    supported as the closing arc keeps arbitrary rotations of a cycle from
    being reported alongside the actual loop entry: the body of a real loop is
    traversed at least once per loop-back, so its arcs dominate, while the
    spurious rotations would have to route through the weaker closing arc.
    Endpoint markers take part in neither the pairs nor the connecting paths.
    Self-loops (a, a) qualify whenever the self-arc reaches the threshold.
    """
    resolved = threshold.resolve(dfg)
    loops: set[tuple[Activity, Activity]] = set()
    for (b, a), weight in dfg.arcs.items():
        if weight < resolved or a.is_endpoint or b.is_endpoint:
            continue
        body = restrict(dfg, max(resolved, Fraction(weight)), drop_nodes=(START, END))
        if b in _reachable(body, a):
            loops.add((b, a))
    return loops


def _reachable(dfg: Dfg, origin: Activity) -> set[Activity]:
    adjacency: dict[Activity, list[Activity]] = {}
    for x, y in dfg.arcs:
        adjacency.setdefault(x, []).append(y)
    seen: set[Activity] = set()
    frontier = list(adjacency.get(origin, ()))
    while frontier:
        node = frontier.pop()
        if node in seen:
            continue
        seen.add(node)
        frontier.extend(adjacency.get(node, ()))
    return seen


def detect_skips(dfg: Dfg, threshold: DfThreshold) -> dict[Activity, frozenset[Activity]]:
    """Optional direct successors per anchor activity.

    b is skippable after a when a is sometimes directly followed by b, neither
    one loops (no self-arc on a at all, none at threshold weight on b, no
    thresholded arc from b back to a), and everything reliably reachable from
    b is also reliably reachable from a but not the other way round. The
    strict containment keeps activities that sit on a common cycle (whose
    reachable futures coincide) from being treated as optional detours.
    Anchors with no skippable successors are omitted.
    """
    resolved = threshold.resolve(dfg)
    strong = restrict(dfg, resolved, drop_nodes=(START, END))
    future: dict[Activity, frozenset[Activity]] = {
        node: frozenset(_reachable(strong, node)) for node in strong.nodes
    }
    skips: dict[Activity, frozenset[Activity]] = {}
    for a in dfg.sorted_nodes():
        if a.is_endpoint or dfg.weight(a, a) > 0:
            continue
        group = set()
        for b in dfg.successors(a):
            if b.is_endpoint or b == a:
                continue
            if dfg.weight(b, a) >= resolved or dfg.weight(b, b) >= resolved:
                continue
            if future[b] and future[b] < future[a]:
                group.add(b)
        if group:
            skips[a] = frozenset(group)
    return skips


def repair_loops(trace: Trace, loops: set[tuple[Activity, Activity]]) -> Trace:
    """Insert a loop marker inside every adjacent pair that matches a detected loop-back."""
    out: list[Activity] = []
    i = 0
    while i < len(trace):
        if i + 1 < len(trace) and (trace[i], trace[i + 1]) in loops:
            b, a = trace[i], trace[i + 1]
            out.extend((b, Activity.loop_marker(b.name, a.name), a))
            i += 2
        else:
            out.append(trace[i])
            i += 1
    return tuple(out)


def repair_skips(trace: Trace, skips: Mapping[Activity, frozenset[Activity]]) -> Trace:
    """Insert a skip marker after every anchor whose next activity is not in its group.

    Anchors followed by a member of their group are left alone (the pair is
    consumed together, so the member is not reconsidered as an anchor).
    A loop marker directly after an anchor suppresses the insertion: the
    marker belongs between its own arc endpoints and is invisible to skip
    detection, so wedging a skip between them would split that pair.
    An anchor as the final trace element has no successor to decide on; that
    only happens on un-augmented input and is rejected.
    """
    out: list[Activity] = []
    i = 0
    while i < len(trace):
        current = trace[i]
        group = skips.get(current)
        if not group:
            out.append(current)
            i += 1
            continue
        if i + 1 >= len(trace):
            raise ValueError(
                f"skip anchor {current.label()!r} ends the trace; repair requires augmented traces"
            )
        if trace[i + 1] in group:
            out.extend((current, trace[i + 1]))
            i += 2
        elif trace[i + 1].is_artificial:
            out.append(current)
            i += 1
        else:
            out.append(current)
            out.append(Activity.skip_marker(current.name, (m.name for m in group)))
            i += 1
    return tuple(out)


@dataclass(frozen=True)
class RepairReport:
    """What the repair pass did: removals, detections, and injection tallies."""

    removed_activities: tuple[Activity, ...]
    loops: tuple[tuple[Activity, Activity], ...]
    skip_rules: tuple[tuple[Activity, frozenset[Activity]], ...]
    loop_insertions: int
    skip_insertions: int

    def to_json(self) -> dict:
        return {
            "removed_activities": [a.label() for a in self.removed_activities],
            "loops": [{"from": b.name, "to": a.name} for b, a in self.loops],
            "skip_rules": [
                {"anchor": a.name, "group": sorted(m.name for m in group)}
                for a, group in self.skip_rules
            ],
            "insertions": {"loop": self.loop_insertions, "skip": self.skip_insertions},
        }


@dataclass(frozen=True)
class RepairSettings:
    problem_threshold: float = 1.0
    df_threshold: DfThreshold = field(default_factory=lambda: DfThreshold(2.0, "relative"))


def repair_log(log: EventLog, settings: RepairSettings) -> tuple[EventLog, RepairReport]:
    """Full repair pass: remove problematic activities, then fix loops, then skips.

    Both detections run on the directly-follows graph of the projected
    original log; relative thresholds resolve against that same graph.
    """
    if not log.augmented:
        raise ValueError("repair requires an endpoint-augmented log")
    if log.is_empty():
        raise ValueError("cannot repair an empty log")
    keep = select_activities(log, settings.problem_threshold)
    removed = tuple(sorted(log.activities() - keep, key=Activity.sort_key))
    projected = project(log, keep)
    dfg = build_dfg(projected)
    loops = detect_loops(dfg, settings.df_threshold)
    skips = detect_skips(dfg, settings.df_threshold)

    repaired: Counter = Counter()
    loop_insertions = 0
    skip_insertions = 0
    for trace, count in projected.variants.items():
        fixed = repair_skips(repair_loops(trace, loops), skips)
        loop_insertions += count * sum(1 for a in fixed if a.kind is ActivityKind.LOOP)
        skip_insertions += count * sum(1 for a in fixed if a.kind is ActivityKind.SKIP)
        repaired[fixed] += count

    report = RepairReport(
        removed_activities=removed,
        loops=tuple(sorted(loops, key=lambda p: (p[0].sort_key(), p[1].sort_key()))),
        skip_rules=tuple(
            sorted(skips.items(), key=lambda item: item[0].sort_key())
        ),
        loop_insertions=loop_insertions,
        skip_insertions=skip_insertions,
    )
    return EventLog(dict(repaired), augmented=True), report
