"""Directly-follows graphs over endpoint-augmented logs, thresholds, and the advising DFG."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .log import Activity, EventLog, augment

Arc = tuple[Activity, Activity]


@dataclass(frozen=True)
class Dfg:
    """Weighted directly-follows graph: every adjacency of the (augmented) log, counted."""

    nodes: frozenset[Activity]
    arcs: Mapping[Arc, int]

    def weight(self, source: Activity, target: Activity) -> int:
        return self.arcs.get((source, target), 0)

    def successors(self, node: Activity) -> set[Activity]:
        return {b for (a, b) in self.arcs if a == node}

    def predecessors(self, node: Activity) -> set[Activity]:
        return {a for (a, b) in self.arcs if b == node}

    def total_weight(self) -> int:
        return sum(self.arcs.values())

    def sorted_nodes(self) -> list[Activity]:
        return sorted(self.nodes, key=Activity.sort_key)

    def sorted_arcs(self) -> list[tuple[Arc, int]]:
        return sorted(
            self.arcs.items(),
            key=lambda item: (item[0][0].sort_key(), item[0][1].sort_key()),
        )


@dataclass(frozen=True)
class DfThreshold:
    """An arc-weight cutoff, either absolute or relative to the mean arc weight."""

    value: float
    mode: str = "absolute"  # "absolute" | "relative"

    def __post_init__(self) -> None:
        if self.mode not in ("absolute", "relative"):
            raise ValueError(f"unknown threshold mode {self.mode!r}")
        if self.value < 0:
            raise ValueError(f"threshold value must be non-negative, got {self.value}")

    def resolve(self, dfg: Dfg) -> Fraction:
        """The effective absolute cutoff for a given graph (exact arithmetic)."""
        exact = Fraction(repr(float(self.value)))
        if self.mode == "absolute":
            return exact
        return exact * mean_weight(dfg)


def build_dfg(log: EventLog) -> Dfg:
    """Count all adjacencies; un-augmented input is augmented internally first."""
    if log.is_empty():
        raise ValueError("cannot build a directly-follows graph from an empty log")
    if not log.augmented:
        log = augment(log)
    arcs: Counter = Counter()
    nodes: set[Activity] = set()
    for trace, count in log.variants.items():
        nodes.update(trace)
        for left, right in zip(trace, trace[1:]):
            arcs[(left, right)] += count
    return Dfg(frozenset(nodes), dict(arcs))


def mean_weight(dfg: Dfg) -> Fraction:
    """Mean weight over the arcs present in the graph."""
    if not dfg.arcs:
        raise ValueError("graph has no arcs")
    return Fraction(dfg.total_weight(), len(dfg.arcs))


def df_holds(dfg: Dfg, source: Activity, target: Activity, threshold: DfThreshold) -> bool:
    """Thresholded directly-follows check: weight(source, target) >= resolved cutoff."""
    return dfg.weight(source, target) >= threshold.resolve(dfg)


def build_advising_dfg(
    dfg: Dfg, absolute_min: int = 0, min_weight_ratio: Fraction = Fraction(1, 100)
) -> Dfg:
    """Drop arcs that are weak both absolutely and relative to their endpoints' totals.

    An arc (a, b) survives iff weight >= max(absolute_min, ratio * min(total into b,
    total out of a)), with the totals taken on the unpruned graph. The node set is
    kept unchanged, so activities may become isolated.
    """
    if absolute_min < 0:
        raise ValueError(f"absolute arc minimum must be non-negative, got {absolute_min}")
    in_total: Counter = Counter()
    out_total: Counter = Counter()
    for (a, b), w in dfg.arcs.items():
        out_total[a] += w
        in_total[b] += w
    kept = {
        (a, b): w
        for (a, b), w in dfg.arcs.items()
        if w >= absolute_min and w >= min_weight_ratio * min(in_total[b], out_total[a])
    }
    return Dfg(dfg.nodes, kept)


def restrict(dfg: Dfg, min_arc_weight: Fraction, drop_nodes: Iterable[Activity] = ()) -> Dfg:
    """Sub-graph with arcs below the cutoff (or touching dropped nodes) removed."""
    dropped = frozenset(drop_nodes)
    kept = {
        (a, b): w
        for (a, b), w in dfg.arcs.items()
        if w >= min_arc_weight and a not in dropped and b not in dropped
    }
    return Dfg(frozenset(dfg.nodes - dropped), kept)


def reachable_from(dfg: Dfg, origin: Activity) -> set[Activity]:
    """All nodes reachable from ``origin`` via one or more arcs."""
    adjacency: dict[Activity, list[Activity]] = {}
    for a, b in dfg.arcs:
        adjacency.setdefault(a, []).append(b)
    seen: set[Activity] = set()
    frontier = list(adjacency.get(origin, ()))
    while frontier:
        node = frontier.pop()
        if node in seen:
            continue
        seen.add(node)
        frontier.extend(adjacency.get(node, ()))
    return seen


def dfg_to_dot(dfg: Dfg, min_weight: int = 0) -> str:
    """Graphviz rendering with a stable node order: start first, end last, rest sorted."""
    lines = ["digraph dfg {", "  rankdir=LR;", '  node [shape=box, fontname="Helvetica"];']
    names: dict[Activity, str] = {}
    for index, node in enumerate(dfg.sorted_nodes()):
        names[node] = f"n{index}"
        shape = "circle" if node.is_endpoint else "box"
        lines.append(f'  n{index} [label="{_dot_escape(node.label())}", shape={shape}];')
    for (a, b), w in dfg.sorted_arcs():
        if w >= min_weight:
            lines.append(f'  {names[a]} -> {names[b]} [label="{w}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')
