"""Accepting labeled Petri nets: construction from selected candidates, replay, pruning."""
from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .candidates import PlaceCandidate, fit_trace, relevant_variants
from .log import Activity, ActivityMultiset, EventLog, Trace


@dataclass(frozen=True)
class Place:
    pid: str
    candidate: PlaceCandidate | None = None  # classical source/sink places carry none

    def display(self) -> str:
        return self.candidate.describe() if self.candidate else self.pid


@dataclass(frozen=True)
class Transition:
    tid: str
    activity: Activity
    label: str | None  # None renders the transition silent


@dataclass(frozen=True)
class LabeledPetriNet:
    places: tuple[Place, ...]
    transitions: tuple[Transition, ...]
    arcs: frozenset[tuple[str, str]]  # (source id, target id), direction significant

    def place_by_id(self, pid: str) -> Place:
        for p in self.places:
            if p.pid == pid:
                return p
        raise KeyError(pid)

    def transition_for(self, activity: Activity) -> Transition | None:
        for t in self.transitions:
            if t.activity == activity:
                return t
        return None

    def preset(self, node_id: str) -> set[str]:
        return {src for src, dst in self.arcs if dst == node_id}

    def postset(self, node_id: str) -> set[str]:
        return {dst for src, dst in self.arcs if src == node_id}


Marking = Mapping[str, int]


@dataclass(frozen=True)
class AcceptingPetriNet:
    net: LabeledPetriNet
    initial: Marking
    final: Marking


def construct_net(
    selected: Sequence[PlaceCandidate], activities: Iterable[Activity]
) -> AcceptingPetriNet:
    """One transition per non-endpoint activity, one place per selected candidate.

    Endpoint markers never become transitions; their producer/consumer roles
    turn into the initial and final markings instead. Artificial activities
    become silent transitions.
    """
    acts = sorted(
        (a for a in set(activities) if not a.is_endpoint), key=Activity.sort_key
    )
    transitions = tuple(
        Transition(
            tid=f"t{i}",
            activity=a,
            label=None if a.is_artificial else a.name,
        )
        for i, a in enumerate(acts)
    )
    by_activity = {t.activity: t for t in transitions}
    for cand in selected:
        for a in cand.activities():
            if not a.is_endpoint and a not in by_activity:
                raise ValueError(f"candidate activity {a.label()!r} has no transition")

    ordered = sorted(set(selected), key=PlaceCandidate.sort_key)
    places = tuple(Place(pid=f"p{i}", candidate=c) for i, c in enumerate(ordered))
    arcs: set[tuple[str, str]] = set()
    initial: dict[str, int] = {}
    final: dict[str, int] = {}
    for place in places:
        cand = place.candidate
        for a in cand.first:
            if a.is_endpoint:
                initial[place.pid] = 1
            else:
                arcs.add((by_activity[a].tid, place.pid))
        for a in cand.second:
            if a.is_endpoint:
                final[place.pid] = 1
            else:
                arcs.add((place.pid, by_activity[a].tid))
    net = LabeledPetriNet(places, transitions, frozenset(arcs))
    return AcceptingPetriNet(net, initial, final)


def replay_place(
    candidate: PlaceCandidate,
    trace: Trace,
    initial_tokens: int = 0,
    require_empty_end: bool = True,
) -> int:
    """Replay a single place in isolation: consume before produce, fail below zero.

    Consuming before producing makes an activity on both sides need an
    existing token, so this is deliberately stricter than the fit counter for
    self-looping candidates.
    """
    tokens = initial_tokens
    for act in trace:
        if act in candidate.second:
            if tokens == 0:
                return 0
            tokens -= 1
        if act in candidate.first:
            tokens += 1
    if require_empty_end and tokens != 0:
        return 0
    return 1


def place_replay_score(place: Place, log: EventLog) -> Fraction | None:
    """Mean replay verdict over the traces that involve the place; None if none do."""
    rel = relevant_variants(log, place.candidate.activities())
    total = sum(count for _, count in rel)
    if total == 0:
        return None
    hits = sum(replay_place(place.candidate, trace) * count for trace, count in rel)
    return Fraction(hits, total)


def prune_places(
    accepting: AcceptingPetriNet, log: EventLog, cutoff: float
) -> AcceptingPetriNet:
    """Drop places whose replay score over their relevant traces falls below the cutoff.

    Transitions always survive; markings and arcs follow the surviving places.
    Places that no trace involves are dropped as unsupported.
    """
    limit = Fraction(repr(float(cutoff)))
    keep: list[Place] = []
    for place in accepting.net.places:
        score = place_replay_score(place, log)
        if score is not None and score >= limit:
            keep.append(place)
    all_place_ids = {p.pid for p in accepting.net.places}
    kept_ids = {p.pid for p in keep}
    dropped = all_place_ids - kept_ids
    net = LabeledPetriNet(
        tuple(keep),
        accepting.net.transitions,
        frozenset(
            (src, dst)
            for src, dst in accepting.net.arcs
            if src not in dropped and dst not in dropped
        ),
    )
    initial = {p: n for p, n in accepting.initial.items() if p in kept_ids}
    final = {p: n for p, n in accepting.final.items() if p in kept_ids}
    return AcceptingPetriNet(net, initial, final)


def disconnected_transitions(net: LabeledPetriNet) -> list[Transition]:
    """Labeled transitions with no arcs at all, in label order."""
    connected: set[str] = set()
    for src, dst in net.arcs:
        connected.add(src)
        connected.add(dst)
    return sorted(
        (t for t in net.transitions if t.label is not None and t.tid not in connected),
        key=lambda t: t.label,
    )


def greedy_removal_order(
    net: LabeledPetriNet, act_counts: ActivityMultiset
) -> list[Transition]:
    """Disconnected labeled transitions, least frequent first, ties by label."""
    return sorted(
        disconnected_transitions(net),
        key=lambda t: (act_counts[t.activity], t.label),
    )


def remove_transitions(
    accepting: AcceptingPetriNet, victims: Iterable[Transition]
) -> AcceptingPetriNet:
    """Remove the given transitions; only disconnected ones may be removed."""
    victim_set = set(victims)
    allowed = set(disconnected_transitions(accepting.net))
    for t in victim_set:
        if t not in allowed:
            raise ValueError(f"transition {t.label or t.tid!r} is connected; refusing to remove")
    net = LabeledPetriNet(
        accepting.net.places,
        tuple(t for t in accepting.net.transitions if t not in victim_set),
        accepting.net.arcs,
    )
    return AcceptingPetriNet(net, accepting.initial, accepting.final)


@dataclass(frozen=True)
class ReplayResult:
    fits: bool
    failed_at: int | None = None  # index into the trace, None when the end marking failed


def replay_net(accepting: AcceptingPetriNet, trace: Sequence[Activity]) -> ReplayResult:
    """Whole-net token replay of one trace, endpoint markers skipped.

    Every trace element must name a transition of the net (observed labels and
    artificial activities alike). When a transition is not enabled, a single
    uniquely-determined enabled silent transition may be fired first; the same
    one-step lookahead may close the gap to the final marking at the end.
    Anything beyond that conservatively reports a non-fit.
    """
    net = accepting.net
    by_activity = {t.activity: t for t in net.transitions}
    pre = {t.tid: sorted(net.preset(t.tid)) for t in net.transitions}
    post = {t.tid: sorted(net.postset(t.tid)) for t in net.transitions}
    silents = [t for t in net.transitions if t.label is None]
    marking: dict[str, int] = dict(accepting.initial)

    def enabled(tid: str) -> bool:
        return all(marking.get(p, 0) >= 1 for p in pre[tid])

    def fire(tid: str) -> None:
        for p in pre[tid]:
            marking[p] -= 1
        for p in post[tid]:
            marking[p] = marking.get(p, 0) + 1

    for index, act in enumerate(trace):
        if act.is_endpoint:
            continue
        transition = by_activity.get(act)
        if transition is None:
            return ReplayResult(False, index)
        if not enabled(transition.tid):
            helpers = [
                s
                for s in silents
                if s.activity != act and enabled(s.tid) and _would_enable(s, transition, marking, pre, post)
            ]
            if len(helpers) != 1:
                return ReplayResult(False, index)
            fire(helpers[0].tid)
            if not enabled(transition.tid):
                return ReplayResult(False, index)
        fire(transition.tid)

    final = {p: n for p, n in accepting.final.items() if n > 0}
    current = {p: n for p, n in marking.items() if n > 0}
    if current == final:
        return ReplayResult(True)
    closers = [
        s
        for s in silents
        if enabled(s.tid) and _closes_gap(s, marking, final, pre, post)
    ]
    if len(closers) == 1:
        fire(closers[0].tid)
        current = {p: n for p, n in marking.items() if n > 0}
        if current == final:
            return ReplayResult(True)
    return ReplayResult(False, None)


def _would_enable(silent, transition, marking, pre, post) -> bool:
    simulated = dict(marking)
    for p in pre[silent.tid]:
        simulated[p] -= 1
    for p in post[silent.tid]:
        simulated[p] = simulated.get(p, 0) + 1
    return all(simulated.get(p, 0) >= 1 for p in pre[transition.tid])


def _closes_gap(silent, marking, final, pre, post) -> bool:
    simulated = dict(marking)
    for p in pre[silent.tid]:
        if simulated.get(p, 0) < 1:
            return False
        simulated[p] -= 1
    for p in post[silent.tid]:
        simulated[p] = simulated.get(p, 0) + 1
    return {p: n for p, n in simulated.items() if n > 0} == final


# --- classical construction -------------------------------------------------


def construct_classical_net(
    selected: Sequence[PlaceCandidate],
    activities: Iterable[Activity],
    start_activities: Iterable[Activity],
    end_activities: Iterable[Activity],
) -> AcceptingPetriNet:
    """Classical construction: candidate places plus a marked source and a sink place."""
    acts = sorted(set(activities), key=Activity.sort_key)
    transitions = tuple(
        Transition(tid=f"t{i}", activity=a, label=a.name) for i, a in enumerate(acts)
    )
    by_activity = {t.activity: t for t in transitions}
    ordered = sorted(set(selected), key=PlaceCandidate.sort_key)
    places = [Place(pid=f"p{i}", candidate=c) for i, c in enumerate(ordered)]
    source = Place(pid="source")
    sink = Place(pid="sink")
    arcs: set[tuple[str, str]] = set()
    for place in places:
        for a in place.candidate.first:
            arcs.add((by_activity[a].tid, place.pid))
        for a in place.candidate.second:
            arcs.add((place.pid, by_activity[a].tid))
    for a in set(start_activities):
        arcs.add((source.pid, by_activity[a].tid))
    for a in set(end_activities):
        arcs.add((by_activity[a].tid, sink.pid))
    net = LabeledPetriNet(tuple([*places, source, sink]), transitions, frozenset(arcs))
    return AcceptingPetriNet(net, {source.pid: 1}, {sink.pid: 1})


# --- serialization ----------------------------------------------------------

_PNML_TOOL = "alphappp"


def to_pnml(accepting: AcceptingPetriNet) -> bytes:
    """Deterministic place/transition PNML with the final marking in a toolspecific block."""
    pnml = ET.Element("pnml", xmlns="http://www.pnml.org/version-2009/grammar/pnml")
    net_el = ET.SubElement(
        pnml,
        "net",
        id="net1",
        type="http://www.pnml.org/version-2009/grammar/ptnet",
    )
    page = ET.SubElement(net_el, "page", id="page1")
    for place in accepting.net.places:
        p_el = ET.SubElement(page, "place", id=place.pid)
        name = ET.SubElement(ET.SubElement(p_el, "name"), "text")
        name.text = place.display()
        tokens = accepting.initial.get(place.pid, 0)
        if tokens:
            marking = ET.SubElement(ET.SubElement(p_el, "initialMarking"), "text")
            marking.text = str(tokens)
    for transition in accepting.net.transitions:
        t_el = ET.SubElement(page, "transition", id=transition.tid)
        name = ET.SubElement(ET.SubElement(t_el, "name"), "text")
        name.text = transition.label if transition.label is not None else transition.activity.label()
        if transition.label is None:
            tool = ET.SubElement(
                t_el, "toolspecific", tool=_PNML_TOOL, version="1.0"
            )
            ET.SubElement(tool, "silent").text = "true"
    for index, (src, dst) in enumerate(sorted(accepting.net.arcs)):
        ET.SubElement(page, "arc", id=f"a{index}", source=src, target=dst)
    tool = ET.SubElement(net_el, "toolspecific", tool=_PNML_TOOL, version="1.0")
    final = ET.SubElement(tool, "finalMarking")
    for pid in sorted(accepting.final):
        if accepting.final[pid]:
            ET.SubElement(final, "place", idref=pid).text = str(accepting.final[pid])
    ET.indent(pnml)
    return ET.tostring(pnml, encoding="utf-8", xml_declaration=True) + b"\n"


def net_to_dot(accepting: AcceptingPetriNet, connect_fragments: bool = False) -> str:
    """Graphviz rendering: circles for places, boxes for transitions, silent ones filled.

    ``connect_fragments`` additionally tacks start/end pseudo-transitions onto
    a shared place so disconnected fragments hang together visually; it never
    changes the underlying net.
    """
    lines = [
        "digraph net {",
        "  rankdir=LR;",
        '  node [fontname="Helvetica"];',
    ]
    for place in accepting.net.places:
        marked = accepting.initial.get(place.pid, 0) > 0
        is_final = accepting.final.get(place.pid, 0) > 0
        decorations = []
        if marked:
            decorations.append("penwidth=2")
        if is_final:
            decorations.append("peripheries=2")
        extra = (", " + ", ".join(decorations)) if decorations else ""
        lines.append(
            f'  {place.pid} [shape=circle, label="{_escape(place.display())}"{extra}];'
        )
    for t in accepting.net.transitions:
        if t.label is None:
            lines.append(
                f'  {t.tid} [shape=box, style=filled, fillcolor=black, fontcolor=white, '
                f'label="{_escape(t.activity.label())}"];'
            )
        else:
            lines.append(f'  {t.tid} [shape=box, label="{_escape(t.label)}"];')
    if connect_fragments:
        lines.append('  frag [shape=circle, label="", style=dashed];')
        lines.append('  frag_start [shape=box, label="▶", style=dashed];')
        lines.append('  frag_end [shape=box, label="■", style=dashed];')
        lines.append("  frag_start -> frag [style=dashed];")
        lines.append("  frag -> frag_end [style=dashed];")
        connected: set[str] = set()
        for src, dst in accepting.net.arcs:
            connected.update((src, dst))
        for t in accepting.net.transitions:
            if t.tid not in connected:
                lines.append(f"  frag -> {t.tid} [style=dashed];")
                lines.append(f"  {t.tid} -> frag [style=dashed];")
    for src, dst in sorted(accepting.net.arcs):
        lines.append(f"  {src} -> {dst};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')
