"""Event logs as multisets of traces, plus XES/CSV parsing and log transformations."""
from __future__ import annotations

import csv
import gzip
import io
import json
import xml.etree.ElementTree as ET
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Iterable, Iterator, Mapping


class ActivityKind(Enum):
    START = "start"
    OBSERVED = "observed"
    LOOP = "loop"
    SKIP = "skip"
    END = "end"


@dataclass(frozen=True)
class Activity:
    """A trace element: an observed label, an endpoint marker, or an artificial repair activity.

    Artificial activities carry their defining payload instead of a mangled
    label, so two loop markers for different arcs never collide and observed
    labels that merely look like markers stay distinct.
    """

    kind: ActivityKind
    name: str = ""
    # loop marker: (source, target) of the repaired loop-back arc
    loop_pair: tuple[str, str] | None = None
    # skip marker: anchor activity and the set of skippable successors
    skip_anchor: str | None = None
    skip_group: frozenset[str] | None = None

    @staticmethod
    def observed(name: str) -> Activity:
        return Activity(ActivityKind.OBSERVED, name=name)

    @staticmethod
    def loop_marker(source: str, target: str) -> Activity:
        return Activity(ActivityKind.LOOP, loop_pair=(source, target))

    @staticmethod
    def skip_marker(anchor: str, group: Iterable[str]) -> Activity:
        return Activity(ActivityKind.SKIP, skip_anchor=anchor, skip_group=frozenset(group))

    @property
    def is_endpoint(self) -> bool:
        return self.kind in (ActivityKind.START, ActivityKind.END)

    @property
    def is_artificial(self) -> bool:
        return self.kind in (ActivityKind.LOOP, ActivityKind.SKIP)

    def sort_key(self) -> tuple:
        if self.kind is ActivityKind.START:
            return (0,)
        if self.kind is ActivityKind.OBSERVED:
            return (1, self.name)
        if self.kind is ActivityKind.LOOP:
            return (2, *self.loop_pair)
        if self.kind is ActivityKind.SKIP:
            return (3, self.skip_anchor, tuple(sorted(self.skip_group)))
        return (4,)

    def label(self) -> str:
        """Human-readable display label (not an identity; use equality for that)."""
        if self.kind is ActivityKind.START:
            return "▶"
        if self.kind is ActivityKind.END:
            return "■"
        if self.kind is ActivityKind.LOOP:
            return f"loop({self.loop_pair[0]}->{self.loop_pair[1]})"
        if self.kind is ActivityKind.SKIP:
            return f"skip({self.skip_anchor}:{','.join(sorted(self.skip_group))})"
        return self.name

    def __repr__(self) -> str:  # keeps pytest diffs readable
        return f"<{self.label()}>"


START = Activity(ActivityKind.START)
END = Activity(ActivityKind.END)

Trace = tuple[Activity, ...]
ActivityMultiset = Counter


def trace_of(*names: str) -> Trace:
    """Convenience constructor: a trace of observed activities."""
    return tuple(Activity.observed(n) for n in names)


@dataclass(frozen=True)
class EventLog:
    """A finite multiset of traces, stored per variant.

    ``augmented`` records whether every trace begins with the start marker and
    ends with the end marker.
    """

    variants: Mapping[Trace, int] = field(default_factory=dict)
    augmented: bool = False

    def __post_init__(self) -> None:
        for trace, count in self.variants.items():
            if count <= 0:
                raise ValueError(f"variant count must be positive, got {count}")
            if self.augmented:
                if not trace or trace[0] != START or trace[-1] != END:
                    raise ValueError("augmented log contains a trace without endpoint markers")

    def __iter__(self) -> Iterator[tuple[Trace, int]]:
        return iter(self.variants.items())

    @property
    def total_traces(self) -> int:
        return sum(self.variants.values())

    @property
    def total_events(self) -> int:
        return sum(len(t) * c for t, c in self.variants.items())

    def activities(self) -> set[Activity]:
        acts: set[Activity] = set()
        for trace in self.variants:
            acts.update(trace)
        return acts

    def is_empty(self) -> bool:
        return not self.variants


def build_log(variants: Mapping[Trace, int] | Iterable[tuple[Trace, int]], augmented: bool = False) -> EventLog:
    merged: Counter = Counter()
    items = variants.items() if isinstance(variants, Mapping) else variants
    for trace, count in items:
        merged[tuple(trace)] += count
    return EventLog(dict(merged), augmented=augmented)


def log_of(*traces: Iterable[str]) -> EventLog:
    """Convenience constructor: each argument is one trace of observed labels."""
    counts: Counter = Counter()
    for t in traces:
        counts[trace_of(*t)] += 1
    return EventLog(dict(counts), augmented=False)


def augment(log: EventLog) -> EventLog:
    """Wrap every trace in start/end markers. Rejects already augmented logs."""
    if log.augmented:
        raise ValueError("log is already endpoint-augmented")
    variants = {(START, *trace, END): count for trace, count in log.variants.items()}
    return EventLog(variants, augmented=True)


def strip_endpoints(log: EventLog) -> EventLog:
    """Inverse of augment: drop all start/end markers."""
    counts: Counter = Counter()
    for trace, count in log.variants.items():
        counts[tuple(a for a in trace if not a.is_endpoint)] += count
    return EventLog(dict(counts), augmented=False)


def activity_multiset(log: EventLog) -> ActivityMultiset:
    """Total occurrence count per activity, weighted by variant counts."""
    counts: Counter = Counter()
    for trace, count in log.variants.items():
        for act in trace:
            counts[act] += count
    return counts


def project(log: EventLog, keep: Iterable[Activity]) -> EventLog:
    """Delete all activities outside ``keep`` from every trace, re-aggregating variants."""
    keep_set = frozenset(keep)
    counts: Counter = Counter()
    for trace, count in log.variants.items():
        counts[tuple(a for a in trace if a in keep_set)] += count
    still_augmented = log.augmented and START in keep_set and END in keep_set
    return EventLog(dict(counts), augmented=still_augmented)


def _ranked_variants(log: EventLog) -> list[tuple[Trace, int]]:
    # descending count, ties by lexicographic trace order
    return sorted(
        log.variants.items(),
        key=lambda item: (-item[1], tuple(a.sort_key() for a in item[0])),
    )


def filter_variants_top(log: EventLog, k: int) -> EventLog:
    """Keep the k most frequent variants (count ties broken lexicographically)."""
    if k <= 0:
        raise ValueError(f"variant filter k must be positive, got {k}")
    kept = _ranked_variants(log)[:k]
    return EventLog(dict(kept), augmented=log.augmented)


def filter_variants_coverage(log: EventLog, fraction: float) -> EventLog:
    """Keep the smallest frequency-ranked prefix of variants covering ``fraction`` of all traces."""
    if not 0 < fraction <= 1:
        raise ValueError(f"coverage fraction must be in (0, 1], got {fraction}")
    from fractions import Fraction

    needed = Fraction(repr(fraction)) * log.total_traces
    kept: dict[Trace, int] = {}
    cumulative = 0
    for trace, count in _ranked_variants(log):
        if cumulative >= needed:
            break
        kept[trace] = count
        cumulative += count
    return EventLog(kept, augmented=log.augmented)


# --- canonical JSON form ---------------------------------------------------


def _activity_to_json(act: Activity):
    if act.kind is ActivityKind.OBSERVED:
        return act.name
    if act.kind is ActivityKind.START:
        return {"kind": "start"}
    if act.kind is ActivityKind.END:
        return {"kind": "end"}
    if act.kind is ActivityKind.LOOP:
        return {"kind": "loop", "from": act.loop_pair[0], "to": act.loop_pair[1]}
    return {"kind": "skip", "anchor": act.skip_anchor, "group": sorted(act.skip_group)}


def _activity_from_json(obj) -> Activity:
    if isinstance(obj, str):
        return Activity.observed(obj)
    kind = obj.get("kind")
    if kind == "start":
        return START
    if kind == "end":
        return END
    if kind == "loop":
        return Activity.loop_marker(obj["from"], obj["to"])
    if kind == "skip":
        return Activity.skip_marker(obj["anchor"], obj["group"])
    raise ValueError(f"unknown activity encoding: {obj!r}")


def log_to_json(log: EventLog) -> str:
    """Serialize to the canonical JSON wire form (deterministic variant order)."""
    variants = [
        {"trace": [_activity_to_json(a) for a in trace], "count": count}
        for trace, count in sorted(
            log.variants.items(), key=lambda item: tuple(a.sort_key() for a in item[0])
        )
    ]
    return json.dumps({"variants": variants, "augmented": log.augmented}, ensure_ascii=False)


def log_from_json(text: str | bytes) -> EventLog:
    try:
        doc = json.loads(text)
        variants: Counter = Counter()
        for entry in doc["variants"]:
            trace = tuple(_activity_from_json(a) for a in entry["trace"])
            variants[trace] += int(entry["count"])
        return EventLog(dict(variants), augmented=bool(doc.get("augmented", False)))
    except (KeyError, TypeError, ValueError) as exc:
        raise LogParseError(f"invalid canonical log JSON: {exc}") from exc


# --- parsing ---------------------------------------------------------------


class LogParseError(ValueError):
    """Raised when an input file cannot be turned into an event log."""


_XES_NS = "{http://www.xes-standard.org/}"


def _maybe_decompress(data: bytes) -> bytes:
    if data[:2] == b"\x1f\x8b":
        return gzip.decompress(data)
    return data


def _parse_timestamp(value: str) -> datetime:
    text = value.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is not None:
        from datetime import timezone

        ts = ts.astimezone(timezone.utc).replace(tzinfo=None)
    return ts


def parse_xes(data: bytes) -> EventLog:
    """Parse XES (optionally gzipped) into an event log.

    Events are ordered by ``time:timestamp`` where present (stable sort, so
    equal timestamps keep document order); traces without timestamps keep
    document order. Every event must carry ``concept:name``.
    """
    data = _maybe_decompress(data)
    variants: Counter = Counter()
    try:
        context = ET.iterparse(io.BytesIO(data), events=("end",))
        for event, elem in context:
            tag = elem.tag.replace(_XES_NS, "")
            if tag != "trace":
                continue
            events: list[tuple[datetime | None, Activity]] = []
            for child in elem:
                ctag = child.tag.replace(_XES_NS, "")
                if ctag != "event":
                    continue
                name: str | None = None
                stamp: datetime | None = None
                for attr in child:
                    key = attr.get("key")
                    if key == "concept:name":
                        name = attr.get("value")
                    elif key == "time:timestamp":
                        raw = attr.get("value", "")
                        try:
                            stamp = _parse_timestamp(raw)
                        except ValueError as exc:
                            raise LogParseError(
                                f"unparsable time:timestamp {raw!r} in event {len(events)}"
                            ) from exc
                if name is None:
                    raise LogParseError(
                        f"event {len(events)} in trace lacks a concept:name attribute"
                    )
                events.append((stamp, Activity.observed(name)))
            if any(s is not None for s, _ in events):
                order = [s for s, _ in events]
                if any(s is None for s in order):
                    raise LogParseError("trace mixes timestamped and untimestamped events")
                events.sort(key=lambda pair: pair[0])
            variants[tuple(act for _, act in events)] += 1
            elem.clear()
    except ET.ParseError as exc:
        raise LogParseError(f"malformed XES XML at line {exc.position[0]}: {exc.msg}") from exc
    if not variants:
        raise LogParseError("XES document contains no traces")
    return EventLog(dict(variants), augmented=False)


@dataclass(frozen=True)
class CsvMapping:
    """Column mapping for CSV event data."""

    case_column: str
    activity_column: str
    timestamp_column: str | None = None
    timestamp_format: str | None = None  # strptime format; ISO 8601 when omitted


def parse_csv(data: bytes, mapping: CsvMapping) -> EventLog:
    """Parse delimited event data; one row per event, grouped into traces by case id."""
    data = _maybe_decompress(data)
    text = data.decode("utf-8-sig")
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise LogParseError("CSV input has no header row")
    for col in (mapping.case_column, mapping.activity_column):
        if col not in reader.fieldnames:
            raise LogParseError(f"CSV is missing required column {col!r}")
    if mapping.timestamp_column is not None and mapping.timestamp_column not in reader.fieldnames:
        raise LogParseError(f"CSV is missing timestamp column {mapping.timestamp_column!r}")

    cases: dict[str, list[tuple[datetime | None, Activity]]] = {}
    for line_no, row in enumerate(reader, start=2):
        case = row[mapping.case_column]
        name = row[mapping.activity_column]
        if case is None or name is None:
            raise LogParseError(f"row {line_no} is missing case or activity values")
        stamp: datetime | None = None
        if mapping.timestamp_column is not None:
            raw = (row[mapping.timestamp_column] or "").strip()
            try:
                if mapping.timestamp_format is not None:
                    stamp = datetime.strptime(raw, mapping.timestamp_format)
                else:
                    stamp = _parse_timestamp(raw)
            except ValueError as exc:
                raise LogParseError(f"row {line_no}: unparsable timestamp {raw!r}") from exc
        cases.setdefault(case, []).append((stamp, Activity.observed(name)))

    if not cases:
        raise LogParseError("CSV input contains no event rows")
    variants: Counter = Counter()
    for events in cases.values():
        if mapping.timestamp_column is not None:
            events.sort(key=lambda pair: pair[0])
        variants[tuple(act for _, act in events)] += 1
    return EventLog(dict(variants), augmented=False)


def parse_log_bytes(name: str, data: bytes, mapping: CsvMapping | None = None) -> EventLog:
    """Parse in-memory log data, dispatching on the original file name's extension."""
    lowered = name.lower()
    if lowered.endswith(".csv") or lowered.endswith(".csv.gz"):
        if mapping is None:
            raise LogParseError("CSV input requires a column mapping")
        return parse_csv(data, mapping)
    if lowered.endswith(".json") or lowered.endswith(".json.gz"):
        return log_from_json(_maybe_decompress(data))
    if lowered.endswith(".xes") or lowered.endswith(".xes.gz") or lowered.endswith(".gz"):
        return parse_xes(data)
    raise LogParseError(f"unsupported log format: {name!r} (expected .xes, .xes.gz, .csv, or .json)")


def parse_log_file(path: str, mapping: CsvMapping | None = None) -> EventLog:
    """Parse a log file by extension: .xes / .xes.gz / .csv / .json."""
    with open(path, "rb") as handle:
        data = handle.read()
    return parse_log_bytes(path, data, mapping)
