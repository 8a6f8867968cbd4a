from __future__ import annotations

import gzip

import pytest
from hypothesis import given, strategies as st

from alphappp import (
    END,
    START,
    Activity,
    CsvMapping,
    EventLog,
    LogParseError,
    activity_multiset,
    augment,
    build_log,
    filter_variants_coverage,
    filter_variants_top,
    log_from_json,
    log_of,
    log_to_json,
    parse_csv,
    parse_xes,
    project,
    trace_of,
)
from helpers import write_xes

A, B, C, D = (Activity.observed(x) for x in "abcd")


def test_l1_activity_multiset(l1):
    counts = activity_multiset(l1)
    assert counts[A] == 656
    assert counts[B] == 656
    assert counts[C] == 404
    assert counts[D] == 656


def test_l1_totals(l1):
    assert l1.total_traces == 656
    assert len(l1.variants) == 4
    aug = augment(l1)
    assert aug.total_traces == 656
    assert len(aug.variants) == 4
    counts = activity_multiset(aug)
    assert counts[START] == 656
    assert counts[END] == 656


def test_augment_wraps_and_rejects_double(l1):
    aug = augment(l1)
    for trace in aug.variants:
        assert trace[0] == START and trace[-1] == END
    with pytest.raises(ValueError):
        augment(aug)


def test_project_removes_and_reaggregates():
    log = build_log({trace_of("a", "x", "b"): 2, trace_of("a", "b"): 1})
    projected = project(log, [A, B])
    assert projected.variants == {trace_of("a", "b"): 3}


def test_project_keeps_endpoints_of_augmented(l1):
    aug = augment(l1)
    projected = project(aug, [START, END, A, B])
    assert projected.augmented
    assert all(t[0] == START and t[-1] == END for t in projected.variants)


def test_filter_variants_top(l1):
    top = filter_variants_top(l1, 2)
    assert set(top.variants) == {trace_of("a", "b", "c", "d"), trace_of("a", "b", "d")}
    assert top.total_traces == 650


def test_filter_variants_top_tie_breaks_lexicographically():
    log = build_log({trace_of("b"): 1, trace_of("a"): 1, trace_of("c"): 2})
    top = filter_variants_top(log, 2)
    assert set(top.variants) == {trace_of("c"), trace_of("a")}


def test_filter_variants_coverage(l1):
    half = filter_variants_coverage(l1, 0.5)
    # 400 of 656 already covers half
    assert set(half.variants) == {trace_of("a", "b", "c", "d")}
    nearly_all = filter_variants_coverage(l1, 0.995)
    assert len(nearly_all.variants) == 3


def test_filter_variants_coverage_full_keeps_everything(l1):
    assert filter_variants_coverage(l1, 1.0).variants == l1.variants


def test_filter_rejects_bad_arguments(l1):
    with pytest.raises(ValueError):
        filter_variants_top(l1, 0)
    with pytest.raises(ValueError):
        filter_variants_coverage(l1, 0.0)
    with pytest.raises(ValueError):
        filter_variants_coverage(l1, 1.5)


def test_canonical_json_round_trip(l1):
    assert log_from_json(log_to_json(l1)) == l1
    aug = augment(l1)
    assert log_from_json(log_to_json(aug)) == aug


def test_canonical_json_shape():
    text = log_to_json(build_log({trace_of("a", "b"): 2}))
    assert text == '{"variants": [{"trace": ["a", "b"], "count": 2}], "augmented": false}'


def test_artificial_activities_round_trip():
    loop = Activity.loop_marker("c", "a")
    skip = Activity.skip_marker("a", ["b", "c"])
    log = EventLog({(START, A, loop, skip, END): 3}, augmented=True)
    assert log_from_json(log_to_json(log)) == log


def test_xes_round_trip(tmp_path, l1):
    path = tmp_path / "l1.xes"
    write_xes(l1, str(path))
    parsed = parse_xes(path.read_bytes())
    assert parsed == l1


def test_xes_gzip(tmp_path, l1):
    path = tmp_path / "l1.xes.gz"
    write_xes(l1, str(path), gzipped=True)
    parsed = parse_xes(path.read_bytes())
    assert parsed == l1


def test_xes_orders_by_timestamp():
    doc = b"""<?xml version="1.0"?>
    <log>
      <trace>
        <event><string key="concept:name" value="second"/><date key="time:timestamp" value="2024-01-01T10:00:00Z"/></event>
        <event><string key="concept:name" value="first"/><date key="time:timestamp" value="2024-01-01T09:00:00Z"/></event>
      </trace>
    </log>"""
    parsed = parse_xes(doc)
    assert list(parsed.variants) == [trace_of("first", "second")]


def test_xes_equal_timestamps_keep_document_order():
    doc = b"""<?xml version="1.0"?>
    <log>
      <trace>
        <event><string key="concept:name" value="x"/><date key="time:timestamp" value="2024-01-01T09:00:00Z"/></event>
        <event><string key="concept:name" value="y"/><date key="time:timestamp" value="2024-01-01T09:00:00Z"/></event>
      </trace>
    </log>"""
    assert list(parse_xes(doc).variants) == [trace_of("x", "y")]


def test_xes_missing_name_rejected():
    doc = b"""<?xml version="1.0"?>
    <log><trace><event><date key="time:timestamp" value="2024-01-01T09:00:00Z"/></event></trace></log>"""
    with pytest.raises(LogParseError, match="concept:name"):
        parse_xes(doc)


def test_xes_malformed_xml_reports_line():
    with pytest.raises(LogParseError, match="line"):
        parse_xes(b"<log><trace></log>")


def test_xes_empty_trace_retained():
    doc = b"<log><trace></trace><trace><event><string key='concept:name' value='a'/></event></trace></log>"
    parsed = parse_xes(doc)
    assert parsed.variants.get(()) == 1


def test_csv_parsing_groups_and_sorts():
    data = (
        b"case,activity,when\n"
        b"1,a,2024-01-01T09:00:00\n"
        b"2,a,2024-01-01T09:00:00\n"
        b"1,b,2024-01-01T10:00:00\n"
        b"2,c,2024-01-01T08:00:00\n"
    )
    mapping = CsvMapping(case_column="case", activity_column="activity", timestamp_column="when")
    parsed = parse_csv(data, mapping)
    assert parsed.variants == {trace_of("a", "b"): 1, trace_of("c", "a"): 1}


def test_csv_custom_timestamp_format():
    data = b"case,activity,when\n1,a,01/02/2024 09:00\n1,b,01/02/2024 08:00\n"
    mapping = CsvMapping("case", "activity", "when", timestamp_format="%d/%m/%Y %H:%M")
    parsed = parse_csv(data, mapping)
    assert list(parsed.variants) == [trace_of("b", "a")]


def test_csv_missing_column_named_in_error():
    with pytest.raises(LogParseError, match="'activity'"):
        parse_csv(b"case,act\n1,a\n", CsvMapping("case", "activity"))


def test_csv_bad_timestamp_names_row():
    data = b"case,activity,when\n1,a,not-a-date\n"
    with pytest.raises(LogParseError, match="row 2"):
        parse_csv(data, CsvMapping("case", "activity", "when"))


def test_gzipped_csv():
    data = gzip.compress(b"case,activity\n1,a\n1,b\n")
    parsed = parse_csv(data, CsvMapping("case", "activity"))
    assert list(parsed.variants) == [trace_of("a", "b")]


names = st.text(alphabet="abcdef", min_size=1, max_size=3)
traces = st.lists(names, min_size=0, max_size=6).map(lambda xs: trace_of(*xs))
logs = st.dictionaries(traces, st.integers(min_value=1, max_value=5), min_size=1, max_size=8).map(
    lambda d: EventLog(d)
)


@given(logs)
def test_augment_preserves_trace_count(log):
    assert augment(log).total_traces == log.total_traces


@given(logs)
def test_augment_adds_two_events_per_trace(log):
    assert augment(log).total_events == log.total_events + 2 * log.total_traces


@given(logs, st.sets(names, max_size=4))
def test_project_preserves_trace_count(log, keep):
    projected = project(log, {Activity.observed(n) for n in keep})
    assert projected.total_traces == log.total_traces


@given(logs)
def test_json_round_trip_property(log):
    assert log_from_json(log_to_json(log)) == log


@given(logs, st.integers(min_value=1, max_value=10))
def test_filter_top_keeps_most_frequent(log, k):
    kept = filter_variants_top(log, k)
    if kept.variants:
        floor = min(kept.variants.values())
        dropped = [c for t, c in log.variants.items() if t not in kept.variants]
        assert all(c <= floor for c in dropped)
