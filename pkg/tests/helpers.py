"""Shared test utilities: fixture logs, XES writing, and synthetic log generators."""
from __future__ import annotations

import random
from datetime import datetime, timedelta
from xml.sax.saxutils import escape

from alphappp import EventLog, build_log, trace_of


def l1() -> EventLog:
    """The running four-variant example log."""
    return build_log(
        {
            trace_of("a", "b", "c", "d"): 400,
            trace_of("a", "b", "d"): 250,
            trace_of("d", "a", "b", "c"): 4,
            trace_of("d", "a", "b"): 2,
        }
    )


def l2() -> EventLog:
    """The two-variant exclusive-choice log."""
    return build_log({trace_of("a", "b", "d"): 1, trace_of("a", "c", "d"): 1})


def l_loop() -> EventLog:
    """A log with one loop iteration in its second trace."""
    return build_log(
        {
            trace_of("a", "b", "c", "d"): 1,
            trace_of("a", "b", "c", "a", "b", "c", "d"): 1,
        }
    )


def l_skip() -> EventLog:
    """A log where the b, c block is sometimes skipped."""
    return build_log({trace_of("a", "b", "c", "d"): 1, trace_of("a", "d"): 1})


def write_xes(log: EventLog, path: str, gzipped: bool = False) -> None:
    """Write an observed-only log as XES, with synthetic increasing timestamps."""
    base = datetime(2024, 1, 1)
    parts = ['<?xml version="1.0" encoding="UTF-8"?>', '<log xes.version="1.0">']
    case = 0
    for trace, count in log.variants.items():
        for _ in range(count):
            case += 1
            parts.append("  <trace>")
            parts.append(f'    <string key="concept:name" value="case{case}"/>')
            for offset, act in enumerate(trace):
                stamp = (base + timedelta(minutes=offset)).isoformat()
                parts.append("    <event>")
                parts.append(
                    f'      <string key="concept:name" value="{escape(act.name, {chr(34): "&quot;"})}"/>'
                )
                parts.append(f'      <date key="time:timestamp" value="{stamp}"/>')
                parts.append("    </event>")
            parts.append("  </trace>")
    parts.append("</log>")
    data = "\n".join(parts).encode("utf-8")
    if gzipped:
        import gzip

        data = gzip.compress(data)
    with open(path, "wb") as handle:
        handle.write(data)


def sepsis_sample(seed: int = 7, cases: int = 400) -> EventLog:
    """A synthetic clinical-pathway log: triage, a blood-test loop, optional
    treatments, admission switches, and several rare release variants."""
    rng = random.Random(seed)
    tests = ["crp", "leucocytes", "lactic_acid"]
    releases = ["release_a", "release_b", "release_c", "release_d", "release_e"]
    traces = []
    for _ in range(cases):
        trace = ["registration", "triage", "sepsis_check"]
        for _ in range(rng.randint(1, 3)):
            trace.extend(rng.sample(tests, rng.randint(1, 2)))
        if rng.random() < 0.6:
            trace.append("antibiotics")
        if rng.random() < 0.5:
            trace.append("fluids")
        ward = "admit_icu" if rng.random() < 0.2 else "admit_normal"
        trace.append(ward)
        if rng.random() < 0.15:  # ward switch and retest
            trace.append("admit_icu" if ward == "admit_normal" else "admit_normal")
            trace.append(rng.choice(tests))
            trace.append(ward)
        weights = [0.82, 0.06, 0.05, 0.04, 0.03]
        trace.append(rng.choices(releases, weights)[0])
        if rng.random() < 0.08:
            trace.append("return_er")
        traces.append(trace)
    return build_log((trace_of(*t), 1) for t in traces)


RTFM_EVENTS = 561_470
RTFM_TRACES = 150_370
RTFM_VARIANTS = 231
RTFM_ACTIVITIES = 11


def rtfm_scale_log() -> EventLog:
    """A deterministic fine-management-shaped log with exactly the published
    scale: 11 activities, 231 variants, 150,370 traces, 561,470 events."""
    cf, sf, ifn, ap, p, scc = (
        "create_fine",
        "send_fine",
        "insert_notification",
        "add_penalty",
        "payment",
        "send_credit_collection",
    )
    ia, sa, rr, no, aj = (
        "insert_appeal",
        "send_appeal",
        "receive_result",
        "notify_offender",
        "appeal_judge",
    )
    variants: list[tuple[list[str], int]] = [
        ([cf, sf, ifn, ap, scc], 40_000),
        ([cf, sf, ifn, p], 20_000),
        ([cf, sf, ifn, ap, p], 15_000),
        ([cf, sf, p], 8_000),
        ([cf, sf, ifn, ap, p, p], 3_000),
        ([cf, sf, ifn, ia, sa, rr, no, p], 900),
        ([cf, sf, ifn, ia, sa, rr, no, ap, scc], 700),
        ([cf, sf, ifn, ap, aj, p], 400),
        ([cf, sf, ifn, ap, aj, scc], 300),
    ]
    # a long tail of rare appeal/penalty mixtures, each one a distinct variant
    tail_shapes = [
        [cf, sf, ifn, ia, sa, rr, no, ap, p],
        [cf, sf, ifn, ap, ia, sa, rr, no, p],
        [cf, sf, ifn, ap, ia, sa, rr, no, scc],
        [cf, sf, ifn, ia, sa, rr, no, scc],
        [cf, sf, ifn, ap, aj, p, p],
        [cf, sf, ifn, ap, p, p, p],
        [cf, sf, ifn, ia, sa, rr, no, ap, aj, p],
    ]
    count = 9
    for shape in tail_shapes:
        for extra_payments in range(0, 32):
            if count >= RTFM_VARIANTS - 2:
                break
            variants.append((shape + [p] * extra_payments, 32 - extra_payments))
            count += 1
    assert count == RTFM_VARIANTS - 2

    traces_so_far = sum(c for _, c in variants)
    events_so_far = sum(len(t) * c for t, c in variants)
    # filler variants of lengths 1 and 2 (unresolved and directly paid fines)
    # solve the exact remaining trace and event totals
    need_traces = RTFM_TRACES - traces_so_far
    need_events = RTFM_EVENTS - events_so_far
    paid_count = need_events - need_traces
    open_count = need_traces - paid_count
    assert open_count > 0 and paid_count > 0
    variants.append(([cf], open_count))
    variants.append(([cf, p], paid_count))

    log = build_log((trace_of(*t), c) for t, c in variants)
    assert log.total_traces == RTFM_TRACES
    assert log.total_events == RTFM_EVENTS
    assert len(log.variants) == RTFM_VARIANTS
    assert len(log.activities()) == RTFM_ACTIVITIES
    return log
