"""HTTP service: log upload, DFG inspection, discovery, and net post-processing.

State lives in memory with optional content-addressed persistence for uploaded
logs, so a restarted service still serves previously uploaded log ids. Repair
and enumeration results are cached per log and reused whenever a new request
only moves thresholds that sit after those stages.
"""
from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, File, Form, HTTPException, Request, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import Response

from .dfg import build_dfg, dfg_to_dot
from .discovery import (
    ConfigError,
    DiscoveryConfig,
    PreparedCandidates,
    PreparedRepair,
    discover_alpha_classic,
    discover_alphappp,
    prepare_candidates,
    prepare_repair,
)
from .log import (
    ActivityMultiset,
    CsvMapping,
    EventLog,
    LogParseError,
    activity_multiset,
    log_from_json,
    log_to_json,
    parse_log_bytes,
)
from .petri import (
    AcceptingPetriNet,
    greedy_removal_order,
    net_to_dot,
    remove_transitions,
    to_pnml,
)

DEFAULT_UPLOAD_CAP = 512 * 1024 * 1024


@dataclass
class StoredNet:
    accepting: AcceptingPetriNet
    log_id: str
    counts: ActivityMultiset
    pnml: bytes
    dot: str


class ServiceState:
    """All mutable service state plus the per-log serialization locks."""

    def __init__(self, data_dir: Path | None, max_upload_bytes: int):
        self.data_dir = data_dir
        self.max_upload_bytes = max_upload_bytes
        self.logs: dict[str, EventLog] = {}
        self.repairs: dict[tuple, PreparedRepair] = {}
        self.candidates: dict[tuple, PreparedCandidates] = {}
        self.nets: dict[str, StoredNet] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()
        if data_dir is not None:
            (data_dir / "logs").mkdir(parents=True, exist_ok=True)

    def lock_for(self, log_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks.setdefault(log_id, threading.Lock())

    def store_log(self, log: EventLog) -> str:
        text = log_to_json(log)
        log_id = hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]
        self.logs[log_id] = log
        if self.data_dir is not None:
            path = self.data_dir / "logs" / f"{log_id}.json"
            if not path.exists():
                path.write_text(text, encoding="utf-8")
        return log_id

    def load_log(self, log_id: str) -> EventLog | None:
        log = self.logs.get(log_id)
        if log is not None:
            return log
        if self.data_dir is not None:
            path = self.data_dir / "logs" / f"{log_id}.json"
            if path.exists():
                log = log_from_json(path.read_text(encoding="utf-8"))
                self.logs[log_id] = log
                return log
        return None


def _log_stats(log: EventLog) -> dict:
    return {
        "events": log.total_events,
        "activities": len(log.activities()),
        "traces": log.total_traces,
        "variants": len(log.variants),
    }


def net_payload(accepting: AcceptingPetriNet) -> dict:
    net = accepting.net
    return {
        "places": [
            {
                "id": p.pid,
                "label": p.display(),
                "initial": accepting.initial.get(p.pid, 0),
                "final": accepting.final.get(p.pid, 0),
            }
            for p in net.places
        ],
        "transitions": [
            {"id": t.tid, "label": t.label, "silent": t.label is None}
            for t in net.transitions
        ],
        "arcs": [{"source": s, "target": d} for s, d in sorted(net.arcs)],
    }


def create_app(
    data_dir: str | Path | None = None,
    max_upload_bytes: int = DEFAULT_UPLOAD_CAP,
) -> FastAPI:
    state = ServiceState(Path(data_dir) if data_dir is not None else None, max_upload_bytes)
    app = FastAPI(title="alphappp", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.service = state

    def require_log(log_id: str) -> EventLog:
        log = state.load_log(log_id)
        if log is None:
            raise HTTPException(404, f"unknown log id {log_id!r}")
        return log

    def require_net(net_id: str) -> StoredNet:
        stored = state.nets.get(net_id)
        if stored is None:
            raise HTTPException(404, f"unknown net id {net_id!r}")
        return stored

    def store_net(seed: str, accepting: AcceptingPetriNet, log_id: str, counts) -> str:
        net_id = hashlib.sha256(seed.encode("utf-8")).hexdigest()[:16]
        state.nets[net_id] = StoredNet(
            accepting=accepting,
            log_id=log_id,
            counts=counts,
            pnml=to_pnml(accepting),
            dot=net_to_dot(accepting),
        )
        return net_id

    @app.post("/logs")
    def upload_log(
        file: UploadFile = File(...),
        case_column: str | None = Form(None),
        activity_column: str | None = Form(None),
        timestamp_column: str | None = Form(None),
        timestamp_format: str | None = Form(None),
    ):
        data = file.file.read()
        if len(data) > state.max_upload_bytes:
            raise HTTPException(413, f"upload exceeds the {state.max_upload_bytes} byte cap")
        name = file.filename or "upload.xes"
        mapping = None
        if name.lower().endswith((".csv", ".csv.gz")):
            mapping = CsvMapping(
                case_column=case_column or "case",
                activity_column=activity_column or "activity",
                timestamp_column=timestamp_column,
                timestamp_format=timestamp_format,
            )
        try:
            log = parse_log_bytes(name, data, mapping)
        except LogParseError as exc:
            raise HTTPException(422, str(exc)) from exc
        log_id = state.store_log(log)
        return {"log_id": log_id, "stats": _log_stats(log)}

    @app.get("/logs/{log_id}/dfg")
    def log_dfg(log_id: str, min_weight: int = 0):
        if min_weight < 0:
            raise HTTPException(400, "min_weight must be non-negative")
        log = require_log(log_id)
        dfg = build_dfg(log)
        arcs = [
            {"source": a.label(), "target": b.label(), "weight": w}
            for (a, b), w in dfg.sorted_arcs()
            if w >= min_weight
        ]
        nodes = [n.label() for n in dfg.sorted_nodes()]
        return {"nodes": nodes, "arcs": arcs, "dot": dfg_to_dot(dfg, min_weight=min_weight)}

    @app.post("/logs/{log_id}/discover")
    async def discover(log_id: str, request: Request):
        log = require_log(log_id)
        if log.is_empty():
            raise HTTPException(400, "cannot discover a net from an empty log")
        try:
            body = await request.json()
        except Exception as exc:
            raise HTTPException(400, "request body must be JSON") from exc
        if not isinstance(body, dict):
            raise HTTPException(400, "request body must be a JSON object")
        algorithm = body.get("algorithm", "alphappp")
        if algorithm not in ("alphappp", "alpha"):
            raise HTTPException(400, f"unknown algorithm {algorithm!r}")

        if algorithm == "alpha":
            accepting = discover_alpha_classic(log)
            counts = activity_multiset(log)
            net_id = store_net(f"{log_id}:alpha", accepting, log_id, counts)
            stored = state.nets[net_id]
            return {
                "net_id": net_id,
                "algorithm": "alpha",
                "net": net_payload(accepting),
                "stage_report": None,
                "dot": stored.dot,
            }

        try:
            config = DiscoveryConfig.from_json(body.get("config") or {})
        except ConfigError as exc:
            raise HTTPException(400, str(exc)) from exc

        with state.lock_for(log_id):
            repair_key = (
                log_id,
                config.problem_threshold,
                config.df_threshold.value,
                config.df_threshold.mode,
            )
            repair_hit = repair_key in state.repairs
            if not repair_hit:
                try:
                    state.repairs[repair_key] = prepare_repair(log, config)
                except ValueError as exc:
                    raise HTTPException(400, str(exc)) from exc
            prepared = state.repairs[repair_key]

            cand_key = repair_key + (
                config.arc_min,
                config.min_weight_ratio,
                config.candidate_size_cap,
            )
            candidates_hit = cand_key in state.candidates
            if not candidates_hit:
                state.candidates[cand_key] = prepare_candidates(prepared, config)
            enumerated = state.candidates[cand_key]

            try:
                result = discover_alphappp(
                    log, config, prepared=prepared, prepared_candidates=enumerated
                )
            except ValueError as exc:
                raise HTTPException(400, str(exc)) from exc

        counts = activity_multiset(result.repaired_log)
        seed = f"{log_id}:alphappp:{sorted(config.to_json().items())!r}"
        net_id = store_net(seed, result.net, log_id, counts)
        stored = state.nets[net_id]
        report = result.report.to_json()
        # report request-level reuse, not the in-call plumbing
        report["cache"] = {"repair_hit": repair_hit, "candidates_hit": candidates_hit}
        return {
            "net_id": net_id,
            "algorithm": "alphappp",
            "net": net_payload(result.net),
            "stage_report": report,
            "dot": stored.dot,
        }

    @app.get("/nets/{net_id}.pnml")
    def net_pnml(net_id: str):
        stored = require_net(net_id)
        return Response(content=stored.pnml, media_type="application/xml")

    @app.get("/nets/{net_id}/disconnected")
    def net_disconnected(net_id: str):
        stored = require_net(net_id)
        order = greedy_removal_order(stored.accepting.net, stored.counts)
        return {
            "count": len(order),
            "transitions": [
                {
                    "id": t.tid,
                    "label": t.label,
                    "frequency": stored.counts[t.activity],
                }
                for t in order
            ],
        }

    @app.post("/nets/{net_id}/remove-disconnected")
    async def net_remove_disconnected(net_id: str, request: Request):
        stored = require_net(net_id)
        try:
            body = await request.json()
        except Exception as exc:
            raise HTTPException(400, "request body must be JSON") from exc
        k = body.get("k") if isinstance(body, dict) else None
        if not isinstance(k, int) or isinstance(k, bool) or k < 0:
            raise HTTPException(400, "body must carry a non-negative integer 'k'")
        order = greedy_removal_order(stored.accepting.net, stored.counts)
        victims = order[:k]
        reduced = remove_transitions(stored.accepting, victims)
        new_id = store_net(f"{net_id}:remove-greedy:{k}", reduced, stored.log_id, stored.counts)
        return {
            "net_id": new_id,
            "net": net_payload(reduced),
            "dot": state.nets[new_id].dot,
            "removed": [t.label for t in victims],
        }

    return app
