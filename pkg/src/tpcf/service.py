"""HTTP annotation service.

Wraps interactive sessions behind a small JSON API so a human annotator (or
a scripted client) can label one pending source at a time and watch the
per-bin estimates advance.  Sessions live in memory; every mutation of a
session happens under that session's lock, so concurrent submits observe a
consistent order (one succeeds, the rest see a stale pending vertex).
"""

from __future__ import annotations

import math
import threading
import uuid
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.responses import HTMLResponse
from pydantic import BaseModel

from tpcf.binning import BinConfig, build_pair_graph, make_log_bins
from tpcf.catalog import load_catalog
from tpcf.estimators import EdgeScoreModel
from tpcf.sampler import Session
from tpcf.variance import confidence_interval, horvitz_thompson_moments, is_variance_delta


class BinSpec(BaseModel):
    edges: list[float] | None = None
    theta_min: float | None = None
    theta_max: float | None = None
    num_bins: int | None = None


class CreateSessionRequest(BaseModel):
    catalog: str
    bins: BinSpec
    seed: int = 0


class LabelRequest(BaseModel):
    vertex: int
    label: int


class _SessionEntry:
    """One live session plus its lock and cached interval computations."""

    def __init__(self, session: Session, catalog, catalog_name: str):
        self.session = session
        self.catalog = catalog
        self.catalog_name = catalog_name
        self.lock = threading.Lock()
        self.stopped = False
        self._ci_cache: dict[tuple[int, int], tuple[float | None, float | None]] = {}

    def interval(self, b: int) -> tuple[float | None, float | None]:
        """CI bounds for bin b's latest estimate; None when unavailable."""
        session = self.session
        state = session.states[b]
        key = (b, state.k)
        if key not in self._ci_cache:
            bounds = (None, None)
            try:
                pair, trip = horvitz_thompson_moments(
                    state, session.labels, session.graph, session.model)
                if pair.complete and trip.complete:
                    v, _ = is_variance_delta(pair, trip, session.model, b,
                                             session.n, state.k)
                    lo, hi = confidence_interval(session.latest(b)[2], v)
                    bounds = (float(lo), float(hi))
            except (ValueError, AttributeError):
                pass
            self._ci_cache[key] = bounds
        return self._ci_cache[key]


def _resource(entry: _SessionEntry, sid: str) -> dict:
    session = entry.session
    pending = None
    if not entry.stopped and session.pending is not None:
        p = session.pending
        pending = {"id": int(p), "x": float(entry.catalog.x[p]),
                   "y": float(entry.catalog.y[p]),
                   "prob": float(entry.catalog.prob[p])}
    per_bin = {}
    for b in session.active_bins:
        if not session.estimates[b]:
            continue
        _, k, est = session.latest(b)
        lo, hi = entry.interval(b)
        per_bin[str(b)] = {"estimate": est, "ci_low": lo, "ci_high": hi, "k": k}
    status = "complete" if (entry.stopped or session.pending is None) else "awaiting-label"
    return {
        "id": sid,
        "catalog": entry.catalog_name,
        "status": status,
        "pending": pending,
        "labels_used": session.labels_used,
        "bins": per_bin,
    }


def create_app(catalog_dir) -> FastAPI:
    """Application factory; catalogs are CSV files inside catalog_dir."""
    catalog_dir = Path(catalog_dir)
    app = FastAPI(title="active pair-count annotation service")
    sessions: dict[str, _SessionEntry] = {}
    registry_lock = threading.Lock()

    def _entry(sid: str) -> _SessionEntry:
        entry = sessions.get(sid)
        if entry is None:
            raise HTTPException(404, f"unknown session {sid!r}")
        return entry

    @app.post("/sessions", status_code=201)
    def create_session(req: CreateSessionRequest) -> dict:
        path = catalog_dir / f"{req.catalog}.csv"
        if "/" in req.catalog or not path.is_file():
            raise HTTPException(404, f"unknown catalog {req.catalog!r}")
        try:
            spec = req.bins
            if spec.edges is not None:
                bins = BinConfig(spec.edges)
            elif None not in (spec.theta_min, spec.theta_max, spec.num_bins):
                bins = make_log_bins(spec.theta_min, spec.theta_max, spec.num_bins)
            else:
                raise ValueError("bins need either edges or "
                                 "theta_min/theta_max/num_bins")
            catalog = load_catalog(path)
            graph = build_pair_graph(catalog, bins)
            model = EdgeScoreModel(graph, catalog.prob)
            session = Session(graph, model, seed=req.seed)
        except ValueError as exc:
            raise HTTPException(400, str(exc))
        sid = uuid.uuid4().hex
        entry = _SessionEntry(session, catalog, req.catalog)
        with registry_lock:
            sessions[sid] = entry
        with entry.lock:
            return _resource(entry, sid)

    @app.get("/sessions/{sid}")
    def get_session(sid: str) -> dict:
        entry = _entry(sid)
        with entry.lock:
            return _resource(entry, sid)

    @app.post("/sessions/{sid}/labels")
    def submit_label(sid: str, req: LabelRequest) -> dict:
        entry = _entry(sid)
        with entry.lock:
            session = entry.session
            if entry.stopped:
                raise HTTPException(409, "session is stopped")
            if session.pending is None:
                raise HTTPException(409, "session is complete")
            if req.vertex != session.pending:
                raise HTTPException(
                    409, f"vertex {req.vertex} is not the pending vertex "
                         f"{session.pending}")
            if req.label not in (0, 1):
                raise HTTPException(400, "label must be 0 or 1")
            session.provide_label(req.vertex, req.label)
            return _resource(entry, sid)

    @app.get("/sessions/{sid}/estimates")
    def get_estimates(sid: str, start: int = 0) -> dict:
        entry = _entry(sid)
        with entry.lock:
            session = entry.session
            bins = {}
            length = 0
            for b in session.active_bins:
                history = session.estimates[b]
                length = max(length, len(history))
                bins[str(b)] = [
                    {"index": i, "labels_used": lu, "k": k,
                     "estimate": None if math.isnan(est) else est}
                    for i, (lu, k, est) in enumerate(history[start:], start=start)
                ]
            return {"bins": bins, "next": length}

    @app.post("/sessions/{sid}/stop")
    def stop_session(sid: str) -> dict:
        entry = _entry(sid)
        with entry.lock:
            entry.stopped = True
            return _resource(entry, sid)

    @app.get("/", response_class=HTMLResponse)
    def index() -> str:
        ui = Path(__file__).resolve().parents[2] / "frontend" / "dist" / "index.html"
        if ui.is_file():
            return ui.read_text(encoding="utf-8")
        return "<html><body><p>annotation service is running</p></body></html>"

    return app
