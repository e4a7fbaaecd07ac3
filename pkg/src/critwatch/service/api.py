"""HTTP/JSON REST surface for the triage service.

Routes:
    GET  /api/health
    GET  /api/pmrs?sort=er|cer|mer&follow_only=true|false
    GET  /api/pmrs/{id}
    PUT  /api/pmrs/{id}/mer           {"mer": n}
    POST /api/pmrs/{id}/comments      {"author": ..., "text": ...}
    PUT  /api/pmrs/{id}/next-action   {"text": ...}
    PUT  /api/pmrs/{id}/follow        {"followed": bool}
    POST /api/admin/rescore

Errors are JSON {"error": code, "message": text} with a 4xx/5xx status.
The rescore route reloads the call-record files from disk (batch rebuild)
and re-scores every open ticket.
"""

from __future__ import annotations

import threading
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from ..core import PMR, parse_call_records, parse_registry
from ..forest import RandomForestModel, load_model
from ..pipeline import (
    CustomerIndex,
    assemble_pmrs,
    build_customer_index,
    clean_critsit_ids,
    join_critsit_dates,
)
from .store import EmptyText, OutOfRange, TriageStore, UnknownPmr
from .triage import ModelMissing, get_pmr_detail, rescore_all


class MerBody(BaseModel):
    mer: int


class CommentBody(BaseModel):
    author: str
    text: str


class NextActionBody(BaseModel):
    text: str


class FollowBody(BaseModel):
    followed: bool


class ServiceState:
    """Loaded model, data, and store shared by the route handlers."""

    def __init__(self, data_dir: Path, model_path: Path, state_path: Path,
                 window_months: int = 6):
        self.data_dir = Path(data_dir)
        self.model_path = Path(model_path)
        self.window_months = window_months
        self.model: Optional[RandomForestModel] = load_model(
            self.model_path.read_bytes()
        )
        self.store = TriageStore(Path(state_path))
        self.pmrs: list[PMR] = []
        self.pmrs_by_id: dict[str, PMR] = {}
        self.index: Optional[CustomerIndex] = None
        self._reload_lock = threading.Lock()
        self.reload_and_rescore()

    def reload_and_rescore(self) -> int:
        with self._reload_lock:
            records = parse_call_records(
                (self.data_dir / "call_records.csv").read_bytes()
            )
            registry_path = self.data_dir / "critsit_registry.csv"
            registry = (
                parse_registry(registry_path.read_bytes()) if registry_path.exists() else []
            )
            cleaned, _ = clean_critsit_ids(records)
            joined, _ = join_critsit_dates(cleaned, registry)
            pmrs = assemble_pmrs(joined)
            index = build_customer_index(pmrs, self.window_months)
            self.pmrs = pmrs
            self.pmrs_by_id = {p.pmr_id: p for p in pmrs}
            self.index = index
            return rescore_all(
                self.store, self.model, pmrs, index, self.window_months
            )


def _summary(state: ServiceState, record) -> dict:
    pmr = state.pmrs_by_id.get(record.pmr_id)
    return {
        "pmr_id": record.pmr_id,
        "customer_id": pmr.customer_id if pmr else None,
        "er": record.er,
        "prev_er": record.prev_er,
        "cer": record.cer,
        "mer": record.mer,
        "followed": record.followed,
        "next_action": record.next_action,
        "last_scored": record.to_json_dict()["last_scored"],
        "open": pmr.close_ts is None if pmr else False,
    }


def create_app(state: ServiceState) -> FastAPI:
    app = FastAPI(title="critwatch triage service")
    app.state.service = state

    def err(status: int, code: str, message: str) -> JSONResponse:
        return JSONResponse(status_code=status, content={"error": code, "message": message})

    @app.exception_handler(UnknownPmr)
    async def _unknown(request: Request, exc: UnknownPmr):
        return err(404, "unknown_pmr", str(exc))

    @app.exception_handler(OutOfRange)
    async def _range(request: Request, exc: OutOfRange):
        return err(400, "out_of_range", str(exc))

    @app.exception_handler(EmptyText)
    async def _empty(request: Request, exc: EmptyText):
        return err(400, "empty_text", str(exc))

    @app.exception_handler(ModelMissing)
    async def _model(request: Request, exc: ModelMissing):
        return err(503, "model_missing", str(exc))

    @app.exception_handler(RequestValidationError)
    async def _validation(request: Request, exc: RequestValidationError):
        return err(400, "bad_request", str(exc))

    @app.get("/api/health")
    def health():
        return {
            "status": "ok",
            "pmrs": len(state.pmrs),
            "tracked": len(state.store.snapshot()),
            "model_loaded": state.model is not None,
        }

    @app.get("/api/pmrs")
    def list_pmrs(sort: str = "er", follow_only: bool = False):
        records = state.store.list_records(sort=sort, follow_only=follow_only)
        return [_summary(state, r) for r in records]

    @app.get("/api/pmrs/{pmr_id}")
    def pmr_detail(pmr_id: str):
        return get_pmr_detail(
            state.store, state.pmrs_by_id, state.model, state.index, pmr_id,
            state.window_months,
        )

    @app.put("/api/pmrs/{pmr_id}/mer")
    def put_mer(pmr_id: str, body: MerBody):
        state.store.get(pmr_id)
        rec = state.store.set_mer(pmr_id, body.mer)
        return _summary(state, rec)

    @app.post("/api/pmrs/{pmr_id}/comments")
    def post_comment(pmr_id: str, body: CommentBody):
        rec = state.store.add_comment(pmr_id, body.author, body.text)
        out = _summary(state, rec)
        out["comments"] = [c.to_json_dict() for c in rec.comments]
        return out

    @app.put("/api/pmrs/{pmr_id}/next-action")
    def put_next_action(pmr_id: str, body: NextActionBody):
        rec = state.store.set_next_action(pmr_id, body.text)
        return _summary(state, rec)

    @app.put("/api/pmrs/{pmr_id}/follow")
    def put_follow(pmr_id: str, body: FollowBody):
        rec = state.store.set_follow(pmr_id, body.followed)
        return _summary(state, rec)

    @app.post("/api/admin/rescore")
    def rescore():
        n = state.reload_and_rescore()
        return {"rescored": n}

    return app


def run_server(
    data_dir: Path,
    model_path: Path,
    state_path: Path,
    port: int,
    rescore_minutes: int = 15,
    window_months: int = 6,
) -> None:
    """Blocking server entry point with a periodic background rescore."""
    import uvicorn

    state = ServiceState(data_dir, model_path, state_path, window_months)
    app = create_app(state)

    stop = threading.Event()

    def _loop() -> None:
        while not stop.wait(rescore_minutes * 60):
            try:
                state.reload_and_rescore()
            except Exception:  # noqa: BLE001 - periodic job must not die
                pass

    ticker = threading.Thread(target=_loop, daemon=True)
    ticker.start()
    try:
        uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")
    finally:
        stop.set()
