"""JSON-over-HTTP facade for dataset registration and recommendation.

The query class is declared at registration time and frozen: every later
request is validated against it, so the multiple-comparison guarantee the
scoring relies on cannot be silently invalidated by widening the class.
"""

from __future__ import annotations

import dataclasses
import io
import itertools
import json
import threading

from fastapi import FastAPI, File, Form, Request, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response

from .bounds import epsilon_bar, min_selectivity_threshold
from .queries import EmptySupportError, Predicate, Visualization, estimate_pmf
from .recommend import (
    ExplorationConfig,
    PreprocessReport,
    effective_vc_dimension,
    payload_bytes,
    preprocess,
    recommendation_payload,
)
from .tables import MalformedCsvError, Table, load_table

MAX_UPLOAD_BYTES = 32 * 1024 * 1024


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


@dataclasses.dataclass
class SessionLedger:
    """Per-dataset accounting: requests served against the declared class."""

    recommend_requests: int = 0
    pmf_requests: int = 0
    declared_m: int | None = None  # candidate count from the last enumeration

    def to_json(self) -> dict:
        return {
            "recommend_requests": self.recommend_requests,
            "pmf_requests": self.pmf_requests,
            "declared_m": self.declared_m,
        }


@dataclasses.dataclass(frozen=True)
class DatasetEntry:
    id: str
    name: str
    table: Table  # preprocessed (restricted) table
    config: ExplorationConfig  # frozen class declaration
    report: PreprocessReport
    d: int
    gamma_min: float
    ledger: SessionLedger

    def handle_json(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "n": self.table.n,
            "schema": self.table.schema_summary(),
            "config": self.config.to_json(),
            "d": self.d,
            "gamma_min": self.gamma_min,
            "preprocess": self.report.to_json(),
            "ledger": self.ledger.to_json(),
        }


class Registry:
    """In-memory dataset store; registration is atomic, reads are lock-free
    (entries and their tables are immutable)."""

    def __init__(self):
        self._lock = threading.Lock()
        self._entries: dict[str, DatasetEntry] = {}
        self._ids = itertools.count(1)

    def register(self, entry_factory) -> DatasetEntry:
        with self._lock:
            ds_id = f"ds-{next(self._ids)}"
            entry = entry_factory(ds_id)
            self._entries[ds_id] = entry
            return entry

    def get(self, ds_id: str) -> DatasetEntry:
        entry = self._entries.get(ds_id)
        if entry is None:
            raise ApiError(404, "not_found", f"unknown dataset id {ds_id!r}")
        return entry

    def all(self) -> list[DatasetEntry]:
        return list(self._entries.values())


def _parse_config(raw: str | None) -> ExplorationConfig:
    if not raw:
        return ExplorationConfig()
    try:
        return ExplorationConfig.from_json(json.loads(raw))
    except (ValueError, TypeError, KeyError) as exc:
        raise ApiError(400, "bad_config", f"invalid config: {exc}") from exc


def _parse_predicate(doc, entry: DatasetEntry) -> Predicate:
    try:
        pred = Predicate.from_json(doc) if doc is not None else Predicate()
    except (ValueError, TypeError, KeyError) as exc:
        raise ApiError(422, "bad_predicate", f"invalid predicate: {exc}") from exc
    _check_within_class(pred, entry)
    return pred


def _check_within_class(pred: Predicate, entry: DatasetEntry) -> None:
    """Widening rejection: the predicate must stay inside the class declared
    at registration (kept features, declared operators, one clause per
    feature)."""
    kept = set(entry.table.feature_names)
    for conn in pred.connections:
        if conn.feature not in kept:
            raise ApiError(
                422, "outside_class",
                f"feature {conn.feature!r} is not in the declared query class "
                "(dropped at registration or unknown)",
            )
        active = [c for c in conn.clauses if not c.is_sentinel]
        if len(active) > 1:
            raise ApiError(
                422, "outside_class",
                f"feature {conn.feature!r}: disjunctions of "
                f"{len(active)} clauses widen the declared class",
            )
        for clause in active:
            if clause.op not in entry.config.operators:
                raise ApiError(
                    422, "outside_class",
                    f"operator {clause.op!r} is outside the declared class "
                    f"{entry.config.operators}",
                )


def _check_group_by(group_by: str, entry: DatasetEntry) -> None:
    if group_by not in entry.table.feature_names:
        raise ApiError(422, "outside_class", f"unknown group-by feature {group_by!r}")


def create_app(max_upload_bytes: int = MAX_UPLOAD_BYTES) -> FastAPI:
    app = FastAPI(title="vizrec", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    registry = Registry()
    app.state.registry = registry

    @app.exception_handler(ApiError)
    async def _api_error(_request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status, content={"error": exc.code, "message": exc.message}
        )

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.get("/datasets")
    def list_datasets():
        return {"datasets": [e.handle_json() for e in registry.all()]}

    @app.post("/datasets", status_code=201)
    async def register_dataset(
        file: UploadFile = File(...), config: str | None = Form(None)
    ):
        raw = await file.read()
        if len(raw) > max_upload_bytes:
            raise ApiError(413, "too_large", f"upload exceeds {max_upload_bytes} bytes")
        cfg = _parse_config(config)
        name = file.filename or "upload"
        try:
            table = load_table(io.StringIO(raw.decode("utf-8", errors="strict")), name=name)
        except (MalformedCsvError, UnicodeDecodeError) as exc:
            raise ApiError(400, "malformed_csv", str(exc)) from exc
        reduced, report = preprocess(table, cfg)
        # frozen class dimension over every kept feature (no group-by chosen
        # yet); an explicit vc_dimension in the config wins
        if cfg.vc_dimension is not None:
            d = cfg.vc_dimension
        else:
            alpha, beta = _feature_complexity(cfg)
            d = (2 * alpha + beta) * len(reduced.feature_names)
        gamma_min = min_selectivity_threshold(d, cfg.delta, reduced.n, cfg.c, cfg.log_base)
        entry = registry.register(
            lambda ds_id: DatasetEntry(
                ds_id, name, reduced, cfg, report, d, gamma_min, SessionLedger()
            )
        )
        return entry.handle_json()

    @app.post("/datasets/{ds_id}/recommend")
    def recommend(ds_id: str, body: dict):
        entry = registry.get(ds_id)
        group_by = body.get("group_by")
        if not isinstance(group_by, str):
            raise ApiError(422, "bad_request", "group_by is required")
        _check_group_by(group_by, entry)
        pred = _parse_predicate(body.get("predicate"), entry)
        cfg = _request_config(entry.config, body)
        reference = Visualization(pred, group_by, cfg.bucket_count)
        try:
            payload = recommendation_payload(reference, entry.table, cfg)
        except EmptySupportError as exc:
            raise ApiError(422, "tarone_zero_support", str(exc)) from exc
        entry.ledger.recommend_requests += 1
        entry.ledger.declared_m = payload["n_candidates"]
        return Response(content=payload_bytes(payload), media_type="application/json")

    @app.get("/datasets/{ds_id}/pmf")
    def pmf(ds_id: str, group_by: str, predicate: str | None = None):
        entry = registry.get(ds_id)
        _check_group_by(group_by, entry)
        try:
            doc = json.loads(predicate) if predicate else None
        except json.JSONDecodeError as exc:
            raise ApiError(422, "bad_predicate", f"predicate is not JSON: {exc}") from exc
        pred = _parse_predicate(doc, entry)
        vis = Visualization(pred, group_by, entry.config.bucket_count)
        try:
            est = estimate_pmf(vis, entry.table)
        except EmptySupportError as exc:
            raise ApiError(
                422, "tarone_zero_support",
                f"zero-support predicate excluded (Tarone): {exc}",
            ) from exc
        cfg = entry.config
        d = effective_vc_dimension(entry.table, group_by, cfg)
        eps = epsilon_bar(d, cfg.delta, est.support, cfg.c, cfg.log_base)
        gamma_min = min_selectivity_threshold(d, cfg.delta, entry.table.n, cfg.c, cfg.log_base)
        entry.ledger.pmf_requests += 1
        return {
            "predicate": pred.to_json(),
            "group_by": group_by,
            "pmf": est.to_json(),
            "support": est.support,
            "epsilon": eps.to_json(),
            "cannot_be_safe": est.support < gamma_min * entry.table.n,
        }

    return app


def _feature_complexity(cfg: ExplorationConfig) -> tuple[int, int]:
    from .recommend import _OP_COMPLEXITY

    alpha = max(_OP_COMPLEXITY[op][0] for op in cfg.operators)
    beta = max(_OP_COMPLEXITY[op][1] for op in cfg.operators)
    return alpha, beta


def _request_config(frozen: ExplorationConfig, body: dict) -> ExplorationConfig:
    """Per-request knobs that do not touch the declared class."""
    updates = {}
    if "delta" in body:
        updates["delta"] = float(body["delta"])
    if "eps_v" in body and body["eps_v"] is not None:
        updates["eps_v"] = float(body["eps_v"])
    if "one_sample" in body:
        updates["one_sample"] = bool(body["one_sample"])
    return dataclasses.replace(frozen, **updates) if updates else frozen


app = create_app()
