"""HTTP API: uploads behind async jobs, classified-document retrieval,
per-concern summaries, trends, event comparison, and intervention queries.

All heavy work (URL fetch, file parsing, classification) runs on the job
pool; request handlers only read persisted state, so identical requests
against identical state return identical bodies. Errors are structured
{code, message} with 4xx for validation and 5xx for internal faults.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from datetime import date

from fastapi import FastAPI, File, Form, Query, Request, UploadFile
from fastapi.responses import JSONResponse, PlainTextResponse

from .errors import (
    AnalyticsError,
    ConcernLensError,
    EmptyInputError,
    IngestError,
    InterventionError,
    NoConcernsError,
    NotFoundError,
    StoreError,
    TaxonomyError,
    VersionMismatchError,
)
from .ingest import ingest_file, ingest_text, ingest_url
from .interventions import (
    InterventionStore,
    classify_and_match,
    default_interventions,
    load_interventions,
)
from .jobs import JobManager
from .pipeline import (
    classify_documents,
    load_classified,
    load_document,
    store_classified,
    store_document,
)
from .storage import DataStore
from .students import StudentModel, load_model
from .taxonomy import Taxonomy, default_taxonomy, load_taxonomy_file
from .analytics import ArticleLabel, event_comparison, keyword_cloud, rolling_average, trends_to_csv

SUMMARY_EXAMPLES_PER_CONCERN = 3


@dataclass
class ServiceConfig:
    data_dir: str = "data"
    model_path: str | None = None
    taxonomy_path: str | None = None
    interventions_path: str | None = None
    host: str = "127.0.0.1"
    port: int = 8000
    workers: int = 2
    intervention_top_k: int = 10
    teacher_endpoint: str = ""
    teacher_model_name: str = "gpt-teacher"
    teacher_api_key: str = ""  # set via CONCERNLENS_TEACHER_KEY, not the file

    @classmethod
    def from_file(cls, path: str | None = None, env: dict | None = None) -> "ServiceConfig":
        """JSON config file plus CONCERNLENS_* environment overrides."""
        env = os.environ if env is None else env
        values: dict = {}
        if path:
            with open(path, "r", encoding="utf-8") as f:
                values.update(json.load(f))
            values.pop("teacher_api_key", None)  # secrets come from env only
        mapping = {
            "CONCERNLENS_DATA_DIR": ("data_dir", str),
            "CONCERNLENS_MODEL": ("model_path", str),
            "CONCERNLENS_TAXONOMY": ("taxonomy_path", str),
            "CONCERNLENS_INTERVENTIONS": ("interventions_path", str),
            "CONCERNLENS_HOST": ("host", str),
            "CONCERNLENS_PORT": ("port", int),
            "CONCERNLENS_WORKERS": ("workers", int),
            "CONCERNLENS_TEACHER_ENDPOINT": ("teacher_endpoint", str),
            "CONCERNLENS_TEACHER_MODEL": ("teacher_model_name", str),
            "CONCERNLENS_TEACHER_KEY": ("teacher_api_key", str),
        }
        for var, (key, cast) in mapping.items():
            if var in env:
                values[key] = cast(env[var])
        known = {k: v for k, v in values.items() if k in cls.__dataclass_fields__}
        return cls(**known)


_STATUS_BY_ERROR = [
    (NotFoundError, 404),
    (NoConcernsError, 422),
    (EmptyInputError, 400),
    (IngestError, 400),
    (TaxonomyError, 400),
    (AnalyticsError, 422),
    (InterventionError, 400),
    (VersionMismatchError, 500),
    (StoreError, 500),
]


def _status_for(exc: ConcernLensError) -> int:
    for klass, status in _STATUS_BY_ERROR:
        if isinstance(exc, klass):
            return status
    return 500


class ServiceContext:
    def __init__(self, config: ServiceConfig):
        self.config = config
        self.store = DataStore(config.data_dir)
        self.taxonomy: Taxonomy = (
            load_taxonomy_file(config.taxonomy_path)
            if config.taxonomy_path
            else default_taxonomy()
        )
        if config.model_path is None:
            raise ConcernLensError("service requires model_path in configuration")
        with open(config.model_path, "rb") as f:
            self.model: StudentModel = load_model(f.read(), self.taxonomy.version)
        if config.interventions_path:
            with open(config.interventions_path, "r", encoding="utf-8") as f:
                self.interventions: InterventionStore = load_interventions(
                    f.read(), self.taxonomy
                )
        else:
            self.interventions = default_interventions(self.taxonomy)
        self.jobs = JobManager(self.store, workers=config.workers)

    def classify_and_store(self, docs, progress=None) -> dict:
        doc_ids = []
        total = max(1, len(docs))
        for i, doc in enumerate(docs):
            store_document(self.store, doc)
            cdoc = classify_documents(self.model, [doc], self.taxonomy)[0]
            store_classified(self.store, cdoc)
            doc_ids.append(doc.doc_id)
            if progress:
                progress((i + 1) / total)
        return {"doc_ids": doc_ids}

    def dated_article_labels(self, date_from=None, date_to=None) -> list[ArticleLabel]:
        articles = []
        for doc_id in self.store.list_records("classified"):
            cdoc = load_classified(self.store, doc_id)
            if cdoc.published_at is None:
                continue
            if date_from and cdoc.published_at < date_from:
                continue
            if date_to and cdoc.published_at > date_to:
                continue
            articles.append(
                ArticleLabel(
                    doc_id=cdoc.doc_id, labels=cdoc.article_labels, date=cdoc.published_at
                )
            )
        articles.sort(key=lambda a: (a.date, a.doc_id))
        return articles


def create_app(config: ServiceConfig) -> FastAPI:
    ctx = ServiceContext(config)
    app = FastAPI(title="concernlens", version="0.1.0")
    app.state.ctx = ctx

    @app.exception_handler(ConcernLensError)
    async def handle_domain_error(request: Request, exc: ConcernLensError):
        return JSONResponse(
            status_code=_status_for(exc),
            content={"code": exc.code, "message": str(exc)},
        )

    @app.exception_handler(Exception)
    async def handle_unexpected(request: Request, exc: Exception):
        return JSONResponse(
            status_code=500,
            content={"code": "internal_error", "message": f"{type(exc).__name__}: {exc}"},
        )

    def parse_iso_date(value: str | None, param: str) -> date | None:
        if not value:
            return None
        try:
            return date.fromisoformat(value)
        except ValueError:
            raise IngestError(f"query parameter {param!r} must be YYYY-MM-DD")

    # --- uploads -----------------------------------------------------------

    @app.post("/api/upload/text")
    async def upload_text(body: dict):
        text = body.get("text", "")
        if not isinstance(text, str) or not text.strip():
            raise EmptyInputError("'text' must be a non-empty string")
        published = parse_iso_date(body.get("date"), "date")
        job = ctx.jobs.submit(
            "classify",
            lambda progress: ctx.classify_and_store(
                [ingest_text(text, published_at=published)], progress
            ),
        )
        return {"job_id": job.job_id}

    @app.post("/api/upload/url")
    async def upload_url(body: dict):
        url = body.get("url", "")
        if not isinstance(url, str) or not url.strip():
            raise EmptyInputError("'url' must be a non-empty string")
        published = parse_iso_date(body.get("date"), "date")

        def work(progress):
            doc = ingest_url(url, published_at=published)
            progress(0.5)
            return ctx.classify_and_store([doc])

        job = ctx.jobs.submit("ingest", work)
        return {"job_id": job.job_id}

    @app.post("/api/upload/file")
    async def upload_file(file: UploadFile = File(...), format: str = Form("jsonl")):
        payload = await file.read()

        def work(progress):
            docs, summary = ingest_file(payload, format)
            progress(0.3)
            result = ctx.classify_and_store(docs, lambda p: progress(0.3 + 0.7 * p))
            result["skipped_lines"] = [
                {"line": line, "reason": reason} for line, reason in summary.skipped
            ]
            result["total_records"] = summary.total_records
            return result

        job = ctx.jobs.submit("ingest", work)
        return {"job_id": job.job_id}

    # --- reads --------------------------------------------------------------

    @app.get("/api/jobs/{job_id}")
    async def get_job(job_id: str):
        return ctx.jobs.get(job_id).to_dict()

    @app.get("/api/taxonomy")
    async def get_taxonomy():
        return ctx.taxonomy.to_dict()

    @app.get("/api/documents/{doc_id}")
    async def get_document(doc_id: str):
        cdoc = load_classified(ctx.store, doc_id)
        cdoc.check_or_invariant()  # server-side guarantee before replying
        doc = load_document(ctx.store, doc_id)
        payload = cdoc.to_dict()
        payload["raw_text"] = doc.raw_text
        payload["node_ids"] = list(ctx.taxonomy.ids)
        return payload

    @app.get("/api/summary/{job_id}")
    async def get_summary(job_id: str):
        job = ctx.jobs.get(job_id)
        if job.state != "done":
            raise NotFoundError(
                f"job {job_id} is {job.state}; summary exists only for done jobs"
            )
        doc_ids = (job.result or {}).get("doc_ids", [])
        width = len(ctx.taxonomy)
        positives: list[list[dict]] = [[] for _ in range(width)]
        for doc_id in doc_ids:
            cdoc = load_classified(ctx.store, doc_id)
            doc = load_document(ctx.store, doc_id)
            for p in cdoc.passages:
                text = doc.raw_text[p.start : p.end]
                for c in range(width):
                    if p.labels[c]:
                        positives[c].append(
                            {
                                "doc_id": doc_id,
                                "passage_id": p.passage_id,
                                "start": p.start,
                                "end": p.end,
                                "text": text,
                                "score": p.scores[c],
                            }
                        )
        concerns = []
        for c in range(width):
            if not positives[c]:
                continue
            node = ctx.taxonomy.nodes[c]
            examples = sorted(positives[c], key=lambda e: -e["score"])[
                :SUMMARY_EXAMPLES_PER_CONCERN
            ]
            cloud = keyword_cloud((e["text"] for e in positives[c]), node.id)
            concerns.append(
                {
                    "id": node.id,
                    "name": node.name,
                    "count": len(positives[c]),
                    "examples": examples,
                    "cloud": [[term, count] for term, count in cloud.entries],
                }
            )
        return {"job_id": job_id, "concerns": concerns}

    # --- interventions ---------------------------------------------------------

    @app.post("/api/interventions/query")
    async def interventions_query(body: dict):
        text = body.get("text", "")
        if not isinstance(text, str) or not text.strip():
            raise EmptyInputError("'text' must be a non-empty string")
        result = classify_and_match(
            text,
            ctx.model,
            ctx.interventions,
            ctx.taxonomy,
            top_k=ctx.config.intervention_top_k,
        )
        return {
            "detected": list(result.detected),
            "no_concerns": result.no_concerns,
            "matches": [
                {**m.doc.to_dict(), "score": m.score} for m in result.matches
            ],
        }

    # --- analytics ---------------------------------------------------------------

    @app.get("/api/trends")
    async def get_trends(
        window: int = 500,
        date_from: str | None = Query(None, alias="from"),
        date_to: str | None = Query(None, alias="to"),
        format: str = "csv",
    ):
        articles = ctx.dated_article_labels(
            parse_iso_date(date_from, "from"), parse_iso_date(date_to, "to")
        )
        series = rolling_average(articles, window=window, concern_ids=list(ctx.taxonomy.ids))
        if format == "json":
            return {
                "window": window,
                "series": [
                    {
                        "concern_id": s.concern_id,
                        "points": [
                            {
                                "index": p.index,
                                "date": p.date.isoformat() if p.date else None,
                                "value": p.value,
                            }
                            for p in s.points
                        ],
                    }
                    for s in series
                ],
            }
        return PlainTextResponse(trends_to_csv(series), media_type="text/csv")

    @app.get("/api/events/compare")
    async def compare_events(date: str, pre_days: int = 30, post_days: int = 30):
        event_date = parse_iso_date(date, "date")
        articles = ctx.dated_article_labels()
        changes = event_comparison(articles, event_date, pre_days, post_days,
                                   concern_ids=list(ctx.taxonomy.ids))
        return {"event_date": event_date.isoformat(), "changes": [c.to_dict() for c in changes]}

    return app
