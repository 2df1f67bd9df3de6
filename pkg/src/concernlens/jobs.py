"""Asynchronous job execution behind the HTTP API.

Jobs run on a bounded worker pool; state transitions are
queued -> running -> done | failed, progress is monotone, and every
transition is persisted so a restarted process sees a consistent picture
(in-flight jobs from a previous life are marked failed, never half-done).
"""

from __future__ import annotations

import threading
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable

from .errors import ConcernLensError, JobNotFoundError, NotFoundError
from .storage import DataStore

JOB_KINDS = ("ingest", "annotate", "train", "classify", "trend")
_TERMINAL = ("done", "failed")


@dataclass(frozen=True)
class Job:
    job_id: str
    kind: str
    state: str = "queued"  # queued -> running -> done | failed
    progress: float = 0.0
    result: dict | None = None
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "kind": self.kind,
            "state": self.state,
            "progress": self.progress,
            "result": self.result,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Job":
        return cls(
            job_id=d["job_id"],
            kind=d["kind"],
            state=d["state"],
            progress=d["progress"],
            result=d.get("result"),
            error=d.get("error"),
        )


class JobManager:
    """Bounded-pool job runner with persisted state."""

    def __init__(self, store: DataStore, workers: int = 2):
        if workers < 1:
            raise ValueError("workers must be >= 1")
        self._store = store
        self._pool = ThreadPoolExecutor(max_workers=workers)
        self._jobs: dict[str, Job] = {}
        self._lock = threading.Lock()
        self._seq = 0
        self._recover()

    def _recover(self) -> None:
        """A restart must not leave jobs stuck in queued/running."""
        for key in self._store.list_records("jobs"):
            job = Job.from_dict(self._store.load_record("jobs", key))
            if job.state not in _TERMINAL:
                job = replace(job, state="failed", error="interrupted by restart")
                self._store.save_record("jobs", job.job_id, job.to_dict())
            self._jobs[job.job_id] = job
            self._seq = max(self._seq, int(job.job_id.split("-")[-1]))

    def _transition(self, job_id: str, **changes) -> Job:
        with self._lock:
            job = self._jobs[job_id]
            if "progress" in changes:
                # progress is monotone by contract
                changes["progress"] = min(1.0, max(job.progress, changes["progress"]))
            if "state" in changes and job.state in _TERMINAL:
                raise ConcernLensError(
                    f"job {job_id} already terminal ({job.state})"
                )
            job = replace(job, **changes)
            self._jobs[job_id] = job
        self._store.save_record("jobs", job_id, job.to_dict())
        return job

    def submit(self, kind: str, work: Callable[[Callable[[float], None]], dict]) -> Job:
        """Queue a callable; it receives a progress callback and returns the
        job result dict."""
        if kind not in JOB_KINDS:
            raise ValueError(f"unknown job kind {kind!r}")
        with self._lock:
            self._seq += 1
            job = Job(job_id=f"job-{self._seq:06d}", kind=kind)
            self._jobs[job.job_id] = job
        self._store.save_record("jobs", job.job_id, job.to_dict())

        def run() -> None:
            self._transition(job.job_id, state="running")
            try:
                result = work(lambda p: self._transition(job.job_id, progress=p))
            except Exception as exc:  # job failures are captured, never lost
                detail = f"{type(exc).__name__}: {exc}"
                if not isinstance(exc, ConcernLensError):
                    detail += "\n" + traceback.format_exc(limit=3)
                self._transition(job.job_id, state="failed", error=detail)
                return
            self._transition(job.job_id, state="done", progress=1.0, result=result)

        self._pool.submit(run)
        return job

    def get(self, job_id: str) -> Job:
        with self._lock:
            if job_id in self._jobs:
                return self._jobs[job_id]
        try:
            return Job.from_dict(self._store.load_record("jobs", job_id))
        except NotFoundError:
            raise JobNotFoundError(f"job {job_id!r} not found")

    def wait(self, job_id: str, timeout: float = 30.0) -> Job:
        """Poll until the job reaches a terminal state (test convenience)."""
        import time

        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            job = self.get(job_id)
            if job.state in _TERMINAL:
                return job
            time.sleep(0.01)
        raise TimeoutError(f"job {job_id} still {self.get(job_id).state} after {timeout}s")

    def shutdown(self) -> None:
        self._pool.shutdown(wait=True)
