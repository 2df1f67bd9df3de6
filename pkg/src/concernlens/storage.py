"""File-backed persistence: content-addressed blobs, documents, teacher
cache, models, reports, and job state under one data directory.

Every write is write-temp-then-rename, so a crash never leaves a partial
file visible; blob paths are their SHA-256, verified again on read.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import threading
from pathlib import Path

from .errors import IntegrityError, NotFoundError

_SUBDIRS = ("blobs", "documents", "classified", "annotations", "cache", "models", "reports", "jobs")


def atomic_write_bytes(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_json(path: Path, doc) -> None:
    atomic_write_bytes(path, json.dumps(doc, sort_keys=True).encode("utf-8"))


class DataStore:
    """Single-directory persistence root shared by the CLI and service."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        for sub in _SUBDIRS:
            (self.root / sub).mkdir(parents=True, exist_ok=True)
        self._write_lock = threading.Lock()

    # --- content-addressed blobs ---------------------------------------

    def _blob_path(self, digest: str) -> Path:
        return self.root / "blobs" / digest[:2] / digest

    def put_blob(self, data: bytes | str) -> str:
        if isinstance(data, str):
            data = data.encode("utf-8")
        digest = hashlib.sha256(data).hexdigest()
        path = self._blob_path(digest)
        if not path.exists():  # double save of the same content is a no-op
            atomic_write_bytes(path, data)
        return digest

    def get_blob(self, digest: str) -> bytes:
        path = self._blob_path(digest)
        if not path.exists():
            raise NotFoundError(f"blob {digest} not found")
        data = path.read_bytes()
        if hashlib.sha256(data).hexdigest() != digest:
            raise IntegrityError(f"blob {digest} fails its checksum")
        return data

    def get_blob_text(self, digest: str) -> str:
        return self.get_blob(digest).decode("utf-8")

    def blob_count(self) -> int:
        return sum(1 for _ in (self.root / "blobs").glob("*/*"))

    # --- generic JSON records -------------------------------------------

    def _record_path(self, kind: str, key: str) -> Path:
        safe = key.replace("/", "_")
        return self.root / kind / f"{safe}.json"

    def save_record(self, kind: str, key: str, doc: dict) -> None:
        with self._write_lock:
            atomic_write_json(self._record_path(kind, key), doc)

    def load_record(self, kind: str, key: str) -> dict:
        path = self._record_path(kind, key)
        if not path.exists():
            raise NotFoundError(f"{kind[:-1] if kind.endswith('s') else kind} {key!r} not found")
        return json.loads(path.read_text("utf-8"))

    def has_record(self, kind: str, key: str) -> bool:
        return self._record_path(kind, key).exists()

    def list_records(self, kind: str) -> list[str]:
        return sorted(p.stem for p in (self.root / kind).glob("*.json"))

    # --- models -----------------------------------------------------------

    def save_model_bytes(self, name: str, data: bytes) -> None:
        atomic_write_bytes(self.root / "models" / f"{name}.clm", data)

    def load_model_bytes(self, name: str) -> bytes:
        path = self.root / "models" / f"{name}.clm"
        if not path.exists():
            raise NotFoundError(f"model {name!r} not found")
        return path.read_bytes()

    # --- teacher response cache --------------------------------------------

    def cache_get(self, key: str) -> str | None:
        path = self.root / "cache" / key[:2] / f"{key}.json"
        if not path.exists():
            return None
        return json.loads(path.read_text("utf-8"))["response"]

    def cache_put(self, key: str, value: str) -> None:
        path = self.root / "cache" / key[:2] / f"{key}.json"
        atomic_write_json(path, {"response": value})


class StoreCache:
    """AnnotationCache protocol adapter over a DataStore."""

    def __init__(self, store: DataStore):
        self._store = store
        self.hits = 0
        self.misses = 0

    def get(self, key: str) -> str | None:
        value = self._store.cache_get(key)
        if value is None:
            self.misses += 1
        else:
            self.hits += 1
        return value

    def put(self, key: str, value: str) -> None:
        self._store.cache_put(key, value)
