"""LLM-teacher annotation: prompt construction, response parsing, and the
batch pipeline that labels a corpus through a chat-completion endpoint.

The teacher sits behind a minimal client interface so the whole pipeline
runs against a scripted stand-in; nothing here requires a live model.
Responses are cached by (prompt, model name) hash, making reruns free and
restarts safe.
"""

from __future__ import annotations

import hashlib
import json
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

import numpy as np
import requests

from .errors import (
    AlignmentError,
    EmptyInputError,
    TeacherError,
    TeacherUnreachableError,
    UnknownNodeError,
    UnparseableResponseError,
)
from .ingest import Passage
from .taxonomy import LabelVector, Taxonomy

LABEL_PREFIX = "VaxConcerns"

RELEVANCE_PROMPT_TEMPLATE = (
    "You will be given a small paragraph of text. Please return whether the "
    "text is relevant to vaccines. Text is vaccine-related if it mentions "
    "vaccines in some way, indirectly or directly. Note that the sentences "
    "may be vaccine relevant even if there aren't any keywords like "
    '"vaccine" or "vaccination". Think carefully about your answer as this '
    "task is important, then return a 'Yes' or 'No' indicating if the "
    "paragraph discusses vaccination.\n"
    "Paragraph input: {paragraph}"
)

MULTILABEL_PREAMBLE = (
    "You are a healthcare expert helping to determine whether a passage "
    "includes vaccine concerns. You have a deep understanding of "
    "vaccine-related topics and are capable of providing accurate "
    "assessments regarding specific vaccine concerns mentioned in the "
    "passage.\n\n"
    'You will be given a passage and a set of vaccine concerns in a '
    'hierarchical order, labeled as "{first}", "{second}", ... , "{last}". '
    "You will have the definition for each of the labels.\n\n"
    "Vaccine Concerns:\n"
)

MULTILABEL_INSTRUCTION = (
    "Please read the passage and determine whether the specific concern "
    "about the vaccine is mentioned. If it is, return 1; otherwise, "
    "return 0.\n\n"
    "In your response, please return in the following format:\n"
)

INDIVIDUAL_INSTRUCTION = (
    "In your response, please only return for the {label} label. "
    "We will ask you about the other labels later."
)


def build_relevance_prompt(passage: Passage | str) -> str:
    """Relevance prompt with the passage substituted once, literally."""
    text = passage.text if isinstance(passage, Passage) else passage
    if not text or not text.strip():
        raise EmptyInputError("passage text is empty")
    return RELEVANCE_PROMPT_TEMPLATE.replace("{paragraph}", text)


def _label_token(node_id: str) -> str:
    return f"{LABEL_PREFIX}_{node_id}"


def build_multilabel_prompt(
    passage: Passage | str,
    taxonomy: Taxonomy,
    mode: str = "all_in_one",
    node_id: str | None = None,
) -> str:
    """All-in-one prompt listing every node with its definition; the
    individual variant appends a single-label instruction at the end."""
    text = passage.text if isinstance(passage, Passage) else passage
    if not text or not text.strip():
        raise EmptyInputError("passage text is empty")
    if mode not in ("all_in_one", "individual"):
        raise ValueError(f"unknown prompt mode {mode!r}")
    if mode == "individual":
        if node_id is None:
            raise ValueError("individual mode requires a node_id")
        taxonomy.index_of(node_id)  # raises UnknownNodeError

    ids = taxonomy.ids
    parts = [
        MULTILABEL_PREAMBLE.format(
            first=_label_token(ids[0]),
            second=_label_token(ids[1]) if len(ids) > 1 else _label_token(ids[0]),
            last=_label_token(ids[-1]),
        )
    ]
    for node in taxonomy.nodes:
        indent = "" if node.is_parent else "  "
        parts.append(
            f'{indent}- {_label_token(node.id)}: "{node.name}" - {node.definition}\n'
        )
    parts.append("\n")
    parts.append(MULTILABEL_INSTRUCTION)
    for nid in ids:
        parts.append(f"{_label_token(nid)}: [0/1]\n")
    parts.append(f"\nParagraph: {text}")
    if mode == "individual":
        parts.append(
            "\n\n" + INDIVIDUAL_INSTRUCTION.format(label=_label_token(node_id))
        )
    return "".join(parts)


_YESNO_RE = re.compile(r"\b(yes|no)\b", re.IGNORECASE)


def parse_relevance_response(raw: str) -> bool:
    """Scan for a standalone Yes/No token; ambiguity is unparseable."""
    found = {m.group(1).lower() for m in _YESNO_RE.finditer(raw)}
    if found == {"yes"}:
        return True
    if found == {"no"}:
        return False
    raise UnparseableResponseError(
        f"expected a standalone Yes or No, got {raw[:80]!r}"
    )


def parse_multilabel_response(raw: str, taxonomy: Taxonomy) -> LabelVector:
    """Extract one 0/1 per node, tolerating brackets, case, and spacing.

    Every node must appear exactly once with a binary value; anything else
    is unparseable (which triggers a retry upstream).
    """
    values = []
    for node_id in taxonomy.ids:
        pattern = re.compile(
            re.escape(LABEL_PREFIX)
            + r"[_\s]*"
            + re.escape(node_id)
            + r"(?![\d.])\s*[:=]?\s*\[?\s*([01])\s*\]?",
            re.IGNORECASE,
        )
        matches = pattern.findall(raw)
        if len(matches) != 1:
            problem = "missing" if not matches else "duplicated"
            raise UnparseableResponseError(
                f"label {_label_token(node_id)} {problem} in response"
            )
        values.append(int(matches[0]))
    return LabelVector(values=tuple(values))


def format_multilabel_response(labels: LabelVector, taxonomy: Taxonomy) -> str:
    """Render labels in the response format the prompts request (used by
    scripted teachers and round-trip tests)."""
    if len(labels) != len(taxonomy):
        raise AlignmentError("labels misaligned with taxonomy")
    return "\n".join(
        f"{_label_token(nid)}: [{int(labels[i])}]" for i, nid in enumerate(taxonomy.ids)
    )


# --- teacher clients ----------------------------------------------------------

@dataclass(frozen=True)
class TeacherConfig:
    endpoint: str = ""
    model_name: str = "gpt-teacher"
    api_key: str = ""
    max_parallel: int = 4
    retry_limit: int = 2
    timeout: float = 30.0
    backoff_base: float = 0.5
    temperature: float | None = None

    def __post_init__(self) -> None:
        if self.max_parallel < 1:
            raise ValueError("max_parallel must be >= 1")
        if self.retry_limit < 0:
            raise ValueError("retry_limit must be >= 0")


class TeacherClient(Protocol):
    def complete(self, prompt: str) -> str: ...


class HttpTeacher:
    """Chat-completion client: POST {model, messages:[{role,content}]} and
    read the first choice's text."""

    def __init__(self, config: TeacherConfig, session: requests.Session | None = None):
        if not config.endpoint:
            raise ValueError("HttpTeacher requires an endpoint")
        self.config = config
        self._session = session or requests.Session()

    def complete(self, prompt: str) -> str:
        body = {
            "model": self.config.model_name,
            "messages": [{"role": "user", "content": prompt}],
        }
        if self.config.temperature is not None:
            body["temperature"] = self.config.temperature
        headers = {"Content-Type": "application/json"}
        if self.config.api_key:
            headers["Authorization"] = f"Bearer {self.config.api_key}"
        try:
            resp = self._session.post(
                self.config.endpoint, json=body, headers=headers, timeout=self.config.timeout
            )
        except requests.RequestException as exc:
            raise TeacherUnreachableError(f"teacher request failed: {exc}") from exc
        if resp.status_code != 200:
            raise TeacherError(f"teacher returned HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            doc = resp.json()
            choice = doc["choices"][0]
            if "message" in choice:
                return choice["message"]["content"]
            return choice["text"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise TeacherError(f"malformed teacher response body: {exc}") from exc


class ScriptedTeacher:
    """Deterministic stand-in: answers from a response function or queue,
    optionally failing on chosen calls. Records every prompt it sees."""

    def __init__(
        self,
        respond: Callable[[str], str] | None = None,
        queue: Sequence[str] | None = None,
        fail_on_calls: set[int] | None = None,
        fail_with: Exception | None = None,
    ):
        self._respond = respond
        self._queue = list(queue) if queue is not None else None
        self._fail_on = fail_on_calls or set()
        self._fail_with = fail_with or TeacherUnreachableError("scripted failure")
        self.calls: list[str] = []
        self._lock = threading.Lock()

    @property
    def call_count(self) -> int:
        return len(self.calls)

    def complete(self, prompt: str) -> str:
        with self._lock:
            self.calls.append(prompt)
            call_no = len(self.calls)
            if call_no in self._fail_on:
                raise self._fail_with
            if self._queue is not None:
                if not self._queue:
                    raise TeacherError("scripted queue exhausted")
                return self._queue.pop(0)
        return self._respond(prompt)


# --- annotation cache and pipeline ---------------------------------------------

class AnnotationCache(Protocol):
    def get(self, key: str) -> str | None: ...
    def put(self, key: str, value: str) -> None: ...


class InMemoryCache:
    def __init__(self) -> None:
        self._data: dict[str, str] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def get(self, key: str) -> str | None:
        with self._lock:
            value = self._data.get(key)
            if value is None:
                self.misses += 1
            else:
                self.hits += 1
            return value

    def put(self, key: str, value: str) -> None:
        with self._lock:
            self._data[key] = value


def cache_key(prompt: str, model_name: str) -> str:
    h = hashlib.sha256()
    h.update(model_name.encode("utf-8"))
    h.update(b"\x00")
    h.update(prompt.encode("utf-8"))
    return h.hexdigest()


@dataclass(frozen=True)
class AnnotationRecord:
    passage_id: str
    labels: LabelVector
    provenance: str  # "teacher" | "human" | "student"
    valid: bool
    raw_response: str | None = None
    retries_used: int = 0
    from_cache: bool = False
    error: str | None = None

    def to_dict(self, node_ids: Sequence[str]) -> dict:
        if len(node_ids) != len(self.labels):
            raise AlignmentError("node_ids misaligned with labels")
        return {
            "passage_id": self.passage_id,
            "labels": {nid: int(self.labels[i]) for i, nid in enumerate(node_ids)},
            "provenance": self.provenance,
            "valid": self.valid,
        }


def _annotate_one(
    passage: Passage,
    prompt: str,
    parse: Callable[[str], LabelVector],
    teacher: TeacherClient,
    cfg: TeacherConfig,
    cache: AnnotationCache | None,
    zero: LabelVector,
) -> AnnotationRecord:
    key = cache_key(prompt, cfg.model_name)
    if cache is not None:
        cached = cache.get(key)
        if cached is not None:
            return AnnotationRecord(
                passage_id=passage.passage_id,
                labels=parse(cached),
                provenance="teacher",
                valid=True,
                raw_response=cached,
                retries_used=0,
                from_cache=True,
            )
    last_error: str | None = None
    raw: str | None = None
    for attempt in range(cfg.retry_limit + 1):
        if attempt and cfg.backoff_base > 0:
            time.sleep(cfg.backoff_base * 2 ** (attempt - 1))
        try:
            raw = teacher.complete(prompt)
        except TeacherError as exc:
            last_error = f"transport: {exc}"
            continue
        try:
            labels = parse(raw)
        except UnparseableResponseError as exc:
            last_error = f"parse: {exc}"
            continue
        if cache is not None:
            cache.put(key, raw)
        return AnnotationRecord(
            passage_id=passage.passage_id,
            labels=labels,
            provenance="teacher",
            valid=True,
            raw_response=raw,
            retries_used=attempt,
        )
    return AnnotationRecord(
        passage_id=passage.passage_id,
        labels=zero,
        provenance="teacher",
        valid=False,
        raw_response=raw,
        retries_used=cfg.retry_limit,
        error=last_error,
    )


def annotate_corpus(
    passages: Sequence[Passage],
    mode: str,
    cfg: TeacherConfig,
    teacher: TeacherClient,
    taxonomy: Taxonomy | None = None,
    cache: AnnotationCache | None = None,
) -> list[AnnotationRecord]:
    """Label every passage through the teacher, in input order.

    Responses come from the cache when available; fresh ones are retried
    with exponential backoff up to retry_limit, and passages whose
    responses never parse are flagged valid=False with all-zero labels
    rather than dropped. Raises TeacherUnreachableError only if no passage
    got any response at all.
    """
    if mode == "relevance":
        def build(p: Passage) -> str:
            return build_relevance_prompt(p)

        def parse(raw: str) -> LabelVector:
            return LabelVector(values=(1 if parse_relevance_response(raw) else 0,))

        zero = LabelVector.zeros(1)
    elif mode == "multilabel":
        if taxonomy is None:
            raise ValueError("multilabel annotation requires a taxonomy")
        def build(p: Passage) -> str:
            return build_multilabel_prompt(p, taxonomy, mode="all_in_one")

        def parse(raw: str) -> LabelVector:
            return parse_multilabel_response(raw, taxonomy)

        zero = LabelVector.zeros(len(taxonomy))
    else:
        raise ValueError(f"unknown annotation mode {mode!r}")

    if not passages:
        return []

    def work(passage: Passage) -> AnnotationRecord:
        return _annotate_one(passage, build(passage), parse, teacher, cfg, cache, zero)

    if cfg.max_parallel == 1:
        records = [work(p) for p in passages]
    else:
        with ThreadPoolExecutor(max_workers=cfg.max_parallel) as pool:
            records = list(pool.map(work, passages))

    transport_failures = [
        r for r in records if not r.valid and r.error and r.error.startswith("transport")
    ]
    if len(transport_failures) == len(records):
        raise TeacherUnreachableError(
            f"teacher unreachable for all {len(records)} passages "
            f"(last error: {transport_failures[-1].error})"
        )
    return records


def annotation_report(records: Sequence[AnnotationRecord]) -> dict:
    """Aggregate outcome summary for an annotation run."""
    return {
        "total": len(records),
        "valid": sum(r.valid for r in records),
        "invalid": sum(not r.valid for r in records),
        "from_cache": sum(r.from_cache for r in records),
        "retries_used": sum(r.retries_used for r in records),
        "errors": [
            {"passage_id": r.passage_id, "error": r.error}
            for r in records
            if r.error
        ],
    }


# --- individual-prompting threshold tuning -------------------------------------

def individual_threshold(
    samples_per_label: int,
    fractions: np.ndarray,
    gold: np.ndarray,
    node_ids: Sequence[str] | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-node decision thresholds over repeated-sampling positive fractions.

    ``fractions[i, c]`` is the share of positive teacher answers for item i,
    node c, out of ``samples_per_label`` draws. For each node the threshold
    maximizing F1 against gold is chosen from the observed fraction grid,
    ties resolving to the lowest value (favoring recall). Nodes without any
    gold positive default to 0.5 and are flagged.

    Returns (thresholds, best_f1s, flags).
    """
    if samples_per_label < 1:
        raise ValueError("samples_per_label must be >= 1")
    fractions = np.asarray(fractions, dtype=np.float64)
    gold = np.asarray(gold, dtype=np.int64)
    if fractions.ndim == 1:
        fractions = fractions.reshape(-1, 1)
    if gold.ndim == 1:
        gold = gold.reshape(-1, 1)
    if fractions.shape != gold.shape:
        raise AlignmentError("fractions and gold shapes differ")
    if fractions.shape[0] == 0:
        raise ValueError("gold validation set is empty")
    n, width = fractions.shape
    if node_ids is not None and len(node_ids) != width:
        raise AlignmentError("node_ids misaligned with fraction columns")

    thresholds = np.full(width, 0.5)
    best_f1s = np.zeros(width)
    flags = np.zeros(width, dtype=bool)
    for c in range(width):
        y = gold[:, c]
        if y.sum() == 0:
            flags[c] = True
            continue
        f = fractions[:, c]
        best_f1, best_t = -1.0, 0.5
        for t in np.unique(f):  # ascending: ties keep the lowest threshold
            pred = f >= t
            tp = int((pred & (y == 1)).sum())
            fp = int((pred & (y == 0)).sum())
            fn = int((~pred & (y == 1)).sum())
            denom = 2 * tp + fp + fn
            f1 = 2 * tp / denom if denom else 0.0
            if f1 > best_f1:
                best_f1, best_t = f1, float(t)
        thresholds[c] = best_t
        best_f1s[c] = best_f1
    return thresholds, best_f1s, flags


def relevance_filter_pipeline(passages: Sequence[Passage], relevance_model) -> list[Passage]:
    """Keep exactly the passages the relevance student marks positive,
    preserving input order."""
    from .students import predict_batch

    if not passages:
        return []
    _, labels = predict_batch(relevance_model, [p.text for p in passages])
    return [p for p, keep in zip(passages, labels[:, 0]) if keep]
