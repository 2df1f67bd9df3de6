"""Turn raw text, uploaded files, and URLs into segmented documents.

Every document carries its full extracted text plus an ordered list of
passages addressed by exact character offsets, so downstream consumers
(span highlighting, exports) can always recover passage text as
``raw_text[start:end]``.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import re
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from html.parser import HTMLParser
from typing import BinaryIO, Iterable, Iterator

import requests

from .errors import (
    EmptyExtractionError,
    EmptyInputError,
    FetchError,
    IngestError,
    NonHtmlContentError,
    SchemaError,
)

DEFAULT_MAX_PASSAGE_LEN = 1200
DEFAULT_FETCH_TIMEOUT = 10.0
DEFAULT_FETCH_RETRIES = 2

_PARA_BREAK = re.compile(r"\n[ \t\r\f\v]*\n+")
_SENT_BREAK = re.compile(r"(?<=[.!?])[\"')\]]*\s+")


@dataclass(frozen=True)
class Passage:
    """A contiguous slice [start, end) of the parent document's raw_text."""

    passage_id: str
    doc_id: str
    start: int
    end: int
    text: str


@dataclass(frozen=True)
class Document:
    doc_id: str
    source: str  # "text" | "file" | "url"
    raw_text: str
    passages: tuple[Passage, ...]
    url: str | None = None
    published_at: date | None = None
    fetched_at: str | None = None

    def validate(self) -> None:
        prev_end = 0
        for p in self.passages:
            if not (0 <= p.start < p.end <= len(self.raw_text)):
                raise IngestError(f"passage {p.passage_id} offsets out of bounds")
            if p.start < prev_end:
                raise IngestError(f"passage {p.passage_id} overlaps its predecessor")
            if self.raw_text[p.start : p.end] != p.text:
                raise IngestError(f"passage {p.passage_id} text does not match slice")
            prev_end = p.end


def _trim_span(text: str, start: int, end: int) -> tuple[int, int]:
    while start < end and text[start].isspace():
        start += 1
    while end > start and text[end - 1].isspace():
        end -= 1
    return start, end


def _hard_wrap(text: str, start: int, end: int, max_len: int) -> list[tuple[int, int]]:
    """Split an oversized sentence at whitespace (or mid-word as last resort)."""
    spans = []
    pos = start
    while end - pos > max_len:
        window = text[pos : pos + max_len + 1]
        cut = -1
        for m in re.finditer(r"\s", window):
            cut = m.start()
        split_at = pos + cut if cut > 0 else pos + max_len
        spans.append((pos, split_at))
        pos = split_at
        while pos < end and text[pos].isspace():
            pos += 1
    if pos < end:
        spans.append((pos, end))
    return spans


def _sentence_spans(text: str, start: int, end: int) -> list[tuple[int, int]]:
    spans = []
    pos = start
    for m in _SENT_BREAK.finditer(text, start, end):
        spans.append((pos, m.start() + len(m.group().rstrip())))
        pos = m.end()
    if pos < end:
        spans.append((pos, end))
    return spans


def segment(raw_text: str, max_passage_len: int = DEFAULT_MAX_PASSAGE_LEN) -> list[tuple[int, int]]:
    """Compute passage spans: paragraphs, with oversized paragraphs packed
    greedily from sentences.

    Returns trimmed, strictly increasing, non-overlapping (start, end) spans
    whose lengths never exceed ``max_passage_len``. Deterministic.
    """
    if max_passage_len < 1:
        raise ValueError("max_passage_len must be >= 1")
    paragraphs = []
    pos = 0
    for m in _PARA_BREAK.finditer(raw_text):
        paragraphs.append((pos, m.start()))
        pos = m.end()
    paragraphs.append((pos, len(raw_text)))

    spans: list[tuple[int, int]] = []
    for p_start, p_end in paragraphs:
        p_start, p_end = _trim_span(raw_text, p_start, p_end)
        if p_start >= p_end:
            continue
        if p_end - p_start <= max_passage_len:
            spans.append((p_start, p_end))
            continue
        # pack sentences greedily, never splitting one mid-way unless the
        # sentence alone exceeds the limit
        chunk_start = chunk_end = None
        for s_start, s_end in _sentence_spans(raw_text, p_start, p_end):
            s_start, s_end = _trim_span(raw_text, s_start, s_end)
            if s_start >= s_end:
                continue
            if s_end - s_start > max_passage_len:
                if chunk_start is not None:
                    spans.append((chunk_start, chunk_end))
                    chunk_start = chunk_end = None
                spans.extend(_hard_wrap(raw_text, s_start, s_end, max_passage_len))
                continue
            if chunk_start is None:
                chunk_start, chunk_end = s_start, s_end
            elif s_end - chunk_start <= max_passage_len:
                chunk_end = s_end
            else:
                spans.append((chunk_start, chunk_end))
                chunk_start, chunk_end = s_start, s_end
        if chunk_start is not None:
            spans.append((chunk_start, chunk_end))

    return [
        (s, e)
        for s, e in (_trim_span(raw_text, s, e) for s, e in spans)
        if s < e
    ]


def _make_passages(doc_id: str, raw_text: str, max_passage_len: int) -> tuple[Passage, ...]:
    return tuple(
        Passage(
            passage_id=f"{doc_id}p{i:04d}",
            doc_id=doc_id,
            start=s,
            end=e,
            text=raw_text[s:e],
        )
        for i, (s, e) in enumerate(segment(raw_text, max_passage_len))
    )


def _derived_doc_id(seed: str) -> str:
    return "d" + hashlib.sha256(seed.encode("utf-8")).hexdigest()[:12]


def ingest_text(
    body: str,
    *,
    published_at: date | None = None,
    source: str = "text",
    url: str | None = None,
    doc_id: str | None = None,
    fetched_at: str | None = None,
    max_passage_len: int = DEFAULT_MAX_PASSAGE_LEN,
) -> Document:
    if not body or not body.strip():
        raise EmptyInputError("input text is empty")
    doc_id = doc_id or _derived_doc_id(body)
    doc = Document(
        doc_id=doc_id,
        source=source,
        raw_text=body,
        passages=_make_passages(doc_id, body, max_passage_len),
        url=url,
        published_at=published_at,
        fetched_at=fetched_at,
    )
    doc.validate()
    return doc


# --- file ingestion ----------------------------------------------------------

@dataclass
class IngestSummary:
    """Per-file report: how many records made it, which lines were skipped."""

    total_records: int = 0
    ingested: int = 0
    skipped: list[tuple[int, str]] = field(default_factory=list)

    def skip(self, line_no: int, reason: str) -> None:
        self.skipped.append((line_no, reason))


def _parse_date(value: str | None, line_no: int) -> date | None:
    if value is None or value == "":
        return None
    try:
        return date.fromisoformat(value)
    except ValueError:
        raise IngestError(f"line {line_no}: invalid date {value!r} (want YYYY-MM-DD)")


def _record_to_document(
    rec: dict, line_no: int, max_passage_len: int
) -> Document:
    text = rec.get("text")
    if not isinstance(text, str) or not text.strip():
        raise IngestError(f"line {line_no}: missing or empty 'text' field")
    rec_id = rec.get("id")
    if rec_id is not None and not isinstance(rec_id, str):
        raise IngestError(f"line {line_no}: 'id' must be a string")
    doc_id = rec_id or f"d{line_no:06d}-{hashlib.sha256(text.encode()).hexdigest()[:8]}"
    return ingest_text(
        text,
        published_at=_parse_date(rec.get("date"), line_no),
        source="file",
        url=rec.get("url") or None,
        doc_id=doc_id,
        max_passage_len=max_passage_len,
    )


def iter_ingest_file(
    data: bytes | str | BinaryIO,
    fmt: str,
    *,
    summary: IngestSummary | None = None,
    max_passage_len: int = DEFAULT_MAX_PASSAGE_LEN,
) -> Iterator[Document]:
    """Stream documents out of an uploaded file.

    Malformed records are skipped and recorded on ``summary`` with their
    line number; processing continues. Memory use is bounded by the largest
    single record, not the file size.
    """
    if fmt not in ("jsonl", "csv", "plain"):
        raise SchemaError(f"unknown file format {fmt!r}")
    summary = summary if summary is not None else IngestSummary()

    if isinstance(data, bytes):
        stream: BinaryIO = io.BytesIO(data)
    elif isinstance(data, str):
        stream = io.BytesIO(data.encode("utf-8"))
    else:
        stream = data
    try:
        text_stream = io.TextIOWrapper(stream, encoding="utf-8")
    except Exception as exc:  # pragma: no cover - TextIOWrapper rarely fails here
        raise SchemaError(f"file is not valid UTF-8: {exc}")

    try:
        if fmt == "plain":
            body = text_stream.read()
            summary.total_records = 1
            try:
                doc = ingest_text(body, source="file", max_passage_len=max_passage_len)
            except EmptyInputError:
                summary.skip(1, "file is empty")
                return
            summary.ingested += 1
            yield doc
        elif fmt == "jsonl":
            for line_no, line in enumerate(text_stream, 1):
                if not line.strip():
                    continue
                summary.total_records += 1
                try:
                    rec = json.loads(line)
                    if not isinstance(rec, dict):
                        raise IngestError(f"line {line_no}: record is not an object")
                    doc = _record_to_document(rec, line_no, max_passage_len)
                except (json.JSONDecodeError, IngestError) as exc:
                    summary.skip(line_no, str(exc))
                    continue
                summary.ingested += 1
                yield doc
        else:  # csv
            reader = csv.DictReader(text_stream)
            if reader.fieldnames is None or "text" not in reader.fieldnames:
                raise SchemaError("CSV header must include a 'text' column")
            for row in reader:
                line_no = reader.line_num
                summary.total_records += 1
                rec = {k: v for k, v in row.items() if k in ("id", "url", "date", "text")}
                try:
                    doc = _record_to_document(rec, line_no, max_passage_len)
                except IngestError as exc:
                    summary.skip(line_no, str(exc))
                    continue
                summary.ingested += 1
                yield doc
    except UnicodeDecodeError as exc:
        raise SchemaError(f"file is not valid UTF-8: {exc}")
    finally:
        text_stream.detach()


def ingest_file(
    data: bytes | str | BinaryIO,
    fmt: str,
    *,
    max_passage_len: int = DEFAULT_MAX_PASSAGE_LEN,
) -> tuple[list[Document], IngestSummary]:
    """Eager wrapper around :func:`iter_ingest_file`."""
    summary = IngestSummary()
    docs = list(
        iter_ingest_file(data, fmt, summary=summary, max_passage_len=max_passage_len)
    )
    return docs, summary


# --- URL ingestion -----------------------------------------------------------

_SKIP_TAGS = frozenset(
    "script style noscript template nav header footer aside form iframe "
    "svg canvas button select option label".split()
)
_BLOCK_TAGS = frozenset(
    "p div section article main li ul ol dl dt dd h1 h2 h3 h4 h5 h6 "
    "blockquote pre table tr figure figcaption hr".split()
)
_CANDIDATE_TAGS = ("article", "main", "body")


class _MainContentParser(HTMLParser):
    """Collect text per candidate container, skipping boilerplate subtrees.

    Candidates are <article>, <main>, and <body>; text inside skipped tags
    (scripts, nav, footers, ...) is never credited to anyone.
    """

    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self._skip_depth = 0
        self._open: list[int] = []
        self.candidates: list[dict] = []

    def handle_starttag(self, tag, attrs):
        if tag in _SKIP_TAGS:
            self._skip_depth += 1
            return
        if self._skip_depth == 0 and tag in _CANDIDATE_TAGS:
            self.candidates.append({"tag": tag, "parts": []})
            self._open.append(len(self.candidates) - 1)
        if tag == "br":
            self._credit("\n")

    def handle_endtag(self, tag):
        if tag in _SKIP_TAGS:
            self._skip_depth = max(0, self._skip_depth - 1)
            return
        if tag in _BLOCK_TAGS:
            self._credit("\n\n")
        if tag in _CANDIDATE_TAGS and self._open:
            idx = self._open[-1]
            if self.candidates[idx]["tag"] == tag:
                self._open.pop()

    def handle_data(self, data):
        self._credit(data)

    def _credit(self, text: str) -> None:
        if self._skip_depth:
            return
        for idx in self._open:
            self.candidates[idx]["parts"].append(text)


def _normalize_extracted(text: str) -> str:
    text = re.sub(r"[ \t\r\f\v]+", " ", text)
    text = re.sub(r" ?\n ?", "\n", text)
    text = re.sub(r"\n{3,}", "\n\n", text)
    return text.strip()


def extract_main_text(html: str) -> str:
    """Best-effort main-article extraction.

    Prefers the largest <article>, then <main>, then the whole <body>,
    keeping whichever holds the bulk of the page's visible text. Boilerplate
    containers (nav, header, footer, aside, forms, scripts) are dropped
    wherever they appear.
    """
    parser = _MainContentParser()
    parser.feed(html)
    parser.close()
    texts: dict[str, list[str]] = {"article": [], "main": [], "body": []}
    for cand in parser.candidates:
        normalized = _normalize_extracted("".join(cand["parts"]))
        if normalized:
            texts[cand["tag"]].append(normalized)
    body_len = max((len(t) for t in texts["body"]), default=0)
    for tag in ("article", "main"):
        if texts[tag]:
            best = max(texts[tag], key=len)
            if len(best) >= 200 or len(best) >= 0.2 * body_len:
                return best
    if texts["body"]:
        return max(texts["body"], key=len)
    # pages without an explicit <body> still produce data via implied body
    leftovers = [
        _normalize_extracted("".join(c["parts"])) for c in parser.candidates
    ]
    leftovers = [t for t in leftovers if t]
    return max(leftovers, key=len) if leftovers else ""


def fetch_url(
    url: str,
    *,
    timeout: float = DEFAULT_FETCH_TIMEOUT,
    retries: int = DEFAULT_FETCH_RETRIES,
    session: requests.Session | None = None,
) -> str:
    """GET the URL and return its HTML, retrying transient failures."""
    if not re.match(r"^https?://", url):
        raise FetchError(f"not an http(s) URL: {url!r}")
    sess = session or requests.Session()
    last_exc: Exception | None = None
    for attempt in range(retries + 1):
        try:
            resp = sess.get(url, timeout=timeout)
        except requests.RequestException as exc:
            last_exc = exc
            continue
        if resp.status_code >= 400:
            last_exc = FetchError(f"GET {url} returned HTTP {resp.status_code}")
            if 400 <= resp.status_code < 500:
                break  # client errors won't heal on retry
            continue
        ctype = resp.headers.get("Content-Type", "").lower()
        if "html" not in ctype:
            raise NonHtmlContentError(f"GET {url} returned content type {ctype!r}")
        return resp.text
    if isinstance(last_exc, FetchError):
        raise last_exc
    raise FetchError(f"GET {url} failed after {retries + 1} attempts: {last_exc}")


def ingest_url(
    url: str,
    *,
    published_at: date | None = None,
    timeout: float = DEFAULT_FETCH_TIMEOUT,
    retries: int = DEFAULT_FETCH_RETRIES,
    session: requests.Session | None = None,
    max_passage_len: int = DEFAULT_MAX_PASSAGE_LEN,
) -> Document:
    html = fetch_url(url, timeout=timeout, retries=retries, session=session)
    text = extract_main_text(html)
    if not text:
        raise EmptyExtractionError(f"no article text could be extracted from {url}")
    return ingest_text(
        text,
        published_at=published_at,
        source="url",
        url=url,
        doc_id=_derived_doc_id(url),
        fetched_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        max_passage_len=max_passage_len,
    )
