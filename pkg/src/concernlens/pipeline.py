"""Classification pipeline glue: classified documents, corpus files, and
annotation files shared by the CLI and the HTTP service.

Corpus file: JSONL, one document per line with raw text and passage
offsets. Annotation file: JSONL of {"passage_id", "labels": {node: 0/1},
"provenance", "valid"}. Classification output: one line per passage with
labels and scores keyed by node id.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import date
from typing import Iterable, Iterator, Sequence, TextIO

import numpy as np

from .errors import IngestError, StoreError
from .ingest import Document, Passage
from .students import StudentModel, predict_batch
from .storage import DataStore
from .taxonomy import LabelVector, Taxonomy


@dataclass(frozen=True)
class PassageResult:
    passage_id: str
    start: int
    end: int
    scores: tuple[float, ...]
    labels: tuple[int, ...]


@dataclass(frozen=True)
class ClassifiedDocument:
    doc_id: str
    passages: tuple[PassageResult, ...]
    article_labels: LabelVector
    published_at: date | None = None

    def check_or_invariant(self) -> None:
        """Article labels must equal the OR over passage labels."""
        width = len(self.article_labels)
        expected = [0] * width
        for p in self.passages:
            for i, b in enumerate(p.labels):
                if b:
                    expected[i] = 1
        if tuple(expected) != tuple(int(v) for v in self.article_labels.values):
            raise StoreError(
                f"classified document {self.doc_id}: article labels are not "
                "the OR of its passage labels"
            )

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "published_at": self.published_at.isoformat() if self.published_at else None,
            "article_labels": [int(v) for v in self.article_labels.values],
            "passages": [
                {
                    "passage_id": p.passage_id,
                    "start": p.start,
                    "end": p.end,
                    "scores": list(p.scores),
                    "labels": list(p.labels),
                }
                for p in self.passages
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ClassifiedDocument":
        return cls(
            doc_id=d["doc_id"],
            published_at=date.fromisoformat(d["published_at"]) if d.get("published_at") else None,
            article_labels=LabelVector(values=tuple(int(v) for v in d["article_labels"])),
            passages=tuple(
                PassageResult(
                    passage_id=p["passage_id"],
                    start=p["start"],
                    end=p["end"],
                    scores=tuple(p["scores"]),
                    labels=tuple(int(b) for b in p["labels"]),
                )
                for p in d["passages"]
            ),
        )


def classify_document(model: StudentModel, doc: Document, taxonomy: Taxonomy) -> ClassifiedDocument:
    return classify_documents(model, [doc], taxonomy)[0]


def classify_documents(
    model: StudentModel, docs: Sequence[Document], taxonomy: Taxonomy
) -> list[ClassifiedDocument]:
    """Batch classification: one featurize/predict pass over every passage."""
    texts = [p.text for doc in docs for p in doc.passages]
    if texts:
        scores, labels = predict_batch(model, texts, taxonomy_version=taxonomy.version)
    out: list[ClassifiedDocument] = []
    cursor = 0
    width = len(taxonomy)
    for doc in docs:
        results = []
        article = [0] * width
        for p in doc.passages:
            row_scores = tuple(float(s) for s in scores[cursor])
            row_labels = tuple(int(b) for b in labels[cursor])
            cursor += 1
            for i, b in enumerate(row_labels):
                if b:
                    article[i] = 1
            results.append(
                PassageResult(
                    passage_id=p.passage_id,
                    start=p.start,
                    end=p.end,
                    scores=row_scores,
                    labels=row_labels,
                )
            )
        out.append(
            ClassifiedDocument(
                doc_id=doc.doc_id,
                passages=tuple(results),
                article_labels=LabelVector(values=tuple(article)),
                published_at=doc.published_at,
            )
        )
    return out


# --- corpus files ---------------------------------------------------------

def document_to_dict(doc: Document) -> dict:
    return {
        "doc_id": doc.doc_id,
        "source": doc.source,
        "url": doc.url,
        "date": doc.published_at.isoformat() if doc.published_at else None,
        "fetched_at": doc.fetched_at,
        "raw_text": doc.raw_text,
        "passages": [
            {"passage_id": p.passage_id, "start": p.start, "end": p.end}
            for p in doc.passages
        ],
    }


def document_from_dict(d: dict) -> Document:
    raw = d["raw_text"]
    doc = Document(
        doc_id=d["doc_id"],
        source=d.get("source", "file"),
        raw_text=raw,
        url=d.get("url"),
        published_at=date.fromisoformat(d["date"]) if d.get("date") else None,
        fetched_at=d.get("fetched_at"),
        passages=tuple(
            Passage(
                passage_id=p["passage_id"],
                doc_id=d["doc_id"],
                start=p["start"],
                end=p["end"],
                text=raw[p["start"] : p["end"]],
            )
            for p in d["passages"]
        ),
    )
    doc.validate()
    return doc


def write_corpus(docs: Iterable[Document], fp: TextIO) -> int:
    count = 0
    for doc in docs:
        fp.write(json.dumps(document_to_dict(doc), sort_keys=True) + "\n")
        count += 1
    return count


def read_corpus(fp: TextIO) -> Iterator[Document]:
    for line_no, line in enumerate(fp, 1):
        if not line.strip():
            continue
        try:
            yield document_from_dict(json.loads(line))
        except (json.JSONDecodeError, KeyError) as exc:
            raise IngestError(f"corpus line {line_no}: {exc}")


# --- annotation files -------------------------------------------------------

def write_annotations(records, node_ids: Sequence[str], fp: TextIO) -> int:
    count = 0
    for rec in records:
        fp.write(json.dumps(rec.to_dict(node_ids), sort_keys=True) + "\n")
        count += 1
    return count


def read_annotations(fp: TextIO) -> list[dict]:
    out = []
    for line_no, line in enumerate(fp, 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            rec["passage_id"], rec["labels"]
        except (json.JSONDecodeError, KeyError) as exc:
            raise IngestError(f"annotation line {line_no}: {exc}")
        out.append(rec)
    return out


# --- store adapters ----------------------------------------------------------

def store_document(store: DataStore, doc: Document) -> None:
    blob = store.put_blob(doc.raw_text)
    record = document_to_dict(doc)
    del record["raw_text"]
    record["blob"] = blob
    store.save_record("documents", doc.doc_id, record)


def load_document(store: DataStore, doc_id: str) -> Document:
    record = store.load_record("documents", doc_id)
    record = dict(record)
    record["raw_text"] = store.get_blob_text(record.pop("blob"))
    return document_from_dict(record)


def store_classified(store: DataStore, cdoc: ClassifiedDocument) -> None:
    cdoc.check_or_invariant()
    store.save_record("classified", cdoc.doc_id, cdoc.to_dict())


def load_classified(store: DataStore, doc_id: str) -> ClassifiedDocument:
    return ClassifiedDocument.from_dict(store.load_record("classified", doc_id))
