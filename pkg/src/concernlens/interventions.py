"""Curated intervention handouts matched to classified text by Jaccard
similarity between concern label sets.

Intervention labels are hand-tagged data, never model output; the store
validates them against the active taxonomy on load.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Sequence

from .errors import EmptyStoreError, InterventionError, NoConcernsError
from .taxonomy import LabelVector, Taxonomy, label_set


@dataclass(frozen=True)
class InterventionDoc:
    intervention_id: str
    title: str
    audience: str  # "patient" | "expert"
    labels: frozenset[str]
    url: str | None = None
    body: str | None = None

    def to_dict(self) -> dict:
        return {
            "id": self.intervention_id,
            "title": self.title,
            "audience": self.audience,
            "url": self.url,
            "labels": sorted(self.labels, key=lambda s: [int(p) for p in s.split(".")]),
        }


@dataclass(frozen=True)
class InterventionStore:
    docs: tuple[InterventionDoc, ...]

    def __len__(self) -> int:
        return len(self.docs)


@dataclass(frozen=True)
class Match:
    doc: InterventionDoc
    score: float


@dataclass(frozen=True)
class MatchResult:
    """Classification plus ranked matches, so callers can show both."""

    detected: tuple[str, ...]
    scores: tuple[float, ...]
    matches: tuple[Match, ...]

    @property
    def no_concerns(self) -> bool:
        return not self.detected


def jaccard(a: Iterable[str], b: Iterable[str]) -> float:
    """|a n b| / |a u b|; both empty -> 0 by convention."""
    sa, sb = set(a), set(b)
    union = sa | sb
    if not union:
        return 0.0
    return len(sa & sb) / len(union)


def load_interventions(
    source: str | bytes, taxonomy: Taxonomy | None = None
) -> InterventionStore:
    """Parse a JSONL store; validates labels against the taxonomy if given."""
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    docs = []
    seen: set[str] = set()
    for line_no, line in enumerate(source.splitlines(), 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise InterventionError(f"line {line_no}: invalid JSON: {exc}")
        for key in ("id", "title", "audience", "labels"):
            if key not in rec:
                raise InterventionError(f"line {line_no}: missing field {key!r}")
        if rec["audience"] not in ("patient", "expert"):
            raise InterventionError(
                f"line {line_no}: audience must be patient|expert, got {rec['audience']!r}"
            )
        labels = rec["labels"]
        if not isinstance(labels, list) or not labels:
            raise InterventionError(f"line {line_no}: labels must be a non-empty list")
        if taxonomy is not None:
            for node_id in labels:
                taxonomy.index_of(node_id)  # raises UnknownNodeError
        if rec["id"] in seen:
            raise InterventionError(f"line {line_no}: duplicate intervention id {rec['id']!r}")
        seen.add(rec["id"])
        docs.append(
            InterventionDoc(
                intervention_id=rec["id"],
                title=rec["title"],
                audience=rec["audience"],
                labels=frozenset(labels),
                url=rec.get("url"),
                body=rec.get("body"),
            )
        )
    return InterventionStore(docs=tuple(docs))


def default_interventions(taxonomy: Taxonomy | None = None) -> InterventionStore:
    data = resources.files("concernlens.data").joinpath("interventions.jsonl").read_text("utf-8")
    return load_interventions(data, taxonomy)


def match_interventions(
    query: LabelVector,
    store: InterventionStore,
    taxonomy: Taxonomy,
    top_k: int = 10,
) -> list[Match]:
    """Rank stored handouts by Jaccard similarity against the query's
    positive label set. Score descending, intervention id ascending on ties."""
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    if not len(store):
        raise EmptyStoreError("intervention store is empty")
    positives = set(label_set(query, taxonomy))
    if not positives:
        raise NoConcernsError("no concerns detected in query")
    ranked = sorted(
        (Match(doc=doc, score=jaccard(positives, doc.labels)) for doc in store.docs),
        key=lambda m: (-m.score, m.doc.intervention_id),
    )
    return ranked[:top_k]


def classify_and_match(
    text: str,
    model,
    store: InterventionStore,
    taxonomy: Taxonomy,
    top_k: int = 10,
) -> MatchResult:
    """Predict concern labels for the text, then rank interventions.

    A prediction with no positive labels yields a typed empty result rather
    than an error, so UIs can render guidance instead of a failure.
    """
    from .students import predict

    scores, labels = predict(model, text, taxonomy_version=taxonomy.version)
    query = LabelVector(values=tuple(int(x) for x in labels))
    detected = tuple(label_set(query, taxonomy))
    if not detected:
        return MatchResult(detected=(), scores=tuple(scores.tolist()), matches=())
    matches = match_interventions(query, store, taxonomy, top_k=top_k)
    return MatchResult(
        detected=detected, scores=tuple(scores.tolist()), matches=tuple(matches)
    )
