"""Seeded synthetic corpus generation plus a scripted lookup teacher.

The generator plants token -> label rules over the active taxonomy:
every concern node gets unique signature tokens, one designated rare node
stays around a few percent positive, and its tokens also leak into
negative passages as decoys. That leakage is what makes the rare label
genuinely hard for an unweighted student, so imbalance weighting has
something real to fix. Gold labels record planted intent, not token
presence; the scripted teacher answers from that intent.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import Sequence

import numpy as np

from .errors import TeacherError
from .features import FeaturizerConfig
from .ingest import Document, ingest_text
from .students import StudentModel
from .taxonomy import LabelVector, Taxonomy
from .teacher import format_multilabel_response

RELEVANCE_TERMS = ("vaccine", "vaccines", "vaccination", "immunization", "vaccinated")

_FILLER_WORDS = (
    "people community health report article question reader family doctor "
    "clinic season news story letter comment debate meeting school parent "
    "child neighbor friend morning evening winter summer policy program "
    "update notice record history review detail moment reason example "
    "number change effort result method choice opinion feeling message "
    "group leader member voice paper page week month year day matter "
    "point course level system study topic idea issue plan case fact "
    "world country town street house office market garden kitchen"
).split()


def node_tokens(node_id: str) -> tuple[str, str]:
    """Two synthetic signature tokens per node, e.g. sig3x2a / sig3x2b."""
    stem = "sig" + node_id.replace(".", "x")
    return (stem + "a", stem + "b")


@dataclass(frozen=True)
class SyntheticConfig:
    n_articles: int = 320
    passages_per_article: int = 14  # mean; actual counts vary +/- 40%
    seed: int = 0
    relevant_fraction: float = 0.72
    concern_free_fraction: float = 0.30  # of relevant passages
    label_rate: float = 0.10  # per non-rare node, among concern passages
    rare_node_id: str = "2.4"
    rare_rate: float = 0.03  # among relevant passages
    decoy_rate: float = 0.10  # rare-token decoys, same contexts as positives
    start_date: date = date(2019, 1, 1)
    days_span: int = 730


@dataclass
class SyntheticCorpus:
    config: SyntheticConfig
    taxonomy: Taxonomy
    documents: list[Document]
    gold_labels: dict[str, LabelVector] = field(default_factory=dict)  # passage_id ->
    gold_relevance: dict[str, int] = field(default_factory=dict)

    @property
    def passages(self):
        return [p for doc in self.documents for p in doc.passages]

    def teacher_script(self) -> dict:
        """Text-hash -> gold answers, the payload a LookupTeacher consumes."""
        entries = {}
        for doc in self.documents:
            for p in doc.passages:
                entries[_text_key(p.text)] = {
                    "relevance": self.gold_relevance[p.passage_id],
                    "labels": [int(v) for v in self.gold_labels[p.passage_id].values],
                }
        return {
            "taxonomy_version": self.taxonomy.version,
            "node_ids": list(self.taxonomy.ids),
            "entries": entries,
        }


def _text_key(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _render_passage(rng: np.random.Generator, planted: list[str]) -> str:
    """Filler words plus planted tokens, shuffled into a few sentences."""
    n_filler = int(rng.integers(10, 17))
    words = [str(w) for w in rng.choice(_FILLER_WORDS, size=n_filler)]
    words.extend(planted)
    rng.shuffle(words)
    sentences = []
    i = 0
    while i < len(words):
        take = int(rng.integers(6, 11))
        chunk = words[i : i + take]
        i += take
        sentences.append(" ".join(chunk).capitalize() + ".")
    return " ".join(sentences)


def generate(config: SyntheticConfig, taxonomy: Taxonomy) -> SyntheticCorpus:
    """Deterministic corpus of dated articles with per-passage gold labels."""
    rng = np.random.default_rng(config.seed)
    rare_idx = taxonomy.index_of(config.rare_node_id)
    width = len(taxonomy)
    rare_tokens = node_tokens(config.rare_node_id)

    corpus = SyntheticCorpus(config=config, taxonomy=taxonomy, documents=[])
    seen_texts: set[str] = set()
    day_step = max(1, config.days_span // max(1, config.n_articles))
    rare_among_concern = min(
        1.0, config.rare_rate / max(1e-9, 1.0 - config.concern_free_fraction)
    )
    # the rare node uses a single signature token shared by positives and
    # decoys, so the only way to trade recall for precision is the loss weight
    rare_token = rare_tokens[0]

    for a in range(config.n_articles):
        ppa = config.passages_per_article
        n_passages = int(rng.integers(max(1, int(ppa * 0.6)), int(ppa * 1.4) + 1))
        paragraphs: list[str] = []
        labels_per_paragraph: list[LabelVector] = []
        relevance_per_paragraph: list[int] = []
        for _ in range(n_passages):
            relevant = rng.random() < config.relevant_fraction
            planted: list[str] = []
            values = [0] * width
            concern_bearing = False
            if relevant:
                for term in rng.choice(RELEVANCE_TERMS, size=int(rng.integers(1, 3))):
                    planted.append(str(term))
                concern_bearing = rng.random() >= config.concern_free_fraction
                if concern_bearing:
                    if rng.random() < rare_among_concern:
                        values[rare_idx] = 1
                        planted.append(rare_token)
                    for c in range(width):
                        if c == rare_idx:
                            continue
                        if rng.random() < config.label_rate:
                            values[c] = 1
                    if sum(values) == 0:
                        forced = int(rng.integers(0, width))
                        if forced == rare_idx:
                            forced = (forced + 1) % width
                        values[forced] = 1
                    for c in range(width):
                        if c == rare_idx or not values[c]:
                            continue
                        toks = node_tokens(taxonomy.nodes[c].id)
                        count = int(rng.integers(1, 3))
                        for t in rng.choice(toks, size=count, replace=False):
                            planted.append(str(t))
            # decoys go only where positives also live (concern-bearing text)
            # plus irrelevant text, so the rare token stays ambiguous without
            # handing the student a clean co-occurrence shortcut
            if (
                not values[rare_idx]
                and (concern_bearing or not relevant)
                and rng.random() < config.decoy_rate
            ):
                planted.append(rare_token)
            text = _render_passage(rng, planted)
            while text in seen_texts:  # lookup teacher keys on exact text
                text = _render_passage(rng, planted)
            seen_texts.add(text)
            paragraphs.append(text)
            labels_per_paragraph.append(LabelVector(values=tuple(values)))
            relevance_per_paragraph.append(int(relevant))

        doc_id = f"synth{a:05d}"
        published = config.start_date + timedelta(days=a * day_step)
        doc = ingest_text(
            "\n\n".join(paragraphs),
            doc_id=doc_id,
            source="file",
            published_at=published,
        )
        if len(doc.passages) != len(paragraphs):
            raise AssertionError("generator paragraphs did not segment one-to-one")
        corpus.documents.append(doc)
        for p, labels, rel in zip(doc.passages, labels_per_paragraph, relevance_per_paragraph):
            corpus.gold_labels[p.passage_id] = labels
            corpus.gold_relevance[p.passage_id] = rel
    return corpus


class LookupTeacher:
    """Scripted teacher answering from a prepared text -> labels table.

    Understands both prompt families by slicing off the paragraph after the
    final input marker, so it exercises the real prompt/parse wire format.
    """

    def __init__(self, script: dict, taxonomy: Taxonomy):
        if script.get("taxonomy_version") != taxonomy.version:
            raise TeacherError(
                "teacher script was generated for taxonomy "
                f"{script.get('taxonomy_version')!r}, active is {taxonomy.version!r}"
            )
        self.taxonomy = taxonomy
        self.entries: dict[str, dict] = script["entries"]
        self.calls = 0

    @classmethod
    def from_corpus(cls, corpus: SyntheticCorpus) -> "LookupTeacher":
        return cls(corpus.teacher_script(), corpus.taxonomy)

    @classmethod
    def from_file(cls, path, taxonomy: Taxonomy) -> "LookupTeacher":
        with open(path, "r", encoding="utf-8") as f:
            return cls(json.load(f), taxonomy)

    def _lookup(self, prompt: str, marker: str) -> dict:
        pos = prompt.rfind(marker)
        if pos < 0:
            raise TeacherError(f"prompt lacks expected marker {marker!r}")
        text = prompt[pos + len(marker):]
        entry = self.entries.get(_text_key(text))
        if entry is None:
            raise TeacherError("passage not present in teacher script")
        return entry

    def complete(self, prompt: str) -> str:
        self.calls += 1
        if "Paragraph input: " in prompt:
            entry = self._lookup(prompt, "Paragraph input: ")
            return "Yes" if entry["relevance"] else "No"
        entry = self._lookup(prompt, "\nParagraph: ")
        labels = LabelVector(values=tuple(entry["labels"]))
        return format_multilabel_response(labels, self.taxonomy)


def keyword_model(
    rules: dict[str, Sequence[str]],
    taxonomy: Taxonomy,
    cfg: FeaturizerConfig | None = None,
    taxonomy_version: str | None = None,
) -> StudentModel:
    """Hand-built student whose heads fire on given unigram keywords.

    Used as a deterministic classifier fixture: weight +10 on each keyword
    column, bias -5, so one keyword pushes a label's score to ~0.993.
    """
    from .features import hash_feature

    cfg = cfg or FeaturizerConfig(hash_dims=2**14, n_gram_range=(1, 1))
    width = len(taxonomy)
    W = np.zeros((width, cfg.hash_dims))
    for node_id, words in rules.items():
        row = taxonomy.index_of(node_id)
        for word in words:
            if " " in word:
                raise ValueError("keyword_model rules must be single tokens")
            W[row, hash_feature(word.lower(), cfg)] += 10.0
    return StudentModel(
        featurizer=cfg,
        weights=W,
        biases=np.full(width, -5.0),
        thresholds=np.full(width, 0.5),
        taxonomy_version=taxonomy_version or taxonomy.version,
        training_meta={"scheme": "scripted-keyword-fixture"},
        threshold_flags=(False,) * width,
    )


def keyword_relevance_model(
    keywords: Sequence[str],
    cfg: FeaturizerConfig | None = None,
    taxonomy_version: str = "",
) -> StudentModel:
    """Single-head variant of keyword_model for relevance fixtures."""
    from .features import hash_feature

    cfg = cfg or FeaturizerConfig(hash_dims=2**14, n_gram_range=(1, 1))
    W = np.zeros((1, cfg.hash_dims))
    for word in keywords:
        W[0, hash_feature(word.lower(), cfg)] += 10.0
    return StudentModel(
        featurizer=cfg,
        weights=W,
        biases=np.array([-5.0]),
        thresholds=np.array([0.5]),
        taxonomy_version=taxonomy_version,
        training_meta={"scheme": "scripted-keyword-fixture"},
        threshold_flags=(False,),
    )
