import numpy as np
import pytest

from concernlens.errors import TeacherError
from concernlens.features import FeaturizerConfig
from concernlens.students import predict, predict_batch
from concernlens.synthetic import (
    LookupTeacher,
    SyntheticConfig,
    generate,
    keyword_model,
    keyword_relevance_model,
    node_tokens,
)
from concernlens.taxonomy import LabelVector, default_taxonomy
from concernlens.teacher import (
    TeacherConfig,
    annotate_corpus,
    build_multilabel_prompt,
    build_relevance_prompt,
    parse_multilabel_response,
    parse_relevance_response,
)

TAX = default_taxonomy()
SMALL = SyntheticConfig(n_articles=40, passages_per_article=10, seed=5)


@pytest.fixture(scope="module")
def corpus():
    return generate(SMALL, TAX)


class TestGenerator:
    def test_deterministic(self, corpus):
        again = generate(SMALL, TAX)
        assert [d.doc_id for d in again.documents] == [d.doc_id for d in corpus.documents]
        assert [d.raw_text for d in again.documents] == [d.raw_text for d in corpus.documents]
        assert again.gold_labels == corpus.gold_labels

    def test_documents_dated_ascending(self, corpus):
        dates = [d.published_at for d in corpus.documents]
        assert all(a <= b for a, b in zip(dates, dates[1:]))

    def test_every_passage_has_gold(self, corpus):
        for p in corpus.passages:
            assert p.passage_id in corpus.gold_labels
            assert p.passage_id in corpus.gold_relevance

    def test_passage_texts_unique(self, corpus):
        texts = [p.text for p in corpus.passages]
        assert len(set(texts)) == len(texts)

    def test_rare_label_rate_near_target(self):
        cfg = SyntheticConfig(n_articles=200, passages_per_article=12, seed=3)
        c = generate(cfg, TAX)
        rare_idx = TAX.index_of(cfg.rare_node_id)
        rel = [p for p in c.passages if c.gold_relevance[p.passage_id]]
        rate = sum(c.gold_labels[p.passage_id][rare_idx] for p in rel) / len(rel)
        assert 0.015 <= rate <= 0.05

    def test_concern_implies_relevant(self, corpus):
        for p in corpus.passages:
            if sum(corpus.gold_labels[p.passage_id].values) > 0:
                assert corpus.gold_relevance[p.passage_id] == 1

    def test_positive_nodes_plant_their_tokens(self, corpus):
        for p in corpus.passages:
            gold = corpus.gold_labels[p.passage_id]
            words = set(p.text.lower().replace(".", " ").split())
            for i, nid in enumerate(TAX.ids):
                if gold[i]:
                    assert words & set(node_tokens(nid)), (
                        f"passage {p.passage_id} positive for {nid} lacks tokens"
                    )

    def test_passages_per_article_configurable_to_fifteen(self):
        cfg = SyntheticConfig(n_articles=80, passages_per_article=15, seed=9)
        c = generate(cfg, TAX)
        mean_ppa = len(c.passages) / len(c.documents)
        assert 12 <= mean_ppa <= 18


class TestLookupTeacher:
    def test_relevance_answers_match_gold(self, corpus):
        teacher = LookupTeacher.from_corpus(corpus)
        for p in corpus.passages[:30]:
            raw = teacher.complete(build_relevance_prompt(p))
            assert parse_relevance_response(raw) == bool(corpus.gold_relevance[p.passage_id])

    def test_multilabel_answers_match_gold(self, corpus):
        teacher = LookupTeacher.from_corpus(corpus)
        for p in corpus.passages[:30]:
            raw = teacher.complete(build_multilabel_prompt(p, TAX))
            assert parse_multilabel_response(raw, TAX) == corpus.gold_labels[p.passage_id]

    def test_unknown_passage_rejected(self, corpus):
        teacher = LookupTeacher.from_corpus(corpus)
        with pytest.raises(TeacherError):
            teacher.complete(build_relevance_prompt("never generated text"))

    def test_script_round_trips_through_json(self, corpus, tmp_path):
        import json

        path = tmp_path / "script.json"
        path.write_text(json.dumps(corpus.teacher_script()))
        teacher = LookupTeacher.from_file(path, TAX)
        p = corpus.passages[0]
        raw = teacher.complete(build_multilabel_prompt(p, TAX))
        assert parse_multilabel_response(raw, TAX) == corpus.gold_labels[p.passage_id]

    def test_taxonomy_version_guard(self, corpus):
        script = corpus.teacher_script()
        script["taxonomy_version"] = "other"
        with pytest.raises(TeacherError):
            LookupTeacher(script, TAX)

    def test_through_annotation_pipeline(self, corpus):
        teacher = LookupTeacher.from_corpus(corpus)
        cfg = TeacherConfig(max_parallel=4, retry_limit=0, backoff_base=0.0)
        subset = corpus.passages[:40]
        records = annotate_corpus(subset, "multilabel", cfg, teacher, TAX)
        assert all(r.valid for r in records)
        for rec, p in zip(records, subset):
            assert rec.labels == corpus.gold_labels[p.passage_id]


class TestKeywordModelFixture:
    def test_fires_only_on_its_keywords(self):
        model = keyword_model({"2": ["need"], "3.2": ["thimerosal"]}, TAX)
        _, labels = predict(model, "I don't need the vaccine! No reason to get it")
        positives = [TAX.ids[i] for i, b in enumerate(labels) if b]
        assert positives == ["2"]
        _, labels = predict(model, "thimerosal is scary")
        positives = [TAX.ids[i] for i, b in enumerate(labels) if b]
        assert positives == ["3.2"]
        _, labels = predict(model, "nothing to see here")
        assert labels.sum() == 0

    def test_multi_word_rules_rejected(self):
        with pytest.raises(ValueError):
            keyword_model({"2": ["two words"]}, TAX)

    def test_relevance_variant(self):
        model = keyword_relevance_model(["vaccine", "vaccines"], taxonomy_version=TAX.version)
        _, labels = predict_batch(model, ["the vaccine debate", "cooking pasta"])
        assert labels[:, 0].tolist() == [1, 0]
