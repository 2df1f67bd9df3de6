import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from concernlens.errors import (
    EmptyStoreError,
    InterventionError,
    NoConcernsError,
    UnknownNodeError,
)
from concernlens.features import FeaturizerConfig
from concernlens.interventions import (
    InterventionDoc,
    InterventionStore,
    classify_and_match,
    default_interventions,
    jaccard,
    load_interventions,
    match_interventions,
)
from concernlens.students import WeightingScheme, train_on_texts
from concernlens.taxonomy import LabelVector, default_taxonomy


def store_of(*label_sets):
    docs = tuple(
        InterventionDoc(
            intervention_id=f"i{k:03d}",
            title=f"doc {k}",
            audience="patient" if k % 2 else "expert",
            labels=frozenset(labels),
        )
        for k, labels in enumerate(label_sets)
    )
    return InterventionStore(docs=docs)


class TestJaccard:
    def test_identity_is_one(self):
        assert jaccard({"1", "3.2"}, {"1", "3.2"}) == 1.0

    def test_disjoint_is_zero(self):
        assert jaccard({"1"}, {"2"}) == 0.0

    def test_partial_overlap(self):
        # |{3.2}| / |{1, 3.2, 5}| = 1/3
        assert jaccard({"1", "3.2"}, {"3.2", "5"}) == pytest.approx(1 / 3)

    def test_both_empty_zero_by_convention(self):
        assert jaccard(set(), set()) == 0.0

    @given(
        st.sets(st.sampled_from(["1", "2", "3", "4", "5", "1.1", "3.2"])),
        st.sets(st.sampled_from(["1", "2", "3", "4", "5", "1.1", "3.2"])),
    )
    def test_symmetric_and_bounded(self, a, b):
        assert jaccard(a, b) == jaccard(b, a)
        assert 0.0 <= jaccard(a, b) <= 1.0
        if a:
            assert jaccard(a, a) == 1.0


class TestMatchInterventions:
    def setup_method(self):
        self.t = default_taxonomy()

    def q(self, *ids):
        return LabelVector.from_ids(ids, self.t)

    def test_exact_match_scores_one(self):
        store = store_of({"3", "3.2"})
        matches = match_interventions(self.q("3", "3.2"), store, self.t)
        assert matches[0].score == 1.0
        assert matches[0].doc.intervention_id == "i000"

    def test_superset_doc_ranks_below_exact(self):
        store = store_of({"3"}, {"3", "3.3"})
        matches = match_interventions(self.q("3"), store, self.t, top_k=2)
        assert [m.doc.intervention_id for m in matches] == ["i000", "i001"]
        assert matches[0].score == 1.0
        assert matches[1].score == 0.5

    def test_tie_breaks_by_id(self):
        store = store_of({"1"}, {"1"})
        matches = match_interventions(self.q("1"), store, self.t, top_k=2)
        assert [m.doc.intervention_id for m in matches] == ["i000", "i001"]
        assert matches[0].score == matches[1].score == 1.0

    def test_empty_query_rejected(self):
        store = store_of({"1"})
        with pytest.raises(NoConcernsError):
            match_interventions(LabelVector.zeros(24), store, self.t)

    def test_empty_store_rejected(self):
        with pytest.raises(EmptyStoreError):
            match_interventions(self.q("1"), InterventionStore(docs=()), self.t)

    def test_top_k_truncates(self):
        store = store_of(*[{"1"} for _ in range(10)])
        assert len(match_interventions(self.q("1"), store, self.t, top_k=3)) == 3

    def test_random_queries_match_exhaustive_oracle(self):
        rng = np.random.default_rng(7)
        t = self.t
        ids = list(t.ids)
        store = default_interventions(t)
        assert len(store) == 50
        for _ in range(100):
            n_pos = rng.integers(1, 6)
            chosen = rng.choice(ids, size=n_pos, replace=False).tolist()
            query = LabelVector.from_ids(chosen, t)
            got = match_interventions(query, store, t, top_k=50)
            # oracle: score every doc with an independent jaccard and sort
            def j(a, b):
                a, b = set(a), set(b)
                return len(a & b) / len(a | b) if a | b else 0.0

            oracle = sorted(
                ((d, j(chosen, d.labels)) for d in store.docs),
                key=lambda x: (-x[1], x[0].intervention_id),
            )
            assert [m.doc.intervention_id for m in got] == [d.intervention_id for d, _ in oracle]
            assert [m.score for m in got] == [s for _, s in oracle]

    def test_adding_doc_preserves_relative_order(self):
        store = store_of({"1"}, {"1", "2"}, {"3"})
        q = self.q("1", "2")
        before = [m.doc.intervention_id for m in match_interventions(q, store, self.t, top_k=10)]
        bigger = InterventionStore(
            docs=store.docs
            + (
                InterventionDoc(
                    intervention_id="zzz", title="new", audience="expert", labels=frozenset({"5"})
                ),
            )
        )
        after = [m.doc.intervention_id for m in match_interventions(q, bigger, self.t, top_k=10)]
        assert [d for d in after if d != "zzz"] == before


class TestStoreLoading:
    def test_default_store_validates(self):
        t = default_taxonomy()
        store = default_interventions(t)
        assert len(store) == 50
        audiences = {d.audience for d in store.docs}
        assert audiences == {"patient", "expert"}

    def test_unknown_label_rejected(self):
        t = default_taxonomy()
        line = json.dumps(
            {"id": "x", "title": "t", "audience": "patient", "labels": ["9.9"]}
        )
        with pytest.raises(UnknownNodeError):
            load_interventions(line, t)

    def test_missing_field_rejected(self):
        with pytest.raises(InterventionError, match="labels"):
            load_interventions('{"id": "x", "title": "t", "audience": "patient"}')

    def test_empty_labels_rejected(self):
        with pytest.raises(InterventionError):
            load_interventions(
                '{"id": "x", "title": "t", "audience": "patient", "labels": []}'
            )

    def test_duplicate_id_rejected(self):
        line = json.dumps(
            {"id": "x", "title": "t", "audience": "patient", "labels": ["1"]}
        )
        with pytest.raises(InterventionError, match="duplicate"):
            load_interventions(line + "\n" + line)


class TestClassifyAndMatch:
    def make_model(self, taxonomy):
        # deliberately simple trained student: "conspiracy" drives 5.2 and 5
        texts, rows = [], []
        width = len(taxonomy)
        i52 = taxonomy.index_of("5.2")
        i5 = taxonomy.index_of("5")
        for k in range(30):
            if k % 2 == 0:
                texts.append(f"conspiracy cover up number {k}")
                row = [0] * width
                row[i52] = 1
                row[i5] = 1
            else:
                texts.append(f"calm neutral report number {k}")
                row = [0] * width
            rows.append(row)
        return train_on_texts(
            texts, np.array(rows), WeightingScheme("baseline"),
            featurizer=FeaturizerConfig(hash_dims=2**12),
            taxonomy_version=taxonomy.version, epochs=40, lr=0.5,
        )

    def test_detects_and_ranks(self):
        t = default_taxonomy()
        model = self.make_model(t)
        store = store_of({"5", "5.2"}, {"1"})
        result = classify_and_match("a grand conspiracy cover up", model, store, t)
        assert result.detected == ("5", "5.2")
        assert result.matches[0].doc.intervention_id == "i000"
        assert result.matches[0].score == 1.0

    def test_no_concerns_typed_empty_result(self):
        t = default_taxonomy()
        model = self.make_model(t)
        store = store_of({"5"})
        result = classify_and_match("calm neutral report", model, store, t)
        assert result.no_concerns
        assert result.matches == ()
        assert len(result.scores) == len(t)
