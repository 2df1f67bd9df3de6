"""Teacher-student distillation on a synthetic corpus, end to end:
mock teacher -> relevance filter -> weighted multilabel students.

Uses a small corpus and short training so it finishes in ~30 s.
Run: python3 demos/03_distillation_pipeline.py
"""

import numpy as np

from concernlens.features import FeaturizerConfig
from concernlens.metrics import binary_metrics, multilabel_report
from concernlens.students import (
    WeightingScheme,
    predict_batch,
    select_thresholds,
    train_on_texts,
)
from concernlens.synthetic import LookupTeacher, SyntheticConfig, generate
from concernlens.taxonomy import default_taxonomy
from concernlens.teacher import TeacherConfig, annotate_corpus, relevance_filter_pipeline

tax = default_taxonomy()
cfg = SyntheticConfig(n_articles=120, passages_per_article=12, seed=17)
corpus = generate(cfg, tax)
print(f"synthetic corpus: {len(corpus.documents)} articles, {len(corpus.passages)} passages")

# the scripted teacher answers from the generator's planted labels, through
# the same prompt/response wire format a live endpoint would use
teacher = LookupTeacher.from_corpus(corpus)
tcfg = TeacherConfig(max_parallel=8, retry_limit=1, backoff_base=0.0)
featurizer = FeaturizerConfig(hash_dims=2**15, n_gram_range=(1, 1))

# ---------------------------------------------------------------------------
# Stage 1: relevance student distilled from teacher yes/no answers
# ---------------------------------------------------------------------------
rng = np.random.default_rng(0)
order = rng.permutation(len(corpus.passages))
rel_train = [corpus.passages[i] for i in order[:800]]
rel_test = [corpus.passages[i] for i in order[800:1100]]

rel_records = annotate_corpus(rel_train, "relevance", tcfg, teacher)
rel_model = train_on_texts(
    [p.text for p in rel_train],
    np.array([[r.labels[0]] for r in rel_records], dtype=float),
    WeightingScheme("baseline"),
    featurizer=featurizer, taxonomy_version=tax.version, epochs=25, lr=1.0, seed=1,
)
gold_rel = np.array([corpus.gold_relevance[p.passage_id] for p in rel_test], dtype=bool)
_, pred_rel = predict_batch(rel_model, [p.text for p in rel_test])
m = binary_metrics(pred_rel[:, 0].astype(bool), gold_rel)
print(f"\nrelevance student: acc={m.accuracy:.3f} P={m.precision:.3f} "
      f"R={m.recall:.3f} F1={m.f1:.3f}")

# ---------------------------------------------------------------------------
# Stage 2: filter to relevant passages, teacher-label them, train the
# multilabel student under different imbalance weightings
# ---------------------------------------------------------------------------
filtered = relevance_filter_pipeline(corpus.passages, rel_model)
print(f"relevance filter kept {len(filtered)}/{len(corpus.passages)} passages")

pool = filtered[:900]
heldout = [p for p in filtered[900:] if sum(corpus.gold_labels[p.passage_id].values) > 0][:200]
records = annotate_corpus(pool, "multilabel", tcfg, teacher, tax)
Y = np.array([list(r.labels.values) for r in records], dtype=float)
held_gold = np.array([list(corpus.gold_labels[p.passage_id].values) for p in heldout])
rare_idx = tax.index_of(cfg.rare_node_id)

print(f"\n{'scheme':<10} {'samples F1':>10} {'rare recall':>12}")
for scheme in ("baseline", "log1p", "no_clamp"):
    model = train_on_texts(
        pool_texts := [p.text for p in pool], Y, WeightingScheme(scheme),
        featurizer=featurizer, taxonomy_version=tax.version,
        epochs=80, lr=2.0, seed=7, l2=1.0 / len(pool),
    )
    _, pred = predict_batch(model, [p.text for p in heldout])
    rep = multilabel_report(pred, held_gold, label_ids=list(tax.ids))
    print(f"{scheme:<10} {rep.samples.f1:>10.3f} {rep.per_label[rare_idx].recall:>12.3f}")

print("\nweighting trades precision for recall on the rare label, as expected")
