"""Article-level aggregation, rolling trend series, event comparison, and
keyword clouds over a classified synthetic corpus.

Run: python3 demos/04_trends_and_events.py
"""

from datetime import date

from concernlens.analytics import (
    ArticleLabel,
    aggregate_article,
    event_comparison,
    keyword_cloud,
    rolling_average,
    trends_to_csv,
)
from concernlens.synthetic import SyntheticConfig, generate
from concernlens.taxonomy import default_taxonomy, label_set

tax = default_taxonomy()
corpus = generate(SyntheticConfig(n_articles=300, passages_per_article=10, seed=21), tax)

# an article carries a concern iff any of its passages does (element-wise max)
articles = []
for doc in corpus.documents:
    vectors = [corpus.gold_labels[p.passage_id] for p in doc.passages]
    articles.append(
        ArticleLabel(doc_id=doc.doc_id, labels=aggregate_article(vectors), date=doc.published_at)
    )
print(f"{len(articles)} dated articles "
      f"({articles[0].date} .. {articles[-1].date})")

sample = articles[0]
print(f"example: {sample.doc_id} carries {label_set(sample.labels, tax)}")

# ---------------------------------------------------------------------------
# Rolling average: trailing window, counts kept integer until one division
# ---------------------------------------------------------------------------
series = rolling_average(articles, window=100, concern_ids=list(tax.ids))
parents = [s for s in series if "." not in s.concern_id]
print(f"\nrolling average (window 100), parent concerns, last point:")
for s in parents:
    print(f"  {s.concern_id} {tax.node(s.concern_id).name:<32} {s.points[-1].value:.3f}")

csv_text = trends_to_csv(series)
print(f"CSV export: {len(csv_text.splitlines())} lines, "
      f"header: {csv_text.splitlines()[0][:40]}...")

# ---------------------------------------------------------------------------
# Before/after comparison around an event date
# ---------------------------------------------------------------------------
mid = articles[len(articles) // 2].date
changes = event_comparison(articles, mid, 180, 180, concern_ids=list(tax.ids))
moved = sorted(
    (c for c in changes if not c.undefined), key=lambda c: -abs(c.rel_change)
)[:3]
print(f"\nlargest shifts around {mid}:")
for c in moved:
    print(f"  {c.concern_id}: {c.pre_prop:.3f} -> {c.post_prop:.3f} ({c.rel_change:+.0%})")

# ---------------------------------------------------------------------------
# Keyword cloud for one concern: counts over its positive passages
# ---------------------------------------------------------------------------
target = "3"
idx = tax.index_of(target)
texts = [
    p.text
    for doc in corpus.documents
    for p in doc.passages
    if corpus.gold_labels[p.passage_id][idx]
]
cloud = keyword_cloud(texts, target, top_k=8)
print(f"\ntop terms for concern {target} ({tax.node(target).name}):")
for term, count in cloud.entries:
    print(f"  {term:<16} {count}")
