"""Matching classified text to curated intervention handouts with Jaccard
similarity over concern label sets.

Run: python3 demos/05_interventions.py
"""

from concernlens.interventions import (
    classify_and_match,
    default_interventions,
    jaccard,
    match_interventions,
)
from concernlens.synthetic import keyword_model
from concernlens.taxonomy import LabelVector, default_taxonomy

tax = default_taxonomy()
store = default_interventions(tax)
print(f"bundled store: {len(store)} hand-tagged handouts")

# ---------------------------------------------------------------------------
# Jaccard on label sets
# ---------------------------------------------------------------------------
a, b = {"3", "3.2"}, {"3.2", "5"}
print(f"jaccard({a}, {b}) = {jaccard(a, b):.3f}")

# ---------------------------------------------------------------------------
# Rank the store against a query label set
# ---------------------------------------------------------------------------
query = LabelVector.from_ids(["3", "3.2"], tax)
print("\ntop matches for {3, 3.2}:")
for m in match_interventions(query, store, tax, top_k=5):
    print(f"  {m.score:.3f}  {m.doc.intervention_id}  {m.doc.title}")

# ---------------------------------------------------------------------------
# classify_and_match: free text -> labels -> ranked handouts
# ---------------------------------------------------------------------------
model = keyword_model(
    {"3": ["risky"], "3.2": ["thimerosal", "aluminum"], "5.2": ["conspiracy"]}, tax
)
result = classify_and_match(
    "They claim thimerosal is risky and push a conspiracy.", model, store, tax, top_k=3
)
print(f"\ndetected concerns: {list(result.detected)}")
for m in result.matches:
    print(f"  {m.score:.3f}  {m.doc.title} ({m.doc.audience})")

# queries with no detected concerns return a typed empty result, not an error
quiet = classify_and_match("a calm note about gardens", model, store, tax)
print(f"\nno-concern query -> no_concerns={quiet.no_concerns}, matches={len(quiet.matches)}")
