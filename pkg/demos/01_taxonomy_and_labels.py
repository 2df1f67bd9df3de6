"""Tour of the concern taxonomy and label vectors.

Run: python3 demos/01_taxonomy_and_labels.py
"""

from concernlens import (
    LabelVector,
    default_taxonomy,
    hierarchy_closure,
    label_set,
)

# ---------------------------------------------------------------------------
# The bundled taxonomy: 5 parent categories, 19 child claims, 24 nodes total.
# It ships as data (src/concernlens/data/vaxconcerns.json), so a different
# hierarchy can be swapped in without touching code.
# ---------------------------------------------------------------------------
tax = default_taxonomy()
print(f"taxonomy version: {tax.version}, {len(tax)} nodes")
for parent in tax.parents:
    children = tax.children_of(parent.id)
    print(f"  {parent.id} {parent.name}  ({len(children)} children)")

# ---------------------------------------------------------------------------
# A label vector is one independent yes/no per node, in canonical order.
# A text can invoke a parent category without any specific child claim.
# ---------------------------------------------------------------------------
v = LabelVector.from_ids(["2"], tax)
print("\nparent-only vector:", label_set(v, tax))

# Children imply their parent; hierarchy_closure makes that explicit when
# validating curated labels (model outputs are left as-is by default).
v = LabelVector.from_ids(["1.2", "5.2"], tax)
closed = hierarchy_closure(v, tax)
print("before closure:", label_set(v, tax))
print("after closure: ", label_set(closed, tax))

# Closure is idempotent
assert hierarchy_closure(closed, tax) == closed
print("\nclosure(closure(v)) == closure(v) holds")
