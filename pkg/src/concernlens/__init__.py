"""concernlens: classify text corpora against a hierarchical concern taxonomy.

The library distills an LLM teacher's annotations into lightweight linear
students, evaluates them, aggregates labels into trend series, and matches
classified text to curated intervention handouts. An HTTP service and a
batch CLI tie the pieces together.
"""

from .taxonomy import (
    LabelVector,
    Taxonomy,
    TaxonomyNode,
    default_taxonomy,
    hierarchy_closure,
    label_set,
    load_taxonomy,
)

__version__ = "0.1.0"

__all__ = [
    "LabelVector",
    "Taxonomy",
    "TaxonomyNode",
    "default_taxonomy",
    "hierarchy_closure",
    "label_set",
    "load_taxonomy",
    "__version__",
]
