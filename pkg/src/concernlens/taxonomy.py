"""Two-level concern taxonomy and the label vectors aligned to it.

The taxonomy is data, not code: it ships as a versioned JSON document so a
different hierarchy can be swapped in without touching the library. The
bundled default describes vaccine concerns (5 parent categories, 19 child
claims). Canonical node order is sorted dotted-id order; every serialized
label vector is interpreted against that order, so the taxonomy version
string travels with anything derived from it.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Sequence

from .errors import (
    AlignmentError,
    DuplicateNodeIdError,
    EmptyDefinitionError,
    MalformedNodeIdError,
    MissingParentError,
    TaxonomyError,
    UnknownNodeError,
)

NODE_ID_RE = re.compile(r"^[1-9][0-9]*(\.[1-9][0-9]*)?$")


def _id_sort_key(node_id: str) -> tuple[int, ...]:
    return tuple(int(part) for part in node_id.split("."))


@dataclass(frozen=True)
class TaxonomyNode:
    """One node of the hierarchy.

    ``parent_id`` is derived from the dotted id: "3.2" is a child of "3",
    while "3" itself has no parent.
    """

    id: str
    name: str
    definition: str

    @property
    def parent_id(self) -> str | None:
        return self.id.split(".")[0] if "." in self.id else None

    @property
    def is_parent(self) -> bool:
        return "." not in self.id


@dataclass(frozen=True)
class Taxonomy:
    """Validated, ordered collection of nodes plus a version string."""

    nodes: tuple[TaxonomyNode, ...]
    version: str
    _index: dict[str, int] = field(repr=False, compare=False, default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "_index", {node.id: i for i, node in enumerate(self.nodes)}
        )

    def __len__(self) -> int:
        return len(self.nodes)

    def __iter__(self):
        return iter(self.nodes)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(node.id for node in self.nodes)

    @property
    def parents(self) -> tuple[TaxonomyNode, ...]:
        return tuple(node for node in self.nodes if node.is_parent)

    def index_of(self, node_id: str) -> int:
        try:
            return self._index[node_id]
        except KeyError:
            raise UnknownNodeError(f"unknown taxonomy node id {node_id!r}") from None

    def node(self, node_id: str) -> TaxonomyNode:
        return self.nodes[self.index_of(node_id)]

    def children_of(self, parent_id: str) -> tuple[TaxonomyNode, ...]:
        self.index_of(parent_id)
        return tuple(n for n in self.nodes if n.parent_id == parent_id)

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "nodes": [
                {"id": n.id, "name": n.name, "definition": n.definition}
                for n in self.nodes
            ],
        }


@dataclass(frozen=True)
class LabelVector:
    """Fixed-length sequence of per-node judgments in canonical node order.

    Binary vectors hold 0/1; score vectors hold probabilities in [0, 1].
    """

    values: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i: int) -> float:
        return self.values[i]

    @property
    def is_binary(self) -> bool:
        return all(v in (0, 1) for v in self.values)

    @classmethod
    def zeros(cls, n: int) -> "LabelVector":
        return cls(values=(0,) * n)

    @classmethod
    def from_ids(cls, ids: Iterable[str], taxonomy: Taxonomy) -> "LabelVector":
        values = [0] * len(taxonomy)
        for node_id in ids:
            values[taxonomy.index_of(node_id)] = 1
        return cls(values=tuple(values))

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "LabelVector":
        out = []
        for v in values:
            if not 0 <= v <= 1:
                raise ValueError(f"label value {v!r} outside [0, 1]")
            out.append(int(v) if v in (0, 1) else float(v))
        return cls(values=tuple(out))


def _validate_nodes(records: list[dict]) -> list[TaxonomyNode]:
    seen: set[str] = set()
    nodes: list[TaxonomyNode] = []
    for rec in records:
        node_id = rec.get("id")
        if not isinstance(node_id, str) or not NODE_ID_RE.match(node_id):
            raise MalformedNodeIdError(f"malformed node id {node_id!r}")
        if node_id in seen:
            raise DuplicateNodeIdError(f"duplicate node id {node_id!r}")
        seen.add(node_id)
        definition = rec.get("definition", "")
        if not isinstance(definition, str) or not definition.strip():
            raise EmptyDefinitionError(f"node {node_id!r} has an empty definition")
        name = rec.get("name", "")
        if not isinstance(name, str) or not name.strip():
            raise EmptyDefinitionError(f"node {node_id!r} has an empty name")
        nodes.append(TaxonomyNode(id=node_id, name=name, definition=definition))
    for node in nodes:
        if node.parent_id is not None and node.parent_id not in seen:
            raise MissingParentError(
                f"node {node.id!r} references missing parent {node.parent_id!r}"
            )
    return sorted(nodes, key=lambda n: _id_sort_key(n.id))


def load_taxonomy(source: str | bytes) -> Taxonomy:
    """Parse and validate a taxonomy JSON document.

    The document is ``{"version": str, "nodes": [{"id", "name",
    "definition"}, ...]}``. Node order in the file does not matter; nodes
    are returned in canonical sorted dotted-id order.
    """
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise TaxonomyError(f"taxonomy document is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "nodes" not in doc:
        raise TaxonomyError("taxonomy document must be an object with a 'nodes' list")
    version = doc.get("version")
    if not isinstance(version, str) or not version:
        raise TaxonomyError("taxonomy document requires a non-empty 'version' string")
    records = doc["nodes"]
    if not isinstance(records, list) or not records:
        raise TaxonomyError("taxonomy 'nodes' must be a non-empty list")
    nodes = _validate_nodes(records)
    return Taxonomy(nodes=tuple(nodes), version=version)


def load_taxonomy_file(path) -> Taxonomy:
    with open(path, "r", encoding="utf-8") as f:
        return load_taxonomy(f.read())


def serialize_taxonomy(taxonomy: Taxonomy) -> str:
    """Canonical JSON serialization; reparses to an equal Taxonomy."""
    return json.dumps(taxonomy.to_dict(), indent=2, ensure_ascii=False) + "\n"


def default_taxonomy() -> Taxonomy:
    """The bundled vaccine-concern taxonomy (24 nodes)."""
    data = resources.files("concernlens.data").joinpath("vaxconcerns.json").read_text("utf-8")
    return load_taxonomy(data)


def _check_aligned(v: LabelVector, taxonomy: Taxonomy) -> None:
    if len(v) != len(taxonomy):
        raise AlignmentError(
            f"label vector has {len(v)} entries, taxonomy has {len(taxonomy)}"
        )


def hierarchy_closure(v: LabelVector, taxonomy: Taxonomy) -> LabelVector:
    """Set every parent whose child is positive; leave everything else alone.

    A parent may be positive without any child (that is legal input and
    output), but a positive child always implies its parent. Idempotent.
    """
    _check_aligned(v, taxonomy)
    if not v.is_binary:
        raise AlignmentError("hierarchy_closure requires a binary label vector")
    values = list(v.values)
    for i, node in enumerate(taxonomy.nodes):
        if values[i] and node.parent_id is not None:
            values[taxonomy.index_of(node.parent_id)] = 1
    return LabelVector(values=tuple(values))


def label_set(v: LabelVector, taxonomy: Taxonomy) -> list[str]:
    """Node ids of positive entries, in canonical order."""
    _check_aligned(v, taxonomy)
    if not v.is_binary:
        raise AlignmentError("label_set requires a binary label vector")
    return [taxonomy.nodes[i].id for i, val in enumerate(v.values) if val == 1]
