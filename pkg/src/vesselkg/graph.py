"""Tripartite co-occurrence knowledge graph over vessel segments.

Three node kinds (static attributes, behavior patterns, imputation
methods) connected by integer-count edges: attribute-behavior edges
count co-occurrence on segments, behavior-method edges count imputation
success. A behavior-to-behavior transition table is kept beside the
tripartite edge sets to support previous/next behavior context.

Weights are exact integer counts; normalization happens only inside the
ranking queries (as exact rationals), so graph construction commutes and
rankings are invariant under uniform weight scaling.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable

from .behavior import BehaviorPattern
from .documents import SCHEMA_VERSION, SchemaError, dump_document, load_document

logger = logging.getLogger(__name__)

KINDS = ("static_attr", "behavior", "method")
ATTR_CLASSES = ("vessel_type", "nav_status", "spatial_context")


class UnknownNode(KeyError):
    """Referenced node does not exist in the graph."""


class EmptyRanking(LookupError):
    """No candidate had a positive score; callers fall back."""


def canonical_key(display: str) -> str:
    """Trim, collapse whitespace runs, case-fold. Idempotent."""
    return " ".join(display.split()).casefold()


@dataclass(frozen=True, order=True)
class NodeId:
    kind: str
    key: str

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown node kind: {self.kind!r}")
        if not self.key:
            raise ValueError("empty node key")

    def __str__(self) -> str:
        return f"{self.kind}:{self.key}"

    @classmethod
    def parse(cls, text: str) -> "NodeId":
        kind, sep, key = text.partition(":")
        if not sep:
            raise ValueError(f"malformed node id: {text!r}")
        return cls(kind, key)


def static_attr_id(attr_class: str, display: str) -> NodeId:
    if attr_class not in ATTR_CLASSES:
        raise ValueError(f"unknown attribute class: {attr_class!r}")
    return NodeId("static_attr", f"{attr_class}={canonical_key(display)}")


def behavior_node_id(name: str) -> NodeId:
    return NodeId("behavior", canonical_key(name))


def method_node_id(method_key: str) -> NodeId:
    return NodeId("method", canonical_key(method_key))


@dataclass
class StaticAttributeNode:
    id: NodeId
    attr_class: str
    display: str
    seen_count: int = 0


@dataclass
class BehaviorPatternNode:
    id: NodeId
    pattern: BehaviorPattern
    seen_count: int = 0


@dataclass
class ImputationMethodNode:
    id: NodeId
    method_key: str
    display: str
    description: str
    success_count: int = 0


Node = StaticAttributeNode | BehaviorPatternNode | ImputationMethodNode


def node_display(node: Node) -> str:
    if isinstance(node, BehaviorPatternNode):
        return node.pattern.name
    return node.display


class KnowledgeGraph:
    """Mutable while a job builds it; treated as an immutable snapshot after."""

    def __init__(self) -> None:
        self.nodes: dict[NodeId, Node] = {}
        self.edges: dict[tuple[NodeId, NodeId], int] = {}
        self.transitions: dict[tuple[NodeId, NodeId], int] = {}

    # --- construction -----------------------------------------------------

    def observe_segment(
        self,
        static_attrs: Iterable[tuple[str, str]],
        behavior: BehaviorPattern,
        best_method: str | None = None,
        prev_behavior: BehaviorPattern | None = None,
        method_display: str = "",
        method_description: str = "",
    ) -> "KnowledgeGraph":
        """Fold one segment observation into the graph.

        Upserts all referenced nodes, increments each attribute-behavior
        edge by one, and, when a best method / previous behavior is
        known, the behavior-method edge / transition count. Returns the
        graph for chaining.
        """
        attrs = list(static_attrs)
        if not attrs:
            raise ValueError("static_attrs must be nonempty")

        b_id = self._upsert_behavior(behavior, count=1)
        for attr_class, display in attrs:
            s_id = self._upsert_static(attr_class, display, count=1)
            self.edges[(s_id, b_id)] = self.edges.get((s_id, b_id), 0) + 1
        if best_method is not None:
            m_id = self._upsert_method(best_method, method_display, method_description, count=1)
            self.edges[(b_id, m_id)] = self.edges.get((b_id, m_id), 0) + 1
        if prev_behavior is not None:
            p_id = self._upsert_behavior(prev_behavior, count=0)
            self.transitions[(p_id, b_id)] = self.transitions.get((p_id, b_id), 0) + 1
        return self

    def _upsert_static(self, attr_class: str, display: str, count: int) -> NodeId:
        node_id = static_attr_id(attr_class, display)
        node = self.nodes.get(node_id)
        if node is None:
            node = StaticAttributeNode(id=node_id, attr_class=attr_class, display=display)
            self.nodes[node_id] = node
        else:
            node.display = min(node.display, display)
        node.seen_count += count
        return node_id

    def _upsert_behavior(self, pattern: BehaviorPattern, count: int) -> NodeId:
        node_id = behavior_node_id(pattern.name)
        node = self.nodes.get(node_id)
        if node is None:
            node = BehaviorPatternNode(id=node_id, pattern=pattern)
            self.nodes[node_id] = node
        elif (pattern.name, pattern.description) < (node.pattern.name, node.pattern.description):
            node.pattern = pattern
        node.seen_count += count
        return node_id

    def _upsert_method(self, method_key: str, display: str, description: str, count: int) -> NodeId:
        node_id = method_node_id(method_key)
        node = self.nodes.get(node_id)
        if node is None:
            node = ImputationMethodNode(
                id=node_id, method_key=method_key, display=display, description=description
            )
            self.nodes[node_id] = node
        else:
            if display and (not node.display or display < node.display):
                node.display = display
            if description and (not node.description or description < node.description):
                node.description = description
        node.success_count += count
        return node_id

    # --- accessors ----------------------------------------------------

    def edge_weight(self, a: NodeId, b: NodeId) -> int:
        return self.edges.get((a, b), 0)

    def out_weight_total(self, a: NodeId) -> int:
        """Sum of stored edge weights leaving a (attr->behaviors or behavior->methods)."""
        return sum(w for (x, _), w in self.edges.items() if x == a)

    def transition_weight(self, prev: NodeId, current: NodeId) -> int:
        return self.transitions.get((prev, current), 0)

    def transition_total(self, prev: NodeId) -> int:
        return sum(c for (p, _), c in self.transitions.items() if p == prev)

    # --- ranking queries ----------------------------------------------

    def rank_behaviors(
        self,
        static_attrs: Iterable[tuple[str, str]],
        prev_behavior: NodeId | None = None,
        k: int = 1,
    ) -> list[tuple[NodeId, float]]:
        """Rank behavior patterns for a static-attribute context.

        Score per behavior: the sum over present attributes of that
        attribute's normalized edge weight toward the behavior, plus the
        normalized transition weight from prev_behavior. Attributes (or
        a prev behavior) absent from the graph contribute zero. Ties
        break ascending by canonical key.
        """
        if k < 1:
            raise ValueError("k must be >= 1")
        scores: dict[NodeId, Fraction] = {}
        attr_ids = sorted(static_attr_id(c, d) for c, d in static_attrs)
        for attr_id in attr_ids:
            total = self.out_weight_total(attr_id)
            if total == 0:
                continue
            for (a, b), weight in self.edges.items():
                if a == attr_id:
                    scores[b] = scores.get(b, Fraction(0)) + Fraction(weight, total)
        if prev_behavior is not None:
            total = self.transition_total(prev_behavior)
            if total > 0:
                for (p, b), count in self.transitions.items():
                    if p == prev_behavior:
                        scores[b] = scores.get(b, Fraction(0)) + Fraction(count, total)

        ranked = sorted(
            ((b, s) for b, s in scores.items() if s > 0),
            key=lambda item: (-item[1], item[0].key),
        )
        if not ranked:
            raise EmptyRanking("no behavior with positive score for the given context")
        return [(b, float(s)) for b, s in ranked[:k]]

    def rank_methods(self, behavior: NodeId, k: int = 1) -> list[tuple[NodeId, float]]:
        """Rank imputation methods for a behavior by normalized success weight."""
        if behavior.kind != "behavior":
            raise ValueError(f"expected a behavior node, got {behavior}")
        if k < 1:
            raise ValueError("k must be >= 1")
        total = self.out_weight_total(behavior)
        if total == 0:
            raise EmptyRanking(f"behavior {behavior} has no method edges")
        ranked = sorted(
            (
                (m, Fraction(weight, total))
                for (b, m), weight in self.edges.items()
                if b == behavior
            ),
            key=lambda item: (-item[1], item[0].key),
        )
        return [(m, float(s)) for m, s in ranked[:k]]

    def neighbors(self, node_id: NodeId) -> list[tuple[NodeId, int]]:
        """All tripartite edges incident to a node, heaviest first, then by key."""
        if node_id not in self.nodes:
            raise UnknownNode(str(node_id))
        incident = []
        for (a, b), weight in self.edges.items():
            if a == node_id:
                incident.append((b, weight))
            elif b == node_id:
                incident.append((a, weight))
        incident.sort(key=lambda item: (-item[1], item[0]))
        return incident

    def subgraph_for_segment(
        self,
        seg_attrs: Iterable[tuple[str, str]],
        behavior: NodeId,
        method: NodeId | None = None,
    ) -> dict:
        """Induced subgraph over the segment's nodes plus the behavior's methods.

        The node set is the given attributes (those present in the
        graph), the behavior, the given method, and every 1-hop method
        neighbor of the behavior; edges are all stored edges with both
        endpoints inside that set.
        """
        if behavior not in self.nodes:
            raise UnknownNode(str(behavior))
        node_ids = {behavior}
        for attr_class, display in seg_attrs:
            attr_id = static_attr_id(attr_class, display)
            if attr_id in self.nodes:
                node_ids.add(attr_id)
        if method is not None and method in self.nodes:
            node_ids.add(method)
        for (a, b) in self.edges:
            if a == behavior and b.kind == "method":
                node_ids.add(b)

        edge_docs = [
            {"a": str(a), "b": str(b), "weight": w}
            for (a, b), w in self.edges.items()
            if a in node_ids and b in node_ids
        ]
        edge_docs.sort(key=lambda e: (e["a"], e["b"]))
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "subgraph",
            "nodes": [self._node_doc(self.nodes[i]) for i in sorted(node_ids)],
            "edges": edge_docs,
        }

    # --- persistence ----------------------------------------------------

    @staticmethod
    def _node_doc(node: Node) -> dict:
        if isinstance(node, StaticAttributeNode):
            return {
                "id": str(node.id),
                "kind": "static_attr",
                "attr_class": node.attr_class,
                "display": node.display,
                "seen_count": node.seen_count,
            }
        if isinstance(node, BehaviorPatternNode):
            return {
                "id": str(node.id),
                "kind": "behavior",
                "display": node.pattern.name,
                "description": node.pattern.description,
                "seen_count": node.seen_count,
            }
        return {
            "id": str(node.id),
            "kind": "method",
            "method_key": node.method_key,
            "display": node.display,
            "description": node.description,
            "success_count": node.success_count,
        }

    def save(self) -> dict:
        """Self-describing graph document; deterministic node/edge order."""
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "knowledge_graph",
            "nodes": [self._node_doc(self.nodes[i]) for i in sorted(self.nodes)],
            "edges": [
                {"a": str(a), "b": str(b), "weight": w}
                for (a, b), w in sorted(self.edges.items())
            ],
            "transitions": [
                {"from": str(p), "to": str(b), "count": c}
                for (p, b), c in sorted(self.transitions.items())
            ],
        }

    def save_text(self) -> str:
        return dump_document(self.save())

    @classmethod
    def load(cls, doc: dict) -> "KnowledgeGraph":
        """Rebuild a graph from its document, validating structure."""
        graph = cls()
        try:
            for node_doc in doc["nodes"]:
                graph.nodes[NodeId.parse(node_doc["id"])] = _node_from_doc(node_doc)
            for edge_doc in doc["edges"]:
                a = NodeId.parse(edge_doc["a"])
                b = NodeId.parse(edge_doc["b"])
                graph.edges[(a, b)] = int(edge_doc["weight"])
            for tr_doc in doc.get("transitions", []):
                p = NodeId.parse(tr_doc["from"])
                b = NodeId.parse(tr_doc["to"])
                graph.transitions[(p, b)] = int(tr_doc["count"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed graph document: {exc}") from exc
        graph.validate()
        return graph

    @classmethod
    def load_text(cls, text: str) -> "KnowledgeGraph":
        doc = load_document(text)
        if doc.get("kind") != "knowledge_graph":
            raise SchemaError(f"not a graph document: kind={doc.get('kind')!r}")
        return cls.load(doc)

    def validate(self) -> None:
        """Check the tripartite constraint and referential integrity."""
        for (a, b), weight in self.edges.items():
            if (a.kind, b.kind) not in (("static_attr", "behavior"), ("behavior", "method")):
                raise SchemaError(f"edge violates tripartite constraint: {a} -> {b}")
            if a not in self.nodes or b not in self.nodes:
                raise SchemaError(f"edge endpoint missing from nodes: {a} -> {b}")
            if weight < 1:
                raise SchemaError(f"stored edge weight must be >= 1: {a} -> {b}")
        for (p, b) in self.transitions:
            if p.kind != "behavior" or b.kind != "behavior":
                raise SchemaError(f"transition endpoints must be behaviors: {p} -> {b}")
            if p not in self.nodes or b not in self.nodes:
                raise SchemaError(f"transition endpoint missing from nodes: {p} -> {b}")

    # --- merge / equality ------------------------------------------------

    def merge(self, other: "KnowledgeGraph") -> "KnowledgeGraph":
        """Combine two graphs by adding counts; commutative and associative."""
        merged = self.copy()
        for node_id, node in other.nodes.items():
            if isinstance(node, StaticAttributeNode):
                merged._upsert_static(node.attr_class, node.display, node.seen_count)
            elif isinstance(node, BehaviorPatternNode):
                merged._upsert_behavior(node.pattern, node.seen_count)
            else:
                merged._upsert_method(
                    node.method_key, node.display, node.description, node.success_count
                )
        for pair, weight in other.edges.items():
            merged.edges[pair] = merged.edges.get(pair, 0) + weight
        for pair, count in other.transitions.items():
            merged.transitions[pair] = merged.transitions.get(pair, 0) + count
        return merged

    def copy(self) -> "KnowledgeGraph":
        clone = KnowledgeGraph()
        clone.nodes = {i: replace(n) for i, n in self.nodes.items()}
        clone.edges = dict(self.edges)
        clone.transitions = dict(self.transitions)
        return clone

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KnowledgeGraph):
            return NotImplemented
        return (
            self.nodes == other.nodes
            and self.edges == other.edges
            and self.transitions == other.transitions
        )

    def __repr__(self) -> str:
        return (
            f"KnowledgeGraph(nodes={len(self.nodes)}, edges={len(self.edges)}, "
            f"transitions={len(self.transitions)})"
        )


def _node_from_doc(doc: dict) -> Node:
    node_id = NodeId.parse(doc["id"])
    kind = doc["kind"]
    if kind != node_id.kind:
        raise SchemaError(f"node kind mismatch for {node_id}")
    if kind == "static_attr":
        return StaticAttributeNode(
            id=node_id,
            attr_class=doc["attr_class"],
            display=doc["display"],
            seen_count=int(doc["seen_count"]),
        )
    if kind == "behavior":
        return BehaviorPatternNode(
            id=node_id,
            pattern=BehaviorPattern(doc["display"], doc.get("description", "")),
            seen_count=int(doc["seen_count"]),
        )
    if kind == "method":
        return ImputationMethodNode(
            id=node_id,
            method_key=doc["method_key"],
            display=doc.get("display", doc["method_key"]),
            description=doc.get("description", ""),
            success_count=int(doc["success_count"]),
        )
    raise SchemaError(f"unknown node kind: {kind!r}")
