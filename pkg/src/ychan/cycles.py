"""Directed cycles of the message-flow graph on nodes {1, ..., K}.

A message-flow graph has one node per user and a directed edge i->j for every
ordered pair of distinct users. Routing decisions are expressed in terms of
simple directed cycles; a cycle is the same object no matter which node the
tuple starts at, so every cycle is stored in a canonical rotation (smallest
node first) and collections of cycles use a fixed lexicographic order.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations
from typing import Iterable, Iterator, Mapping, Optional


@dataclass(frozen=True, order=True)
class Edge:
    """Directed edge between two distinct nodes, usable as a dict key."""

    tail: int
    head: int

    def __post_init__(self):
        if self.tail < 1 or self.head < 1:
            raise ValueError("node indices start at 1")
        if self.tail == self.head:
            raise ValueError(f"self-loop {self.tail}->{self.head} is not a valid edge")

    def __str__(self) -> str:
        return f"{self.tail}->{self.head}"

    @classmethod
    def parse(cls, text: str) -> "Edge":
        tail, sep, head = text.partition("->")
        if not sep:
            raise ValueError(f"expected 'i->j', got {text!r}")
        return cls(int(tail), int(head))


@dataclass(frozen=True, order=True)
class Cycle:
    """Simple directed cycle, stored with its smallest node first.

    Use :func:`canonicalize` to build one from an arbitrary rotation.
    """

    nodes: tuple[int, ...]

    def __post_init__(self):
        if len(self.nodes) < 2:
            raise ValueError("a cycle needs at least 2 nodes")
        if len(set(self.nodes)) != len(self.nodes):
            raise ValueError(f"duplicate node in cycle {self.nodes}")
        if self.nodes[0] != min(self.nodes):
            raise ValueError(
                f"{self.nodes} is not in canonical rotation; use canonicalize()"
            )
        if min(self.nodes) < 1:
            raise ValueError("node indices start at 1")

    @property
    def length(self) -> int:
        return len(self.nodes)

    def edges(self) -> list[Edge]:
        """Edges in traversal order, closing back to the first node."""
        n = self.nodes
        return [Edge(n[q], n[(q + 1) % len(n)]) for q in range(len(n))]

    def __iter__(self) -> Iterator[int]:
        return iter(self.nodes)

    def __contains__(self, node: int) -> bool:
        return node in self.nodes

    def __str__(self) -> str:
        return "(" + ",".join(str(n) for n in self.nodes) + ")"


def canonicalize(nodes: Iterable[int]) -> Cycle:
    """Rotate a node sequence so the smallest node comes first.

    All rotations of the same cycle map to the same :class:`Cycle`, which makes
    the function idempotent: ``canonicalize(c.nodes) == c``.
    """
    seq = tuple(int(n) for n in nodes)
    if len(seq) < 2:
        raise ValueError("a cycle needs at least 2 nodes")
    if len(set(seq)) != len(seq):
        raise ValueError(f"duplicate node in cycle {seq}")
    pivot = seq.index(min(seq))
    return Cycle(seq[pivot:] + seq[:pivot])


def cycle_edges(cycle: Cycle) -> list[Edge]:
    """Edge set of a cycle in traversal order: c1c2, c2c3, ..., c_l c1."""
    return cycle.edges()


@dataclass(frozen=True)
class CycleSet:
    """All distinct cycles of one length, in lexicographic canonical order."""

    K: int
    length: int
    cycles: tuple[Cycle, ...]

    def __iter__(self) -> Iterator[Cycle]:
        return iter(self.cycles)

    def __len__(self) -> int:
        return len(self.cycles)

    def __getitem__(self, idx: int) -> Cycle:
        return self.cycles[idx]


@lru_cache(maxsize=None)
def _canonical_cycles(k: int, length: int) -> tuple[Cycle, ...]:
    # Fix the smallest node of the support as the start; the remaining
    # (length-1)! orderings enumerate each cycle exactly once.
    found = []
    for support in combinations(range(1, k + 1), length):
        first = support[0]
        for rest in permutations(support[1:]):
            found.append(Cycle((first,) + rest))
    found.sort()
    return tuple(found)


def enumerate_cycles(k: int, length: int) -> CycleSet:
    """Every directed cycle of the given length on K nodes, exactly once.

    The count is K! / (length * (K - length)!): ordered selections divided by
    the ``length`` equivalent rotations of each cycle.
    """
    if k < 2:
        raise ValueError(f"need at least 2 nodes, got K={k}")
    if length < 2 or length > k:
        raise ValueError(f"cycle length must be in [2, K]; got {length} with K={k}")
    return CycleSet(k, length, _canonical_cycles(k, length))


def all_edges(k: int) -> list[Edge]:
    """All K(K-1) ordered node pairs, sorted by (tail, head)."""
    if k < 2:
        raise ValueError(f"need at least 2 nodes, got K={k}")
    return [Edge(i, j) for i in range(1, k + 1) for j in range(1, k + 1) if i != j]


@dataclass(frozen=True)
class WeightedDigraph:
    """Digraph on {1..K} with exact nonnegative rational edge weights.

    An edge is considered present iff its weight is strictly positive, so the
    topology never depends on a float tolerance. Zero entries are dropped on
    construction, which also makes equality well defined.
    """

    K: int
    weight: Mapping[Edge, Fraction]

    def __post_init__(self):
        if self.K < 2:
            raise ValueError(f"need at least 2 nodes, got K={self.K}")
        cleaned: dict[Edge, Fraction] = {}
        for edge, value in self.weight.items():
            if not isinstance(edge, Edge):
                edge = Edge(*edge)
            if edge.tail > self.K or edge.head > self.K:
                raise ValueError(f"edge {edge} outside node range 1..{self.K}")
            w = Fraction(value)
            if w < 0:
                raise ValueError(f"negative weight {w} on edge {edge}")
            if w > 0:
                cleaned[edge] = w
        object.__setattr__(self, "weight", cleaned)

    def get(self, edge: Edge) -> Fraction:
        return self.weight.get(edge, Fraction(0))

    def positive_edges(self) -> list[Edge]:
        return sorted(self.weight)


def find_cycle(graph: WeightedDigraph) -> Optional[Cycle]:
    """Some directed cycle of the positive-weight subgraph, or None.

    Depth-first search with a recursion-stack marking; neighbours are visited
    in sorted order and roots in node order, so the answer is deterministic
    for a fixed graph. The first back edge found defines the reported cycle.
    """
    adjacency: dict[int, list[int]] = {u: [] for u in range(1, graph.K + 1)}
    for edge in graph.positive_edges():
        adjacency[edge.tail].append(edge.head)

    WHITE, GRAY, BLACK = 0, 1, 2
    color = dict.fromkeys(range(1, graph.K + 1), WHITE)
    path: list[int] = []

    def visit(u: int) -> Optional[Cycle]:
        color[u] = GRAY
        path.append(u)
        for v in adjacency[u]:
            if color[v] == GRAY:
                return canonicalize(path[path.index(v):])
            if color[v] == WHITE:
                found = visit(v)
                if found is not None:
                    return found
        color[u] = BLACK
        path.pop()
        return None

    for root in range(1, graph.K + 1):
        if color[root] == WHITE:
            found = visit(root)
            if found is not None:
                return found
    return None
