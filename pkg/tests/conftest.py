"""Shared oracles and generators for the test suite.

Everything here is deliberately written independently of the package
internals (different algorithms, different bookkeeping) so that agreement
between the two is meaningful.
"""

import random
from fractions import Fraction
from itertools import permutations

from ychan.cycles import Edge, WeightedDigraph, all_edges, cycle_edges, enumerate_cycles
from ychan.dof import DofTuple, RegionParams, region_contains


def min_rotation(nodes: tuple) -> tuple:
    """Lexicographic minimum over all rotations (independent canonical form)."""
    rotations = [nodes[i:] + nodes[:i] for i in range(len(nodes))]
    return min(rotations)


def brute_force_cycles(k: int, length: int) -> set:
    """All distinct cycles via rotation-dedup of every ordered selection."""
    return {min_rotation(p) for p in permutations(range(1, k + 1), length)}


def kahn_is_acyclic(graph: WeightedDigraph) -> bool:
    """Topological-sort oracle: succeeds iff the positive subgraph is acyclic."""
    indegree = {u: 0 for u in range(1, graph.K + 1)}
    out = {u: [] for u in range(1, graph.K + 1)}
    for edge in graph.positive_edges():
        out[edge.tail].append(edge.head)
        indegree[edge.head] += 1
    queue = [u for u in indegree if indegree[u] == 0]
    seen = 0
    while queue:
        u = queue.pop()
        seen += 1
        for v in out[u]:
            indegree[v] -= 1
            if indegree[v] == 0:
                queue.append(v)
    return seen == graph.K


def region3_oracle(d: DofTuple, n) -> bool:
    """Hand-listed inequalities for K=3: one sum per ordering of the users."""
    g = d.get
    sums = [
        g((1, 2)) + g((1, 3)) + g((2, 3)),
        g((1, 3)) + g((1, 2)) + g((3, 2)),
        g((2, 1)) + g((2, 3)) + g((1, 3)),
        g((2, 3)) + g((2, 1)) + g((3, 1)),
        g((3, 1)) + g((3, 2)) + g((1, 2)),
        g((3, 2)) + g((3, 1)) + g((2, 1)),
    ]
    return max(sums) <= n


def history_sum_allocation(d: DofTuple):
    """Allocator oracle that recomputes the full subtraction history each step
    instead of keeping a running residual graph.
    """
    granted: dict = {}
    for length in range(2, d.K + 1):
        for cycle in enumerate_cycles(d.K, length):
            amount = None
            for e in cycle_edges(cycle):
                already = sum((a for c, a in granted.items()
                               if e in cycle_edges(c)), Fraction(0))
                room = d.get(e) - already
                amount = room if amount is None else min(amount, room)
            granted[cycle] = amount
    uni = {}
    for e in all_edges(d.K):
        already = sum((a for c, a in granted.items()
                       if e in cycle_edges(c)), Fraction(0))
        uni[e] = d.get(e) - already
    return granted, uni


def random_demand(rng: random.Random, k: int, max_num: int = 4,
                  max_den: int = 3, density: float = 0.8) -> DofTuple:
    values = {}
    for e in all_edges(k):
        if rng.random() < density:
            values[e] = Fraction(rng.randint(0, max_num), rng.randint(1, max_den))
    return DofTuple(k, values)


def scale_to_boundary(d: DofTuple, n: int) -> DofTuple:
    """Rescale so the maximum ordering sum equals N exactly (demand must be nonzero)."""
    verdict = region_contains(d, RegionParams(K=d.K, M=n, N=n))
    assert verdict.max_lhs > 0
    return d.scaled(Fraction(n) / verdict.max_lhs)


def random_integral_demand(rng: random.Random, k: int, max_streams: int = 2,
                           density: float = 0.6) -> DofTuple:
    values = {}
    for e in all_edges(k):
        if rng.random() < density:
            values[e] = rng.randint(0, max_streams)
    return DofTuple(k, values)
