"""DoF demand tuples and membership tests for the relay exchange region.

A demand tuple assigns a nonnegative rational number of streams (degrees of
freedom) to every ordered user pair. With N relay antennas and at least as
many antennas per user, a tuple is achievable iff for every ordering of the
users the demands pointing "forward" along that ordering sum to at most N.
Arithmetic is exact throughout so that boundary cases (maximum sum equal to
N) are decided without tolerances.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from math import lcm
from typing import Iterable, Iterator, Mapping, Union

from .cycles import Edge, all_edges
from .errors import ComplexityGuardError, RegimeError

Rational = Union[int, str, Fraction]

DEFAULT_MAX_K = 10


def _frac(value: Rational) -> Fraction:
    if isinstance(value, float):
        raise TypeError("DoF values must be exact: pass int, str or Fraction")
    return Fraction(value)


@dataclass(frozen=True)
class DofTuple:
    """Per-edge stream demands; absent edges count as zero.

    Stored sparsely: zero entries are dropped on construction so two tuples
    compare equal regardless of how many explicit zeros they were built with.
    """

    K: int
    d: Mapping[Edge, Fraction]

    def __post_init__(self):
        if self.K < 2:
            raise ValueError(f"need at least 2 users, got K={self.K}")
        cleaned: dict[Edge, Fraction] = {}
        for edge, value in self.d.items():
            if not isinstance(edge, Edge):
                edge = Edge(*edge)
            if edge.tail > self.K or edge.head > self.K:
                raise ValueError(f"edge {edge} outside user range 1..{self.K}")
            w = _frac(value)
            if w < 0:
                raise ValueError(f"negative demand {w} on edge {edge}")
            if w > 0:
                cleaned[edge] = w
        object.__setattr__(self, "d", cleaned)

    @classmethod
    def from_pairs(cls, k: int, pairs: Mapping) -> "DofTuple":
        return cls(k, {Edge(*e) if not isinstance(e, Edge) else e: v
                       for e, v in pairs.items()})

    @classmethod
    def from_vector(cls, k: int, values: Iterable[Rational]) -> "DofTuple":
        """Build from components listed edge by edge: 1->2, ..., 1->K, 2->1, ..."""
        edges = all_edges(k)
        vals = list(values)
        if len(vals) != len(edges):
            raise ValueError(f"expected {len(edges)} components, got {len(vals)}")
        return cls(k, dict(zip(edges, vals)))

    def get(self, edge) -> Fraction:
        if not isinstance(edge, Edge):
            edge = Edge(*edge)
        return self.d.get(edge, Fraction(0))

    def components(self) -> Iterator[tuple[Edge, Fraction]]:
        """All K(K-1) components in sorted edge order, zeros included."""
        for edge in all_edges(self.K):
            yield edge, self.d.get(edge, Fraction(0))

    @property
    def is_integral(self) -> bool:
        return all(v.denominator == 1 for v in self.d.values())

    def scaled(self, factor: Rational) -> "DofTuple":
        f = _frac(factor)
        return DofTuple(self.K, {e: v * f for e, v in self.d.items()})

    def to_json_dict(self) -> dict:
        return {"K": self.K, "d": {str(e): str(v) for e, v in sorted(self.d.items())}}

    @classmethod
    def from_json_dict(cls, payload: dict) -> "DofTuple":
        return cls(int(payload["K"]),
                   {Edge.parse(key): Fraction(val)
                    for key, val in payload.get("d", {}).items()})

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "DofTuple":
        return cls.from_json_dict(json.loads(text))


def sum_dof(d: DofTuple) -> Fraction:
    """Total demand summed over all ordered pairs."""
    return sum(d.d.values(), Fraction(0))


@dataclass(frozen=True)
class RegionParams:
    """Antenna configuration: K users with M antennas each, N at the relay."""

    K: int
    M: int
    N: int

    def __post_init__(self):
        if self.K < 2:
            raise ValueError(f"need at least 2 users, got K={self.K}")
        if self.M < 1 or self.N < 1:
            raise ValueError("antenna counts must be positive")


@dataclass(frozen=True)
class RegionVerdict:
    inside: bool
    max_lhs: Fraction
    binding_permutations: tuple[tuple[int, ...], ...]


def _ordering_extremes(d: DofTuple) -> tuple[Fraction, tuple[tuple[int, ...], ...]]:
    """Max over user orderings of the forward-demand sum, with all maximizers.

    Works on an integer matrix over a common denominator so the K! scan stays
    cheap; the exact value is restored at the end.
    """
    k = d.K
    denom = lcm(*(v.denominator for v in d.d.values())) if d.d else 1
    mat = [[0] * (k + 1) for _ in range(k + 1)]
    for edge, value in d.d.items():
        mat[edge.tail][edge.head] = int(value * denom)

    pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]
    best = None
    argmax: list[tuple[int, ...]] = []
    for perm in permutations(range(1, k + 1)):
        total = 0
        for i, j in pairs:
            total += mat[perm[i]][perm[j]]
        if best is None or total > best:
            best = total
            argmax = [perm]
        elif total == best:
            argmax.append(perm)
    return Fraction(best, denom), tuple(argmax)


def _check_scan_size(k: int, max_k: int):
    if k > max_k:
        raise ComplexityGuardError(
            f"K={k} needs a scan over {k}! orderings; cap is K<={max_k}")


def region_contains(d: DofTuple, params: RegionParams, *,
                    max_k: int = DEFAULT_MAX_K) -> RegionVerdict:
    """Exact region membership for the N <= M regime.

    The tuple is inside iff every user ordering has forward-demand sum at most
    N. Returns the maximum such sum and every ordering attaining it, so
    boundary tuples can be recognized exactly.
    """
    if d.K != params.K:
        raise ValueError(f"tuple has K={d.K} but params have K={params.K}")
    if params.N > params.M:
        raise RegimeError(
            f"N={params.N} > M={params.M}: this region test only covers N <= M; "
            "use general_outer_bound_contains")
    _check_scan_size(d.K, max_k)
    max_lhs, binding = _ordering_extremes(d)
    return RegionVerdict(inside=max_lhs <= params.N, max_lhs=max_lhs,
                         binding_permutations=binding)


def general_outer_bound_contains(d: DofTuple, params: RegionParams, *,
                                 max_k: int = DEFAULT_MAX_K) -> bool:
    """Necessary conditions valid for any M, N combination.

    Combines the ordering bound capped at min(N, (K-1)M) with per-user cut
    bounds: each user can send at most min(M, N) total streams and receive at
    most min(M, N) total streams.
    """
    if d.K != params.K:
        raise ValueError(f"tuple has K={d.K} but params have K={params.K}")
    _check_scan_size(d.K, max_k)

    cap = min(params.N, (params.K - 1) * params.M)
    max_lhs, _ = _ordering_extremes(d)
    if max_lhs > cap:
        return False

    cut = min(params.M, params.N)
    for user in range(1, d.K + 1):
        outgoing = sum((v for e, v in d.d.items() if e.tail == user), Fraction(0))
        incoming = sum((v for e, v in d.d.items() if e.head == user), Fraction(0))
        if outgoing > cut or incoming > cut:
            return False
    return True


def symmetric_tuple(k: int, n: int) -> DofTuple:
    """Uniform tuple giving every ordered pair 2N / (K(K-1)) streams.

    Every user ordering sums to exactly N, so the tuple sits on the region
    boundary and its total demand is the maximum 2N.
    """
    if k < 2:
        raise ValueError(f"need at least 2 users, got K={k}")
    if n < 1:
        raise ValueError(f"need at least 1 relay antenna, got N={n}")
    per_pair = Fraction(2 * n, k * (k - 1))
    return DofTuple(k, {e: per_pair for e in all_edges(k)})
