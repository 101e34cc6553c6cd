"""Greedy demand-to-strategy allocation over message-flow cycles.

Routing a demand tuple through the relay uses three kinds of strategy with
decreasing efficiency: pairwise exchange resolves a 2-cycle at 2 symbols per
sub-channel, an l-cycle route delivers l symbols over l-1 sub-channels, and
anything left moves point-to-point at 1 symbol per sub-channel. The allocator
therefore walks cycle lengths in increasing order (best efficiency first),
grants each cycle the largest amount its edges still support, and hands the
final residual to the point-to-point fallback. The residual graph left after
all cycle lengths have been processed is acyclic, which is what makes the
resulting sub-channel count optimal for any demand inside the region.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional

from .cycles import (Cycle, CycleSet, Edge, WeightedDigraph, all_edges,
                     enumerate_cycles, find_cycle)
from .dof import DofTuple, _ordering_extremes, sum_dof
from .errors import CapacityError, IntegralityError, InvariantViolation
from .packing import max_cycle_packing

# cap for the optimality rescue pass (ordering scan is K! and the exact
# packing solve has one column per cycle)
OPTIMIZE_MAX_K = 8


@dataclass(frozen=True)
class SubchannelAssignment:
    """Concrete 1-based sub-channel indices for an integral plan.

    Each cycle receives one bundle of ``length - 1`` consecutive indices per
    allocated stream; point-to-point edges receive single indices.
    """

    cycle_bundles: dict[Cycle, tuple[tuple[int, ...], ...]]
    edge_channels: dict[Edge, tuple[int, ...]]


@dataclass(frozen=True)
class AllocationPlan:
    """Result of the greedy allocation for one demand tuple.

    ``cycle_alloc`` covers every canonical cycle of length 2..K in processing
    order (zero entries included); ``uni_alloc`` covers every edge. For each
    edge the cycle amounts through it plus its point-to-point amount add up to
    the original demand, and ``num_subchannels`` counts the total dimensions
    consumed: one per stream for 2-cycles, ``length - 1`` per stream for longer
    cycles, one per point-to-point stream.
    """

    K: int
    cycle_alloc: dict[Cycle, Fraction]
    uni_alloc: dict[Edge, Fraction]
    num_subchannels: Fraction
    demand: DofTuple
    assignment: Optional[SubchannelAssignment] = None


@dataclass(frozen=True)
class TraceStep:
    cycle: Cycle
    amount: Fraction
    residual: WeightedDigraph


@dataclass(frozen=True)
class ResidualTrace:
    """Residual-graph snapshots after each cycle that received a positive amount."""

    steps: tuple[TraceStep, ...]
    final: WeightedDigraph


def _build_plan(d: DofTuple, cycle_alloc: dict[Cycle, Fraction]
                ) -> tuple[AllocationPlan, ResidualTrace]:
    """Replay cycle amounts against the demand, snapshotting residuals."""
    k = d.K
    residual: dict[Edge, Fraction] = {e: d.get(e) for e in all_edges(k)}
    steps: list[TraceStep] = []
    for cycle, amount in cycle_alloc.items():
        if amount > 0:
            for e in cycle.edges():
                residual[e] -= amount
            steps.append(TraceStep(cycle, amount,
                                   WeightedDigraph(k, dict(residual))))

    uni_alloc = dict(residual)
    used = sum(((cycle.length - 1) * amount
                for cycle, amount in cycle_alloc.items()), Fraction(0))
    used += sum(uni_alloc.values(), Fraction(0))

    plan = AllocationPlan(K=k, cycle_alloc=cycle_alloc, uni_alloc=uni_alloc,
                          num_subchannels=used, demand=d)
    trace = ResidualTrace(steps=tuple(steps), final=WeightedDigraph(k, uni_alloc))
    return plan, trace


def allocate(d: DofTuple, *, optimize: bool = True
             ) -> tuple[AllocationPlan, ResidualTrace]:
    """Allocate a demand tuple to cycles, then to point-to-point leftovers.

    The primary pass is greedy: cycle lengths in increasing order, canonical
    lexicographic order within one length, each cycle taking the minimum
    residual weight over its edges (which is then subtracted from them).
    Demands outside the region are allocated all the same; feasibility against
    a concrete relay is judged by verify_plan.

    The greedy pass always leaves an acyclic residual, but its total cycle
    amount is only maximal, not maximum: a cycle processed early can straddle
    two scarce edges that later cycles each needed separately, wasting a
    sub-channel. When the greedy total falls short of the bound implied by
    the ordering scan (total demand minus the maximum forward sum), a rescue
    pass recomputes the amounts as an exact maximum packing and the greedy
    result is discarded. ``optimize=False`` skips the rescue; K above
    OPTIMIZE_MAX_K skips it too, since its cost grows with K!.

    Even the exact maximum can fall short of that bound: from K=6 on there
    are boundary demands whose best fractional packing leaves the plan a
    fraction of a sub-channel over budget (the covering LP behind the bound
    stops being integral). No allocation of this cycle/point-to-point form
    can do better there; verify_plan reports the shortfall. No such demand
    has been observed for K <= 5.
    """
    k = d.K
    residual: dict[Edge, Fraction] = {e: d.get(e) for e in all_edges(k)}
    cycle_alloc: dict[Cycle, Fraction] = {}
    steps: list[TraceStep] = []

    for length in range(2, k + 1):
        for cycle in enumerate_cycles(k, length):
            edges = cycle.edges()
            amount = min(residual[e] for e in edges)
            cycle_alloc[cycle] = amount
            if amount > 0:
                for e in edges:
                    residual[e] -= amount
                steps.append(TraceStep(cycle, amount,
                                       WeightedDigraph(k, dict(residual))))

    if optimize and k <= OPTIMIZE_MAX_K:
        greedy_total = sum(cycle_alloc.values(), Fraction(0))
        max_forward, _ = _ordering_extremes(d)
        target = sum_dof(d) - max_forward
        if greedy_total < target:
            best_total, best_alloc = max_cycle_packing(d)
            if best_total > greedy_total:
                return _build_plan(d, best_alloc)

    uni_alloc = dict(residual)
    used = sum(((cycle.length - 1) * amount
                for cycle, amount in cycle_alloc.items()), Fraction(0))
    used += sum(uni_alloc.values(), Fraction(0))

    plan = AllocationPlan(K=k, cycle_alloc=cycle_alloc, uni_alloc=uni_alloc,
                          num_subchannels=used, demand=d)
    trace = ResidualTrace(steps=tuple(steps), final=WeightedDigraph(k, uni_alloc))
    return plan, trace


def required_subchannels(plan: AllocationPlan) -> Fraction:
    """Sub-channel count of a plan, computed two independent ways.

    Counts once by summing per-strategy costs and once as total demand minus
    total cycle amounts (each cycle of length l saves exactly one dimension
    per stream relative to sending its l edges point-to-point). A mismatch
    means the allocator corrupted its bookkeeping, so it raises instead of
    picking a side.
    """
    by_cost = sum(((cycle.length - 1) * amount
                   for cycle, amount in plan.cycle_alloc.items()), Fraction(0))
    by_cost += sum(plan.uni_alloc.values(), Fraction(0))

    by_savings = sum_dof(plan.demand) - sum(plan.cycle_alloc.values(), Fraction(0))

    if by_cost != by_savings:
        raise InvariantViolation(
            f"sub-channel formulas disagree: {by_cost} vs {by_savings}")
    if by_cost != plan.num_subchannels:
        raise InvariantViolation(
            f"plan records {plan.num_subchannels} sub-channels, recomputed {by_cost}")
    return by_cost


def assign_subchannels(plan: AllocationPlan, n: int) -> AllocationPlan:
    """Attach disjoint 1-based sub-channel indices to an integral plan.

    Indices are handed out in plan order: cycles first (each stream of a
    length-l cycle takes l-1 consecutive indices forming one bundle), then
    point-to-point edges in sorted order.
    """
    for cycle, amount in plan.cycle_alloc.items():
        if amount.denominator != 1:
            raise IntegralityError(f"cycle {cycle} has fractional amount {amount}")
    for edge, amount in plan.uni_alloc.items():
        if amount.denominator != 1:
            raise IntegralityError(f"edge {edge} has fractional amount {amount}")

    total = int(plan.num_subchannels)
    if total > n:
        raise CapacityError(f"plan needs {total} sub-channels but N={n}")

    nxt = 1
    cycle_bundles: dict[Cycle, tuple[tuple[int, ...], ...]] = {}
    for cycle, amount in plan.cycle_alloc.items():
        width = cycle.length - 1
        bundles = []
        for _ in range(int(amount)):
            bundles.append(tuple(range(nxt, nxt + width)))
            nxt += width
        cycle_bundles[cycle] = tuple(bundles)

    edge_channels: dict[Edge, tuple[int, ...]] = {}
    for edge in sorted(plan.uni_alloc):
        count = int(plan.uni_alloc[edge])
        edge_channels[edge] = tuple(range(nxt, nxt + count))
        nxt += count

    assignment = SubchannelAssignment(cycle_bundles=cycle_bundles,
                                      edge_channels=edge_channels)
    return replace(plan, assignment=assignment)


@dataclass(frozen=True)
class PlanVerdict:
    conservation_ok: bool
    subchannel_count_ok: bool
    residual_acyclic: bool
    within_capacity: bool
    failures: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.failures


def verify_plan(plan: AllocationPlan, d: DofTuple, trace: ResidualTrace,
                n: int) -> PlanVerdict:
    """Check a plan against the demand it was built from and a relay size N.

    Verifies per-edge conservation, agreement of the two sub-channel counting
    formulas, acyclicity of the final residual graph, and that the plan fits
    within N sub-channels. Failures are reported, not raised.
    """
    failures: list[str] = []

    granted: dict[Edge, Fraction] = {e: Fraction(0) for e in all_edges(plan.K)}
    for cycle, amount in plan.cycle_alloc.items():
        for e in cycle.edges():
            granted[e] += amount
    conservation_ok = True
    for e in all_edges(plan.K):
        total = granted[e] + plan.uni_alloc.get(e, Fraction(0))
        if total != d.get(e):
            conservation_ok = False
            failures.append(f"edge {e}: allocated {total} != demand {d.get(e)}")

    try:
        count = required_subchannels(plan)
        subchannel_count_ok = True
    except InvariantViolation as exc:
        count = plan.num_subchannels
        subchannel_count_ok = False
        failures.append(str(exc))

    leftover = find_cycle(trace.final)
    residual_acyclic = leftover is None
    if not residual_acyclic:
        failures.append(f"final residual still contains cycle {leftover}")

    within_capacity = count <= n
    if not within_capacity:
        failures.append(f"plan needs {count} sub-channels but N={n}")

    return PlanVerdict(conservation_ok=conservation_ok,
                       subchannel_count_ok=subchannel_count_ok,
                       residual_acyclic=residual_acyclic,
                       within_capacity=within_capacity,
                       failures=tuple(failures))


def plan_to_json_dict(plan: AllocationPlan) -> dict:
    """JSON form: node arrays for cycles, rational strings for amounts.

    Zero allocations are omitted; they are implied by the demand tuple.
    """
    payload: dict = {
        "K": plan.K,
        "cycles": [{"nodes": list(cycle.nodes), "dof": str(amount)}
                   for cycle, amount in plan.cycle_alloc.items() if amount > 0],
        "uni": {str(edge): str(amount)
                for edge, amount in sorted(plan.uni_alloc.items()) if amount > 0},
        "subchannels": str(plan.num_subchannels),
        "demand": plan.demand.to_json_dict(),
    }
    if plan.assignment is not None:
        payload["assignment"] = {
            "cycles": [{"nodes": list(cycle.nodes),
                        "bundles": [list(b) for b in bundles]}
                       for cycle, bundles in plan.assignment.cycle_bundles.items()
                       if bundles],
            "edges": {str(edge): list(chans)
                      for edge, chans in sorted(plan.assignment.edge_channels.items())
                      if chans},
        }
    return payload


def trace_to_json_list(trace: ResidualTrace) -> list[dict]:
    return [{"cycle": list(step.cycle.nodes), "dof": str(step.amount),
             "residual": {str(e): str(w)
                          for e, w in sorted(step.residual.weight.items())}}
            for step in trace.steps]
