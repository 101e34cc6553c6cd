import random
from dataclasses import replace
from fractions import Fraction

import pytest

from ychan.allocator import (allocate, assign_subchannels, plan_to_json_dict,
                             required_subchannels, verify_plan)
from ychan.cycles import Cycle, Edge, all_edges, find_cycle
from ychan.dof import DofTuple, RegionParams, region_contains, sum_dof, symmetric_tuple
from ychan.errors import CapacityError, IntegralityError, InvariantViolation

from conftest import (history_sum_allocation, random_demand,
                      random_integral_demand, scale_to_boundary)

DEMO3 = DofTuple.from_vector(3, [2, 0, 1, 1, 1, 0])
DEMO4 = DofTuple.from_pairs(4, {(1, 2): 3, (2, 3): 2, (4, 1): 2, (2, 1): 1,
                                (2, 4): 1, (3, 1): 1, (3, 2): 1})


def cyc(*nodes):
    return Cycle(tuple(nodes))


class TestAllocateGoldens:
    def test_three_user_demo(self):
        plan, trace = allocate(DEMO3)
        assert plan.cycle_alloc[cyc(1, 2)] == 1
        assert plan.cycle_alloc[cyc(1, 3)] == 0
        assert plan.cycle_alloc[cyc(2, 3)] == 0
        assert plan.cycle_alloc[cyc(1, 2, 3)] == 1
        assert plan.cycle_alloc[cyc(1, 3, 2)] == 0
        assert all(v == 0 for v in plan.uni_alloc.values())
        assert plan.num_subchannels == 3

    def test_four_user_demo(self):
        plan, trace = allocate(DEMO4)
        positive = {c: a for c, a in plan.cycle_alloc.items() if a > 0}
        assert positive == {cyc(1, 2): 1, cyc(2, 3): 1,
                            cyc(1, 2, 3): 1, cyc(1, 2, 4): 1}
        uni = {e: a for e, a in plan.uni_alloc.items() if a > 0}
        assert uni == {Edge(4, 1): 1}
        assert plan.num_subchannels == 7

    def test_zero_tuple(self):
        plan, trace = allocate(DofTuple(3, {}))
        assert all(v == 0 for v in plan.cycle_alloc.values())
        assert all(v == 0 for v in plan.uni_alloc.values())
        assert plan.num_subchannels == 0
        assert trace.steps == ()

    def test_cycle_alloc_order_is_length_then_lexicographic(self):
        plan, _ = allocate(DofTuple(4, {}))
        lengths = [c.length for c in plan.cycle_alloc]
        assert lengths == sorted(lengths)
        for length in (2, 3, 4):
            block = [c for c in plan.cycle_alloc if c.length == length]
            assert block == sorted(block)


class TestAllocateProperties:
    @pytest.mark.parametrize("k", [3, 4, 5])
    def test_greedy_pass_matches_history_sum_oracle(self, k):
        rng = random.Random(100 + k)
        for _ in range(60):
            d = random_demand(rng, k)
            plan, _ = allocate(d, optimize=False)
            granted, uni = history_sum_allocation(d)
            assert plan.cycle_alloc == granted
            assert plan.uni_alloc == uni

    @pytest.mark.parametrize("k", [3, 4, 5])
    def test_invariants_hold_even_off_region(self, k):
        rng = random.Random(200 + k)
        for _ in range(60):
            d = random_demand(rng, k, max_num=6)
            plan, trace = allocate(d)

            # residual nonnegativity after every step
            for step in trace.steps:
                assert all(w >= 0 for w in step.residual.weight.values())

            # per-edge conservation, exactly
            for e in all_edges(k):
                through = sum((a for c, a in plan.cycle_alloc.items()
                               if e in c.edges()), Fraction(0))
                assert through + plan.uni_alloc[e] == d.get(e)

            # both counting formulas agree, exactly
            by_cost = sum(((c.length - 1) * a for c, a in plan.cycle_alloc.items()),
                          Fraction(0)) + sum(plan.uni_alloc.values(), Fraction(0))
            by_savings = sum_dof(d) - sum(plan.cycle_alloc.values(), Fraction(0))
            assert by_cost == by_savings == plan.num_subchannels

            # final residual graph is acyclic
            assert find_cycle(trace.final) is None

    @pytest.mark.parametrize("k", [3, 4, 5])
    def test_boundary_demands_fit_in_n(self, k):
        rng = random.Random(300 + k)
        n = 2 * k
        for _ in range(150):
            d = random_demand(rng, k)
            if sum_dof(d) == 0:
                continue
            d = scale_to_boundary(d, n)
            assert region_contains(d, RegionParams(k, n, n)).max_lhs == n
            plan, trace = allocate(d)
            assert plan.num_subchannels <= n
            assert verify_plan(plan, d, trace, n).ok


class TestRescuePass:
    # boundary tuple whose greedy allocation wastes a cycle: the 3-cycle
    # (1,2,3) straddles the two scarce edges 1->2 and 3->1 that the cycles
    # (1,2,4) and (1,5,3) each need on their own
    STRADDLE = DofTuple.from_pairs(5, {
        (1, 2): 3, (1, 5): 12, (2, 3): 6, (2, 4): 9, (2, 5): 24,
        (3, 1): 3, (3, 2): 3, (3, 5): 3, (4, 1): 12, (4, 3): 6,
        (4, 5): 6, (5, 1): 4, (5, 2): 6, (5, 3): 8, (5, 4): 4})

    def test_boundary_tuple_needs_rescue(self):
        verdict = region_contains(self.STRADDLE, RegionParams(5, 83, 83))
        assert verdict.inside and verdict.max_lhs == 83
        greedy, _ = allocate(self.STRADDLE, optimize=False)
        assert greedy.num_subchannels == 86
        plan, trace = allocate(self.STRADDLE)
        assert plan.num_subchannels == 83
        assert verify_plan(plan, self.STRADDLE, trace, 83).ok

    def test_rescued_plan_splits_the_straddling_cycle(self):
        plan, _ = allocate(self.STRADDLE)
        assert plan.cycle_alloc[cyc(1, 2, 3)] == 0
        assert plan.cycle_alloc[cyc(1, 2, 4)] == 3
        assert plan.cycle_alloc[cyc(1, 5, 3)] == 3

    @pytest.mark.parametrize("k", [3, 4, 5])
    def test_optimized_never_worse_than_greedy(self, k):
        rng = random.Random(900 + k)
        for _ in range(40):
            d = random_demand(rng, k)
            best, _ = allocate(d)
            greedy, _ = allocate(d, optimize=False)
            assert best.num_subchannels <= greedy.num_subchannels

    def test_k6_boundary_demand_can_be_strictly_unreachable(self):
        # from K=6 on, some boundary demands exceed what ANY cycle plus
        # point-to-point split can deliver: here the best possible plan is
        # 13/730 of a sub-channel over the N=13 budget, and the verdict
        # reports the shortfall rather than hiding it
        F = Fraction
        d = DofTuple.from_pairs(6, {
            (1, 2): F(78, 73), (1, 6): F(78, 73), (2, 3): F(78, 365),
            (2, 4): F(156, 73), (2, 5): F(312, 365), (2, 6): F(104, 365),
            (3, 2): F(312, 365), (3, 4): F(468, 365), (3, 5): F(117, 365),
            (3, 6): F(104, 365), (4, 1): F(468, 365), (4, 2): F(468, 365),
            (4, 3): F(52, 73), (4, 5): F(78, 365), (5, 1): F(78, 73),
            (5, 2): F(156, 365), (5, 3): F(52, 73), (5, 6): F(117, 365),
            (4, 6): F(78, 73), (6, 1): F(156, 73), (6, 2): F(39, 73),
            (6, 3): F(208, 365), (6, 4): F(234, 365), (6, 5): F(78, 73)})
        assert region_contains(d, RegionParams(6, 13, 13)).max_lhs == 13
        plan, trace = allocate(d)
        assert plan.num_subchannels == Fraction(9503, 730)   # barely over 13
        verdict = verify_plan(plan, d, trace, 13)
        assert not verdict.within_capacity
        assert verdict.conservation_ok and verdict.residual_acyclic


class TestRequiredSubchannels:
    def test_three_user_value(self):
        plan, _ = allocate(DEMO3)
        assert required_subchannels(plan) == 3

    def test_four_user_value(self):
        plan, _ = allocate(DEMO4)
        assert required_subchannels(plan) == 7

    def test_empty_plan(self):
        plan, _ = allocate(DofTuple(3, {}))
        assert required_subchannels(plan) == 0

    def test_tampered_plan_raises(self):
        plan, _ = allocate(DEMO3)
        broken = replace(plan, num_subchannels=Fraction(4))
        with pytest.raises(InvariantViolation):
            required_subchannels(broken)

    def test_desynced_bookkeeping_raises(self):
        plan, _ = allocate(DEMO3)
        bad_uni = dict(plan.uni_alloc)
        bad_uni[Edge(3, 2)] = Fraction(1)
        with pytest.raises(InvariantViolation):
            required_subchannels(replace(plan, uni_alloc=bad_uni))


class TestAssignSubchannels:
    def test_three_user_assignment(self):
        plan, _ = allocate(DEMO3)
        plan = assign_subchannels(plan, 3)
        assert plan.assignment.cycle_bundles[cyc(1, 2)] == ((1,),)
        assert plan.assignment.cycle_bundles[cyc(1, 2, 3)] == ((2, 3),)

    def test_four_user_assignment_partitions_indices(self):
        plan, _ = allocate(DEMO4)
        plan = assign_subchannels(plan, 7)
        assert plan.assignment.cycle_bundles[cyc(1, 2)] == ((1,),)
        assert plan.assignment.cycle_bundles[cyc(2, 3)] == ((2,),)
        assert plan.assignment.cycle_bundles[cyc(1, 2, 3)] == ((3, 4),)
        assert plan.assignment.cycle_bundles[cyc(1, 2, 4)] == ((5, 6),)
        assert plan.assignment.edge_channels[Edge(4, 1)] == (7,)
        used = [s for bundles in plan.assignment.cycle_bundles.values()
                for b in bundles for s in b]
        used += [s for chans in plan.assignment.edge_channels.values() for s in chans]
        assert sorted(used) == list(range(1, 8))

    def test_fractional_plan_rejected(self):
        plan, _ = allocate(DofTuple.from_pairs(3, {(1, 2): "1/2"}))
        with pytest.raises(IntegralityError):
            assign_subchannels(plan, 3)

    def test_capacity_exceeded(self):
        plan, _ = allocate(DEMO3)
        with pytest.raises(CapacityError):
            assign_subchannels(plan, 2)

    def test_bundle_sizes_match_cycle_lengths(self):
        rng = random.Random(42)
        for _ in range(20):
            d = random_integral_demand(rng, 4)
            plan, _ = allocate(d)
            plan = assign_subchannels(plan, int(plan.num_subchannels))
            for c, bundles in plan.assignment.cycle_bundles.items():
                assert len(bundles) == int(plan.cycle_alloc[c])
                for b in bundles:
                    assert len(b) == c.length - 1


class TestVerifyPlan:
    def test_three_user_pass(self):
        plan, trace = allocate(DEMO3)
        verdict = verify_plan(plan, DEMO3, trace, 3)
        assert verdict.ok and verdict.failures == ()

    def test_four_user_pass(self):
        plan, trace = allocate(DEMO4)
        assert verify_plan(plan, DEMO4, trace, 7).ok

    def test_capacity_failure_reported_not_raised(self):
        plan, trace = allocate(DEMO3)
        verdict = verify_plan(plan, DEMO3, trace, 2)
        assert not verdict.ok
        assert not verdict.within_capacity
        assert verdict.conservation_ok and verdict.residual_acyclic

    def test_wrong_demand_breaks_conservation(self):
        plan, trace = allocate(DEMO3)
        other = DofTuple.from_pairs(3, {(1, 2): 1})
        verdict = verify_plan(plan, other, trace, 3)
        assert not verdict.conservation_ok


class TestEfficiencyAccounting:
    @pytest.mark.parametrize("length", [2, 3, 4, 5])
    def test_single_cycle_costs_length_minus_one_per_stream(self, length):
        nodes = tuple(range(1, length + 1))
        demand = DofTuple(length, {e: 2 for e in Cycle(nodes).edges()})
        plan, _ = allocate(demand)
        assert plan.cycle_alloc[Cycle(nodes)] == 2
        delivered = length * 2
        assert plan.num_subchannels == (length - 1) * 2
        assert Fraction(delivered, int(plan.num_subchannels)) == \
            Fraction(length, length - 1)


class TestPlanJson:
    def test_schema(self):
        plan, _ = allocate(DEMO3)
        plan = assign_subchannels(plan, 3)
        payload = plan_to_json_dict(plan)
        assert payload["subchannels"] == "3"
        assert {"nodes": [1, 2], "dof": "1"} in payload["cycles"]
        assert {"nodes": [1, 2, 3], "dof": "1"} in payload["cycles"]
        assert payload["uni"] == {}
        assert payload["assignment"]["cycles"] == [
            {"nodes": [1, 2], "bundles": [[1]]},
            {"nodes": [1, 2, 3], "bundles": [[2, 3]]},
        ]

    def test_symmetric_round_trip_demand(self):
        d = symmetric_tuple(4, 6)
        plan, _ = allocate(d)
        payload = plan_to_json_dict(plan)
        assert DofTuple.from_json_dict(payload["demand"]) == d
