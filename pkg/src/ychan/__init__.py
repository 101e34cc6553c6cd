"""DoF-region tools and a symbol-level simulator for K-user relay exchange.

The package splits into: cycle machinery on the message-flow graph
(:mod:`ychan.cycles`), exact region membership tests (:mod:`ychan.dof`), the
greedy cycle-resolution allocator (:mod:`ychan.allocator`), zero-forcing
channel diagonalization (:mod:`ychan.channel`), the sub-channel simulator
(:mod:`ychan.phy`), and a batch CLI (:mod:`ychan.cli`).
"""

from .allocator import (AllocationPlan, PlanVerdict, ResidualTrace,
                        SubchannelAssignment, allocate, assign_subchannels,
                        plan_to_json_dict, required_subchannels, verify_plan)
from .channel import (ChannelRealization, CoderSet, build_coders,
                      channel_from_json_dict, channel_to_json_dict,
                      clamp_antennas, downlink_postcoder, random_channel,
                      uplink_precoder)
from .cycles import (Cycle, CycleSet, Edge, WeightedDigraph, all_edges,
                     canonicalize, cycle_edges, enumerate_cycles, find_cycle)
from .dof import (DofTuple, RegionParams, RegionVerdict,
                  general_outer_bound_contains, region_contains, sum_dof,
                  symmetric_tuple)
from .errors import (CapacityError, ComplexityGuardError, ConditioningError,
                     DegenerateChannelError, IntegralityError,
                     InvariantViolation, PlanConsistencyError, RegimeError,
                     YchanError)
from .packing import max_cycle_packing
from .phy import (CfRatePoint, SimConfig, SimResult, build_uplink_signals,
                  cf_downlink_rate, cf_rate_curve, cf_uplink_rate, decode_user,
                  estimate_dof_slope, random_load, relay_compute,
                  relay_forward, simulate_round, sweep_rows)

__version__ = "0.1.0"
