"""Symbol-level execution of the cycle strategies over diagonalized sub-channels.

One round works on the N parallel scalar sub-channels produced by the
zero-forcing coders. A sub-channel granted to a cycle is shared by two
adjacent users on the route: both scale their symbols so the contributions
arrive at the relay with a common gain, the relay re-normalizes the received
sum and broadcasts it, and each receiver peels symbols off the bundle one
cancellation at a time starting from the symbol it transmitted itself.
Point-to-point sub-channels carry a single unshared symbol.

The relay's "computed sum" stands in for the decoded linear combination of a
compute-forward relay: exact in noiseless mode, the received sum plus unit
noise otherwise. No lattice codebooks are modelled; the rate formulas for
that layer live in :func:`cf_uplink_rate` / :func:`cf_downlink_rate`.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .allocator import AllocationPlan, allocate, assign_subchannels
from .channel import ChannelRealization, CoderSet, build_coders, clamp_antennas, random_channel
from .cycles import Cycle, Edge
from .dof import DofTuple
from .errors import IntegralityError, PlanConsistencyError

# (edge, stream index) -> unit-average-power complex symbol
SymbolLoad = dict[tuple[Edge, int], complex]

_QPSK = tuple((re + 1j * im) / math.sqrt(2.0)
              for re in (1.0, -1.0) for im in (1.0, -1.0))

GAUSSIAN_ERROR_TOL = 1e-6   # noiseless decodes land many orders below this


@dataclass(frozen=True)
class SimConfig:
    """Knobs for one simulated round."""

    mode: str = "noiseless"            # "noiseless" | "awgn"
    rho: float = 100.0                 # per-node transmit power budget
    seed: int = 0
    constellation: str = "gaussian"    # "gaussian" | "qpsk"

    def __post_init__(self):
        if self.mode not in ("noiseless", "awgn"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.constellation not in ("gaussian", "qpsk"):
            raise ValueError(f"unknown constellation {self.constellation!r}")
        if self.rho <= 0:
            raise ValueError("rho must be positive")

    def to_json_dict(self) -> dict:
        return {"mode": self.mode, "rho": self.rho, "seed": self.seed,
                "constellation": self.constellation}

    @classmethod
    def from_json_dict(cls, payload: dict) -> "SimConfig":
        return cls(mode=payload.get("mode", "noiseless"),
                   rho=float(payload.get("rho", 100.0)),
                   seed=int(payload.get("seed", 0)),
                   constellation=payload.get("constellation", "gaussian"))


@dataclass(frozen=True)
class SimResult:
    decoded: SymbolLoad
    symbol_errors: int
    symbol_error_rate: float
    subchannels_used: int
    delivered_symbols: int
    efficiency: Fraction


@dataclass(frozen=True)
class CfRatePoint:
    power: float
    rate: float


def qpsk_slice(z: complex) -> complex:
    """Nearest QPSK constellation point (ties resolve to the positive side)."""
    return ((1.0 if z.real >= 0 else -1.0) + 1j * (1.0 if z.imag >= 0 else -1.0)) \
        / math.sqrt(2.0)


def random_load(d: DofTuple, constellation: str, rng: np.random.Generator) -> SymbolLoad:
    """Draw one unit-average-power symbol per demanded stream."""
    if not d.is_integral:
        raise IntegralityError("symbol loads need whole-number stream counts")
    load: SymbolLoad = {}
    for edge, value in d.components():
        for stream in range(int(value)):
            if constellation == "qpsk":
                load[(edge, stream)] = _QPSK[int(rng.integers(len(_QPSK)))]
            else:
                load[(edge, stream)] = complex(rng.standard_normal()
                                               + 1j * rng.standard_normal()) / math.sqrt(2.0)
    return load


@dataclass(frozen=True)
class TxSlot:
    """One user's transmission on one sub-channel."""

    user: int
    edge: Edge
    stream: int


@dataclass(frozen=True)
class Placement:
    """Who transmits what where, derived deterministically from a plan.

    Stream indices of an edge are consumed by the cycles through it in plan
    order, then by its point-to-point channels, so transmitter and receivers
    agree on the mapping without further signalling.
    """

    by_subchannel: dict[int, tuple[TxSlot, ...]]
    cycle_streams: dict[tuple[Cycle, int], tuple[int, ...]]
    uni_streams: dict[Edge, tuple[tuple[int, int], ...]]   # (stream, sub-channel)


def plan_placement(plan: AllocationPlan) -> Placement:
    if plan.assignment is None:
        raise IntegralityError("plan has no sub-channel assignment; "
                               "run assign_subchannels first")
    cursor: dict[Edge, int] = {}
    by_subchannel: dict[int, tuple[TxSlot, ...]] = {}
    cycle_streams: dict[tuple[Cycle, int], tuple[int, ...]] = {}

    for cycle, amount in plan.cycle_alloc.items():
        if amount == 0:
            continue
        edges = cycle.edges()
        for b, bundle in enumerate(plan.assignment.cycle_bundles[cycle]):
            streams = []
            for e in edges:
                streams.append(cursor.get(e, 0))
                cursor[e] = streams[-1] + 1
            cycle_streams[(cycle, b)] = tuple(streams)
            # sub-channel q of the bundle is shared by route positions q, q+1
            for q in range(cycle.length - 1):
                by_subchannel[bundle[q]] = (
                    TxSlot(cycle.nodes[q], edges[q], streams[q]),
                    TxSlot(cycle.nodes[q + 1], edges[q + 1], streams[q + 1]),
                )

    uni_streams: dict[Edge, tuple[tuple[int, int], ...]] = {}
    for edge in sorted(plan.uni_alloc):
        pairs = []
        for s in plan.assignment.edge_channels[edge]:
            stream = cursor.get(edge, 0)
            cursor[edge] = stream + 1
            by_subchannel[s] = (TxSlot(edge.tail, edge, stream),)
            pairs.append((stream, s))
        if pairs:
            uni_streams[edge] = tuple(pairs)

    return Placement(by_subchannel=by_subchannel, cycle_streams=cycle_streams,
                     uni_streams=uni_streams)


@dataclass(frozen=True)
class UplinkFrame:
    """Per-user transmit vectors plus the scalars receivers need later.

    ``signals[i - 1]`` is user i's length-N symbol vector. ``gains[s - 1]`` is
    the common arrival gain on sub-channel s: the global power scale times the
    smaller of the two users' flat channel gains (or the lone transmitter's
    gain on an unshared sub-channel).
    """

    signals: np.ndarray     # K x N
    beta: float
    gains: np.ndarray       # N


def build_uplink_signals(plan: AllocationPlan, load: SymbolLoad,
                         coders: CoderSet, rho: float) -> UplinkFrame:
    """Fill every assigned sub-channel and scale to the power budget.

    On a shared sub-channel both users pre-scale by at most 1 so their symbols
    arrive with gain min(alpha_a, alpha_b); the weaker-gain user transmits at
    full scale. A single global factor then lifts the busiest user exactly to
    power rho, preserving all alignments.
    """
    placement = plan_placement(plan)
    n_sub = coders.precoders[0].shape[1]
    k = plan.K
    raw = np.zeros((k, n_sub), dtype=complex)
    gain = np.zeros(n_sub)

    def symbol(slot: TxSlot) -> complex:
        try:
            return load[(slot.edge, slot.stream)]
        except KeyError:
            raise PlanConsistencyError(
                f"load has no symbol for edge {slot.edge} stream {slot.stream}")

    for s, slots in placement.by_subchannel.items():
        if len(slots) == 2:
            a, b = slots
            aligned = min(coders.alphas[a.user - 1], coders.alphas[b.user - 1])
            raw[a.user - 1, s - 1] = (aligned / coders.alphas[a.user - 1]) * symbol(a)
            raw[b.user - 1, s - 1] = (aligned / coders.alphas[b.user - 1]) * symbol(b)
            gain[s - 1] = aligned
        else:
            (solo,) = slots
            raw[solo.user - 1, s - 1] = symbol(solo)
            gain[s - 1] = coders.alphas[solo.user - 1]

    powers = np.sum(np.abs(raw) ** 2, axis=1)
    peak = float(powers.max()) if k else 0.0
    beta = math.sqrt(rho / peak) if peak > 0 else 1.0
    return UplinkFrame(signals=beta * raw, beta=beta, gains=beta * gain)


def relay_compute(plan: AllocationPlan, received: np.ndarray, config: SimConfig,
                  rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """The relay's computed per-sub-channel linear combinations.

    Noiseless mode passes the superposition through exactly; awgn mode adds
    unit complex Gaussian noise per sub-channel, i.e. the amplify-style
    surrogate for a compute-forward relay.
    """
    sums = np.array(received, dtype=complex)
    if config.mode == "awgn":
        if rng is None:
            rng = np.random.default_rng(config.seed)
        sums += (rng.standard_normal(sums.shape)
                 + 1j * rng.standard_normal(sums.shape)) / math.sqrt(2.0)
    return sums


def relay_forward(sums: np.ndarray, plan: AllocationPlan,
                  config: SimConfig) -> tuple[np.ndarray, np.ndarray]:
    """Broadcast vector and its per-sub-channel normalization factors.

    Power is split equally: each active sub-channel is scaled to exactly
    rho / n_active, so the total never exceeds rho. A sub-channel whose sum is
    exactly zero transmits nothing (factor 0); receivers treat that case as a
    known zero sum.
    """
    if plan.num_subchannels.denominator != 1:
        raise IntegralityError("relay forwarding needs an integral plan")
    x = np.zeros_like(sums, dtype=complex)
    gammas = np.zeros(len(sums))
    active = int(plan.num_subchannels)
    if active == 0:
        return x, gammas
    per_channel = config.rho / active
    for s in range(1, active + 1):
        mag = abs(sums[s - 1])
        if mag > 0:
            gammas[s - 1] = math.sqrt(per_channel) / mag
            x[s - 1] = gammas[s - 1] * sums[s - 1]
    return x, gammas


def decode_user(user: int, received: np.ndarray, plan: AllocationPlan,
                own_load: SymbolLoad, gains: np.ndarray, gammas: np.ndarray,
                config: SimConfig) -> SymbolLoad:
    """Recover the symbols of every edge terminating at this user.

    For each cycle bundle through the user: divide out the relay factor and
    the arrival gain, then walk the bundle in both directions from the user's
    own position. Every step cancels a symbol already known (the user's own
    transmission to start with, then the previous estimate) and exposes the
    next one; the estimate at the route position just before the user is the
    symbol addressed to it. Unshared sub-channels decode by plain rescaling.
    In awgn mode with a QPSK load, each intermediate estimate is sliced to the
    nearest constellation point before being cancelled.
    """
    placement = plan_placement(plan)
    slicing = config.constellation == "qpsk" and config.mode == "awgn"

    def shape(z: complex) -> complex:
        return qpsk_slice(z) if slicing else z

    def computed_sum(s: int) -> complex:
        g = gammas[s - 1]
        return complex(received[s - 1]) / g if g > 0 else 0j

    decoded: SymbolLoad = {}
    for cycle, amount in plan.cycle_alloc.items():
        if amount == 0 or user not in cycle:
            continue
        p = cycle.nodes.index(user)
        edges = cycle.edges()
        length = cycle.length
        for b in range(int(amount)):
            bundle = plan.assignment.cycle_bundles[cycle][b]
            streams = placement.cycle_streams[(cycle, b)]
            own_key = (edges[p], streams[p])
            if own_key not in own_load:
                raise PlanConsistencyError(
                    f"user {user} is on cycle {cycle} but has no symbol for "
                    f"edge {edges[p]} stream {streams[p]}")
            estimates: list[complex] = [0j] * length
            estimates[p] = own_load[own_key]
            for q in range(p, length - 1):        # forward along the route
                level = computed_sum(bundle[q]) / gains[bundle[q] - 1]
                estimates[q + 1] = shape(level - estimates[q])
            for q in range(p - 1, -1, -1):        # backward, re-entering via own symbol
                level = computed_sum(bundle[q]) / gains[bundle[q] - 1]
                estimates[q] = shape(level - estimates[q + 1])
            incoming = (p - 1) % length
            decoded[(edges[incoming], streams[incoming])] = estimates[incoming]

    for edge, pairs in placement.uni_streams.items():
        if edge.head != user:
            continue
        for stream, s in pairs:
            decoded[(edge, stream)] = shape(computed_sum(s) / gains[s - 1])

    return decoded


def _count_errors(load: SymbolLoad, decoded: SymbolLoad, constellation: str) -> int:
    errors = 0
    for key, sent in load.items():
        got = decoded.get(key)
        if got is None:
            errors += 1
        elif constellation == "qpsk":
            errors += qpsk_slice(got) != sent
        else:
            errors += abs(got - sent) > GAUSSIAN_ERROR_TOL
    return errors


def simulate_round(d: DofTuple, ch: ChannelRealization, config: SimConfig) -> SimResult:
    """One full uplink/relay/downlink round for an integral demand tuple.

    Composes allocation, sub-channel assignment, zero-forcing coders, aligned
    uplink transmission, relay computation and forwarding, and per-user chain
    decoding. Surplus relay antennas are deactivated first. Noiseless rounds
    recover every symbol exactly up to float round-off.
    """
    if d.K != ch.K:
        raise ValueError(f"demand has K={d.K} but channel has K={ch.K}")
    if not d.is_integral:
        raise IntegralityError("simulation needs whole-number stream counts")

    ch = clamp_antennas(ch)
    plan, _trace = allocate(d)
    plan = assign_subchannels(plan, ch.N)
    coders = build_coders(ch)

    rng = np.random.default_rng([config.seed, 1])
    load = random_load(d, config.constellation, rng)
    frame = build_uplink_signals(plan, load, coders, config.rho)

    relay_in = np.zeros(ch.N, dtype=complex)
    for i in range(ch.K):
        relay_in += ch.uplink[i] @ (coders.precoders[i] @ frame.signals[i])

    sums = relay_compute(plan, relay_in, config, rng)
    x_relay, gammas = relay_forward(sums, plan, config)

    decoded: SymbolLoad = {}
    for user in range(1, ch.K + 1):
        y = ch.downlink[user - 1] @ x_relay
        if config.mode == "awgn":
            y = y + (rng.standard_normal(ch.M)
                     + 1j * rng.standard_normal(ch.M)) / math.sqrt(2.0)
        post = coders.postcoders[user - 1] @ y
        own = {key: val for key, val in load.items() if key[0].tail == user}
        decoded.update(decode_user(user, post, plan, own, frame.gains, gammas,
                                   config))

    errors = _count_errors(load, decoded, config.constellation)
    used = int(plan.num_subchannels)
    delivered = len(load)
    return SimResult(
        decoded=decoded,
        symbol_errors=errors,
        symbol_error_rate=errors / delivered if delivered else 0.0,
        subchannels_used=used,
        delivered_symbols=delivered,
        efficiency=Fraction(delivered, used) if used else Fraction(0),
    )


def cf_uplink_rate(h1: complex, h2: complex, power: float) -> float:
    """Rate at which a relay can decode the aligned sum of two streams.

    min over the two links of log2(1/2 + |h|^2 P), floored at zero; the slope
    in log2(P) tends to 1, so computing the sum costs each stream one degree
    of freedom, same as decoding it.
    """
    r1 = math.log2(0.5 + abs(h1) ** 2 * power)
    r2 = math.log2(0.5 + abs(h2) ** 2 * power)
    return max(0.0, min(r1, r2))


def cf_downlink_rate(d3: complex, power: float) -> float:
    """Broadcast rate for a forwarded sum toward a receiver with gain d3."""
    return math.log2(1.0 + abs(d3) ** 2 * power)


def estimate_dof_slope(rate_fn: Callable[[float], float], rho_low: float,
                       rho_high: float) -> float:
    """Finite-difference pre-log slope of a rate curve between two powers."""
    if not 0 < rho_low < rho_high:
        raise ValueError("need 0 < rho_low < rho_high")
    return (rate_fn(rho_high) - rate_fn(rho_low)) \
        / (math.log2(rho_high) - math.log2(rho_low))


def cf_rate_curve(rate_fn: Callable[[float], float],
                  powers: list[float]) -> tuple[CfRatePoint, ...]:
    return tuple(CfRatePoint(power=p, rate=rate_fn(p)) for p in powers)


def sweep_rows(d: DofTuple, m: int, n: int, rhos: list[float], seeds: list[int],
               mode: str, constellation: str, workers: int = 1) -> list[dict]:
    """Monte-Carlo grid over (rho, seed); one result row per round.

    Each round draws its channel and symbols from its own seed, so rows are
    independent of evaluation order and the grid can run on several threads.
    Rows come back sorted by (rho, seed).
    """
    grid = sorted((float(rho), int(seed)) for rho in rhos for seed in seeds)

    def one(point: tuple[float, int]) -> dict:
        rho, seed = point
        ch = random_channel(d.K, m, n, seed)
        config = SimConfig(mode=mode, rho=rho, seed=seed,
                           constellation=constellation)
        result = simulate_round(d, ch, config)
        return {"rho": rho, "mode": mode, "K": d.K, "M": m, "N": n,
                "seed": seed, "delivered": result.delivered_symbols,
                "used": result.subchannels_used, "errors": result.symbol_errors,
                "ser": result.symbol_error_rate}

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, grid))
    return [one(point) for point in grid]
