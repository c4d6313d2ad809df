"""Monte Carlo engine for the system-level evaluation.

Each iteration draws a fresh deployment and shadowing map, configures
per-grade connectivity, allocates the shared resource-block pool, then
pushes per-user packet batches through the fading channel. Iterations
are independent and merge deterministically by index, so serial and
parallel runs produce identical results.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .alloc import (
    Allocation,
    AllocationProblem,
    Direction,
    LegChannel,
    UserConnectivity,
    UtilitySet,
    allocate_greedy,
    configure_connectivity,
    user_utility,
)
from .grades import Grade
from .radio import (
    ChannelParams,
    Deployment,
    LinkState,
    generate_deployment,
    link_distance_km,
    mean_snr_linear,
    rate_per_rb,
    shadowing_sample,
)

THREADS_ENV = "TACTILE_SIM_THREADS"
DIRECTIONS = (Direction.DL, Direction.UL)


@dataclass(frozen=True)
class SimConfig:
    """Everything one evaluation run depends on."""

    n_iterations: int = 100
    n_packets_per_user: int = 1000
    packet_size_bits: int = 256
    e2e_latency_req_s: float = 0.005
    grade: Grade = Grade.ULTRA
    seed: int = 0
    n_users: int = 50
    n_small_cells: int = 4
    macro_radius_m: float = 100.0
    small_radius_m: float = 30.0
    air_interface_delay_s: float = 0.00025
    core_transit_s: float = 0.0
    channel: ChannelParams = field(default_factory=ChannelParams)
    utility: UtilitySet = field(default_factory=UtilitySet)

    def __post_init__(self):
        if self.n_iterations < 1 or self.n_packets_per_user < 1:
            raise ValueError("iteration and packet counts must be >= 1")
        if self.packet_size_bits < 1 or self.n_users < 1:
            raise ValueError("packet size and user count must be >= 1")
        if self.e2e_latency_req_s <= 0:
            raise ValueError("latency requirement must be > 0")
        if self.n_small_cells < 0:
            raise ValueError("small cell count must be >= 0")
        if self.macro_radius_m <= 0 or self.small_radius_m <= 0:
            raise ValueError("cell radii must be > 0")
        if self.air_interface_delay_s < 0 or self.core_transit_s < 0:
            raise ValueError("delays must be >= 0")

    @property
    def leg_overhead_s(self) -> float:
        return self.air_interface_delay_s + self.core_transit_s


@dataclass(frozen=True)
class PacketOutcome:
    user_id: int
    direction: Direction
    success: bool
    latency_s: float | None  # defined only on success
    legs_used: int           # configured legs; 2 only in dual mode
    rate_bps: float = 0.0    # delivering leg's rate on success


@dataclass(frozen=True)
class DirectionStats:
    rate_bps: float       # mean over delivered packets, 0 if none
    mean_latency_s: float  # mean over delivered packets, inf if none
    loss_ratio: float
    utility: float


@dataclass(frozen=True)
class UserStats:
    user_id: int
    dl: DirectionStats
    ul: DirectionStats
    utility: float


@dataclass(frozen=True)
class IterationResult:
    index: int
    users: tuple[UserStats, ...]
    sum_utility: float


@dataclass(frozen=True)
class RunResult:
    grade: Grade
    seed: int
    iterations: tuple[IterationResult, ...]

    @property
    def sum_utility_samples(self) -> tuple[float, ...]:
        return tuple(it.sum_utility for it in self.iterations)


def draw_shadowing(rng, deployment: Deployment) -> dict[tuple[int, str], float]:
    """One log-normal draw per (user, cell) pair, in a fixed order.

    Every cell is drawn for every user regardless of connectivity, so the
    stream position never depends on the grade under test.
    """
    shadows = {}
    for uid in range(len(deployment.users)):
        for cell_id, _, _ in deployment.cell_positions():
            shadows[(uid, cell_id)] = shadowing_sample(rng)
    return shadows


def build_allocation_problem(cfg: SimConfig, deployment: Deployment,
                             connectivity: list[UserConnectivity],
                             shadowing: dict[tuple[int, str], float]) -> AllocationProblem:
    """Summarize each configured leg for the allocator.

    Downlink uses the serving cell's transmit power class, uplink the
    device's; both directions of a leg share the same shadowing draw.
    """
    cells = {cid: pos for cid, pos, _ in deployment.cell_positions()}
    legs: dict[tuple[int, Direction], tuple[LegChannel, ...]] = {}
    for mode in connectivity:
        upos = deployment.users[mode.user_id]
        for direction in DIRECTIONS:
            built = []
            for cell_id in mode.legs:
                kind = "macro" if cell_id == "macro" else "small"
                link = LinkState(mode.user_id, cell_id,
                                 link_distance_km(upos, cells[cell_id]),
                                 shadowing[(mode.user_id, cell_id)])
                tx = kind if direction is Direction.DL else "user"
                snr = mean_snr_linear(link, cfg.channel, tx)
                built.append(LegChannel(cell_id, rate_per_rb(snr, cfg.channel),
                                        snr, cfg.leg_overhead_s))
            legs[(mode.user_id, direction)] = tuple(built)
    return AllocationProblem(legs=legs, n_rbs=cfg.channel.n_rbs,
                             packet_size_bits=cfg.packet_size_bits,
                             deadline_s=cfg.e2e_latency_req_s,
                             rb_bandwidth_hz=cfg.channel.rb_bandwidth,
                             utility=cfg.utility)


def _leg_attempt(rng, n_rbs: int, leg: LegChannel, cfg: SimConfig):
    """One packet copy on one leg: redraw fading per RB, sum the rates."""
    if n_rbs == 0:
        return False, math.inf, 0.0
    rate = 0.0
    for gain in rng.standard_exponential(n_rbs):
        rate += rate_per_rb(leg.mean_snr * float(gain), cfg.channel)
    if rate <= 0.0:
        return False, math.inf, 0.0
    latency = cfg.packet_size_bits / rate + leg.overhead_s
    return latency <= cfg.e2e_latency_req_s, latency, rate


def simulate_packet(user_id: int, direction: Direction, allocation: Allocation,
                    legs: tuple[LegChannel, ...], rngs, cfg: SimConfig) -> PacketOutcome:
    """Send one packet, duplicated over every configured leg.

    `rngs` holds one generator per leg (macro first). The packet succeeds
    if any copy arrives inside the latency budget; its latency and rate
    are the delivering (fastest successful) copy's.
    """
    counts = allocation.counts().get((user_id, direction), {})
    best_latency = math.inf
    best_rate = 0.0
    for leg, rng in zip(legs, rngs):
        ok, latency, rate = _leg_attempt(rng, counts.get(leg.cell_id, 0), leg, cfg)
        if ok and latency < best_latency:
            best_latency = latency
            best_rate = rate
    if math.isinf(best_latency):
        return PacketOutcome(user_id, direction, False, None, len(legs))
    return PacketOutcome(user_id, direction, True, best_latency, len(legs), best_rate)


def _leg_batch(rng, n_packets: int, n_rbs: int, leg: LegChannel, cfg: SimConfig):
    """Vectorized `_leg_attempt` over a whole packet batch."""
    if n_rbs == 0:
        nothing = np.zeros(n_packets)
        return np.full(n_packets, math.inf), nothing
    gains = rng.standard_exponential((n_packets, n_rbs))
    eff = np.minimum(np.log2(1.0 + leg.mean_snr * gains),
                     cfg.channel.spectral_efficiency_cap)
    rates = (cfg.channel.rb_bandwidth * eff).sum(axis=1)
    with np.errstate(divide="ignore"):
        latencies = np.where(rates > 0.0,
                             cfg.packet_size_bits / rates + leg.overhead_s,
                             math.inf)
    return latencies, rates


def _direction_batch(leg_rngs, counts: dict[str, int], legs: tuple[LegChannel, ...],
                     cfg: SimConfig) -> DirectionStats:
    n = cfg.n_packets_per_user
    best_latency = np.full(n, math.inf)
    best_rate = np.zeros(n)
    for leg, rng in zip(legs, leg_rngs):
        latencies, rates = _leg_batch(rng, n, counts.get(leg.cell_id, 0), leg, cfg)
        ok = latencies <= cfg.e2e_latency_req_s
        better = ok & (latencies < best_latency)
        best_latency[better] = latencies[better]
        best_rate[better] = rates[better]
    delivered = np.isfinite(best_latency)
    n_ok = int(delivered.sum())
    loss_ratio = (n - n_ok) / n
    if n_ok:
        rate = float(best_rate[delivered].mean())
        latency = float(best_latency[delivered].mean())
    else:
        rate, latency = 0.0, math.inf
    utility = cfg.utility.direction(rate, latency, loss_ratio)
    return DirectionStats(rate, latency, loss_ratio, utility)


def run_iteration(cfg: SimConfig, rng, index: int = 0,
                  deployment: Deployment | None = None,
                  allocation: Allocation | None = None) -> IterationResult:
    """One full drop: deployment, shadowing, connectivity, allocation, packets.

    `deployment` and `allocation` can be injected for paired experiments;
    the random stream layout does not depend on either, nor on the grade,
    so runs on the same seed stay comparable draw for draw.
    """
    if deployment is None:
        deployment = generate_deployment(rng, macro_radius=cfg.macro_radius_m,
                                         small_radius=cfg.small_radius_m,
                                         n_small=cfg.n_small_cells,
                                         n_users=cfg.n_users)
    shadowing = draw_shadowing(rng, deployment)
    connectivity = configure_connectivity(deployment, cfg.grade)
    problem = build_allocation_problem(cfg, deployment, connectivity, shadowing)
    if allocation is None:
        allocation = allocate_greedy(problem)
    counts = allocation.counts()

    users = []
    total = 0.0
    for mode in connectivity:
        per_dir = {}
        for direction in DIRECTIONS:
            leg_rngs = rng.spawn(2)  # macro stream first, fixed arity
            per_dir[direction] = _direction_batch(
                leg_rngs, counts.get((mode.user_id, direction), {}),
                problem.legs[(mode.user_id, direction)], cfg)
        utility = user_utility(per_dir[Direction.DL].utility,
                               per_dir[Direction.UL].utility)
        users.append(UserStats(mode.user_id, per_dir[Direction.DL],
                               per_dir[Direction.UL], utility))
        total += utility
    return IterationResult(index, tuple(users), total)


def _resolve_threads(n_threads: int | None) -> int:
    if n_threads is None:
        n_threads = int(os.environ.get(THREADS_ENV, "1"))
    if n_threads < 1:
        raise ValueError("thread count must be >= 1")
    return n_threads


def run_monte_carlo(cfg: SimConfig, n_threads: int | None = None) -> RunResult:
    """All iterations on seed-derived disjoint streams, merged by index."""
    root = np.random.SeedSequence(cfg.seed)
    children = root.spawn(cfg.n_iterations)
    n_threads = _resolve_threads(n_threads)

    def one(i: int) -> IterationResult:
        return run_iteration(cfg, np.random.default_rng(children[i]), index=i)

    if n_threads == 1:
        iterations = [one(i) for i in range(cfg.n_iterations)]
    else:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            iterations = list(pool.map(one, range(cfg.n_iterations)))
    iterations.sort(key=lambda it: it.index)
    return RunResult(cfg.grade, cfg.seed, tuple(iterations))


def empirical_cdf(samples) -> list[tuple[float, float]]:
    """Right-continuous step function as (value, P[X <= value]) points."""
    xs = sorted(samples)
    if not xs:
        raise ValueError("need at least one sample")
    n = len(xs)
    points = []
    for i, x in enumerate(xs):
        if i + 1 < n and xs[i + 1] == x:
            continue
        points.append((x, (i + 1) / n))
    return points


def quantile_nearest_rank(samples, q: float) -> float:
    """Smallest sample with empirical CDF >= q, for q in (0, 1]."""
    xs = sorted(samples)
    if not xs:
        raise ValueError("need at least one sample")
    if not 0.0 < q <= 1.0:
        raise ValueError("quantile must be in (0, 1]")
    return xs[math.ceil(q * len(xs)) - 1]


def sample_deciles(samples) -> list[float]:
    return [quantile_nearest_rank(samples, q / 10.0) for q in range(1, 10)]


def dominates_at_deciles(upper, lower) -> bool:
    """True when `upper`'s every decile is at least `lower`'s."""
    return all(u >= l for u, l in
               zip(sample_deciles(upper), sample_deciles(lower)))
