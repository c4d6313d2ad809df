"""Utility model and joint resource-block allocation.

Per-direction utility is the geometric mean of sigmoid utilities for rate,
latency and loss; per-user utility is the min of downlink and uplink. The
greedy allocator assigns one block at a time to the (user, leg, direction)
with the best marginal gain in the sum of user utilities. A literal marginal
gain is zero for every block given to a user whose other direction is still
empty (the min of the pair stays 0), which would starve unserved users, so
such blocks are scored with an amortized pair gain: half the user-utility
gain realized once the other direction also receives its best single block.
Ties fall back to the marginal sum of direction utilities, then to candidate
priority order. A brute-force enumerator over the true objective serves as
the optimality oracle at small scale.

The allocator scores candidates with deterministic expected metrics: per-RB
rates at unit mean fading and a closed-form outage under fully correlated
per-leg fading, P(leg fails) = 1 - exp(-g*) with
g* = (2^(r_req / (m B)) - 1) / mean_snr.
"""

from __future__ import annotations

import csv
import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .grades import Grade
from .radio import Deployment


class Direction(enum.Enum):
    DL = "dl"
    UL = "ul"


@dataclass(frozen=True)
class SigmoidProfile:
    """One metric's utility curve; log_domain applies the sigmoid to log10."""

    midpoint: float
    steepness: float
    increasing: bool
    log_domain: bool

    def __post_init__(self):
        if self.steepness <= 0:
            raise ValueError("steepness must be > 0")
        if self.midpoint <= 0 and self.log_domain:
            raise ValueError("log-domain midpoint must be > 0")


def _sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-min(z, 700.0)))
    return math.exp(max(z, -700.0)) / (1.0 + math.exp(max(z, -700.0)))


def utility_component(value: float, profile: SigmoidProfile) -> float:
    """Map a metric value to [0, 1] along the profile's sigmoid."""
    if value < 0:
        raise ValueError("metric value must be >= 0")
    if math.isinf(value):
        return 1.0 if profile.increasing else 0.0
    if profile.log_domain:
        if value == 0.0:
            return 0.0 if profile.increasing else 1.0
        z = profile.steepness * (math.log10(value) - math.log10(profile.midpoint))
    else:
        z = profile.steepness * (value - profile.midpoint)
    return _sigmoid(z if profile.increasing else -z)


@dataclass(frozen=True)
class UtilitySet:
    rate: SigmoidProfile = SigmoidProfile(3e6, 5.0, True, True)
    latency: SigmoidProfile = SigmoidProfile(0.005, 2000.0, False, False)
    loss: SigmoidProfile = SigmoidProfile(1e-3, 2.0, False, True)

    def direction(self, rate_bps: float, latency_s: float, loss_ratio: float) -> float:
        return direction_utility(
            utility_component(rate_bps, self.rate),
            utility_component(latency_s, self.latency),
            utility_component(loss_ratio, self.loss),
        )


def direction_utility(u_rate: float, u_latency: float, u_loss: float) -> float:
    """Unweighted geometric mean of the three component utilities."""
    for u in (u_rate, u_latency, u_loss):
        if not 0.0 <= u <= 1.0:
            raise ValueError("component utilities must be in [0, 1]")
    return (u_rate * u_latency * u_loss) ** (1.0 / 3.0)


def user_utility(u_dl: float, u_ul: float) -> float:
    """A closed-loop user is bottlenecked by its weaker direction."""
    for u in (u_dl, u_ul):
        if not 0.0 <= u <= 1.0:
            raise ValueError("direction utilities must be in [0, 1]")
    return min(u_dl, u_ul)


@dataclass(frozen=True)
class UserConnectivity:
    user_id: int
    legs: tuple[str, ...]  # serving cell ids, macro first

    def __post_init__(self):
        if not 1 <= len(self.legs) <= 2:
            raise ValueError("one or two legs")
        if self.legs[0] != "macro":
            raise ValueError("first leg must be the macro cell")

    @property
    def is_dual(self) -> bool:
        return len(self.legs) == 2


def configure_connectivity(deployment: Deployment, grade: Grade) -> list[UserConnectivity]:
    """Ultra grade adds a small-cell leg for users inside small-cell coverage
    (nearest cell wins); normal grade serves everyone from the macro only."""
    modes = []
    for uid, (ux, uy) in enumerate(deployment.users):
        legs: tuple[str, ...] = ("macro",)
        if grade is Grade.ULTRA:
            best = None
            for i, ((cx, cy), radius) in enumerate(deployment.small_cells):
                d = math.hypot(ux - cx, uy - cy)
                if d <= radius and (best is None or d < best[0]):
                    best = (d, i)
            if best is not None:
                legs = ("macro", f"small{best[1]}")
        modes.append(UserConnectivity(uid, legs))
    return modes


@dataclass(frozen=True)
class LegChannel:
    """Deterministic channel summary of one radio leg for allocation scoring."""

    cell_id: str
    rb_rate_bps: float   # per-RB rate at unit mean fading
    mean_snr: float      # linear, large-scale only
    overhead_s: float    # air-interface + backhaul + core transit

    def __post_init__(self):
        if self.rb_rate_bps < 0 or self.mean_snr < 0 or self.overhead_s < 0:
            raise ValueError("leg parameters must be >= 0")


@dataclass
class AllocationProblem:
    legs: dict[tuple[int, Direction], tuple[LegChannel, ...]]
    n_rbs: int
    packet_size_bits: int
    deadline_s: float
    rb_bandwidth_hz: float
    utility: UtilitySet = field(default_factory=UtilitySet)

    def __post_init__(self):
        if self.n_rbs < 0:
            raise ValueError("n_rbs must be >= 0")
        if self.packet_size_bits <= 0 or self.deadline_s <= 0:
            raise ValueError("packet size and deadline must be > 0")

    def users(self) -> list[int]:
        return sorted({u for u, _ in self.legs})


def leg_failure_probability(m: int, leg: LegChannel, packet_size_bits: int,
                            deadline_s: float, rb_bandwidth_hz: float) -> float:
    """Closed-form outage of one leg carrying m blocks."""
    if m <= 0 or leg.mean_snr <= 0:
        return 1.0
    slack = deadline_s - leg.overhead_s
    if slack <= 0:
        return 1.0
    r_req = packet_size_bits / slack
    g_star = (2.0 ** (r_req / (m * rb_bandwidth_hz)) - 1.0) / leg.mean_snr
    return -math.expm1(-g_star)


def direction_metrics(counts, legs, problem: AllocationProblem):
    """Expected (rate, latency, loss) for one direction's per-leg RB counts."""
    best_rate = 0.0
    best_leg = None
    for m, leg in zip(counts, legs):
        rate = m * leg.rb_rate_bps
        if rate > best_rate:
            best_rate = rate
            best_leg = leg
    if best_rate == 0.0:
        return 0.0, math.inf, 1.0
    latency = problem.packet_size_bits / best_rate + best_leg.overhead_s
    loss = 1.0
    for m, leg in zip(counts, legs):
        loss *= leg_failure_probability(m, leg, problem.packet_size_bits,
                                        problem.deadline_s, problem.rb_bandwidth_hz)
    return best_rate, latency, loss


def _direction_value(counts, legs, problem) -> float:
    rate, latency, loss = direction_metrics(counts, legs, problem)
    return problem.utility.direction(rate, latency, loss)


@dataclass
class Allocation:
    """RB-indexed assignment; None marks an unassigned block."""

    n_rbs: int
    assignments: tuple[tuple[int, str, Direction] | None, ...]

    def __post_init__(self):
        if len(self.assignments) != self.n_rbs:
            raise ValueError("one slot per resource block")

    def n_assigned(self) -> int:
        return sum(1 for a in self.assignments if a is not None)

    def counts(self) -> dict[tuple[int, Direction], dict[str, int]]:
        out: dict[tuple[int, Direction], dict[str, int]] = {}
        for a in self.assignments:
            if a is None:
                continue
            user, cell, direction = a
            per_leg = out.setdefault((user, direction), {})
            per_leg[cell] = per_leg.get(cell, 0) + 1
        return out

    def to_csv(self, path: str) -> None:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["rb", "user", "leg", "direction"])
            for rb, a in enumerate(self.assignments):
                if a is None:
                    writer.writerow([rb, "", "", ""])
                else:
                    writer.writerow([rb, a[0], a[1], a[2].value])


def sum_utility(allocation: Allocation, problem: AllocationProblem) -> float:
    """Σ over users of min(DL, UL) utility under the allocation."""
    counts = allocation.counts()
    total = 0.0
    for user in problem.users():
        per_dir = []
        for direction in (Direction.DL, Direction.UL):
            legs = problem.legs[(user, direction)]
            c = counts.get((user, direction), {})
            per_dir.append(_direction_value(
                [c.get(leg.cell_id, 0) for leg in legs], legs, problem))
        total += user_utility(per_dir[0], per_dir[1])
    return total


def _candidate_list(problem: AllocationProblem):
    """(user, direction, leg index) in tie-break priority order."""
    cands = []
    for user in problem.users():
        for direction in (Direction.DL, Direction.UL):
            for leg_idx in range(len(problem.legs[(user, direction)])):
                cands.append((user, direction, leg_idx))
    return cands


def allocate_greedy(problem: AllocationProblem,
                    gain_transform: Callable[[float], float] | None = None) -> Allocation:
    """One block at a time to the best-gaining (user, leg, direction).

    The gain of a block is the increase in the sum of user utilities it
    causes. While the user's other direction is still empty that increase is
    literally zero, so the block is scored by the amortized pair gain
    instead: half the user utility reached once the other direction also
    gets its best single block. Ties fall back to the marginal direction
    utility, then to candidate priority order (lowest user id, DL before UL,
    macro leg first). gain_transform, when given, is applied to both gain
    components before comparison (selection only; termination still checks
    the raw gains).
    """
    cands = _candidate_list(problem)
    n_c = len(cands)
    counts: dict[tuple[int, Direction], list[int]] = {
        key: [0] * len(legs) for key, legs in problem.legs.items()}
    dir_value: dict[tuple[int, Direction], float] = {
        key: _direction_value(counts[key], problem.legs[key], problem)
        for key in problem.legs}

    # best value a direction can reach with one block, for the pair gain
    pot1: dict[tuple[int, Direction], float] = {}
    for key, legs in problem.legs.items():
        best = 0.0
        for leg_idx in range(len(legs)):
            trial = [0] * len(legs)
            trial[leg_idx] = 1
            best = max(best, _direction_value(trial, legs, problem))
        pot1[key] = best

    def user_value(user):
        return user_utility(dir_value[(user, Direction.DL)],
                            dir_value[(user, Direction.UL)])

    dp = np.zeros(n_c)
    ds = np.zeros(n_c)
    amortize = True  # off once the budget cannot complete a new pair

    def refresh(ci):
        user, direction, leg_idx = cands[ci]
        key = (user, direction)
        other_key = (user, Direction.UL if direction is Direction.DL
                     else Direction.DL)
        trial = list(counts[key])
        trial[leg_idx] += 1
        new_dir = _direction_value(trial, problem.legs[key], problem)
        if sum(counts[other_key]) == 0:
            if amortize:
                dp[ci] = (min(new_dir, pot1[other_key]) - user_value(user)) / 2.0
            else:
                dp[ci] = 0.0
        else:
            dp[ci] = min(new_dir, dir_value[other_key]) - user_value(user)
        ds[ci] = new_dir - dir_value[key]

    for ci in range(n_c):
        refresh(ci)

    assignments: list[tuple[int, str, Direction] | None] = [None] * problem.n_rbs
    for rb in range(problem.n_rbs):
        if amortize and problem.n_rbs - rb < 2:
            amortize = False
            for ci in range(n_c):
                refresh(ci)
        sel_p = dp if gain_transform is None else np.array(
            [gain_transform(x) for x in dp])
        sel_s = ds if gain_transform is None else np.array(
            [gain_transform(x) for x in ds])
        best_p = sel_p.max() if n_c else 0.0
        if n_c == 0:
            break
        tied = np.flatnonzero(sel_p == best_p)
        ci = int(tied[np.argmax(sel_s[tied])])  # argmax keeps first on ties
        if dp[ci] <= 0.0 and ds[ci] <= 0.0:
            break
        user, direction, leg_idx = cands[ci]
        key = (user, direction)
        counts[key][leg_idx] += 1
        assignments[rb] = (user, problem.legs[key][leg_idx].cell_id, direction)
        dir_value[key] = _direction_value(counts[key], problem.legs[key], problem)
        for cj, (u2, _, _) in enumerate(cands):
            if u2 == user:
                refresh(cj)

    return Allocation(problem.n_rbs, tuple(assignments))


class InstanceTooLarge(ValueError):
    pass


def allocate_bruteforce(problem: AllocationProblem) -> Allocation:
    """Exhaustive oracle over all count vectors; small instances only."""
    users = problem.users()
    if len(users) > 3 or problem.n_rbs > 6:
        raise InstanceTooLarge("brute force is limited to 3 users and 6 RBs")
    cands = _candidate_list(problem)
    n_c = len(cands)

    vectors = []
    for total in range(problem.n_rbs + 1):
        for cuts in itertools.combinations(range(total + n_c - 1), n_c - 1):
            prev = -1
            vec = []
            for cut in cuts:
                vec.append(cut - prev - 1)
                prev = cut
            vec.append(total + n_c - 1 - prev - 1)
            vectors.append(vec)
    vectors = np.asarray(vectors, dtype=int)

    best = None  # (primary, secondary, vector-as-tuple, index)
    for idx, vec in enumerate(vectors):
        counts: dict[tuple[int, Direction], list[int]] = {
            key: [0] * len(legs) for key, legs in problem.legs.items()}
        for ci, m in enumerate(vec):
            user, direction, leg_idx = cands[ci]
            counts[(user, direction)][leg_idx] += int(m)
        primary = 0.0
        secondary = 0.0
        for user in users:
            vals = []
            for direction in (Direction.DL, Direction.UL):
                key = (user, direction)
                vals.append(_direction_value(counts[key], problem.legs[key], problem))
            primary += min(vals)
            secondary += sum(vals)
        # prefer higher (primary, secondary); ties go to the vector with more
        # blocks on higher-priority candidates
        rank = (primary, secondary, tuple(vec))
        if best is None or rank > best[0]:
            best = (rank, vec)

    vec = best[1]
    assignments: list[tuple[int, str, Direction] | None] = [None] * problem.n_rbs
    rb = 0
    for ci, m in enumerate(vec):
        user, direction, leg_idx = cands[ci]
        cell = problem.legs[(user, direction)][leg_idx].cell_id
        for _ in range(int(m)):
            assignments[rb] = (user, cell, direction)
            rb += 1
    return Allocation(problem.n_rbs, tuple(assignments))
