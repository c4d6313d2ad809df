"""Channel and deployment model: geometry, path loss, shadowing, fading, SNR, rate.

Links are noise-limited (SNR, not SINR). The same log-distance path-loss law
applies to macro and small-cell links. Shadowing is held fixed per Monte Carlo
iteration while the Rayleigh gain is redrawn per packet per resource block.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

# Minimum link distance in km; guards the log-distance law near r = 0.
MIN_DISTANCE_KM = 1e-3


@dataclass(frozen=True)
class ChannelParams:
    """Link-budget constants and the shared resource pool size."""

    pathloss_a: float = 128.1          # dB at 1 km
    pathloss_b: float = 37.6           # dB per decade of km
    shadow_sigma: float = 8.0          # dB
    noise_figure: float = 5.0          # dB
    thermal_noise_density: float = -174.0   # dBm/Hz
    rb_bandwidth: float = 180e3        # Hz, LTE-numerology resource block
    tx_power: dict[str, float] = field(
        default_factory=lambda: {"macro": 36.0, "small": 25.0, "user": 18.0}
    )  # dBm
    n_rbs: int = 100
    # Spectral-efficiency ceiling, bit/s/Hz. Numerical guard for the r -> 0
    # corner of the path-loss law; high enough not to flatten in-cell rates.
    spectral_efficiency_cap: float = 40.0

    def __post_init__(self):
        for name, val in self.tx_power.items():
            if not math.isfinite(val):
                raise ValueError(f"non-finite tx power for {name!r}")
        if self.rb_bandwidth <= 0:
            raise ValueError("rb_bandwidth must be > 0")
        if self.n_rbs < 1:
            raise ValueError("n_rbs must be >= 1")

    def noise_power_dbm(self) -> float:
        """Thermal noise plus receiver noise figure over one resource block."""
        return (
            self.thermal_noise_density
            + 10.0 * math.log10(self.rb_bandwidth)
            + self.noise_figure
        )


@dataclass(frozen=True)
class Deployment:
    """One macrocell, overlaid small cells, and user positions (meters)."""

    macro_position: tuple[float, float]
    macro_radius: float
    small_cells: tuple[tuple[tuple[float, float], float], ...]
    users: tuple[tuple[float, float], ...]

    def cell_positions(self) -> list[tuple[str, tuple[float, float], float]]:
        cells = [("macro", self.macro_position, self.macro_radius)]
        for i, (pos, radius) in enumerate(self.small_cells):
            cells.append((f"small{i}", pos, radius))
        return cells


@dataclass(frozen=True)
class LinkState:
    """Per-(user, cell) channel state for one Monte Carlo iteration."""

    user_id: int
    cell_id: str
    distance_km: float
    shadowing_db: float      # fixed per iteration
    fading_gain: float = 1.0  # linear power, redrawn per packet

    def __post_init__(self):
        if self.distance_km <= 0:
            raise ValueError("distance must be > 0")
        if self.fading_gain < 0:
            raise ValueError("fading gain must be >= 0")


def path_loss_db(distance_km: float, params: ChannelParams | None = None) -> float:
    """Log-distance path loss, 128.1 + 37.6 log10(r_km) by default."""
    if distance_km <= 0:
        raise ValueError("distance_km must be > 0")
    p = params or ChannelParams()
    return p.pathloss_a + p.pathloss_b * math.log10(distance_km)


def shadowing_sample(rng: np.random.Generator, params: ChannelParams | None = None) -> float:
    """Zero-mean log-normal shadowing draw in dB."""
    sigma = (params or ChannelParams()).shadow_sigma
    return float(rng.normal(0.0, sigma))


def rayleigh_fading_gain(rng: np.random.Generator) -> float:
    """Unit-mean exponential power gain (squared magnitude of Rayleigh)."""
    return float(rng.exponential(1.0))


def snr_linear(link: LinkState, params: ChannelParams, tx_kind: str = "macro") -> float:
    """Linear SNR from the dB link budget.

    SNR_dB = tx − PL − shadowing + 10 log10(fading) − noise. A zero fading
    gain short-circuits to 0 rather than taking log of zero.
    """
    if link.fading_gain == 0.0:
        return 0.0
    snr_db = (
        params.tx_power[tx_kind]
        - path_loss_db(link.distance_km, params)
        - link.shadowing_db
        + 10.0 * math.log10(link.fading_gain)
        - params.noise_power_dbm()
    )
    return 10.0 ** (snr_db / 10.0)


def mean_snr_linear(link: LinkState, params: ChannelParams, tx_kind: str = "macro") -> float:
    """Linear SNR with the fading term at its unit mean (large-scale only)."""
    snr_db = (
        params.tx_power[tx_kind]
        - path_loss_db(link.distance_km, params)
        - link.shadowing_db
        - params.noise_power_dbm()
    )
    return 10.0 ** (snr_db / 10.0)


def rate_per_rb(snr: float, params: ChannelParams) -> float:
    """Shannon rate over one resource block, capped in spectral efficiency."""
    if snr < 0:
        raise ValueError("snr must be >= 0")
    se = math.log2(1.0 + snr)
    se = min(se, params.spectral_efficiency_cap)
    return params.rb_bandwidth * se


def _uniform_disc(rng: np.random.Generator, center: tuple[float, float],
                  radius: float, n: int) -> np.ndarray:
    """n points uniform in a disc, by rejection from the bounding square."""
    cx, cy = center
    out = np.empty((n, 2))
    filled = 0
    while filled < n:
        cand = rng.uniform(-radius, radius, size=(2 * (n - filled) + 8, 2))
        keep = cand[np.hypot(cand[:, 0], cand[:, 1]) <= radius]
        take = min(len(keep), n - filled)
        out[filled:filled + take] = keep[:take]
        filled += take
    out[:, 0] += cx
    out[:, 1] += cy
    return out


def generate_deployment(
    rng: np.random.Generator,
    macro_radius: float = 100.0,
    small_radius: float = 30.0,
    n_small: int = 4,
    n_users: int = 50,
) -> Deployment:
    """Drop small cells then users uniformly in the macro disc."""
    center = (0.0, 0.0)
    cells = _uniform_disc(rng, center, macro_radius, n_small)
    users = _uniform_disc(rng, center, macro_radius, n_users)
    return Deployment(
        macro_position=center,
        macro_radius=macro_radius,
        small_cells=tuple(((float(x), float(y)), small_radius) for x, y in cells),
        users=tuple((float(x), float(y)) for x, y in users),
    )


def link_distance_km(user_pos: tuple[float, float], cell_pos: tuple[float, float]) -> float:
    """User-to-cell distance in km, clamped away from zero."""
    d_m = math.hypot(user_pos[0] - cell_pos[0], user_pos[1] - cell_pos[1])
    return max(d_m / 1000.0, MIN_DISTANCE_KM)


def export_deployment_csv(deployment: Deployment, path: str) -> None:
    """Write a deployment snapshot as (entity, x, y, radius) rows."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["entity", "x", "y", "radius"])
        for name, (x, y), radius in deployment.cell_positions():
            writer.writerow([name, f"{x:.6f}", f"{y:.6f}", f"{radius:.6f}"])
        for i, (x, y) in enumerate(deployment.users):
            writer.writerow([f"user{i}", f"{x:.6f}", f"{y:.6f}", "0.000000"])
