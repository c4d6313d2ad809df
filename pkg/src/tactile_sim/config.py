"""YAML configuration ingestion shared by the CLI and the service.

A config file holds an optional `topology` section (entities and typed
links) and an optional `simulation` section (evaluation parameters).
Unknown keys are rejected so that typos fail loudly instead of being
silently ignored.
"""

from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass

import yaml

from .alloc import SigmoidProfile, UtilitySet
from .arch import Topology, build_topology
from .grades import Grade
from .radio import ChannelParams
from .sim import SimConfig


class ConfigError(ValueError):
    """Raised for unreadable, unparsable or schema-violating configs."""


SIM_KEYS = {
    "n_iterations", "n_packets_per_user", "packet_size_bits",
    "e2e_latency_req_s", "grade", "seed", "n_users", "n_small_cells",
    "macro_radius_m", "small_radius_m", "air_interface_delay_s",
    "core_transit_s", "channel", "utility",
}
CHANNEL_KEYS = {f.name for f in dataclasses.fields(ChannelParams)}
UTILITY_KEYS = {"rate", "latency", "loss"}


@dataclass(frozen=True)
class LoadedConfig:
    path: str
    sha256: str
    topology: Topology | None
    sim: SimConfig


def _parse_channel(section) -> ChannelParams:
    if not isinstance(section, dict):
        raise ConfigError("channel section must be a mapping")
    unknown = set(section) - CHANNEL_KEYS
    if unknown:
        raise ConfigError(f"unknown channel keys: {sorted(unknown)}")
    kwargs = dict(section)
    if "tx_power" in kwargs:
        tx = kwargs["tx_power"]
        if not isinstance(tx, dict):
            raise ConfigError("tx_power must map transmitter kind to dBm")
        kwargs["tx_power"] = {str(k): float(v) for k, v in tx.items()}
    return ChannelParams(**kwargs)


def _parse_utility(section) -> UtilitySet:
    if not isinstance(section, dict):
        raise ConfigError("utility section must be a mapping")
    unknown = set(section) - UTILITY_KEYS
    if unknown:
        raise ConfigError(f"unknown utility keys: {sorted(unknown)}")
    defaults = UtilitySet()
    profiles = {}
    for name in UTILITY_KEYS:
        base: SigmoidProfile = getattr(defaults, name)
        spec = section.get(name, {})
        if not isinstance(spec, dict) or set(spec) - {"midpoint", "steepness"}:
            raise ConfigError(f"utility.{name} accepts midpoint and steepness only")
        profiles[name] = SigmoidProfile(
            float(spec.get("midpoint", base.midpoint)),
            float(spec.get("steepness", base.steepness)),
            base.increasing, base.log_domain)
    return UtilitySet(**profiles)


def parse_sim_section(section, overrides: dict | None = None) -> SimConfig:
    """Build a SimConfig from the `simulation` mapping plus CLI overrides."""
    if section is None:
        section = {}
    if not isinstance(section, dict):
        raise ConfigError("simulation section must be a mapping")
    merged = dict(section)
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value
    unknown = set(merged) - SIM_KEYS
    if unknown:
        raise ConfigError(f"unknown simulation keys: {sorted(unknown)}")
    kwargs = dict(merged)
    if "grade" in kwargs:
        try:
            kwargs["grade"] = Grade(str(kwargs["grade"]).lower())
        except ValueError:
            raise ConfigError(f"unknown grade {kwargs['grade']!r}")
    if "channel" in kwargs:
        kwargs["channel"] = _parse_channel(kwargs["channel"])
    if "utility" in kwargs:
        kwargs["utility"] = _parse_utility(kwargs["utility"])
    try:
        return SimConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad simulation parameters: {exc}")


def load_config(path: str, sim_overrides: dict | None = None) -> LoadedConfig:
    """Read and hash a YAML config; parse both sections.

    The hash is over the raw bytes, so any textual change (even comments)
    yields a new identity in emitted file headers.
    """
    try:
        with open(path, "rb") as f:
            raw = f.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}")
    digest = hashlib.sha256(raw).hexdigest()
    try:
        data = yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}")
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    unknown = set(data) - {"topology", "simulation"}
    if unknown:
        raise ConfigError(f"{path}: unknown top-level sections {sorted(unknown)}")

    topology = None
    if "topology" in data:
        topo = data["topology"]
        if not isinstance(topo, dict):
            raise ConfigError(f"{path}: topology section must be a mapping")
        topology = build_topology(topo)
    sim = parse_sim_section(data.get("simulation"), sim_overrides)
    return LoadedConfig(path=path, sha256=digest, topology=topology, sim=sim)
