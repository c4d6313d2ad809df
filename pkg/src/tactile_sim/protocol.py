"""Message routing over the architecture graph and latency budget accounting.

User-plane traffic crosses T/A hops (plus N2/N3 inside the network domain);
control-plane traffic terminates at the control-plane entity over N1. Network
internals between two A hops collapse to a single configurable core-transit
delay. The tactile device may attach over T at layer 2 or layer 3; the
difference is a configurable processing cost at the attachment point.
"""

from __future__ import annotations

import csv
import enum
from collections import deque
from dataclasses import dataclass, field

from .grades import Grade, grade_spec
from .arch import EntityKind, InterfaceKind, Topology


class Plane(enum.Enum):
    USER = "user"
    CONTROL = "control"


class Layer(enum.Enum):
    L2 = 2
    L3 = 3


USER_PLANE_KINDS = frozenset({
    InterfaceKind.T, InterfaceKind.A, InterfaceKind.N2, InterfaceKind.N3,
})
CONTROL_PLANE_KINDS = frozenset({
    InterfaceKind.T, InterfaceKind.A, InterfaceKind.N1,
})


@dataclass(frozen=True)
class Pdu:
    id: int
    plane: Plane
    payload_size: int  # bits
    created_at: float
    layer_at_origin: int = 5

    def __post_init__(self):
        if self.payload_size <= 0:
            raise ValueError("payload_size must be > 0")
        if self.layer_at_origin not in (2, 3, 5):
            raise ValueError("layer_at_origin must be 2, 3 or 5")


@dataclass(frozen=True)
class StackConfig:
    t_attachment: Layer = Layer.L3
    processing_delay_s: dict[str, float] = field(default_factory=dict)
    link_delay_s: dict[str, float] = field(default_factory=dict)
    default_link_delay_s: float = 0.0
    core_transit_s: float = 0.0
    # extra processing when entering an entity over T, by attachment layer
    t_l2_extra_s: float = 0.0
    t_l3_extra_s: float = 0.0

    def __post_init__(self):
        for val in (*self.processing_delay_s.values(), *self.link_delay_s.values(),
                    self.default_link_delay_s, self.core_transit_s,
                    self.t_l2_extra_s, self.t_l3_extra_s):
            if val < 0:
                raise ValueError("delays must be >= 0")

    def link_delay(self, link_id: str) -> float:
        return self.link_delay_s.get(link_id, self.default_link_delay_s)

    def t_extra(self) -> float:
        return (self.t_l2_extra_s if self.t_attachment is Layer.L2
                else self.t_l3_extra_s)


@dataclass(frozen=True)
class HopRecord:
    from_id: str
    to_id: str
    interface: InterfaceKind
    plane: Plane
    delay: float

    def __post_init__(self):
        if self.delay < 0:
            raise ValueError("hop delay must be >= 0")


class RoutingError(ValueError):
    """No usable path, or precondition on endpoints not met."""


def _bfs(t: Topology, src: str, targets: set[str],
         allowed: frozenset[InterfaceKind]) -> list[tuple[str, str, InterfaceKind, str]]:
    """Shortest hop path as (from, to, kind, link id); deterministic by
    declaration order of links."""
    if src in targets:
        return []
    parent: dict[str, tuple[str, str, InterfaceKind] | None] = {src: None}
    queue = deque([src])
    while queue:
        here = queue.popleft()
        for link in t.links:
            if link.kind not in allowed or here not in (link.a, link.b):
                continue
            nxt = link.other(here)
            if nxt in parent:
                continue
            parent[nxt] = (here, link.id, link.kind)
            if nxt in targets:
                hops = []
                node = nxt
                while parent[node] is not None:
                    prev, link_id, kind = parent[node]
                    hops.append((prev, node, kind, link_id))
                    node = prev
                hops.reverse()
                return hops
            queue.append(nxt)
    raise RoutingError(f"no path from {src!r} to any of {sorted(targets)!r}")


def _hops_to_records(t: Topology, hops, plane: Plane, cfg: StackConfig) -> list[HopRecord]:
    return [HopRecord(frm, to, kind, plane, cfg.link_delay(link_id))
            for frm, to, kind, link_id in hops]


def route_user_plane(t: Topology, src: str, dst: str,
                     cfg: StackConfig | None = None) -> list[HopRecord]:
    """Hop sequence for an application packet from one device to another."""
    cfg = cfg or StackConfig()
    for end in (src, dst):
        if t.entity(end).kind is not EntityKind.TACTILE_DEVICE:
            raise RoutingError(f"{end!r} is not a tactile device")
    if src == dst:
        raise RoutingError("source and destination must differ")
    hops = _bfs(t, src, {dst}, USER_PLANE_KINDS)
    return _hops_to_records(t, hops, Plane.USER, cfg)


def route_control_plane(t: Topology, src: str,
                        cfg: StackConfig | None = None) -> list[HopRecord]:
    """Hop sequence from a device to the control-plane entity over N1."""
    cfg = cfg or StackConfig()
    if t.entity(src).kind is not EntityKind.TACTILE_DEVICE:
        raise RoutingError(f"{src!r} is not a tactile device")
    cpes = {e.id for e in t.of_kind(EntityKind.CONTROL_PLANE_ENTITY)}
    if not cpes:
        raise RoutingError("topology has no control-plane entity")
    hops = _bfs(t, src, cpes, CONTROL_PLANE_KINDS)
    return _hops_to_records(t, hops, Plane.CONTROL, cfg)


def accumulate_latency(path: list[HopRecord], cfg: StackConfig | None = None) -> float:
    """Hop delays plus processing at every intermediate entity.

    Endpoints are excluded. One core-transit delay is added when the path
    crosses the network domain between two A hops (additivity under path
    concatenation therefore holds for the default core_transit_s = 0).
    """
    if not path:
        raise ValueError("path must be non-empty")
    cfg = cfg or StackConfig()
    total = sum(h.delay for h in path)
    for hop in path[:-1]:
        total += cfg.processing_delay_s.get(hop.to_id, 0.0)
    total += cfg.t_extra() * sum(1 for h in path if h.interface is InterfaceKind.T)
    n_a_hops = sum(1 for h in path if h.interface is InterfaceKind.A)
    if n_a_hops >= 2:
        total += cfg.core_transit_s
    return total


def interface_budget(e2e_budget: float, grade: Grade | str) -> float:
    """Per-interface share of the end-to-end latency budget."""
    if e2e_budget <= 0:
        raise ValueError("e2e_budget must be > 0")
    return grade_spec(grade).latency_fraction * e2e_budget


def export_path_csv(path: list[HopRecord], out_path: str) -> None:
    with open(out_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["from", "to", "interface", "plane", "delay_s"])
        for hop in path:
            writer.writerow([hop.from_id, hop.to_id, hop.interface.value,
                             hop.plane.value, repr(hop.delay)])
