"""Typed entity/interface graph for the Tactile Internet reference architecture.

A topology is a set of tagged entities (tactile devices, gateway and
controller functions, support engines, plane entities) joined by typed
interface links (A, T, O, S, N1-N3 physical; L0-L3 logical). Two placement
variants exist: scenario 1 keeps the gateway network controller inside the
tactile edges, scenario 2 moves it into the network domain. Validation
reports rule violations instead of raising so a whole topology can be
audited in one pass.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field


class EntityKind(enum.Enum):
    TACTILE_DEVICE = "tactile-device"
    GATEWAY_NODE = "gateway-node"
    NETWORK_CONTROLLER = "network-controller"
    GATEWAY_NETWORK_CONTROLLER = "gateway-network-controller"
    SUPPORT_ENGINE = "support-engine"
    TACTILE_SERVICE_MANAGER = "tactile-service-manager"
    USER_PLANE_ENTITY = "user-plane-entity"
    CONTROL_PLANE_ENTITY = "control-plane-entity"
    BASE_STATION = "base-station"


# Kinds that carry gateway/controller function for scenario classification.
GNC_FUNCTION_KINDS = frozenset({
    EntityKind.GATEWAY_NODE,
    EntityKind.NETWORK_CONTROLLER,
    EntityKind.GATEWAY_NETWORK_CONTROLLER,
})


class DeviceRole(enum.Enum):
    SENSOR_NODE = "sensor-node"
    ACTUATOR_NODE = "actuator-node"
    HSI_NODE = "hsi-node"
    CONTROLLER_NODE = "controller-node"
    SENSOR_GATEWAY = "sensor-gateway"
    ACTUATOR_GATEWAY = "actuator-gateway"
    GENERIC = "generic"


class Domain(enum.Enum):
    TACTILE_EDGE_A = "edge-a"
    TACTILE_EDGE_B = "edge-b"
    NETWORK_DOMAIN = "network"


EDGE_DOMAINS = frozenset({Domain.TACTILE_EDGE_A, Domain.TACTILE_EDGE_B})

SUPPORT_CAPABILITIES = frozenset({
    "predictive-intelligence", "computation-offload", "caching",
})


class InterfaceKind(enum.Enum):
    A = "A"
    T = "T"
    O = "O"
    S = "S"
    N1 = "N1"
    N2 = "N2"
    N3 = "N3"
    L0 = "L0"
    L1 = "L1"
    L2 = "L2"
    L3 = "L3"


@dataclass(frozen=True)
class Entity:
    id: str
    kind: EntityKind
    domain: Domain
    role: DeviceRole | None = None
    capabilities: frozenset[str] = frozenset()
    nmc: bool = True   # networking management, controller kinds only
    dmc: bool = True   # device management, controller kinds only

    def __post_init__(self):
        if self.role is not None and self.kind is not EntityKind.TACTILE_DEVICE:
            raise TopologyError(f"{self.id}: role is only valid for tactile devices")
        unknown = self.capabilities - SUPPORT_CAPABILITIES
        if unknown:
            raise TopologyError(f"{self.id}: unknown capabilities {sorted(unknown)}")
        if self.capabilities and self.kind is not EntityKind.SUPPORT_ENGINE:
            raise TopologyError(f"{self.id}: capabilities only valid for support engines")


@dataclass(frozen=True)
class Link:
    id: str
    kind: InterfaceKind
    a: str
    b: str

    def __post_init__(self):
        if self.a == self.b:
            raise TopologyError(f"link {self.id}: endpoints must differ")

    def other(self, entity_id: str) -> str:
        return self.b if entity_id == self.a else self.a


class TopologyError(ValueError):
    """Structural problem: duplicate ids, dangling references, bad fields."""


@dataclass(frozen=True)
class Topology:
    entities: tuple[Entity, ...]
    links: tuple[Link, ...]
    scenario: int

    def __post_init__(self):
        if self.scenario not in (1, 2):
            raise TopologyError("scenario must be 1 or 2")
        seen: set[str] = set()
        for e in self.entities:
            if e.id in seen:
                raise TopologyError(f"duplicate entity id {e.id!r}")
            seen.add(e.id)
        link_ids: set[str] = set()
        for link in self.links:
            if link.id in link_ids:
                raise TopologyError(f"duplicate link id {link.id!r}")
            link_ids.add(link.id)
            for end in (link.a, link.b):
                if end not in seen:
                    raise TopologyError(
                        f"link {link.id}: endpoint {end!r} does not exist")

    def entity(self, entity_id: str) -> Entity:
        for e in self.entities:
            if e.id == entity_id:
                return e
        raise KeyError(entity_id)

    def of_kind(self, kind: EntityKind) -> list[Entity]:
        return [e for e in self.entities if e.kind is kind]

    def links_of(self, entity_id: str) -> list[Link]:
        return [ln for ln in self.links if entity_id in (ln.a, ln.b)]


@dataclass(frozen=True)
class Violation:
    rule: str
    message: str
    subjects: tuple[str, ...] = ()


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[Violation, ...] = ()

    def __post_init__(self):
        if self.ok != (len(self.violations) == 0):
            raise ValueError("ok must mean no violations")

    def rules(self) -> set[str]:
        return {v.rule for v in self.violations}


def build_topology(config: dict) -> Topology:
    """Construct a topology from a parsed config mapping.

    Resolves ids and field enums only; semantic rules are validate_topology's
    job. Raises TopologyError on duplicate ids or dangling references.
    """
    try:
        scenario = int(config.get("scenario", 1))
    except (TypeError, ValueError):
        raise TopologyError("scenario must be an integer")
    entities = []
    for raw in config.get("entities", []):
        try:
            kind = EntityKind(raw["kind"])
            domain = Domain(raw["domain"])
            role = (DeviceRole(raw.get("role", "generic"))
                    if kind is EntityKind.TACTILE_DEVICE else None)
        except KeyError as exc:
            raise TopologyError(f"entity missing field {exc}")
        except ValueError as exc:
            raise TopologyError(str(exc))
        entities.append(Entity(
            id=str(raw["id"]),
            kind=kind,
            domain=domain,
            role=role,
            capabilities=frozenset(raw.get("capabilities", [])),
            nmc=bool(raw.get("nmc", True)),
            dmc=bool(raw.get("dmc", True)),
        ))
    links = []
    for raw in config.get("links", []):
        try:
            kind = InterfaceKind(raw["kind"])
            ends = raw["endpoints"]
        except KeyError as exc:
            raise TopologyError(f"link missing field {exc}")
        except ValueError as exc:
            raise TopologyError(str(exc))
        if len(ends) != 2:
            raise TopologyError(f"link {raw.get('id')}: needs exactly 2 endpoints")
        links.append(Link(id=str(raw["id"]), kind=kind, a=str(ends[0]), b=str(ends[1])))
    return Topology(tuple(entities), tuple(links), scenario)


def serialize_topology(t: Topology) -> dict:
    """Inverse of build_topology; round-trips structurally."""
    entities = []
    for e in t.entities:
        raw: dict = {"id": e.id, "kind": e.kind.value, "domain": e.domain.value}
        if e.role is not None:
            raw["role"] = e.role.value
        if e.capabilities:
            raw["capabilities"] = sorted(e.capabilities)
        if e.kind in (EntityKind.NETWORK_CONTROLLER,
                      EntityKind.GATEWAY_NETWORK_CONTROLLER):
            raw["nmc"] = e.nmc
            raw["dmc"] = e.dmc
        entities.append(raw)
    links = [{"id": ln.id, "kind": ln.kind.value, "endpoints": [ln.a, ln.b]}
             for ln in t.links]
    return {"scenario": t.scenario, "entities": entities, "links": links}


def _is_gnc_function(e: Entity) -> bool:
    return e.kind in GNC_FUNCTION_KINDS


def validate_topology(t: Topology) -> ValidationReport:
    """Check every architectural rule; violations are reported, not raised."""
    violations: list[Violation] = []

    def flag(rule: str, message: str, *subjects: str):
        violations.append(Violation(rule, message, tuple(subjects)))

    # Placement: scenario 1 keeps gateway/controller functions in the edges,
    # scenario 2 in the network domain.
    for e in t.entities:
        if not _is_gnc_function(e):
            continue
        if t.scenario == 1 and e.domain not in EDGE_DOMAINS:
            flag("scenario-placement",
                 f"{e.id} must be in a tactile edge in scenario 1", e.id)
        if t.scenario == 2 and e.domain is not Domain.NETWORK_DOMAIN:
            flag("scenario-placement",
                 f"{e.id} must be in the network domain in scenario 2", e.id)

    # Co-location: a gateway network controller subsumes both functions, so
    # no standalone gateway node or network controller in the same domain.
    gnc_domains = {e.domain for e in t.of_kind(EntityKind.GATEWAY_NETWORK_CONTROLLER)}
    for e in t.entities:
        if (e.kind in (EntityKind.GATEWAY_NODE, EntityKind.NETWORK_CONTROLLER)
                and e.domain in gnc_domains):
            flag("gnc-colocation",
                 f"{e.id} duplicates a co-located gateway network controller "
                 f"in {e.domain.value}", e.id)

    for link in t.links:
        ea, eb = t.entity(link.a), t.entity(link.b)
        kinds = {ea.kind, eb.kind}

        if link.kind is InterfaceKind.S:
            # service manager to the gateway/controller side, control plane only
            if (EntityKind.TACTILE_SERVICE_MANAGER not in kinds
                    or not (kinds & GNC_FUNCTION_KINDS)):
                flag("s-endpoint",
                     f"link {link.id}: S must join the tactile service manager "
                     f"with a gateway/controller function", link.id)

        elif link.kind is InterfaceKind.O:
            n_se = sum(1 for e in (ea, eb) if e.kind is EntityKind.SUPPORT_ENGINE)
            if n_se != 1:
                flag("o-endpoint",
                     f"link {link.id}: O must have a support engine as exactly "
                     f"one endpoint", link.id)

        elif link.kind is InterfaceKind.T:
            if not (ea.domain in EDGE_DOMAINS and eb.domain in EDGE_DOMAINS):
                flag("t-endpoint",
                     f"link {link.id}: T endpoints must be tactile-edge entities",
                     link.id)

        elif link.kind is InterfaceKind.A:
            edge_side = [e for e in (ea, eb) if e.domain in EDGE_DOMAINS]
            net_side = [e for e in (ea, eb) if e.domain is Domain.NETWORK_DOMAIN]
            if len(edge_side) != 1 or len(net_side) != 1:
                flag("a-endpoint",
                     f"link {link.id}: A must cross the edge/network boundary",
                     link.id)
            elif t.scenario == 1 and not _is_gnc_function(edge_side[0]):
                flag("a-endpoint",
                     f"link {link.id}: scenario-1 A attaches at the gateway "
                     f"network controller on the edge side", link.id)
            elif t.scenario == 2 and not (
                    edge_side[0].kind is EntityKind.TACTILE_DEVICE
                    and _is_gnc_function(net_side[0])):
                flag("a-endpoint",
                     f"link {link.id}: scenario-2 A joins a tactile device to "
                     f"the gateway network controller", link.id)

        elif link.kind is InterfaceKind.L0:
            if kinds != {EntityKind.GATEWAY_NODE, EntityKind.NETWORK_CONTROLLER}:
                flag("l0-endpoint",
                     f"link {link.id}: L0 interconnects a gateway node and a "
                     f"network controller", link.id)

        elif link.kind is InterfaceKind.N1:
            partner = (EntityKind.BASE_STATION if t.scenario == 1
                       else EntityKind.GATEWAY_NETWORK_CONTROLLER)
            if kinds != {EntityKind.CONTROL_PLANE_ENTITY, partner}:
                flag("n1-endpoint",
                     f"link {link.id}: N1 joins the control-plane entity and "
                     f"the {partner.value} in scenario {t.scenario}", link.id)

        elif link.kind is InterfaceKind.N2:
            partner = (EntityKind.BASE_STATION if t.scenario == 1
                       else EntityKind.GATEWAY_NETWORK_CONTROLLER)
            if kinds != {EntityKind.USER_PLANE_ENTITY, partner}:
                flag("n2-endpoint",
                     f"link {link.id}: N2 joins the user-plane entity and "
                     f"the {partner.value} in scenario {t.scenario}", link.id)

        elif link.kind is InterfaceKind.N3:
            if kinds != {EntityKind.USER_PLANE_ENTITY,
                         EntityKind.CONTROL_PLANE_ENTITY}:
                flag("n3-endpoint",
                     f"link {link.id}: N3 interconnects the user-plane and "
                     f"control-plane entities", link.id)

        elif link.kind is InterfaceKind.L1:
            if kinds != {EntityKind.TACTILE_DEVICE,
                         EntityKind.TACTILE_SERVICE_MANAGER}:
                flag("l1-endpoint",
                     f"link {link.id}: L1 joins a tactile device and the "
                     f"tactile service manager", link.id)

        elif link.kind is InterfaceKind.L2:
            if kinds != {EntityKind.TACTILE_DEVICE,
                         EntityKind.CONTROL_PLANE_ENTITY}:
                flag("l2-endpoint",
                     f"link {link.id}: L2 joins a tactile device and the "
                     f"control-plane entity", link.id)

        elif link.kind is InterfaceKind.L3:
            if kinds != {EntityKind.TACTILE_DEVICE,
                         EntityKind.USER_PLANE_ENTITY}:
                flag("l3-endpoint",
                     f"link {link.id}: L3 joins a tactile device and the "
                     f"user-plane entity", link.id)

    # Separated gateway and controller functions need an L0 interconnect.
    gateways = t.of_kind(EntityKind.GATEWAY_NODE)
    controllers = t.of_kind(EntityKind.NETWORK_CONTROLLER)
    l0_pairs = set()
    for link in t.links:
        if link.kind is InterfaceKind.L0:
            l0_pairs.add(frozenset((link.a, link.b)))
    if gateways and controllers:
        for gw in gateways:
            if not any(frozenset((gw.id, nc.id)) in l0_pairs for nc in controllers):
                flag("l0-missing",
                     f"{gw.id} has no L0 interface to a network controller", gw.id)
        for nc in controllers:
            if not any(frozenset((gw.id, nc.id)) in l0_pairs for gw in gateways):
                flag("l0-missing",
                     f"{nc.id} has no L0 interface to a gateway node", nc.id)

    for e in t.of_kind(EntityKind.SUPPORT_ENGINE):
        if not e.capabilities:
            flag("se-capabilities",
                 f"{e.id}: support engine must declare at least one capability",
                 e.id)

    # A simulatable topology needs devices in both edges.
    for domain in (Domain.TACTILE_EDGE_A, Domain.TACTILE_EDGE_B):
        if not any(e.kind is EntityKind.TACTILE_DEVICE and e.domain is domain
                   for e in t.entities):
            flag("device-presence",
                 f"no tactile device in {domain.value}")

    return ValidationReport(ok=not violations, violations=tuple(violations))


def classify_scenario(t: Topology) -> int | str:
    """1 if all gateway/controller functions sit in edges, 2 if all in the
    network domain, "ambiguous" otherwise."""
    carriers = [e for e in t.entities if _is_gnc_function(e)]
    if not carriers:
        raise ValueError("topology has no gateway network controller function")
    domains = {e.domain for e in carriers}
    if domains <= EDGE_DOMAINS:
        return 1
    if domains == {Domain.NETWORK_DOMAIN}:
        return 2
    return "ambiguous"
