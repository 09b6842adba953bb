"""Per-cluster firewall configuration emission (ASA-style text).

Emission mirrors the analytic cost model exactly: every substation inside
a UCC cluster keeps its own firewall (6 ACL entries: 3 permits + 3 denies),
every detached cluster shares one firewall (6 entries), and the UCC's own
firewall carries 2 permits per attached substation, 2 per detached cluster,
and 5 fixed rules. Anything beyond that model is deliberately not emitted,
so audits against the analytic counts always reconcile.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .fitness import count_acls, count_firewalls
from .topology import Clustering, UtilityGraph


@dataclass(frozen=True)
class ServiceFlow:
    name: str
    transport: str
    port: int


#: The modeled SCADA/enterprise service flows.
BUILTIN_FLOWS: tuple[ServiceFlow, ...] = (
    ServiceFlow("DNP3", "tcp", 20000),
    ServiceFlow("HTTP", "tcp", 80),
    ServiceFlow("HTTPS", "tcp", 443),
    ServiceFlow("SSH", "tcp", 22),
    ServiceFlow("RDP", "tcp", 3389),
    ServiceFlow("SQL", "tcp", 1433),
    ServiceFlow("ICCP", "tcp", 102),
)

SECURITY_LEVELS = {"OT": 100, "DMZ": 50, "WAN": 0}
IFACE_ORDER = ("OT", "DMZ", "WAN")
IFACE_PORTS = {"OT": "GigabitEthernet0/2", "DMZ": "GigabitEthernet0/1", "WAN": "GigabitEthernet0/0"}


class EmitError(ValueError):
    pass


@dataclass(frozen=True)
class Interface:
    name: str
    security_level: int
    network: str  # dotted subnet + mask

    def __post_init__(self):
        if not 0 <= self.security_level <= 100:
            raise EmitError(f"security level {self.security_level} outside 0-100")


@dataclass(frozen=True)
class NetworkObjectGroup:
    name: str
    members: tuple[str, ...]  # "a.b.c.0 255.255.255.0" or "host a.b.c.d"


@dataclass(frozen=True)
class ServiceObjectGroup:
    name: str
    transport: str
    ports: tuple[int, ...]


@dataclass(frozen=True)
class AclEntry:
    action: str  # permit | deny
    src: str  # network group name or "any"
    dst: str
    service: Optional[str]  # service group name, None -> ip any-protocol
    interface: str


@dataclass
class FirewallConfig:
    device_name: str
    role: str  # "substation" | "cluster" | "ucc"
    cluster_index: int
    interfaces: list[Interface]
    network_groups: list[NetworkObjectGroup]
    service_groups: list[ServiceObjectGroup]
    acl_entries: list[AclEntry]

    def validate(self):
        net_names = {g.name for g in self.network_groups}
        svc_names = {g.name for g in self.service_groups}
        per_iface_denied = {i.name: False for i in self.interfaces}
        for e in self.acl_entries:
            if e.interface not in per_iface_denied:
                raise EmitError(f"{self.device_name}: entry bound to unknown interface {e.interface!r}")
            for ref in (e.src, e.dst):
                if ref != "any" and ref not in net_names:
                    raise EmitError(f"{self.device_name}: dangling network group {ref!r}")
            if e.service is not None and e.service not in svc_names:
                raise EmitError(f"{self.device_name}: dangling service group {e.service!r}")
            if e.action == "permit" and per_iface_denied[e.interface]:
                raise EmitError(f"{self.device_name}: permit after deny on {e.interface}")
            if e.action == "deny":
                per_iface_denied[e.interface] = True
        for iface, denied in per_iface_denied.items():
            if not denied:
                raise EmitError(f"{self.device_name}: interface {iface} list does not end with a deny")


class AddressPlan:
    """Deterministic /24-per-node addressing from a per-utility /16.

    Node k (sorted-id order) owns 10.<u+1>.<k>.0/24. Well-known hosts sit at
    fixed offsets so generated rules are reproducible without real
    inventory data.
    """

    SCADA_HOST = 10
    HMI_HOST = 11
    ICCP_HOST = 12
    PUBDB_HOST = 13
    DB_HOST = 13
    WEB_HOST = 80

    def __init__(self, graph: UtilityGraph, utility_index: int = 0):
        if not 0 <= utility_index <= 200:
            raise EmitError(f"utility index {utility_index} outside the supported /16 pool")
        self.graph = graph
        self.octet2 = utility_index + 1
        self._node_idx = {nid: i for i, nid in enumerate(graph.node_ids)}
        if len(self._node_idx) > 96:
            raise EmitError("address plan supports at most 96 nodes per utility")

    def subnet(self, node_id: str) -> str:
        return f"10.{self.octet2}.{self._node_idx[node_id]}.0 255.255.255.0"

    def host(self, node_id: str, offset: int) -> str:
        return f"host 10.{self.octet2}.{self._node_idx[node_id]}.{offset}"

    def dmz_subnet(self, ordinal: int) -> str:
        return f"10.{self.octet2}.{100 + ordinal}.0 255.255.255.0"

    def wan_subnet(self) -> str:
        return f"10.{self.octet2}.{self._node_idx[self.graph.ucc_id]}.0 255.255.255.0"


def _flow(flows: Sequence[ServiceFlow], name: str) -> ServiceFlow:
    for f in flows:
        if f.name == name:
            return f
    raise EmitError(f"service flow {name!r} missing from the flow table")


def _service_groups(flows: Sequence[ServiceFlow]) -> list[ServiceObjectGroup]:
    groups = [ServiceObjectGroup(f"OG_SVC_{f.name}", f.transport, (f.port,)) for f in flows]
    web = (_flow(flows, "HTTP"), _flow(flows, "HTTPS"))
    groups.append(ServiceObjectGroup("OG_SVC_WEB", "tcp", tuple(f.port for f in web)))
    return sorted(groups, key=lambda g: g.name)


def _interfaces(plan: AddressPlan, ot_net: str, ordinal: int) -> list[Interface]:
    return [
        Interface("OT", SECURITY_LEVELS["OT"], ot_net),
        Interface("DMZ", SECURITY_LEVELS["DMZ"], plan.dmz_subnet(ordinal)),
        Interface("WAN", SECURITY_LEVELS["WAN"], plan.wan_subnet()),
    ]


def _scope_label(members: Iterable[str]) -> str:
    return min(members)


def _cluster_groups(scope: str, members: Sequence[str], plan: AddressPlan) -> dict[str, NetworkObjectGroup]:
    return {
        "OT": NetworkObjectGroup(
            f"OG_NET_{scope}_OT", tuple(plan.subnet(m) for m in members)
        ),
        "WEB": NetworkObjectGroup(
            f"OG_NET_{scope}_WEB", tuple(plan.host(m, plan.WEB_HOST) for m in members)
        ),
        "DB": NetworkObjectGroup(
            f"OG_NET_{scope}_DB", tuple(plan.host(m, plan.DB_HOST) for m in members)
        ),
    }


def _ucc_role_groups(graph: UtilityGraph, plan: AddressPlan) -> dict[str, NetworkObjectGroup]:
    ucc = graph.ucc_id
    return {
        "SCADA": NetworkObjectGroup(f"OG_NET_{ucc}_SCADA", (plan.host(ucc, plan.SCADA_HOST),)),
        "HMI": NetworkObjectGroup(f"OG_NET_{ucc}_HMI", (plan.host(ucc, plan.HMI_HOST),)),
        "ICCP": NetworkObjectGroup(f"OG_NET_{ucc}_ICCP", (plan.host(ucc, plan.ICCP_HOST),)),
        "PUBDB": NetworkObjectGroup(f"OG_NET_{ucc}_PUBDB", (plan.host(ucc, plan.PUBDB_HOST),)),
    }


def _block_entries(scope_groups: dict[str, NetworkObjectGroup], scada_group: str) -> dict[str, list[AclEntry]]:
    """One substation/cluster rule block keyed by interface (3 permits + 3 denies)."""
    ot = scope_groups["OT"].name
    web = scope_groups["WEB"].name
    db = scope_groups["DB"].name
    return {
        "OT": [AclEntry("permit", ot, db, "OG_SVC_SQL", "OT")],
        "DMZ": [AclEntry("permit", "any", web, "OG_SVC_WEB", "DMZ")],
        "WAN": [AclEntry("permit", scada_group, ot, "OG_SVC_DNP3", "WAN")],
    }


def _assemble(permits: dict[str, list[AclEntry]], denies: dict[str, int]) -> list[AclEntry]:
    entries: list[AclEntry] = []
    for iface in IFACE_ORDER:
        entries.extend(permits.get(iface, []))
        entries.extend(
            AclEntry("deny", "any", "any", None, iface) for _ in range(denies.get(iface, 0))
        )
    return entries


def emit_substation_config(
    cluster: frozenset[str],
    graph: UtilityGraph,
    flows: Sequence[ServiceFlow] = BUILTIN_FLOWS,
    plan: Optional[AddressPlan] = None,
    cluster_index: int = 0,
    device_name: Optional[str] = None,
    role: Optional[str] = None,
) -> FirewallConfig:
    """Substation-side config for one cluster.

    A detached cluster gets exactly 6 entries. A UCC cluster gets one
    6-entry block per member substation (the aggregate view of the
    per-substation firewalls that emit_clustering splits apart).
    """
    if not cluster:
        raise EmitError("cannot emit a config for an empty cluster")
    plan = plan or AddressPlan(graph)
    subs = sorted(n for n in cluster if n != graph.ucc_id)
    has_ucc = graph.ucc_id in cluster
    if not subs:
        raise EmitError("cluster contains no substations to protect")

    scada = _ucc_role_groups(graph, plan)["SCADA"]
    net_groups: dict[str, NetworkObjectGroup] = {scada.name: scada}
    permits: dict[str, list[AclEntry]] = {i: [] for i in IFACE_ORDER}
    denies = {i: 0 for i in IFACE_ORDER}

    if has_ucc:
        # One block per member substation, UCC excluded: 6(N_x - 1) entries.
        scopes = [(s, [s]) for s in subs]
    else:
        # One shared block for the whole detached cluster: 6 entries.
        scopes = [(_scope_label(subs), subs)]

    for scope, members in scopes:
        groups = _cluster_groups(scope, members, plan)
        for g in groups.values():
            net_groups[g.name] = g
        block = _block_entries(groups, scada.name)
        for iface in IFACE_ORDER:
            permits[iface].extend(block[iface])
            denies[iface] += 1

    name = device_name or (f"fw_{_scope_label(subs)}" if not has_ucc else f"fw_zone_{graph.ucc_id}")
    config = FirewallConfig(
        device_name=name,
        role=role or ("cluster" if not has_ucc else "substation"),
        cluster_index=cluster_index,
        interfaces=_interfaces(plan, plan.subnet(subs[0]), cluster_index),
        network_groups=sorted(net_groups.values(), key=lambda g: g.name),
        service_groups=_service_groups(flows),
        acl_entries=_assemble(permits, denies),
    )
    config.validate()
    return config


def emit_ucc_config(
    clustering: Clustering,
    graph: UtilityGraph,
    flows: Sequence[ServiceFlow] = BUILTIN_FLOWS,
    plan: Optional[AddressPlan] = None,
) -> FirewallConfig:
    """The UCC's own firewall: 2(N_1 - 1) + 5 + 2 per detached cluster entries."""
    if clustering.m_u != 1:
        raise EmitError(f"expected exactly one UCC cluster, found m_u={clustering.m_u}")
    plan = plan or AddressPlan(graph)
    roles = _ucc_role_groups(graph, plan)
    net_groups: dict[str, NetworkObjectGroup] = {g.name: g for g in roles.values()}
    permits: dict[str, list[AclEntry]] = {i: [] for i in IFACE_ORDER}

    def add_destination(scope: str, members: Sequence[str]):
        groups = _cluster_groups(scope, members, plan)
        net_groups.setdefault(groups["OT"].name, groups["OT"])
        net_groups.setdefault(groups["WEB"].name, groups["WEB"])
        permits["OT"].append(
            AclEntry("permit", roles["SCADA"].name, groups["OT"].name, "OG_SVC_DNP3", "OT")
        )
        permits["DMZ"].append(
            AclEntry("permit", roles["HMI"].name, groups["WEB"].name, "OG_SVC_WEB", "DMZ")
        )

    ucc_cluster = clustering.subgraphs[0]
    for sub in sorted(n for n in ucc_cluster if n != graph.ucc_id):
        add_destination(sub, [sub])
    for detached in clustering.subgraphs[clustering.m_u:]:
        members = sorted(detached)
        add_destination(_scope_label(members), members)

    # Fixed rules: two SQL permits into the public database plus one deny per interface.
    permits["DMZ"].append(
        AclEntry("permit", roles["ICCP"].name, roles["PUBDB"].name, "OG_SVC_SQL", "DMZ")
    )
    permits["DMZ"].append(
        AclEntry("permit", roles["SCADA"].name, roles["PUBDB"].name, "OG_SVC_SQL", "DMZ")
    )

    config = FirewallConfig(
        device_name="fw_ucc",
        role="ucc",
        cluster_index=0,
        interfaces=_interfaces(plan, plan.subnet(graph.ucc_id), 99),
        network_groups=sorted(net_groups.values(), key=lambda g: g.name),
        service_groups=_service_groups(flows),
        acl_entries=_assemble(permits, {i: 1 for i in IFACE_ORDER}),
    )
    config.validate()
    return config


def emit_clustering(
    clustering: Clustering,
    graph: UtilityGraph,
    flows: Sequence[ServiceFlow] = BUILTIN_FLOWS,
    utility_index: int = 0,
) -> list[FirewallConfig]:
    """All device configs for one clustering: one per counted firewall plus the UCC's.

    The config count excluding the UCC device equals count_firewalls and the
    total ACL entries across every device equal count_acls — audited by
    :func:`audit_counts`.
    """
    plan = AddressPlan(graph, utility_index=utility_index)
    configs: list[FirewallConfig] = []
    ucc_cluster = clustering.subgraphs[0]
    for sub in sorted(n for n in ucc_cluster if n != graph.ucc_id):
        configs.append(
            emit_substation_config(
                frozenset([sub]),
                graph,
                flows,
                plan=plan,
                cluster_index=0,
                device_name=f"fw_{sub}",
                role="substation",
            )
        )
    for idx in range(clustering.m_u, clustering.n_sg):
        members = clustering.subgraphs[idx]
        configs.append(
            emit_substation_config(
                members,
                graph,
                flows,
                plan=plan,
                cluster_index=idx,
                device_name=f"fw_{_scope_label(members)}",
            )
        )
    configs.append(emit_ucc_config(clustering, graph, flows, plan=plan))
    return configs


def render_config_text(config: FirewallConfig) -> str:
    """Deterministic ASA-style text; access-list line count == len(acl_entries)."""
    config.validate()
    lines: list[str] = [f"hostname {config.device_name}", "!"]
    for iface in config.interfaces:
        lines.append(f"interface {IFACE_PORTS[iface.name]}")
        lines.append(f" nameif {iface.name}")
        lines.append(f" security-level {iface.security_level}")
        net = iface.network.split(" ")[0]
        mask = iface.network.split(" ")[1]
        gateway = net.rsplit(".", 1)[0] + ".1"
        lines.append(f" ip address {gateway} {mask}")
        lines.append("!")
    for g in sorted(config.network_groups, key=lambda g: g.name):
        lines.append(f"object-group network {g.name}")
        for m in g.members:
            lines.append(f" network-object {m}")
        lines.append("!")
    for g in sorted(config.service_groups, key=lambda g: g.name):
        lines.append(f"object-group service {g.name} {g.transport}")
        for p in g.ports:
            lines.append(f" port-object eq {p}")
        lines.append("!")

    def ref(name: str) -> str:
        return "any" if name == "any" else f"object-group {name}"

    bound = []
    for iface in config.interfaces:
        acl_name = f"{iface.name}_in"
        wrote = False
        for e in config.acl_entries:
            if e.interface != iface.name:
                continue
            wrote = True
            if e.action == "deny" and e.service is None and e.src == "any" and e.dst == "any":
                lines.append(f"access-list {acl_name} extended deny ip any any")
            else:
                svc = f" object-group {e.service}" if e.service else ""
                proto = "tcp" if e.service else "ip"
                lines.append(
                    f"access-list {acl_name} extended {e.action} {proto} "
                    f"{ref(e.src)} {ref(e.dst)}{svc}"
                )
        if wrote:
            bound.append(f"access-group {acl_name} in interface {iface.name}")
    lines.append("!")
    lines.extend(bound)
    lines.append("")
    return "\n".join(lines)


@dataclass
class AuditReport:
    expected_firewalls: int
    actual_firewalls: int
    expected_acls: int
    actual_acls: int
    mismatches: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (
            self.expected_firewalls == self.actual_firewalls
            and self.expected_acls == self.actual_acls
            and not self.mismatches
        )

    def as_dict(self) -> dict:
        return {
            "expected_firewalls": self.expected_firewalls,
            "actual_firewalls": self.actual_firewalls,
            "expected_acls": self.expected_acls,
            "actual_acls": self.actual_acls,
            "mismatches": self.mismatches,
            "ok": self.ok,
        }


def audit_counts(configs: Sequence[FirewallConfig], clustering: Clustering) -> AuditReport:
    """Reconcile emitted configs against the analytic firewall/ACL counts."""
    expected_fw = count_firewalls(clustering)
    expected_acl = count_acls(clustering)
    zone_configs = [c for c in configs if c.role != "ucc"]
    total_acl = sum(len(c.acl_entries) for c in configs)

    mismatches = []
    n_ucc = clustering.sizes[0]
    detached = clustering.n_sg - clustering.m_u
    for c in configs:
        if c.role == "ucc":
            want = 2 * (n_ucc - 1) + 5 + 2 * detached
        else:
            want = 6
        if len(c.acl_entries) != want:
            mismatches.append(
                {"device": c.device_name, "expected": want, "actual": len(c.acl_entries),
                 "delta": len(c.acl_entries) - want}
            )
    return AuditReport(
        expected_firewalls=expected_fw,
        actual_firewalls=len(zone_configs),
        expected_acls=expected_acl,
        actual_acls=total_acl,
        mismatches=mismatches,
    )


def bundle_checksum(files: dict[str, str]) -> str:
    """sha256 over sorted (name, sha256(content)) pairs; the UI recomputes this."""
    h = hashlib.sha256()
    for name in sorted(files):
        digest = hashlib.sha256(files[name].encode("utf-8")).hexdigest()
        h.update(f"{name}:{digest}\n".encode("utf-8"))
    return h.hexdigest()


def render_all(
    configs: Sequence[FirewallConfig], utility_id: str
) -> tuple[dict[str, str], dict]:
    """Render every config; returns ({filename: text}, manifest)."""
    files: dict[str, str] = {}
    devices = []
    for c in configs:
        fname = f"{utility_id}_{c.device_name}.cfg"
        text = render_config_text(c)
        files[fname] = text
        devices.append(
            {
                "device": c.device_name,
                "role": c.role,
                "cluster": c.cluster_index,
                "file": fname,
                "sha256": hashlib.sha256(text.encode("utf-8")).hexdigest(),
                "acl_entries": len(c.acl_entries),
            }
        )
    manifest = {
        "utility": utility_id,
        "devices": devices,
        "bundle_sha256": bundle_checksum(files),
    }
    return files, manifest


def write_configs(
    configs: Sequence[FirewallConfig], outdir: Path, utility_id: str
) -> dict:
    """Write one .cfg per device plus manifest.json; returns the manifest."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    files, manifest = render_all(configs, utility_id)
    for fname, text in files.items():
        (outdir / fname).write_text(text, encoding="utf-8")
    (outdir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return manifest
