"""Core data model: servers (PMs), VNFs, flow requests and the network topology.

The default topology mirrors the reference deployment: three multimedia
servers (M1..M3), three RSU ingress points, eight OpenFlow switches
(S1..S8) and twenty-two links (L1..L22).  S1..S3 are RSU access switches,
S4/S5 form the core and S6..S8 attach one server each; lateral links give
the graph redundancy.  S4 terminates two RSU uplinks, so its default
forwarding capacity is twice the others (balanced traffic then utilises
every switch equally).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import NoPathError

POWER_ON = "on"
POWER_OFF = "off"

STATUS_PENDING = "pending"
STATUS_ACTIVE = "active"
STATUS_COMPLETED = "completed"
STATUS_REJECTED = "rejected"
STATUS_LOST = "lost"


@dataclass
class PhysicalMachine:
    """A multimedia server. Utilization is the fraction of cpu_capacity in use.

    Demand beyond capacity is representable: utilization caps at 1.0 and the
    excess accumulates in overload_backlog (seconds of queued work at full
    capacity).
    """

    pm_id: int
    name: str
    cpu_capacity: float
    power_state: str = POWER_ON
    hosted_vnfs: list = field(default_factory=list)
    active_connections: int = 0
    response_time: float = 10.0
    cpu_utilization: float = 0.0
    overload_backlog: float = 0.0

    @property
    def is_on(self) -> bool:
        return self.power_state == POWER_ON


@dataclass
class Migration:
    dest: int
    completes_at: float


@dataclass
class Vnf:
    """A virtualized multimedia function; the unit of migration between PMs."""

    vnf_id: int
    cpu_demand: float
    host: int
    migration: Migration | None = None

    @property
    def migrating(self) -> bool:
        return self.migration is not None


@dataclass
class FlowRequest:
    """One vehicle's multimedia session request."""

    request_id: int
    vehicle_id: int
    rsu: int
    arrival_time: float
    duration: float
    cpu_demand: float
    bandwidth_demand: float
    assigned_pm: int | None = None
    path: list = field(default_factory=list)
    status: str = STATUS_PENDING


@dataclass
class ThresholdState:
    """PID-actuated thresholds, clamped to [0.2, 0.8] by the threshold filter."""

    load_threshold: float = 0.5
    temperature_threshold: float = 0.5


@dataclass(frozen=True)
class Switch:
    name: str
    forwarding_capacity_mbps: float


@dataclass(frozen=True)
class Link:
    link_id: int
    a: str
    b: str
    capacity_mbps: float
    latency_ms: float


class Topology:
    """Undirected graph of RSUs, switches and servers."""

    def __init__(self, switches, links, rsus, servers):
        self.switches = list(switches)
        self.links = list(links)
        self.rsus = list(rsus)
        self.servers = list(servers)
        self.link_by_id = {l.link_id: l for l in self.links}
        self.adjacency = {}
        for name in self.rsus + [s.name for s in self.switches] + self.servers:
            self.adjacency[name] = []
        for l in self.links:
            self.adjacency[l.a].append((l.b, l.link_id))
            self.adjacency[l.b].append((l.a, l.link_id))
        for node in self.adjacency:
            self.adjacency[node].sort(key=lambda e: e[1])

    def nodes(self):
        return list(self.adjacency)

    def other_end(self, link_id, node):
        l = self.link_by_id[link_id]
        return l.b if l.a == node else l.a


# Default link table, id order matters: it fixes shortest-path tie-breaks and
# the legacy spanning tree. Endpoint pairs (a, b) for L1..L22.
_DEFAULT_LINKS = [
    ("RSU1", "S1"), ("RSU2", "S2"), ("RSU3", "S3"),   # L1-L3 RSU access
    ("S1", "S2"), ("S2", "S3"), ("S1", "S3"),         # L4-L6 edge laterals
    ("S1", "S4"), ("S2", "S4"),                       # L7-L8 core uplinks
    ("S4", "S5"),                                     # L9 core cross-link
    ("S5", "S6"), ("S6", "S7"), ("S7", "S8"),         # L10-L12 server chain
    ("S4", "S6"), ("S4", "S7"), ("S4", "S8"),         # L13-L15
    ("S5", "S7"), ("S5", "S8"),                       # L16-L17
    ("S3", "S5"),                                     # L18 third uplink
    ("S6", "S8"),                                     # L19
    ("S6", "M1"), ("S7", "M2"), ("S8", "M3"),         # L20-L22 server access
]

DEFAULT_SWITCH_CAPACITY_MBPS = 1000.0
DEFAULT_CORE_SWITCH_CAPACITY_MBPS = 2000.0
DEFAULT_LINK_CAPACITY_MBPS = 1000.0
DEFAULT_LINK_LATENCY_MS = 2.0


def build_default_topology(link_capacity_mbps=DEFAULT_LINK_CAPACITY_MBPS,
                           link_latency_ms=DEFAULT_LINK_LATENCY_MS,
                           switch_capacities=None):
    """Build the reference 3-server / 3-RSU / 8-switch / 22-link graph."""
    caps = {f"S{i}": DEFAULT_SWITCH_CAPACITY_MBPS for i in range(1, 9)}
    caps["S4"] = DEFAULT_CORE_SWITCH_CAPACITY_MBPS
    if switch_capacities:
        caps.update(switch_capacities)
    switches = [Switch(f"S{i}", caps[f"S{i}"]) for i in range(1, 9)]
    links = [
        Link(i + 1, a, b, link_capacity_mbps, link_latency_ms)
        for i, (a, b) in enumerate(_DEFAULT_LINKS)
    ]
    return Topology(switches, links, ["RSU1", "RSU2", "RSU3"], ["M1", "M2", "M3"])


def shortest_path(topology, src, dst):
    """Minimal-hop path from src to dst as a list of link ids.

    Ties between equal-hop paths break toward the lexicographically smallest
    link-id sequence, which makes routing deterministic.
    """
    if src not in topology.adjacency or dst not in topology.adjacency:
        raise NoPathError(f"unknown node in ({src}, {dst})")
    if src == dst:
        return []
    best = {src: ()}
    frontier = [src]
    while frontier:
        if dst in best:
            break
        nxt = {}
        for node in sorted(frontier):
            for neighbour, link_id in topology.adjacency[node]:
                if neighbour in best:
                    continue
                candidate = best[node] + (link_id,)
                if neighbour not in nxt or candidate < nxt[neighbour]:
                    nxt[neighbour] = candidate
        best.update(nxt)
        frontier = list(nxt)
    if dst not in best:
        raise NoPathError(f"no route from {src} to {dst}")
    return list(best[dst])


def path_nodes(topology, src, link_ids):
    """Expand a link-id path into the node sequence it traverses."""
    nodes = [src]
    for link_id in link_ids:
        nodes.append(topology.other_end(link_id, nodes[-1]))
    return nodes


def spanning_tree_links(topology):
    """Minimum-link-id spanning tree (Kruskal), the legacy L2 forwarding graph."""
    parent = {n: n for n in topology.adjacency}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    tree = set()
    for l in sorted(topology.links, key=lambda l: l.link_id):
        ra, rb = find(l.a), find(l.b)
        if ra != rb:
            parent[ra] = rb
            tree.add(l.link_id)
    return tree


def tree_path(topology, tree, src, dst):
    """Path between two nodes restricted to the given spanning-tree links."""
    if src == dst:
        return []
    prev = {src: None}
    queue = [src]
    while queue:
        node = queue.pop(0)
        if node == dst:
            break
        for neighbour, link_id in topology.adjacency[node]:
            if link_id in tree and neighbour not in prev:
                prev[neighbour] = (node, link_id)
                queue.append(neighbour)
    if dst not in prev:
        raise NoPathError(f"no tree route from {src} to {dst}")
    path = []
    node = dst
    while prev[node] is not None:
        parent, link_id = prev[node]
        path.append(link_id)
        node = parent
    path.reverse()
    return path
