"""Physical topology, traffic demands and structural wavelength bounds."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence


class TopologyError(ValueError):
    """Raised for malformed topology documents or invalid graph data."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Link:
    id: int
    src: int
    dst: int

    def __str__(self) -> str:
        return f"{self.src}-{self.dst}"


@dataclass(frozen=True)
class Topology:
    """Directed fiber graph where every link has a reverse twin.

    Undirected edge ``k`` expands into links ``2k`` (u->v) and ``2k+1``
    (v->u), so ``reverse[e] == e ^ 1``.
    """

    nodes: tuple[int, ...]
    links: tuple[Link, ...]
    reverse: dict[int, int] = field(compare=False, repr=False)
    _by_ends: dict[tuple[int, int], int] = field(compare=False, repr=False)

    @classmethod
    def from_edges(cls, nodes: Iterable[int], edges: Iterable[tuple[int, int]]) -> "Topology":
        nodes = tuple(sorted(set(nodes)))
        known = set(nodes)
        links: list[Link] = []
        by_ends: dict[tuple[int, int], int] = {}
        for u, v in edges:
            if u == v:
                raise TopologyError(f"self-loop at node {u}")
            if u not in known or v not in known:
                raise TopologyError(f"edge {u}-{v} references an unknown node")
            if (u, v) in by_ends or (v, u) in by_ends:
                raise TopologyError(f"duplicate edge {u}-{v}")
            for a, b in ((u, v), (v, u)):
                by_ends[(a, b)] = len(links)
                links.append(Link(len(links), a, b))
        reverse = {l.id: by_ends[(l.dst, l.src)] for l in links}
        return cls(nodes, tuple(links), reverse, by_ends)

    @property
    def edges(self) -> list[tuple[int, int]]:
        """Undirected edges in file order, as (u, v) with the original orientation."""
        return [(l.src, l.dst) for l in self.links[::2]]

    def link(self, u: int, v: int) -> Link:
        try:
            return self.links[self._by_ends[(u, v)]]
        except KeyError:
            raise TopologyError(f"no link {u}-{v}") from None

    def has_link(self, u: int, v: int) -> bool:
        return (u, v) in self._by_ends

    def out_links(self, v: int) -> list[Link]:
        return [l for l in self.links if l.src == v]

    def in_links(self, v: int) -> list[Link]:
        return [l for l in self.links if l.dst == v]

    def degree(self, v: int) -> int:
        return len(self.out_links(v))

    def undirected_id(self, link_id: int) -> int:
        return link_id // 2

    def path_links(self, route: Sequence[int]) -> list[Link]:
        """Directed links along a node sequence."""
        return [self.link(a, b) for a, b in zip(route, route[1:])]

    def fingerprint(self) -> str:
        canon = sorted(tuple(sorted(e)) for e in self.edges)
        text = f"{len(self.nodes)}|" + ";".join(f"{a}-{b}" for a, b in canon)
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def to_text(self) -> str:
        lines = [f"nodes {len(self.nodes)}"]
        lines += [f"{u} {v}" for u, v in self.edges]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Demand:
    id: int
    src: int
    dst: int
    capacity: int = 1

    def __post_init__(self):
        if self.src == self.dst:
            raise ValueError(f"demand {self.id}: source equals destination ({self.src})")
        if self.capacity != 1:
            raise ValueError("only unit-capacity demands are supported")

    def __str__(self) -> str:
        return f"{self.src}->{self.dst}"


@dataclass(frozen=True)
class Instance:
    topology: Topology
    demands: tuple[Demand, ...]
    wavelengths: tuple[int, ...]

    def __post_init__(self):
        if len(self.wavelengths) < 1:
            raise ValueError("at least one wavelength is required")
        known = set(self.topology.nodes)
        for d in self.demands:
            if d.src not in known or d.dst not in known:
                raise ValueError(f"demand {d} references a node outside the topology")

    @classmethod
    def create(cls, topology: Topology, demands: Sequence[Demand], n_wavelengths: int) -> "Instance":
        return cls(topology, tuple(demands), tuple(range(1, n_wavelengths + 1)))

    def with_wavelengths(self, n_wavelengths: int) -> "Instance":
        return Instance.create(self.topology, self.demands, n_wavelengths)

    @property
    def destinations(self) -> set[int]:
        return {d.dst for d in self.demands}


def load_topology(text: str) -> Topology:
    """Parse the ``nodes N`` + ``u v`` edge-list format.

    Nodes are numbered 1..N. Blank lines and ``#`` comments are ignored.
    """
    n_nodes = None
    edges: list[tuple[int, int]] = []
    seen: dict[frozenset, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if n_nodes is None:
            if len(parts) != 2 or parts[0] != "nodes" or not parts[1].isdigit():
                raise TopologyError("expected header 'nodes <N>'", lineno)
            n_nodes = int(parts[1])
            if n_nodes < 2:
                raise TopologyError("a topology needs at least two nodes", lineno)
            continue
        if len(parts) != 2 or not all(p.isdigit() for p in parts):
            raise TopologyError(f"malformed edge line {raw.strip()!r}", lineno)
        u, v = int(parts[0]), int(parts[1])
        for node in (u, v):
            if not 1 <= node <= n_nodes:
                raise TopologyError(f"unknown node id {node}", lineno)
        if u == v:
            raise TopologyError(f"self-loop at node {u}", lineno)
        key = frozenset((u, v))
        if key in seen:
            raise TopologyError(f"duplicate edge {u}-{v} (first on line {seen[key]})", lineno)
        seen[key] = lineno
        edges.append((u, v))
    if n_nodes is None:
        raise TopologyError("empty topology document")
    return Topology.from_edges(range(1, n_nodes + 1), edges)


def read_topology(path: str | Path) -> Topology:
    return load_topology(Path(path).read_text())


def bundled_topology_text(name: str = "cost239") -> str:
    return resources.files("rwnca.data").joinpath(f"{name}.topo").read_text()


def cost239() -> Topology:
    return load_topology(bundled_topology_text("cost239"))


def degree_histogram(t: Topology) -> dict[int, list[int]]:
    hist: dict[int, list[int]] = {}
    for v in t.nodes:
        hist.setdefault(t.degree(v), []).append(v)
    return {k: sorted(hist[k]) for k in sorted(hist)}


def all_to_one(t: Topology, dest: int) -> list[Demand]:
    """One unit demand from every other node to ``dest``."""
    if dest not in t.nodes:
        raise TopologyError(f"unknown destination node {dest}")
    return [Demand(i, v, dest) for i, v in enumerate(v for v in t.nodes if v != dest)]


def cut_lower_bound(inst: Instance, coding_enabled: bool) -> int:
    """Wavelengths needed to bring every copy into the common destination.

    Each demand delivers a working and a protection copy over the
    destination's incoming links. With coding, protection copies merge at
    best pairwise, so only ``ceil(|D|/2)`` protection arrivals remain.
    """
    n = len(inst.demands)
    if n == 0:
        return 0
    dests = inst.destinations
    if len(dests) != 1:
        raise ValueError(f"cut bound needs a single destination, got {sorted(dests)}")
    (dest,) = dests
    arrivals = n + math.ceil(n / 2) if coding_enabled else 2 * n
    return math.ceil(arrivals / inst.topology.degree(dest))


def simple_paths(t: Topology, src: int, dst: int, max_hops: int | None = None) -> list[tuple[int, ...]]:
    """All simple node paths src -> dst with at most ``max_hops`` links, shortest first."""
    limit = max_hops if max_hops is not None else len(t.nodes) - 1
    adj = {v: sorted(l.dst for l in t.out_links(v)) for v in t.nodes}
    out: list[tuple[int, ...]] = []
    path = [src]
    on_path = {src}

    def walk(v: int) -> None:
        if v == dst:
            out.append(tuple(path))
            return
        if len(path) - 1 >= limit:
            return
        for n in adj[v]:
            if n not in on_path:
                path.append(n)
                on_path.add(n)
                walk(n)
                on_path.discard(n)
                path.pop()

    if src != dst:
        walk(src)
    out.sort(key=lambda p: (len(p), p))
    return out
