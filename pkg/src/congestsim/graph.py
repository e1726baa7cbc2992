"""Port-numbered undirected graphs and the topology generators used by the simulator.

A graph here is the static object a simulation runs on: every node has a
distinct identifier drawn from a range polynomial in n, and its incident
edges occupy ports 1..deg(v).  Port wiring is randomized by the generators
(an algorithm must not be able to exploit port layout), node identifiers are
random by default, and everything is a pure function of the generator seed.
"""

from __future__ import annotations

import math
import random
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

__all__ = [
    "Graph",
    "GraphError",
    "GraphFamilySpec",
    "ID_EXPONENT",
    "bfs_distances",
    "build_graph",
    "gen_bridge_graph",
    "gen_complete_bipartite",
    "gen_cycle",
    "gen_disconnected_d",
    "gen_gnp",
    "gen_tight_example",
    "load_edge_list",
    "parse_family_spec",
    "save_edge_list",
]

# Node identifiers are drawn uniformly without replacement from [1, n**ID_EXPONENT].
ID_EXPONENT = 4

UNREACHABLE = math.inf


class GraphError(ValueError):
    """Raised for invalid graph parameters, malformed files, or invariant violations."""


def _edge_key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    """Immutable port-numbered undirected graph.

    ``adjacency[v]`` lists the neighbours of ``v`` in port order: the
    neighbour reached through port ``p`` (ports are 1-based) is
    ``adjacency[v][p - 1]``.  ``edge_tags`` maps sorted node pairs to a
    label (e.g. ``"bridge"``); ``node_labels`` carries per-node metadata
    such as bipartition sides (``None`` when absent).
    """

    n: int
    ids: tuple[int, ...]
    adjacency: tuple[tuple[int, ...], ...]
    edge_tags: Mapping[tuple[int, int], str] = field(default_factory=dict)
    node_labels: tuple[str | None, ...] = ()

    def __post_init__(self) -> None:
        if not self.node_labels:
            object.__setattr__(self, "node_labels", (None,) * self.n)

    # -- basic queries -------------------------------------------------

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def neighbor(self, v: int, port: int) -> int:
        """Neighbour of ``v`` behind 1-based port ``port``."""
        return self.adjacency[v][port - 1]

    @cached_property
    def m(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    @cached_property
    def max_degree(self) -> int:
        return max((len(a) for a in self.adjacency), default=0)

    @cached_property
    def peer_ports(self) -> tuple[tuple[int, ...], ...]:
        """``peer_ports[v][p-1]`` is the port at ``adjacency[v][p-1]`` that leads back to ``v``.

        Computed by the sorted-pair alignment: ranking directed edges by
        (src, dst) and by (dst, src) aligns every edge with its reverse at
        the same rank (no parallel edges), which pairs ports in bulk.
        """
        from itertools import chain

        degs = [len(a) for a in self.adjacency]
        total = sum(degs)
        if total == 0:
            return tuple(() for _ in range(self.n))
        src = np.repeat(np.arange(self.n, dtype=np.int32), degs)
        dst = np.fromiter(chain.from_iterable(self.adjacency), dtype=np.int32, count=total)
        ports = np.concatenate([np.arange(1, d + 1, dtype=np.int32) for d in degs if d])
        fwd = np.lexsort((dst, src))
        bwd = np.lexsort((src, dst))
        peer = np.empty(total, dtype=np.int32)
        peer[bwd] = ports[fwd]
        flat = peer.tolist()
        out: list[tuple[int, ...]] = []
        pos = 0
        for d in degs:
            out.append(tuple(flat[pos : pos + d]))
            pos += d
        return tuple(out)

    def edges(self) -> Iterable[tuple[int, int]]:
        for v, nbrs in enumerate(self.adjacency):
            for u in nbrs:
                if v < u:
                    yield (v, u)

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adjacency[u]

    def tag_of(self, u: int, v: int) -> str | None:
        return self.edge_tags.get(_edge_key(u, v))

    def nodes_labeled(self, label: str) -> set[int]:
        return {v for v, lab in enumerate(self.node_labels) if lab == label}

    def validate(self) -> None:
        """Check all structural invariants; raise :class:`GraphError` on the first failure."""
        if self.n < 0:
            raise GraphError("node count must be non-negative")
        if len(self.adjacency) != self.n or len(self.ids) != self.n:
            raise GraphError("ids/adjacency length does not match node count")
        if len(set(self.ids)) != self.n:
            raise GraphError("node ids are not pairwise distinct")
        id_cap = max(1, self.n**ID_EXPONENT)
        for v, node_id in enumerate(self.ids):
            if not 1 <= node_id <= id_cap:
                raise GraphError(f"id of node {v} outside [1, n^{ID_EXPONENT}]")
        for v, nbrs in enumerate(self.adjacency):
            if len(set(nbrs)) != len(nbrs):
                raise GraphError(f"parallel edges at node {v}")
            for u in nbrs:
                if u == v:
                    raise GraphError(f"self-loop at node {v}")
                if not 0 <= u < self.n:
                    raise GraphError(f"neighbour index {u} of node {v} out of range")
                if v not in self.adjacency[u]:
                    raise GraphError(f"edge {v}->{u} is not symmetric")
        for (u, v) in self.edge_tags:
            if not (0 <= u < v < self.n) or not self.has_edge(u, v):
                raise GraphError(f"edge tag on non-edge ({u}, {v})")


# -- construction helpers ----------------------------------------------


def _assign_ids(n: int, rng: random.Random, sequential_ids: bool) -> tuple[int, ...]:
    if sequential_ids:
        return tuple(range(1, n + 1))
    return tuple(rng.sample(range(1, n**ID_EXPONENT + 1), n))


def _shuffle_ports(adj: list[list[int]], rng: random.Random) -> None:
    for nbrs in adj:
        rng.shuffle(nbrs)


def build_graph(
    n: int,
    edges: Iterable[tuple[int, int]],
    rng: random.Random,
    *,
    sequential_ids: bool = False,
    node_labels: Sequence[str | None] | None = None,
    edge_tags: Mapping[tuple[int, int], str] | None = None,
    shuffle_ports: bool = True,
) -> Graph:
    """Assemble a :class:`Graph` from an edge list, assigning ids and random port order."""
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    if shuffle_ports:
        _shuffle_ports(adj, rng)
    ids = _assign_ids(n, rng, sequential_ids)
    return Graph(
        n=n,
        ids=ids,
        adjacency=tuple(tuple(a) for a in adj),
        edge_tags=dict(edge_tags or {}),
        node_labels=tuple(node_labels) if node_labels is not None else (None,) * n,
    )


# -- generators ---------------------------------------------------------


def gen_cycle(n: int, seed: int, *, sequential_ids: bool = False) -> Graph:
    """Cycle on ``n >= 3`` nodes."""
    if n < 3:
        raise GraphError("cycle requires n >= 3")
    rng = random.Random(seed)
    edges = [(v, (v + 1) % n) for v in range(n)]
    return build_graph(n, edges, rng, sequential_ids=sequential_ids)


def gen_complete_bipartite(a: int, b: int, seed: int, *, sequential_ids: bool = False) -> Graph:
    """K_{a,b}; left side gets label ``"L"``, right side ``"R"``."""
    if a < 1 or b < 1:
        raise GraphError("complete bipartite requires both sides >= 1")
    rng = random.Random(seed)
    edges = [(u, a + w) for u in range(a) for w in range(b)]
    labels = ["L"] * a + ["R"] * b
    return build_graph(a + b, edges, rng, sequential_ids=sequential_ids, node_labels=labels)


def gen_gnp(n: int, p: float, seed: int, *, sequential_ids: bool = False) -> Graph:
    """Erdos-Renyi G(n, p); each unordered pair appears independently with probability p.

    Edges and port order are drawn from ``numpy``'s generator seeded with
    ``seed``; node ids come from the stdlib generator with the same seed.
    """
    if n < 1:
        raise GraphError("gnp requires n >= 1")
    if not 0.0 <= p <= 1.0:
        raise GraphError("gnp requires 0 <= p <= 1")
    nprng = np.random.default_rng(seed)
    adjacency: list[tuple[int, ...]] = []
    if p > 0.0 and n > 1:
        mask = np.triu(nprng.random((n, n)) < p, k=1)
        mask |= mask.T
        for v in range(n):
            nbrs = np.nonzero(mask[v])[0]
            if nbrs.size:
                adjacency.append(tuple(nprng.permutation(nbrs).tolist()))
            else:
                adjacency.append(())
    else:
        adjacency = [() for _ in range(n)]
    rng = random.Random(seed)
    return Graph(
        n=n,
        ids=_assign_ids(n, rng, sequential_ids),
        adjacency=tuple(adjacency),
    )


def _disconnected_edges_labels(n: int) -> tuple[list[tuple[int, int]], list[str]]:
    q = n // 4
    edges: list[tuple[int, int]] = []
    # Component 1 occupies indices [0, n/2): left L then right R.
    for u in range(q):
        for w in range(q):
            edges.append((u, q + w))
    # Component 2 occupies indices [n/2, n): left L' then right R'.
    base = 2 * q
    for u in range(q):
        for w in range(q):
            edges.append((base + u, base + q + w))
    labels = ["L"] * q + ["R"] * q + ["L'"] * q + ["R'"] * q
    return edges, labels


def gen_disconnected_d(n: int, seed: int, *, sequential_ids: bool = False) -> Graph:
    """Two disjoint copies of K_{n/4,n/4}; the four halves are labelled L, R, L', R'."""
    if n % 4 != 0 or n < 8:
        raise GraphError("disconnected_d requires n divisible by 4 and n >= 8")
    rng = random.Random(seed)
    edges, labels = _disconnected_edges_labels(n)
    return build_graph(n, edges, rng, sequential_ids=sequential_ids, node_labels=labels)


def gen_bridge_graph(n: int, seed: int, *, sequential_ids: bool = False) -> Graph:
    """Bridge graph: delete one random edge per component of D and rewire the freed ports.

    Starting from ``gen_disconnected_d(n, seed)``, an edge e=(u,v) of the first
    component and e'=(u',v') of the second are drawn uniformly at random and
    replaced by the bridges (u,u') and (v,v'), connected through the exact
    ports that e and e' occupied.  Every node keeps its degree and all other
    ports keep their wiring, so the result is locally indistinguishable from D
    until a message crosses a bridge.  Bridge edges carry the tag ``"bridge"``.
    """
    base = gen_disconnected_d(n, seed, sequential_ids=sequential_ids)
    rng = random.Random(f"{seed}:bridge")
    q = n // 4
    while True:
        u = rng.randrange(q)                      # in L
        v = q + rng.randrange(q)                  # in R
        up = 2 * q + rng.randrange(q)             # in L'
        vp = 3 * q + rng.randrange(q)             # in R'
        # The rewired pairs lie in different components of D, so a parallel
        # edge is impossible; the redraw loop is kept for generality.
        if not base.has_edge(u, up) and not base.has_edge(v, vp):
            break
    adj = [list(a) for a in base.adjacency]
    adj[u][adj[u].index(v)] = up
    adj[up][adj[up].index(vp)] = u
    adj[v][adj[v].index(u)] = vp
    adj[vp][adj[vp].index(up)] = v
    tags = {_edge_key(u, up): "bridge", _edge_key(v, vp): "bridge"}
    return Graph(
        n=n,
        ids=base.ids,
        adjacency=tuple(tuple(a) for a in adj),
        edge_tags=tags,
        node_labels=base.node_labels,
    )


def tight_example_sizes(n: int, eps: float, eps_prime: float) -> tuple[int, int, int]:
    """Sizes (|A|, |B|, |C|) of the hub-and-layers graph; C absorbs rounding slack."""
    if not 0.0 < eps_prime < eps < 1.0:
        raise GraphError("tight_example requires 0 < eps' < eps < 1")
    size_a = math.ceil(n ** (1.0 - eps))
    size_b = math.ceil(n ** (1.0 - eps_prime))
    size_c = n - 1 - size_a - size_b
    if size_a < 1 or size_b < 1 or size_c < 1:
        raise GraphError("tight_example sizes collapse for these parameters")
    return size_a, size_b, size_c


def gen_tight_example(
    n: int, eps: float, eps_prime: float, seed: int, *, sequential_ids: bool = False
) -> Graph:
    """Hub node s joined to layer A, complete bipartite A-B and B-C.

    Layer sizes are |A| = ceil(n^(1-eps)) and |B| = ceil(n^(1-eps')); C takes
    the remaining n - 1 - |A| - |B| nodes.  Nodes carry labels "s", "A", "B", "C".
    """
    size_a, size_b, size_c = tight_example_sizes(n, eps, eps_prime)
    rng = random.Random(seed)
    a0, b0, c0 = 1, 1 + size_a, 1 + size_a + size_b
    edges: list[tuple[int, int]] = [(0, a0 + i) for i in range(size_a)]
    edges += [(a0 + i, b0 + j) for i in range(size_a) for j in range(size_b)]
    edges += [(b0 + j, c0 + k) for j in range(size_b) for k in range(size_c)]
    labels = ["s"] + ["A"] * size_a + ["B"] * size_b + ["C"] * size_c
    return build_graph(n, edges, rng, sequential_ids=sequential_ids, node_labels=labels)


# -- family specs ---------------------------------------------------------

_FAMILY_ALIASES = {
    "cycle": "cycle",
    "complete_bipartite": "complete_bipartite",
    "bipartite": "complete_bipartite",
    "kab": "complete_bipartite",
    "gnp": "gnp",
    "bridge": "bridge",
    "disconnected_d": "disconnected_d",
    "disconnected": "disconnected_d",
    "tight_example": "tight_example",
    "tight": "tight_example",
    "from_file": "from_file",
    "file": "from_file",
}


@dataclass(frozen=True)
class GraphFamilySpec:
    """A graph family plus its parameters and seed; building it is a pure function."""

    family: str
    params: Mapping[str, object] = field(default_factory=dict)
    seed: int = 0

    def build(self, seed: int | None = None) -> Graph:
        use = self.seed if seed is None else seed
        p = dict(self.params)
        fam = _FAMILY_ALIASES.get(self.family)
        if fam is None:
            raise GraphError(f"unknown graph family: {self.family!r}")
        if fam == "cycle":
            return gen_cycle(int(p["n"]), use)
        if fam == "complete_bipartite":
            return gen_complete_bipartite(int(p["a"]), int(p["b"]), use)
        if fam == "gnp":
            return gen_gnp(int(p["n"]), float(p["p"]), use)
        if fam == "bridge":
            return gen_bridge_graph(int(p["n"]), use)
        if fam == "disconnected_d":
            return gen_disconnected_d(int(p["n"]), use)
        if fam == "tight_example":
            return gen_tight_example(
                int(p["n"]), float(p.get("eps", 0.5)), float(p.get("epsp", 0.25)), use
            )
        return load_edge_list(str(p["path"]))

    def describe(self) -> str:
        inner = ",".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"{self.family}:{inner}" if inner else self.family


def parse_family_spec(text: str, seed: int = 0) -> GraphFamilySpec:
    """Parse an inline spec like ``gnp:n=512,p=0.02``; a bare path means from_file."""
    if ":" not in text:
        if text in _FAMILY_ALIASES:
            return GraphFamilySpec(family=text, seed=seed)
        return GraphFamilySpec(family="from_file", params={"path": text}, seed=seed)
    fam, _, rest = text.partition(":")
    if fam not in _FAMILY_ALIASES:
        raise GraphError(f"unknown graph family: {fam!r}")
    params: dict[str, object] = {}
    if rest:
        for item in rest.split(","):
            if "=" not in item:
                raise GraphError(f"malformed parameter {item!r} in graph spec")
            key, _, val = item.partition("=")
            params[key.strip()] = val.strip()
    if "seed" in params:
        seed = int(str(params.pop("seed")))
    return GraphFamilySpec(family=fam, params=params, seed=seed)


# -- edge-list file format -------------------------------------------------

_HEADER_PREFIX = "congest-graph v1 n="


def save_edge_list(graph: Graph, path: str | Path) -> None:
    """Write the text format: header, one ``node`` line per node, ``tag``/``label`` lines."""
    lines = [f"congest-graph v1 n={graph.n}"]
    for v in range(graph.n):
        ports = ",".join(str(u) for u in graph.adjacency[v])
        lines.append(f"node {v} id={graph.ids[v]} ports={ports}")
    for (u, v), tag in sorted(graph.edge_tags.items()):
        lines.append(f"tag {u} {v} {tag}")
    for v, lab in enumerate(graph.node_labels):
        if lab is not None:
            lines.append(f"label {v} {lab}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_edge_list(path: str | Path) -> Graph:
    """Parse the edge-list format, rejecting invariant violations with line numbers."""
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines or not lines[0].startswith(_HEADER_PREFIX):
        raise GraphError(f"{path}:1: missing 'congest-graph v1' header")
    try:
        n = int(lines[0][len(_HEADER_PREFIX):])
    except ValueError:
        raise GraphError(f"{path}:1: malformed node count in header") from None
    if n < 0:
        raise GraphError(f"{path}:1: negative node count")

    ids: dict[int, int] = {}
    adjacency: dict[int, list[int]] = {}
    tags: dict[tuple[int, int], str] = {}
    labels: dict[int, str] = {}
    seen_pairs: set[tuple[int, int]] = set()

    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        kind = parts[0]
        if kind == "node":
            if len(parts) != 4 or not parts[2].startswith("id=") or not parts[3].startswith("ports="):
                raise GraphError(f"{path}:{lineno}: malformed node line")
            try:
                idx = int(parts[1])
                node_id = int(parts[2][3:])
            except ValueError:
                raise GraphError(f"{path}:{lineno}: non-integer node fields") from None
            if not 0 <= idx < n:
                raise GraphError(f"{path}:{lineno}: node index {idx} out of range")
            if idx in adjacency:
                raise GraphError(f"{path}:{lineno}: duplicate node line for {idx}")
            ports_text = parts[3][6:]
            nbrs: list[int] = []
            if ports_text:
                try:
                    nbrs = [int(tok) for tok in ports_text.split(",")]
                except ValueError:
                    raise GraphError(f"{path}:{lineno}: non-integer port entry") from None
            for u in nbrs:
                if not 0 <= u < n:
                    raise GraphError(f"{path}:{lineno}: neighbour {u} out of range")
                if u == idx:
                    raise GraphError(f"{path}:{lineno}: self-loop at node {idx}")
                if (idx, u) in seen_pairs:
                    raise GraphError(f"{path}:{lineno}: duplicate edge {idx}-{u}")
                seen_pairs.add((idx, u))
            adjacency[idx] = nbrs
            ids[idx] = node_id
        elif kind == "tag":
            if len(parts) != 4:
                raise GraphError(f"{path}:{lineno}: malformed tag line")
            try:
                u, v = int(parts[1]), int(parts[2])
            except ValueError:
                raise GraphError(f"{path}:{lineno}: non-integer tag endpoints") from None
            tags[_edge_key(u, v)] = parts[3]
        elif kind == "label":
            if len(parts) != 3:
                raise GraphError(f"{path}:{lineno}: malformed label line")
            try:
                v = int(parts[1])
            except ValueError:
                raise GraphError(f"{path}:{lineno}: non-integer label index") from None
            labels[v] = parts[2]
        else:
            raise GraphError(f"{path}:{lineno}: unknown line kind {kind!r}")

    missing = [v for v in range(n) if v not in adjacency]
    if missing:
        raise GraphError(f"{path}: missing node line for index {missing[0]}")
    graph = Graph(
        n=n,
        ids=tuple(ids[v] for v in range(n)),
        adjacency=tuple(tuple(adjacency[v]) for v in range(n)),
        edge_tags=tags,
        node_labels=tuple(labels.get(v) for v in range(n)),
    )
    try:
        graph.validate()
    except GraphError as exc:
        raise GraphError(f"{path}: {exc}") from None
    return graph


# -- queries ----------------------------------------------------------------


def bfs_distances(graph: Graph, sources: Iterable[int]) -> list[float]:
    """Exact hop distance from every node to the nearest source (inf when unreachable)."""
    dist: list[float] = [UNREACHABLE] * graph.n
    frontier: list[int] = []
    for s in sources:
        if dist[s] == UNREACHABLE:
            dist[s] = 0
            frontier.append(s)
    d = 0
    while frontier:
        d += 1
        nxt: list[int] = []
        for v in frontier:
            for u in graph.adjacency[v]:
                if dist[u] == UNREACHABLE:
                    dist[u] = d
                    nxt.append(u)
        frontier = nxt
    return dist
