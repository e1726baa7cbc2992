"""Ground-truth verifiers: ruling-set validity, categories, exhaustive enumeration.

These are pure functions of immutable inputs and deliberately independent of
the simulation engine; every algorithm output in the test suite is judged
here.  Cost is O(m * |I|) in the worst case, fine at desk scale.
"""

from __future__ import annotations

import json
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from itertools import combinations

from .graph import Graph, bfs_distances

__all__ = [
    "CategoryReport",
    "RulingSetReport",
    "brute_force_ruling_sets",
    "verify_categories",
    "verify_mis",
    "verify_ruling_set",
]

UNDECIDED = "UNDECIDED"
CATEGORY_1 = "CATEGORY_1"
CATEGORY_2 = "CATEGORY_2"
CATEGORY_3 = "CATEGORY_3"


@dataclass
class RulingSetReport:
    """Outcome of an (alpha, beta) ruling-set check.

    ``alpha_violations`` lists set pairs closer than alpha, ``beta_violations``
    lists nodes farther than beta from the set (unreachable nodes included),
    and ``achieved_beta`` is the maximum distance of any node to the set
    (``inf`` when some node cannot reach it).
    """

    valid: bool
    alpha: int
    beta: int
    alpha_violations: list[tuple[int, int]] = field(default_factory=list)
    beta_violations: list[int] = field(default_factory=list)
    achieved_beta: float = 0.0

    def to_json(self) -> str:
        return json.dumps(
            {
                "valid": self.valid,
                "alpha": self.alpha,
                "beta": self.beta,
                "alpha_violations": [list(p) for p in self.alpha_violations],
                "beta_violations": list(self.beta_violations),
                "achieved_beta": (
                    "inf" if math.isinf(self.achieved_beta) else self.achieved_beta
                ),
            }
        )


def _truncated_bfs(graph: Graph, source: int, limit: int) -> dict[int, int]:
    """Distances from ``source`` up to ``limit`` hops."""
    dist = {source: 0}
    frontier = [source]
    d = 0
    while frontier and d < limit:
        d += 1
        nxt: list[int] = []
        for v in frontier:
            for u in graph.adjacency[v]:
                if u not in dist:
                    dist[u] = d
                    nxt.append(u)
        frontier = nxt
    return dist


def verify_ruling_set(graph: Graph, members: Iterable[int], alpha: int, beta: int) -> RulingSetReport:
    """Exact check that ``members`` is an (alpha, beta)-ruling set of ``graph``.

    An empty set on a nonempty graph is reported invalid with every node a
    beta violation; the empty graph with an empty set is valid.
    """
    node_set = sorted(set(members))
    for v in node_set:
        if not 0 <= v < graph.n:
            raise ValueError(f"set member {v} is not a node index")

    member_set = set(node_set)
    alpha_violations: list[tuple[int, int]] = []
    if alpha >= 2:
        for v in node_set:
            near = _truncated_bfs(graph, v, alpha - 1)
            for u, d in near.items():
                if u > v and d >= 1 and u in member_set:
                    alpha_violations.append((v, u))
    alpha_violations = sorted(set(alpha_violations))

    if graph.n == 0:
        return RulingSetReport(valid=True, alpha=alpha, beta=beta, achieved_beta=0.0)

    dist = bfs_distances(graph, node_set)
    beta_violations = [v for v in range(graph.n) if dist[v] > beta]
    achieved = max(dist) if dist else 0.0

    return RulingSetReport(
        valid=not alpha_violations and not beta_violations,
        alpha=alpha,
        beta=beta,
        alpha_violations=alpha_violations,
        beta_violations=beta_violations,
        achieved_beta=float(achieved),
    )


def verify_mis(graph: Graph, members: Iterable[int]) -> bool:
    """Maximal independent set = (2, 1)-ruling set."""
    return verify_ruling_set(graph, members, alpha=2, beta=1).valid


@dataclass
class CategoryReport:
    verdict: str  # "valid", "invalid", or "incomplete"
    problems: list[str] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return self.verdict == "valid"

    def to_json(self) -> str:
        return json.dumps({"verdict": self.verdict, "problems": self.problems})


def verify_categories(graph: Graph, labels: Sequence[str]) -> CategoryReport:
    """Check a full category labelling against its definition.

    CATEGORY_1 must be a 2-ruling set, CATEGORY_2 must be exactly the
    non-member neighbours of CATEGORY_1, and every CATEGORY_3 node must have
    a CATEGORY_2 neighbour and no CATEGORY_1 neighbour.  Any UNDECIDED label
    yields the distinct "incomplete" verdict.
    """
    if len(labels) != graph.n:
        raise ValueError("labels length must equal node count")
    if any(lab == UNDECIDED for lab in labels):
        return CategoryReport(verdict="incomplete", problems=["undecided labels present"])
    known = {CATEGORY_1, CATEGORY_2, CATEGORY_3}
    bad = [lab for lab in labels if lab not in known]
    if bad:
        return CategoryReport(verdict="invalid", problems=[f"unknown label {bad[0]!r}"])

    cat1 = {v for v, lab in enumerate(labels) if lab == CATEGORY_1}
    problems: list[str] = []
    report = verify_ruling_set(graph, cat1, alpha=2, beta=2)
    if not report.valid:
        problems.append("CATEGORY_1 is not a (2, 2)-ruling set")
    expected_cat2 = {u for v in cat1 for u in graph.adjacency[v]} - cat1
    actual_cat2 = {v for v, lab in enumerate(labels) if lab == CATEGORY_2}
    if actual_cat2 != expected_cat2:
        problems.append("CATEGORY_2 is not exactly the neighbourhood of CATEGORY_1")
    for v, lab in enumerate(labels):
        if lab != CATEGORY_3:
            continue
        nbr_labs = {labels[u] for u in graph.adjacency[v]}
        if CATEGORY_1 in nbr_labs:
            problems.append(f"CATEGORY_3 node {v} has a CATEGORY_1 neighbour")
        if CATEGORY_2 not in nbr_labs:
            problems.append(f"CATEGORY_3 node {v} has no CATEGORY_2 neighbour")
    return CategoryReport(verdict="valid" if not problems else "invalid", problems=problems)


def brute_force_ruling_sets(graph: Graph, alpha: int, beta: int) -> list[frozenset[int]]:
    """All (alpha, beta)-ruling sets by exhaustive enumeration; limited to n <= 16."""
    if graph.n > 16:
        raise ValueError("brute force enumeration is limited to n <= 16")
    found: list[frozenset[int]] = []
    nodes = list(range(graph.n))
    for k in range(graph.n + 1):
        for subset in combinations(nodes, k):
            if verify_ruling_set(graph, subset, alpha, beta).valid:
                found.append(frozenset(subset))
    return found
