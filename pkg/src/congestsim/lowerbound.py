"""Bridge-graph experiments: measurable predictions of the message lower bound.

The disconnected graph D (two complete bipartite halves) admits exactly four
maximal independent sets, one per choice of side in each component.  The
bridge graph B rewires one random edge per component into two cross edges
without touching any other port, so runs that never send across a bridge are
round-for-round identical to runs on D.  We classify outputs against the
four side patterns, record whether and when a bridge edge carried a message,
and aggregate crossing rates over many freshly drawn bridge graphs.
"""

from __future__ import annotations

import json
import random
import statistics
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field

from .algorithms import member_set
from .engine import NodeProgram, RunResult, SimStats, WordBudget, run
from .graph import Graph, gen_bridge_graph, gen_disconnected_d

__all__ = [
    "BridgeTrialRecord",
    "BridgeAggregate",
    "classify_outcome",
    "bridge_experiment",
    "component_salts",
    "OUTCOMES",
]

OUTCOMES = ("LL'", "LR'", "RL'", "RR'")
INVALID = "INVALID"
INCOMPLETE = "INCOMPLETE"

BRIDGE_TAG = "bridge"


def classify_outcome(graph: Graph, members: Iterable[int]) -> str:
    """Which of the four side patterns the set matches exactly, else INVALID."""
    sides = {lab: graph.nodes_labeled(lab) for lab in ("L", "R", "L'", "R'")}
    if not all(sides.values()):
        raise ValueError("graph carries no component side labels")
    chosen = set(members)
    for first in ("L", "R"):
        for second in ("L'", "R'"):
            if chosen == sides[first] | sides[second]:
                return f"{first[0]}{second[0]}'"
    return INVALID


def component_salts(graph: Graph) -> list[str]:
    """Randomness salts keyed by (component, within-component index).

    The two components get independent, identically derived streams, which
    makes the pair of per-component traces exchangeable for the outcome
    statistics on the disconnected graph.
    """
    half = graph.n // 2
    return [f"c{v // half}:{v % half}" for v in range(graph.n)]


@dataclass
class BridgeTrialRecord:
    seed: int
    crossed: bool
    messages_before_first_crossing: int | None
    outcome: str
    messages_total: int
    rounds: int


@dataclass
class BridgeAggregate:
    n: int
    algo: str
    mu: int | None
    trials: int
    crossing_rate: float
    histogram: dict[str, int]
    messages_mean: float
    records: list[BridgeTrialRecord] = field(repr=False, default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "algo": self.algo,
            "mu": self.mu,
            "trials": self.trials,
            "crossing_rate": self.crossing_rate,
            "messages_mean": self.messages_mean,
            "hist_LLp": self.histogram.get("LL'", 0),
            "hist_LRp": self.histogram.get("LR'", 0),
            "hist_RLp": self.histogram.get("RL'", 0),
            "hist_RRp": self.histogram.get("RR'", 0),
            "hist_invalid": self.histogram.get(INVALID, 0),
            "hist_incomplete": self.histogram.get(INCOMPLETE, 0),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())


def _trial_record(seed: int, graph: Graph, result: RunResult, mu: int | None) -> BridgeTrialRecord:
    stats: SimStats = result.stats
    first = stats.first_send_by_tag.get(BRIDGE_TAG)
    crossed = first is not None and (mu is None or first <= mu)
    if not stats.halted_all:
        outcome = INCOMPLETE
    else:
        outcome = classify_outcome(graph, member_set(result.outputs))
    return BridgeTrialRecord(
        seed=seed,
        crossed=crossed,
        messages_before_first_crossing=None if first is None else first - 1,
        outcome=outcome,
        messages_total=stats.messages_total,
        rounds=stats.rounds,
    )


def trial_seeds(base_seed: int, trials: int) -> list[int]:
    rng = random.Random(base_seed)
    return [rng.randrange(1 << 62) for _ in range(trials)]


def bridge_experiment(
    n: int,
    program_factory: Callable[[], NodeProgram],
    mu: int | None,
    trials: int,
    seed: int,
    *,
    algo_name: str = "",
    graph_family: Callable[[int, int], Graph] = gen_bridge_graph,
    budget: WordBudget | None = None,
    round_cap: int | None = None,
    node_salts_fn: Callable[[Graph], Sequence[str]] | None = None,
) -> BridgeAggregate:
    """Independent trials on freshly drawn bridge graphs under a message window.

    ``mu`` truncates each run once the total send count reaches the budget
    (``None`` means unbudgeted); truncated runs classify as INCOMPLETE but
    still report whether a bridge send occurred within the window.
    """
    if n % 4 != 0:
        raise ValueError("bridge experiments need n divisible by 4")
    records: list[BridgeTrialRecord] = []
    for trial_seed in trial_seeds(seed, trials):
        graph = graph_family(n, trial_seed)
        result = run(
            graph,
            program_factory,
            trial_seed,
            budget,
            round_cap,
            message_budget=mu,
            node_salts=node_salts_fn(graph) if node_salts_fn is not None else None,
        )
        records.append(_trial_record(trial_seed, graph, result, mu))
    histogram: dict[str, int] = {}
    for rec in records:
        histogram[rec.outcome] = histogram.get(rec.outcome, 0) + 1
    return BridgeAggregate(
        n=n,
        algo=algo_name,
        mu=mu,
        trials=trials,
        crossing_rate=sum(r.crossed for r in records) / trials,
        histogram=histogram,
        messages_mean=statistics.fmean(r.messages_total for r in records),
        records=records,
    )


def disconnected_experiment(
    n: int,
    program_factory: Callable[[], NodeProgram],
    trials: int,
    seed: int,
    *,
    algo_name: str = "",
    exchangeable_seeding: bool = True,
) -> BridgeAggregate:
    """Outcome histogram of an algorithm on the disconnected graph D."""
    salts = component_salts if exchangeable_seeding else None
    return bridge_experiment(
        n,
        program_factory,
        mu=None,
        trials=trials,
        seed=seed,
        algo_name=algo_name,
        graph_family=gen_disconnected_d,
        node_salts_fn=salts,
    )
