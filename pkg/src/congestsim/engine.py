"""Synchronous message-passing engine with CONGEST-style message budgets.

Execution model: in every round each node may read the messages delivered on
its ports (sent by neighbours in the previous round), update local state
using its private randomness, and emit at most one message per port.  A
message is a tuple of machine words; a word carries ceil(log2 n) bits, so a
bounded number of words per message is the CONGEST O(log n)-bit constraint.

Message accounting follows the usual convention: one (sender, port, round)
send is one message, whatever the payload length.  Per-node randomness
streams are derived from ``(global_seed, salt)`` through a fixed mixing
function (``random.Random(f"{seed}|{salt}")``), so traces are reproducible
across machines; the default salt of a node is its index.

Termination is a simulator privilege: the run ends when every node has
halted, or is *passive* (sends nothing unless a message arrives) with no
message in flight.  A program that needs to answer queries forever can stay
passive instead of halting.
"""

from __future__ import annotations

import heapq
import json
import math
import random
import statistics
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

from .graph import Graph, GraphFamilySpec

__all__ = [
    "DEFAULT_MAX_WORDS",
    "Broadcast",
    "BudgetViolation",
    "EngineError",
    "Message",
    "NodeContext",
    "NodeProgram",
    "RunResult",
    "RunRecord",
    "ManyResult",
    "SimStats",
    "WordBudget",
    "id_words",
    "node_rng",
    "pack_fields",
    "run",
    "run_many",
    "unpack_fields",
    "words_needed",
]

# A message is a plain tuple of non-negative ints, each below 2**word_bits.
Message = tuple  # noqa: N816 - type alias


class Broadcast:
    """Outbox shorthand: the same payload on many ports (validated once)."""

    __slots__ = ("payload", "ports")

    def __init__(self, payload: Message, ports) -> None:
        self.payload = payload
        self.ports = ports

    def __bool__(self) -> bool:
        return bool(self.ports)

# Default words per message.  The spec's ID range [1, n^4] makes a node id
# span 4-5 words of ceil(log2 n) bits, and tagged greedy messages at the
# smallest graphs (1-2 bit words) need several more, so 4 words cannot hold
# any id-bearing message; 16 covers the largest message any bundled
# algorithm sends at every n >= 1 while staying O(log n) bits.
DEFAULT_MAX_WORDS = 16

DEFAULT_ROUND_CAP_FACTOR = 64


class EngineError(RuntimeError):
    """Raised on engine contract violations."""


class BudgetViolation(EngineError):
    """An oversize or malformed message was sent outside audit mode."""


@dataclass(frozen=True)
class WordBudget:
    """Message-size budget: bits per word and maximum words per message."""

    word_bits: int
    max_words: int = DEFAULT_MAX_WORDS

    def __post_init__(self) -> None:
        if self.word_bits < 1 or self.max_words < 1:
            raise EngineError("word_bits and max_words must be >= 1")

    @classmethod
    def for_graph(cls, n: int, max_words: int = DEFAULT_MAX_WORDS) -> "WordBudget":
        return cls(word_bits=max(1, math.ceil(math.log2(max(n, 2)))), max_words=max_words)


# -- word codec --------------------------------------------------------------


def _oversize(payload, max_words: int, word_limit: int) -> bool:
    if len(payload) > max_words:
        return True
    for w in payload:
        if w < 0 or w >= word_limit:
            return True
    return False


def words_needed(max_value: int, word_bits: int) -> int:
    """Number of words required to carry values in [0, max_value]."""
    if max_value <= 0:
        return 1
    return max(1, math.ceil(max_value.bit_length() / word_bits))


def id_words(word_bits: int) -> int:
    """Words required for a node id; ids are bounded by (2^word_bits)^4."""
    return words_needed((1 << word_bits) ** 4, word_bits)


def pack_fields(word_bits: int, fields: Iterable[tuple[int, int]]) -> tuple[int, ...]:
    """Encode (value, max_value) fields little-endian into fixed-width word groups."""
    out: list[int] = []
    mask = (1 << word_bits) - 1
    for value, max_value in fields:
        if value < 0 or value > max_value:
            raise EngineError(f"field value {value} outside [0, {max_value}]")
        for _ in range(words_needed(max_value, word_bits)):
            out.append(value & mask)
            value >>= word_bits
    return tuple(out)


def unpack_fields(word_bits: int, words: Sequence[int], max_values: Sequence[int]) -> tuple[int, ...]:
    """Inverse of :func:`pack_fields` for the given field maxima."""
    out: list[int] = []
    pos = 0
    for max_value in max_values:
        k = words_needed(max_value, word_bits)
        value = 0
        for j in range(k):
            value |= words[pos + j] << (j * word_bits)
        pos += k
        out.append(value)
    return tuple(out)


# -- contexts and programs ----------------------------------------------------


def node_rng(seed: int, salt: str) -> random.Random:
    """The documented per-node stream derivation; distinct salts give independent streams."""
    return random.Random(f"{seed}|{salt}")


@dataclass
class NodeContext:
    """Static knowledge handed to a node at init time.

    ``n`` and ``max_degree`` are populated only when the program declares
    ``needs_n`` / ``needs_delta``; the message-efficient algorithms run with
    both set to ``None``.  ``word_bits`` is a model constant (message
    framing), not topology knowledge.
    """

    index: int
    node_id: int
    degree: int
    rng: random.Random
    word_bits: int
    max_words: int
    n: int | None = None
    max_degree: int | None = None


class NodeProgram:
    """Per-node state machine driven by the engine.

    Subclasses implement :meth:`init`, :meth:`step` and :meth:`output`.
    ``step`` returns ``(outbox, halted)`` where the outbox maps 1-based ports
    to message tuples.  A program may set ``self.passive = True`` to signal
    that it initiates nothing further; passive nodes are stepped only when a
    message arrives, and the run ends once every node is halted or passive
    with no message in flight.
    """

    needs_n = False
    needs_delta = False

    passive: bool = False
    # A passive node is stepped again no later than this round (scheduled wakeup).
    wake_at: int | None = None

    def init(self, ctx: NodeContext) -> None:  # pragma: no cover - interface
        raise NotImplementedError

    def step(self, rnd: int, inbox: Mapping[int, Message]) -> tuple[dict[int, Message], bool]:
        raise NotImplementedError  # pragma: no cover - interface

    def output(self) -> str:  # pragma: no cover - interface
        raise NotImplementedError


# -- statistics ----------------------------------------------------------------

SIMSTATS_SCHEMA = "congestsim-simstats-1"


@dataclass
class SimStats:
    """Exact accounting for one run."""

    rounds: int
    messages_total: int
    messages_sent: list[int]
    messages_received: list[int]
    messages_by_tag: dict[str, int]
    budget_violations: int
    halted_all: bool
    first_send_by_tag: dict[str, int] = field(default_factory=dict)

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "schema": SIMSTATS_SCHEMA,
            "rounds": self.rounds,
            "messages_total": self.messages_total,
            "messages_by_tag": dict(sorted(self.messages_by_tag.items())),
            "per_node": {
                "sent": list(self.messages_sent),
                "received": list(self.messages_received),
            },
            "budget_violations": self.budget_violations,
            "halted_all": self.halted_all,
            "first_send_by_tag": dict(sorted(self.first_send_by_tag.items())),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())


@dataclass
class RunResult:
    outputs: list[str]
    stats: SimStats
    programs: list[NodeProgram]


# -- the engine ----------------------------------------------------------------


def run(
    graph: Graph,
    program_factory: Callable[[], NodeProgram],
    seed: int,
    budget: WordBudget | None = None,
    round_cap: int | None = None,
    *,
    audit: bool = False,
    message_budget: int | None = None,
    node_salts: Sequence[str] | None = None,
) -> RunResult:
    """Execute ``program_factory()`` instances on every node of ``graph``.

    Within a round all sends are based on the previous round's deliveries;
    delivery is lossless and per-port ordered.  Oversize messages abort the
    run (or are counted, in audit mode).  ``message_budget`` truncates the
    run at the end of the first round in which the total send count reaches
    the budget, which the lower-bound experiments use as an observation
    window.
    """
    n = graph.n
    if budget is None:
        budget = WordBudget.for_graph(n)
    if round_cap is None:
        round_cap = DEFAULT_ROUND_CAP_FACTOR * max(n, 1)
    if round_cap < 1:
        raise EngineError("round_cap must be >= 1")
    if node_salts is not None and len(node_salts) != n:
        raise EngineError("node_salts length must equal node count")

    programs = [program_factory() for _ in range(n)]
    adjacency = graph.adjacency
    peers = graph.peer_ports
    word_limit = 1 << budget.word_bits
    max_words = budget.max_words

    tag_by_port: list[Sequence[str | None]] | None = None
    if graph.edge_tags:
        tag_by_port = [
            [graph.edge_tags.get((v, u) if v < u else (u, v)) for u in adjacency[v]]
            for v in range(n)
        ]

    for v, prog in enumerate(programs):
        ctx = NodeContext(
            index=v,
            node_id=graph.ids[v],
            degree=len(adjacency[v]),
            rng=node_rng(seed, node_salts[v] if node_salts is not None else str(v)),
            word_bits=budget.word_bits,
            max_words=max_words,
            n=n if prog.needs_n else None,
            max_degree=graph.max_degree if prog.needs_delta else None,
        )
        prog.init(ctx)

    inboxes: dict[int, dict[int, Message]] = {}
    halted = [False] * n
    sent = [0] * n
    received = [0] * n
    by_tag: dict[str, int] = {}
    first_by_tag: dict[str, int] = {}
    violations = 0
    messages_total = 0
    send_ordinal = 0
    rounds = 0
    finished = False
    empty: dict[int, Message] = {}

    # Incremental stepping bookkeeping: nodes that run on their own clock,
    # scheduled wakeups of passive nodes, and this round's delivery targets.
    scheduled = set(range(n))
    wake_heap: list[tuple[int, int]] = []
    inbox_nodes: set[int] = set()

    while rounds < round_cap:
        nxt = rounds + 1
        due = set()
        while wake_heap and wake_heap[0][0] <= nxt:
            when, v = heapq.heappop(wake_heap)
            prog = programs[v]
            if not halted[v] and prog.passive and prog.wake_at == when == nxt:
                due.add(v)
        stepping = sorted(v for v in scheduled | inbox_nodes | due if not halted[v])
        if not stepping:
            # Nothing runnable now; fast-forward to the next scheduled wakeup.
            future = None
            while wake_heap:
                when, v = wake_heap[0]
                prog = programs[v]
                if halted[v] or not prog.passive or prog.wake_at != when:
                    heapq.heappop(wake_heap)
                    continue
                future = when
                break
            if future is None:
                finished = True
                break
            rounds = min(future - 1, round_cap)
            continue
        rounds += 1
        next_inboxes: dict[int, dict[int, Message]] = {}
        inbox_nodes = set()
        for v in stepping:
            if halted[v]:
                continue
            prog = programs[v]
            outbox, halt_now = prog.step(rounds, inboxes.get(v, empty))
            if halt_now:
                halted[v] = True
                scheduled.discard(v)
            elif prog.passive:
                scheduled.discard(v)
                if prog.wake_at is not None and prog.wake_at > rounds:
                    heapq.heappush(wake_heap, (prog.wake_at, v))
            else:
                scheduled.add(v)
            if not outbox:
                continue
            nbrs = adjacency[v]
            back = peers[v]
            deg = len(nbrs)
            tags_v = tag_by_port[v] if tag_by_port is not None else None
            if type(outbox) is Broadcast:
                payload = outbox.payload
                if _oversize(payload, max_words, word_limit):
                    violations += len(outbox.ports)
                    if not audit:
                        raise BudgetViolation(
                            f"node {v} sent an oversize message "
                            f"({len(payload)} words) in round {rounds}"
                        )
                count = 0
                if tags_v is None:
                    box_get = next_inboxes.get
                    for port in outbox.ports:
                        if not 1 <= port <= deg:
                            raise EngineError(
                                f"node {v} sent on invalid port {port} in round {rounds}"
                            )
                        count += 1
                        u = nbrs[port - 1]
                        received[u] += 1
                        if halted[u]:
                            continue  # counted, but nobody will read it
                        box = box_get(u)
                        if box is None:
                            box = {}
                            next_inboxes[u] = box
                            inbox_nodes.add(u)
                        box[back[port - 1]] = payload
                else:
                    for port in outbox.ports:
                        if not 1 <= port <= deg:
                            raise EngineError(
                                f"node {v} sent on invalid port {port} in round {rounds}"
                            )
                        count += 1
                        send_ordinal += 1
                        u = nbrs[port - 1]
                        received[u] += 1
                        tag = tags_v[port - 1]
                        if tag is not None:
                            by_tag[tag] = by_tag.get(tag, 0) + 1
                            if tag not in first_by_tag:
                                first_by_tag[tag] = send_ordinal
                        if halted[u]:
                            continue
                        box = next_inboxes.get(u)
                        if box is None:
                            box = {}
                            next_inboxes[u] = box
                            inbox_nodes.add(u)
                        box[back[port - 1]] = payload
                if tags_v is None:
                    send_ordinal += count
                messages_total += count
                sent[v] += count
                continue
            for port, payload in outbox.items():
                if not 1 <= port <= deg:
                    raise EngineError(f"node {v} sent on invalid port {port} in round {rounds}")
                if _oversize(payload, max_words, word_limit):
                    violations += 1
                    if not audit:
                        raise BudgetViolation(
                            f"node {v} sent an oversize message ({len(payload)} words) "
                            f"on port {port} in round {rounds}"
                        )
                send_ordinal += 1
                messages_total += 1
                sent[v] += 1
                u = nbrs[port - 1]
                received[u] += 1
                if tags_v is not None:
                    tag = tags_v[port - 1]
                    if tag is not None:
                        by_tag[tag] = by_tag.get(tag, 0) + 1
                        if tag not in first_by_tag:
                            first_by_tag[tag] = send_ordinal
                if halted[u]:
                    continue
                box = next_inboxes.get(u)
                if box is None:
                    box = {}
                    next_inboxes[u] = box
                    inbox_nodes.add(u)
                box[back[port - 1]] = payload
        inboxes = next_inboxes
        if message_budget is not None and messages_total >= message_budget:
            # Truncation window reached; if the system is already quiescent the
            # run still counts as complete.
            finished = not scheduled and not inbox_nodes and not any(
                not halted[v] and programs[v].passive
                and programs[v].wake_at is not None and programs[v].wake_at > rounds
                for v in range(n)
            )
            break

    stats = SimStats(
        rounds=rounds,
        messages_total=messages_total,
        messages_sent=sent,
        messages_received=received,
        messages_by_tag=by_tag,
        budget_violations=violations,
        halted_all=finished,
        first_send_by_tag=first_by_tag,
    )
    return RunResult(outputs=[p.output() for p in programs], stats=stats, programs=programs)


# -- repeated runs --------------------------------------------------------------


@dataclass
class RunRecord:
    seed: int
    n: int
    m: int
    max_degree: int
    rounds: int
    messages_total: int
    halted_all: bool
    check: Any = None


@dataclass
class ManyResult:
    records: list[RunRecord]
    aggregate: dict[str, float]


def _aggregate(records: Sequence[RunRecord]) -> dict[str, float]:
    rounds = [r.rounds for r in records]
    msgs = [r.messages_total for r in records]
    return {
        "runs": float(len(records)),
        "rounds_mean": statistics.fmean(rounds),
        "rounds_median": float(statistics.median(rounds)),
        "rounds_max": float(max(rounds)),
        "messages_mean": statistics.fmean(msgs),
        "messages_median": float(statistics.median(msgs)),
        "messages_max": float(max(msgs)),
    }


def run_many(
    source: Graph | GraphFamilySpec,
    program_factory: Callable[[], NodeProgram],
    seeds: Sequence[int],
    budget: WordBudget | None = None,
    round_cap: int | None = None,
    *,
    check: Callable[[Graph, RunResult], Any] | None = None,
    message_budget: int | None = None,
    node_salts_fn: Callable[[Graph], Sequence[str]] | None = None,
) -> ManyResult:
    """Independent runs over a seed list; a family spec gets a fresh graph per seed.

    ``check`` is evaluated per run while the graph is alive (e.g. a verifier
    call); its value lands in the record.  Graphs are not retained.
    """
    if not seeds:
        raise EngineError("run_many requires at least one seed")
    records: list[RunRecord] = []
    for i, seed in enumerate(seeds):
        graph = source if isinstance(source, Graph) else source.build(seed=seed)
        try:
            result = run(
                graph,
                program_factory,
                seed,
                budget,
                round_cap,
                message_budget=message_budget,
                node_salts=node_salts_fn(graph) if node_salts_fn is not None else None,
            )
        except EngineError as exc:
            raise EngineError(f"run {i} (seed {seed}) failed: {exc}") from exc
        records.append(
            RunRecord(
                seed=seed,
                n=graph.n,
                m=graph.m,
                max_degree=graph.max_degree,
                rounds=result.stats.rounds,
                messages_total=result.stats.messages_total,
                halted_all=result.stats.halted_all,
                check=check(graph, result) if check is not None else None,
            )
        )
    return ManyResult(records=records, aggregate=_aggregate(records))
