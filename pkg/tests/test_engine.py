import statistics

import pytest

from congestsim.engine import (
    BudgetViolation,
    EngineError,
    NodeProgram,
    WordBudget,
    node_rng,
    pack_fields,
    run,
    run_many,
    unpack_fields,
    words_needed,
)
from congestsim.graph import GraphFamilySpec, gen_complete_bipartite, gen_cycle


class HaltImmediately(NodeProgram):
    def init(self, ctx):
        self.ctx = ctx

    def step(self, rnd, inbox):
        return {}, True

    def output(self):
        return "done"


class FloodOnce(NodeProgram):
    """Send one word on every port in round 1, then halt."""

    def init(self, ctx):
        self.ctx = ctx

    def step(self, rnd, inbox):
        return {p: (0,) for p in range(1, self.ctx.degree + 1)}, True

    def output(self):
        return "done"


class Echo(NodeProgram):
    """Node 0 pings on port 1; the peer echoes; both record observation rounds."""

    def init(self, ctx):
        self.ctx = ctx
        self.heard_in = None
        self.halted_in = None

    def step(self, rnd, inbox):
        if inbox and self.heard_in is None:
            self.heard_in = rnd
        if self.ctx.index == 0:
            if rnd == 1:
                return {1: (1,)}, False
            if self.heard_in is not None:
                return {}, True
            return {}, False
        if self.heard_in == rnd:
            return {1: (1,)}, True
        return {}, False

    def output(self):
        return str(self.heard_in)


class RandomReporter(NodeProgram):
    """Draw some randomness and expose it, to pin trace determinism."""

    def init(self, ctx):
        self.ctx = ctx
        self.value = None

    def step(self, rnd, inbox):
        self.value = self.ctx.rng.random()
        send = {1: (1,)} if self.ctx.degree >= 1 and self.ctx.rng.random() < 0.5 else {}
        return send, rnd >= 3

    def output(self):
        return f"{self.value:.12f}"


class OversizeSender(NodeProgram):
    def init(self, ctx):
        self.ctx = ctx

    def step(self, rnd, inbox):
        payload = tuple(0 for _ in range(self.ctx.max_words + 1))
        return {1: payload}, True

    def output(self):
        return "done"


class WordOverflowSender(NodeProgram):
    def init(self, ctx):
        self.ctx = ctx

    def step(self, rnd, inbox):
        return {1: (1 << self.ctx.word_bits,)}, True

    def output(self):
        return "done"


def test_codec_round_trip():
    wb = 3
    fields = [(5, 7), (123, 4095), (0, 1)]
    words = pack_fields(wb, fields)
    assert all(0 <= w < 8 for w in words)
    assert unpack_fields(wb, words, [mx for _, mx in fields]) == (5, 123, 0)
    assert words_needed(7, 3) == 1
    assert words_needed(8, 3) == 2


def test_halt_immediately_consumes_one_round():
    g = gen_cycle(4, seed=0)
    res = run(g, HaltImmediately, seed=1)
    assert res.stats.rounds == 1
    assert res.stats.messages_total == 0
    assert res.stats.halted_all


def test_flood_once_counts_directed_edges():
    g = gen_complete_bipartite(2, 2, seed=0)
    res = run(g, FloodOnce, seed=1)
    assert res.stats.messages_total == 2 * g.m == 8
    assert res.stats.messages_sent == [2, 2, 2, 2]
    assert res.stats.messages_received == [2, 2, 2, 2]


def test_determinism_same_seed_same_trace():
    g = gen_cycle(10, seed=4)
    a = run(g, RandomReporter, seed=99)
    b = run(g, RandomReporter, seed=99)
    assert a.outputs == b.outputs
    assert a.stats == b.stats
    c = run(g, RandomReporter, seed=100)
    assert c.outputs != a.outputs


def test_synchrony_one_round_delivery_delay():
    # Two nodes joined by one edge: ping sent in round 1 is seen in round 2,
    # echo sent in round 2 is seen in round 3.
    g = gen_complete_bipartite(1, 1, seed=0)
    res = run(g, Echo, seed=5)
    ping_side = 0 if res.programs[0].ctx.index == 0 else 1
    assert res.programs[1 - ping_side].heard_in == 2
    assert res.programs[ping_side].heard_in == 3


def test_conservation_on_random_program():
    g = gen_cycle(12, seed=2)
    res = run(g, RandomReporter, seed=3)
    assert sum(res.stats.messages_sent) == res.stats.messages_total
    assert sum(res.stats.messages_received) == res.stats.messages_total


def test_oversize_message_aborts_with_context():
    g = gen_cycle(4, seed=0)
    with pytest.raises(BudgetViolation) as err:
        run(g, OversizeSender, seed=1)
    assert "round 1" in str(err.value)


def test_word_overflow_aborts():
    g = gen_cycle(4, seed=0)
    with pytest.raises(BudgetViolation):
        run(g, WordOverflowSender, seed=1)


def test_audit_mode_counts_instead_of_aborting():
    g = gen_cycle(4, seed=0)
    res = run(g, OversizeSender, seed=1, audit=True)
    assert res.stats.budget_violations == 4
    assert res.stats.halted_all


def test_round_cap_reports_timeout():
    class Spinner(NodeProgram):
        def init(self, ctx):
            self.ctx = ctx

        def step(self, rnd, inbox):
            return {}, False

        def output(self):
            return "spin"

    g = gen_cycle(3, seed=0)
    res = run(g, Spinner, seed=1, round_cap=5)
    assert res.stats.rounds == 5
    assert not res.stats.halted_all


def test_node_streams_are_distinct_and_reproducible():
    r0 = node_rng(7, "0")
    r0b = node_rng(7, "0")
    r1 = node_rng(7, "1")
    xs = [r0.random() for _ in range(400)]
    assert xs == [r0b.random() for _ in range(400)]
    ys = [r1.random() for _ in range(400)]
    assert xs != ys
    corr = statistics.correlation(xs, ys)
    assert abs(corr) < 0.2


def test_stats_json_schema_fields():
    g = gen_cycle(3, seed=0)
    res = run(g, FloodOnce, seed=1)
    payload = res.stats.to_json_dict()
    for key in ("rounds", "messages_total", "messages_by_tag", "per_node",
                "budget_violations", "halted_all"):
        assert key in payload


def test_run_many_fixed_graph_deterministic_program():
    g = gen_cycle(5, seed=1)
    many = run_many(g, FloodOnce, seeds=[1, 2, 3])
    assert len(many.records) == 3
    assert len({r.messages_total for r in many.records}) == 1
    assert many.aggregate["rounds_max"] == 1.0


def test_run_many_family_spec_builds_fresh_graphs():
    spec = GraphFamilySpec("gnp", {"n": 32, "p": 0.2}, seed=0)
    many = run_many(spec, FloodOnce, seeds=[10, 11])
    ms = {r.m for r in many.records}
    assert len(ms) == 2  # different seeds, different graphs (overwhelmingly)


def test_run_many_rejects_empty_seed_list():
    g = gen_cycle(4, seed=0)
    with pytest.raises(EngineError):
        run_many(g, FloodOnce, seeds=[])


def test_word_budget_validation():
    with pytest.raises(EngineError):
        WordBudget(word_bits=0)
    assert WordBudget.for_graph(1024).word_bits == 10
