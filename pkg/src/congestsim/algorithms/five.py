"""5-ruling set: sparsify, shatter with the dynamic-probability phase, sweep up.

Three fixed-boundary stages on a schedule computable from (n, Delta):
sparsify with f = 2^sqrt(log2 n) dominates the graph within one hop; the
dynamic-probability phase runs ~c * log2(induced degree bound) iterations on
the dominating set and decides most of it; the survivors are finished by the
greedy ruling set with removal radius 4 inside the dominating subgraph.
Joiners of the greedy stage are never adjacent to the shattering stage's
independent set because survivors exclude its neighbourhood, so the union
stays independent and every node ends within five hops of it.
"""

from __future__ import annotations

import math
from collections.abc import Mapping

from ..engine import Message, NodeContext
from .base import SetProgram, safe_log2
from .shatter import ShatterCore, shatter_round_count
from .greedy import GreedyCore
from .sparsify import SparsifyCore, sparsify_degree_bound, sparsify_round_count

__all__ = ["FiveRulingSet"]


class FiveRulingSet(SetProgram):
    needs_n = True
    needs_delta = True

    def __init__(self, c_ghaffari: int = 8, c_sparsify: float = 4.0) -> None:
        super().__init__()
        self.c_ghaffari = c_ghaffari
        self.c_sparsify = c_sparsify

    def init(self, ctx: NodeContext) -> None:
        self.ctx = ctx
        log_n = safe_log2(ctx.n)
        self.f = 2.0 ** math.sqrt(log_n)
        self.sparsifier = SparsifyCore(ctx.rng, ctx.degree, ctx.n, ctx.max_degree, self.f)
        self.sparsifier.begin(1)
        self.shatter_start = sparsify_round_count(ctx.max_degree, self.f)
        bound = max(
            2.0, min(sparsify_degree_bound(ctx.n, self.f, self.c_sparsify), ctx.max_degree)
        )
        self.iterations = self.c_ghaffari * max(1, math.ceil(math.log2(bound)))
        self.sweep_start = self.shatter_start + shatter_round_count(self.iterations) - 1
        self.shatter: ShatterCore | None = None
        self.sweeper: GreedyCore | None = None

    def step(self, rnd: int, inbox: Mapping[int, Message]) -> tuple[dict[int, Message], bool]:
        ctx = self.ctx
        if rnd < self.shatter_start:
            self.sparsifier.absorb(rnd, inbox)
            return self.sparsifier.act(rnd), False
        if rnd == self.shatter_start:
            self.sparsifier.absorb(rnd, inbox)
            if not self.sparsifier.in_s:
                self.in_set = False  # dominated by the set within one hop
                self.passive = True
                return {}, False
            self.shatter = ShatterCore(ctx.rng, ctx.word_bits, self.iterations)
            self.shatter.begin(set(self.sparsifier.s_ports), self.shatter_start)
            inbox = {}
        if self.shatter is None:
            self.passive = True
            return {}, False
        if rnd < self.sweep_start:
            self.shatter.absorb(rnd, inbox)
            outbox = self.shatter.act(rnd)
            if self.shatter.decided is not None and rnd + 1 < self.sweep_start:
                self.passive = True
                self.wake_at = self.sweep_start
            else:
                self.passive = False
            return outbox, False
        if rnd == self.sweep_start:
            self.shatter.absorb(rnd, inbox)
            self.sweeper = GreedyCore(ctx.rng, ctx.node_id, ctx.word_bits, beta=4)
            self.sweeper.begin(
                set(self.sparsifier.s_ports),
                in_u=self.shatter.decided is None,
                in_arena=True,
                start_round=self.sweep_start,
            )
            inbox = {}
        sweeper = self.sweeper
        sweeper.absorb(rnd, inbox)
        outbox = sweeper.act(rnd)
        if sweeper.settled:
            if sweeper.in_u:
                self.in_set = sweeper.decided == "IN"
                self.info["sweep_cycle"] = sweeper.decided_cycle
            else:
                self.in_set = self.shatter.decided == "IN"
            self.passive = True
            self.wake_at = None
        else:
            self.passive = False
            self.wake_at = None
        return outbox, False
