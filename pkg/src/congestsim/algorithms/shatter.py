"""First phase of the dynamic-probability MIS process.

Every undecided node keeps a desire level p = 2^-e, starting at 1/2.  Each
iteration (4 rounds) it announces p to live neighbours, marks itself with
probability p, joins the independent set when marked with no marked
neighbour, and halves p when the neighbourhood desire sum is at least 2
(otherwise doubles it, capped at 1/2).  Joiners and their neighbours leave.
Independence of the produced set is unconditional; how much of the graph
gets decided within the iteration budget is the statistical contract.
"""

from __future__ import annotations

import math
import random
from collections.abc import Iterable, Mapping

from ..engine import Broadcast, Message, NodeContext, pack_fields, unpack_fields
from .base import PRESENT, SetProgram

__all__ = ["ShatterCore", "ShatterPhase", "shatter_round_count"]

ROUNDS_PER_ITERATION = 4


def shatter_round_count(iterations: int) -> int:
    """Rounds consumed including the final leave-flush round."""
    return ROUNDS_PER_ITERATION * iterations + 1


class ShatterCore:
    """One node's view of the phase; ``decided`` ends as "IN", "OUT", or None."""

    def __init__(self, rng: random.Random, word_bits: int, iterations: int) -> None:
        self.rng = rng
        self.word_bits = word_bits
        self.iterations = iterations
        self.exp = 1  # desire level 2^-exp
        self.exp_cap = iterations + 1
        self.decided: str | None = None
        self.marked = False
        self.alive: set[int] = set()
        self.start = 1
        self._neighbor_marked = False
        self._desire_sum = 0.0
        self._announce_leave = False
        self.decided_iteration: int | None = None

    def begin(self, alive_ports: Iterable[int], start_round: int) -> None:
        self.alive = set(alive_ports)
        self.start = start_round

    def _iteration(self, rnd: int) -> int:
        return (rnd - self.start) // ROUNDS_PER_ITERATION + 1

    def absorb(self, rnd: int, inbox: Mapping[int, Message]) -> None:
        if not inbox or rnd <= self.start:
            return
        sent_phase = (rnd - 1 - self.start) % ROUNDS_PER_ITERATION
        if sent_phase == 0:  # desire levels
            total = 0.0
            for port, payload in inbox.items():
                if port in self.alive:
                    (e,) = unpack_fields(self.word_bits, payload, [self.exp_cap])
                    total += 2.0 ** (-e)
            self._desire_sum = total
        elif sent_phase == 1:  # marks
            self._neighbor_marked = any(p in self.alive for p in inbox)
        elif sent_phase == 2:  # joins
            hit = False
            for port in inbox:
                if port in self.alive:
                    self.alive.discard(port)
                    hit = True
            if hit and self.decided is None:
                self.decided = "OUT"
                self.decided_iteration = self._iteration(rnd - 1)
                self._announce_leave = True
        else:  # leaves
            for port in inbox:
                self.alive.discard(port)

    def act(self, rnd: int) -> dict[int, Message]:
        offset = rnd - self.start
        if offset >= ROUNDS_PER_ITERATION * self.iterations:
            return {}
        phase = offset % ROUNDS_PER_ITERATION
        if phase == 0:
            self._desire_sum = 0.0
            self._neighbor_marked = False
            if self.decided is None and self.alive:
                payload = pack_fields(self.word_bits, [(self.exp, self.exp_cap)])
                return Broadcast(payload, self.alive)
            return {}
        if phase == 1:
            if self.decided is not None:
                return {}
            self.marked = self.rng.random() < 2.0 ** (-self.exp)
            # Desire update for the next iteration, from this round's sums.
            if self._desire_sum >= 2.0:
                self.exp = min(self.exp + 1, self.exp_cap)
            else:
                self.exp = max(self.exp - 1, 1)
            if self.marked and self.alive:
                return Broadcast(PRESENT, self.alive)
            return {}
        if phase == 2:
            if self.decided is None and self.marked and not self._neighbor_marked:
                self.decided = "IN"
                self.decided_iteration = self._iteration(rnd)
                if self.alive:
                    return Broadcast(PRESENT, self.alive)
            return {}
        if self._announce_leave:
            self._announce_leave = False
            return Broadcast(PRESENT, self.alive)
        return {}

    @property
    def finished_at(self) -> int:
        return self.start + ROUNDS_PER_ITERATION * self.iterations


class ShatterPhase(SetProgram):
    """Standalone phase-1 program; undecided nodes report UNDECIDED."""

    needs_delta = True

    def __init__(self, iterations: int | None = None, c_ghaffari: int = 8) -> None:
        super().__init__()
        self.iterations = iterations
        self.c_ghaffari = c_ghaffari

    def init(self, ctx: NodeContext) -> None:
        self.ctx = ctx
        iters = self.iterations
        if iters is None:
            spread = max(1, math.ceil(math.log2(max(ctx.max_degree or 1, 2))))
            iters = self.c_ghaffari * spread
        self.core = ShatterCore(ctx.rng, ctx.word_bits, iters)
        self.core.begin(range(1, ctx.degree + 1), start_round=1)

    def step(self, rnd: int, inbox: Mapping[int, Message]) -> tuple[dict[int, Message], bool]:
        self.core.absorb(rnd, inbox)
        outbox = self.core.act(rnd)
        finished = rnd >= self.core.finished_at
        if self.core.decided is not None or finished:
            if self.core.decided is not None:
                self.in_set = self.core.decided == "IN"
                self.info.setdefault("decided_iteration", self.core.decided_iteration)
            self.passive = True
        return outbox, finished and not outbox and not self.core._announce_leave
