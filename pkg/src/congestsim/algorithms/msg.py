"""Message-frugal 2-ruling set, and the fast high-degree-sampling variant.

The frugal algorithm classifies every node as CATEGORY_1 (ruling set),
CATEGORY_2 (neighbour of it), or CATEGORY_3 (neighbour of CATEGORY_2 with no
CATEGORY_1 neighbour).  Decided nodes never initiate; only undecided nodes
spend messages, and only when marked, which happens with probability
1/(2 d(v)) against the *original* degree.  A marked node first probes
ceil(4 log2 d(v)) random neighbours (with replacement) for CATEGORY_2
status and bows out as CATEGORY_3 on a hit; otherwise it broadcasts
(marked, d(v)) to all neighbours, unmarks when it hears an equal or higher
degree, and joins otherwise, announcing the fact.  Everyone keeps answering
probes forever, which costs nothing unless asked.

One phase spans four rounds: (1) absorb join announcements, mark, send
probes; (2) answer probes; (3) act on probe replies or broadcast; (4)
resolve broadcasts and announce joins.

The fast variant activates low-degree nodes outright and high-degree nodes
with probability 2 log2(n)/sqrt(n), then runs the marking MIS among active
nodes; the inactive rest is dominated with high probability.
"""

from __future__ import annotations

import math
from collections.abc import Mapping

from ..engine import Broadcast, Message, NodeContext, pack_fields, unpack_fields
from .base import PRESENT, SetProgram, safe_log2
from .luby import LubyCore

__all__ = ["MsgEfficientTwoRulingSet", "FastTwoRulingSet"]

UNDECIDED = "UNDECIDED"
CATEGORY_1 = "CATEGORY_1"
CATEGORY_2 = "CATEGORY_2"
CATEGORY_3 = "CATEGORY_3"

_LABEL_CODE = {UNDECIDED: 0, CATEGORY_1: 1, CATEGORY_2: 2, CATEGORY_3: 3}


class MsgEfficientTwoRulingSet(SetProgram):
    """Category-labelling 2-ruling set; needs no global knowledge."""

    def init(self, ctx: NodeContext) -> None:
        self.ctx = ctx
        self.status = UNDECIDED
        self.decided_round: int | None = None
        self.marked = False
        self.probing = False
        self.next_mark_round: int | None = None
        self.sample_count = (
            math.ceil(4 * math.log2(ctx.degree)) if ctx.degree >= 2 else 0
        )
        self.sends_after_decision = 0  # audited invariant: stays 0
        if ctx.degree == 0:
            self.status = CATEGORY_1
            self.in_set = True
            self.decided_round = 1

    def _draw_mark_round(self, rnd: int) -> int:
        # Number of unmarked phases before the next mark is geometric, which
        # matches independent per-phase marking draws and lets the node sleep
        # in between.
        p = 1.0 / (2.0 * self.ctx.degree)
        u = self.ctx.rng.random()
        gap = 0 if u < p else math.floor(math.log1p(-u) / math.log1p(-p))
        return rnd + 4 * gap

    def _decide(self, status: str, rnd: int) -> None:
        if self.status == UNDECIDED:
            self.decided_round = rnd
        self.status = status
        self.in_set = status == CATEGORY_1
        self.passive = True
        self.wake_at = None

    def step(self, rnd: int, inbox: Mapping[int, Message]) -> tuple[dict[int, Message], bool]:
        ctx = self.ctx
        if ctx.degree == 0:
            return {}, True
        offset = (rnd - 1) % 4
        outbox: dict[int, Message] = {}
        if offset == 0:
            # Join announcements from the previous phase arrive here.
            if inbox:
                # Hearing from the ruling set makes (or keeps) a node CATEGORY_2,
                # even one that had already settled for CATEGORY_3.
                if self.status in (UNDECIDED, CATEGORY_3):
                    self._decide(CATEGORY_2, rnd)
            if self.status == UNDECIDED:
                if self.next_mark_round is None:
                    self.next_mark_round = self._draw_mark_round(rnd)
                self.marked = rnd == self.next_mark_round
                self.probing = False
                if self.marked:
                    self.next_mark_round = None
                    if self.sample_count > 0:
                        ports = {
                            ctx.rng.randrange(1, ctx.degree + 1)
                            for _ in range(self.sample_count)
                        }
                        self.probing = True
                        outbox = {p: PRESENT for p in ports}
        elif offset == 1:
            # Everyone answers probes, decided or not.
            if inbox:
                reply = pack_fields(ctx.word_bits, [(_LABEL_CODE[self.status], 3)])
                outbox = {p: reply for p in inbox}
        elif offset == 2:
            if self.status == UNDECIDED and self.marked:
                if self.probing:
                    labels = {
                        unpack_fields(ctx.word_bits, payload, [3])[0]
                        for payload in inbox.values()
                    }
                    if _LABEL_CODE[CATEGORY_2] in labels:
                        self._decide(CATEGORY_3, rnd)
                        self.marked = False
                if self.marked:
                    degree_word = pack_fields(
                        ctx.word_bits, [(ctx.degree, (1 << ctx.word_bits) - 1)]
                    )
                    outbox = Broadcast(degree_word, range(1, ctx.degree + 1))
        else:
            if self.status == UNDECIDED and self.marked:
                my_degree = ctx.degree
                for payload in inbox.values():
                    (other,) = unpack_fields(
                        ctx.word_bits, payload, [(1 << ctx.word_bits) - 1]
                    )
                    if other >= my_degree:
                        self.marked = False
                        break
                if self.marked:
                    self.marked = False
                    self._decide(CATEGORY_1, rnd)
                    outbox = Broadcast(PRESENT, range(1, ctx.degree + 1))
        if outbox and self.status != UNDECIDED and offset != 1:
            # Only probe replies are allowed after a node has decided.
            if not (offset == 3 and self.status == CATEGORY_1 and self.decided_round == rnd):
                self.sends_after_decision += 1
        if self.status == UNDECIDED:
            # Sleep through phases in which this node cannot mark.
            if self.marked or self.next_mark_round is None:
                self.passive = False
                self.wake_at = None
            else:
                self.passive = True
                self.wake_at = self.next_mark_round
        return outbox, False

    def output(self) -> str:
        return self.status


class FastTwoRulingSet(SetProgram):
    """Activate by degree threshold, then marking MIS among the active set."""

    needs_n = True

    def init(self, ctx: NodeContext) -> None:
        self.ctx = ctx
        self.active = False
        self.core: LubyCore | None = None

    def step(self, rnd: int, inbox: Mapping[int, Message]) -> tuple[dict[int, Message], bool]:
        ctx = self.ctx
        if rnd == 1:
            root_n = math.sqrt(ctx.n)
            if ctx.degree < root_n:
                self.active = True
            else:
                self.active = ctx.rng.random() < 2.0 * safe_log2(ctx.n) / root_n
            if not self.active:
                self.in_set = False
                self.passive = True
                return {}, False
            return Broadcast(PRESENT, range(1, ctx.degree + 1)), False
        if not self.active:
            return {}, True  # dominated bystander; nothing arrives for it
        if rnd == 2:
            self.core = LubyCore(ctx.rng, ctx.node_id, ctx.word_bits)
            self.core.begin(set(inbox), start_round=2)
            inbox = {}
        core = self.core
        core.absorb(rnd, inbox)
        outbox = core.act(rnd)
        if core.done:
            self.in_set = core.decided == "IN"
            self.passive = True
        return outbox, core.done
