"""Randomized MIS by repeated marking, the baseline symmetry breaker.

Each iteration spans three rounds: undecided nodes mark themselves with
probability 1/(2 * current degree) and announce (degree, id) to their live
neighbours; a marked node unmarks when some marked neighbour has an equal or
higher degree (ties broken towards the higher id) and otherwise joins the
independent set and announces it; neighbours of joiners drop out and tell
their own neighbours to forget them.  Degrees are degrees in the shrinking
residual graph.  No global knowledge is used.
"""

from __future__ import annotations

import random
from collections.abc import Iterable, Mapping

from ..engine import Broadcast, Message, NodeContext, pack_fields, unpack_fields
from .base import PRESENT, SetProgram, id_field_max

__all__ = ["LubyCore", "LubyMIS"]


class LubyCore:
    """One node's view of the marking algorithm, restartable on a port subset.

    ``begin`` fixes the start round and the live ports (the induced subgraph
    the algorithm runs on).  Callers route inbox payloads through ``absorb``
    and collect sends from ``act``; ``decided`` becomes "IN" or "OUT".
    """

    def __init__(self, rng: random.Random, node_id: int, word_bits: int) -> None:
        self.rng = rng
        self.node_id = node_id
        self.word_bits = word_bits
        self._id_max = id_field_max(word_bits)
        self._deg_max = (1 << word_bits) - 1
        self.decided: str | None = None
        self.marked = False
        self.alive: set[int] = set()
        self.start = 0
        self.joined_round: int | None = None
        self.announce_leave = False

    def begin(self, alive_ports: Iterable[int], start_round: int) -> None:
        self.alive = set(alive_ports)
        self.start = start_round

    def absorb(self, rnd: int, inbox: Mapping[int, Message]) -> None:
        if not inbox or rnd <= self.start:
            return
        sent_phase = (rnd - 1 - self.start) % 3
        if sent_phase == 0:  # mark announcements
            if self.decided is None and self.marked:
                mine = (len(self.alive), self.node_id)
                for port, payload in inbox.items():
                    if port not in self.alive:
                        continue
                    deg, nid = unpack_fields(
                        self.word_bits, payload, [self._deg_max, self._id_max]
                    )
                    if (deg, nid) > mine:
                        self.marked = False
                        break
        elif sent_phase == 1:  # join announcements
            for port in inbox:
                if port in self.alive:
                    self.alive.discard(port)
                    if self.decided is None:
                        self.decided = "OUT"
                        self.announce_leave = True
        else:  # leave announcements
            for port in inbox:
                self.alive.discard(port)

    def act(self, rnd: int) -> dict[int, Message]:
        phase = (rnd - self.start) % 3
        if phase == 0:
            if self.decided is not None:
                return {}
            deg = len(self.alive)
            if deg == 0:
                self.decided = "IN"
                self.joined_round = rnd
                return {}
            self.marked = self.rng.random() < 1.0 / (2.0 * deg)
            if not self.marked:
                return {}
            payload = pack_fields(
                self.word_bits, [(deg, self._deg_max), (self.node_id, self._id_max)]
            )
            return Broadcast(payload, self.alive)
        if phase == 1:
            if self.decided is None and self.marked:
                self.decided = "IN"
                self.joined_round = rnd
                return Broadcast(PRESENT, self.alive)
            return {}
        # phase 2: nodes knocked out in this iteration withdraw
        if self.announce_leave:
            self.announce_leave = False
            return Broadcast(PRESENT, self.alive)
        return {}

    @property
    def done(self) -> bool:
        return self.decided is not None and not self.announce_leave


class LubyMIS(SetProgram):
    """Marking MIS on the whole graph."""

    def init(self, ctx: NodeContext) -> None:
        self.ctx = ctx
        self.core = LubyCore(ctx.rng, ctx.node_id, ctx.word_bits)
        self.core.begin(range(1, ctx.degree + 1), start_round=1)

    def step(self, rnd: int, inbox: Mapping[int, Message]) -> tuple[dict[int, Message], bool]:
        self.core.absorb(rnd, inbox)
        outbox = self.core.act(rnd)
        if self.core.done:
            # Nothing ever queries an MIS node, so halt as soon as the final
            # announcement is on the wire (the halting step's outbox is sent).
            self.in_set = self.core.decided == "IN"
            self.info.setdefault("decided_round", rnd)
            self.passive = True
        return outbox, self.core.done
