"""Greedy ruling set: locally id-maximal undecided nodes join, waves remove.

One iteration is ``1 + beta`` rounds: an id-exchange round among undecided
members, then ``beta`` rounds of removal-wave flooding.  A node joins when
its id exceeds every id it received; its join announcement doubles as the
first wave hop, and relays inside the arena forward the wave one hop per
round, so a wave hit certifies distance <= beta from a joiner inside the
executed (sub)graph.  Message kinds are fixed by the round position within
the cycle, so payloads carry no type tags.
"""

from __future__ import annotations

import random
from collections.abc import Iterable, Mapping

from ..engine import Broadcast, Message, NodeContext
from .base import PRESENT, SetProgram, pack_id, unpack_id

__all__ = ["GreedyCore", "GreedyRulingSet"]


class GreedyCore:
    """One node's view of GreedyRulingSet(arena, U, beta).

    ``alive_ports`` delimit the executed subgraph (waves travel only between
    alive-flagged nodes); ``in_u`` says whether this node belongs to the
    restriction set.  ``decided`` ends as "IN"/"OUT" for U members; relays
    stay undecided and merely forward.
    """

    def __init__(
        self,
        rng: random.Random,
        node_id: int,
        word_bits: int,
        beta: int,
    ) -> None:
        if beta < 1:
            raise ValueError("beta must be >= 1")
        self.rng = rng
        self.node_id = node_id
        self.word_bits = word_bits
        self.beta = beta
        self.cycle = beta + 1
        self.decided: str | None = None
        self.in_u = False
        self.in_arena = True
        self.alive: set[int] = set()
        self.known_u: set[int] = set()
        self.start = 0
        self.join_cycle: int | None = None
        self.decided_cycle: int | None = None
        self._ids_seen: list[int] = []
        self._forward = False
        self._id_payload: tuple[int, ...] = ()

    def begin(
        self,
        alive_ports: Iterable[int],
        in_u: bool,
        in_arena: bool,
        start_round: int,
    ) -> None:
        self.alive = set(alive_ports)
        self.known_u = set(self.alive)
        self.in_u = in_u
        self.in_arena = in_arena
        self.start = start_round
        self._id_payload = pack_id(self.node_id, self.word_bits)

    def _cycle_index(self, rnd: int) -> int:
        return (rnd - self.start) // self.cycle + 1

    def absorb(self, rnd: int, inbox: Mapping[int, Message]) -> None:
        if not inbox or rnd <= self.start:
            return
        sent_phase = (rnd - 1 - self.start) % self.cycle
        if sent_phase == 0:  # id exchange
            if self.in_u and self.decided is None:
                self._ids_seen = [
                    unpack_id(payload, self.word_bits) for payload in inbox.values()
                ]
                self.known_u &= set(inbox)
            return
        # Everything else is a wave at hop (sent_phase) from its joiner.
        hop = sent_phase
        if self.decided is None and self.in_u:
            self.decided = "OUT"
            self.decided_cycle = self._cycle_index(rnd - 1)
        if hop < self.beta and self.in_arena:
            self._forward = True

    def act(self, rnd: int) -> dict[int, Message]:
        phase = (rnd - self.start) % self.cycle
        if phase == 0:
            self._forward = False
            if self.in_u and self.decided is None:
                self._ids_seen = []
                return Broadcast(self._id_payload, self.known_u)
            return {}
        if phase == 1:
            if self.in_u and self.decided is None:
                if all(self.node_id > other for other in self._ids_seen):
                    self.decided = "IN"
                    self.join_cycle = self._cycle_index(rnd)
                    self.decided_cycle = self.join_cycle
                    return Broadcast(PRESENT, self.alive)
            return {}
        # Wave-forwarding rounds.
        if self._forward:
            self._forward = False
            return Broadcast(PRESENT, self.alive)
        return {}

    @property
    def settled(self) -> bool:
        """True for resolved members and for relays with nothing queued."""
        return (not self.in_u or self.decided is not None) and not self._forward


def _restriction_for(index: int, restriction: frozenset[int] | None) -> bool:
    return restriction is None or index in restriction


class GreedyRulingSet(SetProgram):
    """Standalone greedy program; ``restriction`` limits U (default: all nodes)."""

    def __init__(self, beta: int = 1, restriction: frozenset[int] | None = None) -> None:
        super().__init__()
        self.beta = beta
        self.restriction = restriction

    def init(self, ctx: NodeContext) -> None:
        self.ctx = ctx
        self.core = GreedyCore(ctx.rng, ctx.node_id, ctx.word_bits, self.beta)
        self.core.begin(
            range(1, ctx.degree + 1),
            in_u=_restriction_for(ctx.index, self.restriction),
            in_arena=True,
            start_round=1,
        )
        if not self.core.in_u:
            self.in_set = False

    def step(self, rnd: int, inbox: Mapping[int, Message]) -> tuple[dict[int, Message], bool]:
        self.core.absorb(rnd, inbox)
        outbox = self.core.act(rnd)
        if self.core.settled:
            if self.core.in_u:
                self.in_set = self.core.decided == "IN"
                self.info["join_cycle"] = self.core.join_cycle
                self.info["decided_cycle"] = self.core.decided_cycle
            self.passive = True
        else:
            self.passive = False
        return outbox, False
