"""Degree sparsification: a dominating set S whose induced degree is small.

Stages sweep thresholds theta_i = Delta / f^i downward; at stage i every
still-uncovered node whose uncovered-degree is at least theta_i joins S with
probability ~ f * log2(n) / theta_{i-1}, and joiners announce themselves so
coverage and uncovered-degrees stay current.  A final sweep puts every node
that is still uncovered into S, which makes domination unconditional; the
induced-degree bound O(f log n) is a with-high-probability contract checked
statistically.
"""

from __future__ import annotations

import math
import random
from collections.abc import Mapping

from ..engine import Broadcast, Message, NodeContext
from .base import PRESENT, SetProgram, safe_log2

__all__ = ["SparsifyCore", "Sparsify", "sparsify_round_count", "sparsify_degree_bound"]

DEFAULT_MARK_CONSTANT = 2.0


def sparsify_stage_count(max_degree: int, f: float) -> int:
    if max_degree <= 1:
        return 0
    return math.ceil(math.log(max_degree, f))


def sparsify_round_count(max_degree: int, f: float) -> int:
    """Rounds consumed: two per stage, one join sweep, one settling round."""
    return 2 * sparsify_stage_count(max_degree, f) + 2


def sparsify_degree_bound(n: int, f: float, c_sparsify: float = 4.0) -> float:
    """The contract bound c * f * log2 n on the induced maximum degree."""
    return c_sparsify * f * safe_log2(n)


class SparsifyCore:
    """One node's view of the staged sparsification.

    Stage i occupies rounds (2i-1, 2i) relative to ``start``: joins are drawn
    and announced in the first round, fresh coverage is announced in the
    second.  Membership is final after round ``sparsify_round_count`` - 1;
    the last round only absorbs the sweep announcements.
    """

    def __init__(
        self,
        rng: random.Random,
        degree: int,
        n: int,
        max_degree: int,
        f: float,
        mark_constant: float = DEFAULT_MARK_CONSTANT,
    ) -> None:
        if f < 2:
            raise ValueError("sparsify requires f >= 2")
        self.rng = rng
        self.degree = degree
        self.n = n
        self.max_degree = max_degree
        self.f = f
        self.mark_constant = mark_constant
        self.stages = sparsify_stage_count(max_degree, f)
        self.length = sparsify_round_count(max_degree, f)
        self.start = 1
        self.in_s = False
        self.covered = False
        self._announce_join = False
        self._announce_covered = False
        self.uncovered_deg = degree
        self.s_ports: set[int] = set()

    def begin(self, start_round: int) -> None:
        self.start = start_round

    def absorb(self, rnd: int, inbox: Mapping[int, Message]) -> None:
        if not inbox or rnd <= self.start:
            return
        offset = rnd - 1 - self.start  # phase the messages were sent in
        if offset % 2 == 0:  # join announcements
            for port in inbox:
                self.s_ports.add(port)
                self.uncovered_deg -= 1
                if not self.covered:
                    self.covered = True
                    if not self.in_s:
                        self._announce_covered = True
        else:  # covered announcements
            self.uncovered_deg -= len(inbox)

    def act(self, rnd: int) -> dict[int, Message]:
        offset = rnd - self.start
        if offset >= self.length - 1:
            return {}
        if offset % 2 == 1:
            # Second stage round: freshly covered nodes withdraw from degree counts.
            if self._announce_covered:
                self._announce_covered = False
                return Broadcast(PRESENT, range(1, self.degree + 1))
            return {}
        stage = offset // 2 + 1
        if self.in_s or self.covered:
            return {}
        if stage <= self.stages:
            theta = self.max_degree / (self.f**stage)
            if self.uncovered_deg < theta:
                return {}
            prev_theta = self.max_degree / (self.f ** (stage - 1))
            p = min(1.0, self.mark_constant * self.f * safe_log2(self.n) / prev_theta)
            if self.rng.random() >= p:
                return {}
        # Past the last stage this is the unconditional sweep.
        self.in_s = True
        self.covered = True
        return Broadcast(PRESENT, range(1, self.degree + 1))

    @property
    def done(self) -> bool:
        return not self._announce_covered


class Sparsify(SetProgram):
    """Standalone sparsify program; the result set is S."""

    needs_n = True
    needs_delta = True

    def __init__(self, f: float | None = None, mark_constant: float = DEFAULT_MARK_CONSTANT) -> None:
        super().__init__()
        self.f = f
        self.mark_constant = mark_constant

    def init(self, ctx: NodeContext) -> None:
        self.ctx = ctx
        f = self.f if self.f is not None else 2.0 ** math.ceil(math.sqrt(safe_log2(ctx.n)))
        self.core = SparsifyCore(
            ctx.rng, ctx.degree, ctx.n, ctx.max_degree, f, self.mark_constant
        )
        self.core.begin(1)

    def step(self, rnd: int, inbox: Mapping[int, Message]) -> tuple[dict[int, Message], bool]:
        self.core.absorb(rnd, inbox)
        outbox = self.core.act(rnd)
        finished = rnd - self.core.start >= self.core.length - 1
        if finished:
            self.in_set = self.core.in_s
            self.passive = True
        return outbox, finished and not outbox
