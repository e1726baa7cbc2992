"""Time-efficient 2-ruling set by degree scales, and its 3-ruling-set wrapper.

The schedule has two parts, both computable by every node from (n, Delta):

Part 1 walks scales t = 1..T with degree targets Delta_t = Delta / 2^(t-1).
Each of the ceil(c * log^(1/2+eps) n) iterations of a scale takes two rounds:
undecided nodes mark themselves with probability 1/(Delta_t * log^eps n) and
announce; unmarked nodes hearing a mark step aside into the buffer set of the
iteration and announce their exit.  After the iterations, undecided nodes
with at least Delta_t/2 undecided neighbours enter the scale's bad set.  The
buffer rule guarantees no undecided node stays adjacent to a marked set,
which is what later lets all marked sets run their greedy MIS in parallel.

Part 2 resolves every marked set (greedy MIS, removal radius 1, inside the
subgraph of nodes undecided at its scale) and every bad set (greedy with
radius 2) concurrently on a common three-round cycle: id exchange, join plus
first wave hop, wave forwarding.  Wave payloads carry a per-scale bitmask so
one relay message serves all scales at once; relays forward a scale's wave
only while they belonged to that scale's subgraph, keeping removal distances
inside it.  Nodes left undecided after the last scale have no undecided
neighbours; they join the output exactly when no neighbour ends up in it.

If Delta exceeds 2^sqrt(log2 n) the whole computation is delegated to the
marking MIS, whose output is also a valid 2-ruling set.
"""

from __future__ import annotations

import math
import random
from collections.abc import Mapping

from ..engine import Broadcast, Message, NodeContext, pack_fields, unpack_fields
from .base import PRESENT, SetProgram, id_field_max, safe_log2
from .luby import LubyCore
from .sparsify import SparsifyCore, sparsify_degree_bound, sparsify_round_count

__all__ = [
    "ScalesCore",
    "TwoRulingSet",
    "ThreeRulingSet",
    "scales_delegates_to_marking",
    "greedy_call_lengths",
]

DEFAULT_EPS = 0.25
DEFAULT_EPS_THREE = 0.15  # composition requires eps < 1/6
DEFAULT_C_ITER = 16

# Part-2 wire kinds.
_KIND_ID = 0
_KIND_NOT_IN = 1
_KIND_JOIN_WAVE = 2
_KIND_JOIN = 3
_KIND_WAVE = 4
_KIND_MAX = 4


class AlgorithmInvariantError(RuntimeError):
    """A structural self-check of the scales machinery failed."""


def scales_delegates_to_marking(n: int, delta: int) -> bool:
    return delta > 2.0 ** math.sqrt(safe_log2(n))


def _scale_count(delta: int) -> int:
    return max(1, math.ceil(math.log2(delta))) if delta >= 2 else 1


class ScalesCore:
    """One node's view of the scales algorithm on an arena (port subset)."""

    def __init__(
        self,
        rng: random.Random,
        node_id: int,
        word_bits: int,
        n_param: int,
        delta_param: int,
        eps: float,
        c_iter: int,
    ) -> None:
        self.rng = rng
        self.node_id = node_id
        self.word_bits = word_bits
        self.n_param = n_param
        self.delta = delta_param
        self.eps = eps
        log_n = safe_log2(n_param)
        self.scales = _scale_count(delta_param)
        if self.scales > word_bits:
            raise AlgorithmInvariantError("scale bitmask exceeds the word size")
        self.iters = math.ceil(c_iter * log_n ** (0.5 + eps))
        self.scale_len = 2 * self.iters + 1
        self.part1_len = self.scales * self.scale_len
        self.log_eps = log_n**eps
        self._id_max = id_field_max(word_bits)
        self._mask_max = (1 << word_bits) - 1

        self.start = 1
        self.alive: set[int] = set()
        # Node status: "S" while undecided; then one of M/W/B/LEFTOVER.
        self.kind: str = "S"
        self.scale = 0  # scale of the M/W/B decision (1-based)
        self.iteration = 0  # iteration of an M/W decision
        self.in_i: bool | None = None
        self.last_scale_in_s = self.scales + 1  # in S_t iff t <= this

        self.s_ports: set[int] = set()
        self.port_kind: dict[int, tuple] = {}  # port -> ("W",)|("M",t,i)|("B",t)
        self.port_final: dict[int, bool] = {}  # port -> ended in the output set?

        self.in_u = False
        self.known_u: set[int] | None = None
        self._ids_seen: list[int] = []
        self._mark_seen = False
        self._pending_not_in = False
        self._forward_mask = 0
        self._next_mark: int | None = None  # absolute round of the next mark
        self.resolve_cycle: int | None = None
        self.join_cycle: int | None = None

    # -- wiring -----------------------------------------------------------

    def begin(self, alive_ports, start_round: int) -> None:
        self.alive = set(alive_ports)
        self.s_ports = set(self.alive)
        self.start = start_round

    @property
    def part2_start(self) -> int:
        return self.start + self.part1_len

    def _scale_of_offset(self, offset: int) -> tuple[int, int]:
        """(scale index 0-based, offset within the scale)."""
        return offset // self.scale_len, offset % self.scale_len

    def _p_mark(self, t_idx: int) -> float:
        delta_t = self.delta / (2.0**t_idx)
        return min(1.0, 1.0 / (max(delta_t, 1.0) * self.log_eps))

    def _cycle_index(self, offset: int) -> int:
        return (offset - self.part1_len) // 3 + 1

    # -- inbox ------------------------------------------------------------

    def absorb(self, rnd: int, inbox: Mapping[int, Message]) -> None:
        if not inbox or rnd <= self.start:
            return
        offset_sent = rnd - 1 - self.start
        if offset_sent < self.part1_len:
            self._absorb_part1(offset_sent, inbox)
        else:
            self._absorb_part2(offset_sent, inbox)

    def _absorb_part1(self, offset_sent: int, inbox: Mapping[int, Message]) -> None:
        t_idx, off = self._scale_of_offset(offset_sent)
        if off == 2 * self.iters:  # bad-set announcements
            for port in inbox:
                self._port_leaves(port, ("B", t_idx + 1))
        elif off % 2 == 0:  # mark announcements
            i = off // 2 + 1
            for port in inbox:
                self._port_leaves(port, ("M", t_idx + 1, i))
            if self.kind == "S":
                self._mark_seen = True
        else:  # buffer-exit announcements
            for port in inbox:
                self._port_leaves(port, ("W",))

    def _port_leaves(self, port: int, kind: tuple) -> None:
        if port in self.s_ports:
            self.s_ports.discard(port)
            self.port_kind[port] = kind

    def _absorb_part2(self, offset_sent: int, inbox: Mapping[int, Message]) -> None:
        cycle_sent = (offset_sent - self.part1_len) % 3
        if cycle_sent == 0:  # id exchange / withdrawals
            for port, payload in inbox.items():
                kind = self._peek_kind(payload)
                if kind == _KIND_NOT_IN:
                    self.port_final[port] = False
                    if self.known_u is not None:
                        self.known_u.discard(port)
                else:
                    if self.in_u and self.port_kind.get(port) == self._my_tag():
                        (nid,) = unpack_fields(
                            self.word_bits, payload[self._kind_words:], [self._id_max]
                        )
                        self._ids_seen.append(nid)
        elif cycle_sent == 1:  # join announcements, first wave hop
            joiner_cycle = self._cycle_index(offset_sent)
            for port, payload in inbox.items():
                kind = self._peek_kind(payload)
                if kind == _KIND_JOIN:
                    self.port_final[port] = True
                    if self.known_u is not None:
                        self.known_u.discard(port)
                    if (
                        self.in_u
                        and self.kind == "M"
                        and self.port_kind.get(port) == self._my_tag()
                    ):
                        self._removed(joiner_cycle)
                elif kind == _KIND_JOIN_WAVE:
                    self.port_final[port] = True
                    if self.known_u is not None:
                        self.known_u.discard(port)
                    (mask,) = unpack_fields(
                        self.word_bits, payload[self._kind_words:], [self._mask_max]
                    )
                    self._wave_hit(mask, joiner_cycle)
                    self._forward_mask |= mask & self._relay_mask()
        else:  # forwarded waves: terminal hop
            joiner_cycle = self._cycle_index(offset_sent - 1)
            for port, payload in inbox.items():
                if self._peek_kind(payload) == _KIND_WAVE:
                    (mask,) = unpack_fields(
                        self.word_bits, payload[self._kind_words:], [self._mask_max]
                    )
                    self._wave_hit(mask, joiner_cycle)

    @property
    def _kind_words(self) -> int:
        return max(1, math.ceil(_KIND_MAX.bit_length() / self.word_bits))

    def _peek_kind(self, payload: Message) -> int:
        (kind,) = unpack_fields(self.word_bits, payload, [_KIND_MAX])
        return kind

    def _my_tag(self) -> tuple:
        if self.kind == "M":
            return ("M", self.scale, self.iteration)
        if self.kind == "B":
            return ("B", self.scale)
        return ()

    def _relay_mask(self) -> int:
        # Bits of scales whose subgraph this node belonged to.
        upto = min(self.last_scale_in_s, self.scales)
        return (1 << upto) - 1

    def _wave_hit(self, mask: int, joiner_cycle: int) -> None:
        if self.in_u and self.kind == "B" and mask & (1 << (self.scale - 1)):
            self._removed(joiner_cycle)

    def _removed(self, cycle: int) -> None:
        self.in_u = False
        self.in_i = False
        self.resolve_cycle = cycle
        self._pending_not_in = True

    # -- actions ------------------------------------------------------------

    def act(self, rnd: int) -> dict[int, Message]:
        offset = rnd - self.start
        if offset < self.part1_len:
            return self._act_part1(offset)
        return self._act_part2(offset)

    def _act_part1(self, offset: int) -> dict[int, Message]:
        t_idx, off = self._scale_of_offset(offset)
        if off == 2 * self.iters:  # bad-set round
            if self.kind != "S":
                return {}
            delta_t = self.delta / (2.0**t_idx)
            self._next_mark = None  # a surviving node redraws in the next scale
            if len(self.s_ports) >= delta_t / 2.0:
                self.kind = "B"
                self.scale = t_idx + 1
                self.last_scale_in_s = self.scale
                self.in_u = True
                return Broadcast(PRESENT, self.s_ports)
            if t_idx + 1 == self.scales:
                if self.s_ports:
                    raise AlgorithmInvariantError(
                        "undecided node with undecided neighbours survived all scales"
                    )
                self.kind = "LEFTOVER"
                self._try_resolve_leftover()
            return {}
        if off % 2 == 0:  # marking round
            if self.kind == "S" and self._mark_seen:
                raise AlgorithmInvariantError("buffer rule failed to fire")
            if self.kind != "S":
                return {}
            if self._next_mark is None:
                # Geometric gap sampling is distribution-identical to one
                # Bernoulli draw per iteration and allows sleeping between.
                p = self._p_mark(t_idx)
                u = self.rng.random()
                gap = 0 if u < p else math.floor(math.log1p(-u) / math.log1p(-p))
                if off // 2 + gap >= self.iters:
                    self._next_mark = -1  # no mark in this scale
                else:
                    self._next_mark = self.start + offset + 2 * gap
            if self._next_mark == self.start + offset:
                self._next_mark = None
                self.kind = "M"
                self.scale = t_idx + 1
                self.iteration = off // 2 + 1
                self.last_scale_in_s = self.scale
                self.in_u = True
                return Broadcast(PRESENT, self.s_ports)
            return {}
        # buffer round
        if self.kind == "S" and self._mark_seen:
            self._mark_seen = False
            self.kind = "W"
            self.scale = t_idx + 1
            self.iteration = off // 2 + 1
            self.last_scale_in_s = self.scale
            self.in_i = False
            return Broadcast(PRESENT, self.s_ports)
        self._mark_seen = False
        return {}

    def _act_part2(self, offset: int) -> dict[int, Message]:
        cycle_off = (offset - self.part1_len) % 3
        if cycle_off == 0:
            if self._pending_not_in:
                self._pending_not_in = False
                payload = pack_fields(self.word_bits, [(_KIND_NOT_IN, _KIND_MAX)])
                return Broadcast(payload, self.alive)
            if self.in_u and self.in_i is None:
                if self.known_u is None:
                    tag = self._my_tag()
                    self.known_u = {
                        p for p, k in self.port_kind.items()
                        if k == tag and p in self.alive
                    }
                self._ids_seen = []
                payload = pack_fields(
                    self.word_bits,
                    [(_KIND_ID, _KIND_MAX), (self.node_id, self._id_max)],
                )
                return Broadcast(payload, self.known_u)
            return {}
        if cycle_off == 1:
            if self.in_u and self.in_i is None:
                if all(self.node_id > other for other in self._ids_seen):
                    self.in_i = True
                    self.in_u = False
                    self.join_cycle = self._cycle_index(offset)
                    self.resolve_cycle = self.join_cycle
                    if self.kind == "B":
                        mask = 1 << (self.scale - 1)
                        payload = pack_fields(
                            self.word_bits,
                            [(_KIND_JOIN_WAVE, _KIND_MAX), (mask, self._mask_max)],
                        )
                    else:
                        payload = pack_fields(self.word_bits, [(_KIND_JOIN, _KIND_MAX)])
                    return Broadcast(payload, self.alive)
            return {}
        if self._forward_mask:
            payload = pack_fields(
                self.word_bits,
                [(_KIND_WAVE, _KIND_MAX), (self._forward_mask, self._mask_max)],
            )
            self._forward_mask = 0
            return Broadcast(payload, self.alive)
        return {}

    # -- leftover resolution -------------------------------------------------

    def _try_resolve_leftover(self) -> bool:
        if self.kind != "LEFTOVER" or self.in_i is not None:
            return self.in_i is not None
        finals = []
        for port in self.alive:
            kind = self.port_kind.get(port)
            if kind is not None and kind[0] == "W":
                finals.append(False)
            elif port in self.port_final:
                finals.append(self.port_final[port])
            else:
                return False
        self.in_i = not any(finals)
        return True

    def schedule(self, rnd: int) -> float | None:
        """Next self-initiated action: None = act next round, inf = reactive
        only, otherwise the absolute round to wake at."""
        if self._pending_not_in or self._forward_mask:
            return None
        nxt = rnd + 1
        if self.kind == "S":
            if self._next_mark is None or nxt >= self.part2_start:
                return None
            t_idx = min((nxt - self.start) // self.scale_len, self.scales - 1)
            b_round = self.start + t_idx * self.scale_len + 2 * self.iters
            target = b_round if self._next_mark < 0 else min(self._next_mark, b_round)
            return target if target > nxt else None
        if self.in_u and self.in_i is None:
            # Members of marked/bad sets idle until the greedy part begins.
            return self.part2_start if nxt < self.part2_start else None
        return math.inf

    @property
    def resolved(self) -> bool:
        if self.kind == "LEFTOVER":
            return self.in_i is not None
        if self.kind in ("M", "B"):
            return self.in_i is not None and not self._pending_not_in
        return self.kind == "W"


class TwoRulingSet(SetProgram):
    """2-ruling set program; delegates to the marking MIS for large Delta."""

    needs_n = True
    needs_delta = True

    def __init__(self, eps: float = DEFAULT_EPS, c_iter: int = DEFAULT_C_ITER) -> None:
        super().__init__()
        self.eps = eps
        self.c_iter = c_iter

    def init(self, ctx: NodeContext) -> None:
        self.ctx = ctx
        self.delegated = scales_delegates_to_marking(ctx.n, ctx.max_degree)
        if self.delegated:
            self.luby = LubyCore(ctx.rng, ctx.node_id, ctx.word_bits)
            self.luby.begin(range(1, ctx.degree + 1), start_round=1)
            self.core = None
        else:
            self.core = ScalesCore(
                ctx.rng,
                ctx.node_id,
                ctx.word_bits,
                n_param=ctx.n,
                delta_param=min(ctx.max_degree, max(ctx.n - 1, 1)),
                eps=self.eps,
                c_iter=self.c_iter,
            )
            self.core.begin(range(1, ctx.degree + 1), start_round=1)

    def step(self, rnd: int, inbox: Mapping[int, Message]) -> tuple[dict[int, Message], bool]:
        if self.delegated:
            self.luby.absorb(rnd, inbox)
            outbox = self.luby.act(rnd)
            if self.luby.done:
                self.in_set = self.luby.decided == "IN"
                self.passive = True
            return outbox, self.luby.done
        core = self.core
        core.absorb(rnd, inbox)
        outbox = core.act(rnd)
        core._try_resolve_leftover()
        _drive(self, core, rnd)
        return outbox, False


class ThreeRulingSet(SetProgram):
    """Sparsify, then run the 2-ruling set machinery inside the dominating set."""

    needs_n = True
    needs_delta = True

    def __init__(
        self,
        eps: float = DEFAULT_EPS_THREE,
        c_iter: int = DEFAULT_C_ITER,
        c_sparsify: float = 4.0,
    ) -> None:
        super().__init__()
        self.eps = eps
        self.c_iter = c_iter
        self.c_sparsify = c_sparsify

    def init(self, ctx: NodeContext) -> None:
        self.ctx = ctx
        log_n = safe_log2(ctx.n)
        self.f = 2.0 ** (log_n ** (1.0 / 3.0))
        self.sparsifier = SparsifyCore(
            ctx.rng, ctx.degree, ctx.n, ctx.max_degree, self.f
        )
        self.sparsifier.begin(1)
        self.phase2_start = sparsify_round_count(ctx.max_degree, self.f)
        bound = math.ceil(sparsify_degree_bound(ctx.n, self.f, self.c_sparsify))
        self.delta_sub = max(1, min(bound, ctx.max_degree, ctx.n - 1))
        self.delegated = scales_delegates_to_marking(ctx.n, self.delta_sub)
        self.inner: LubyCore | ScalesCore | None = None

    def _start_inner(self) -> None:
        ctx = self.ctx
        if not self.sparsifier.in_s:
            self.in_set = False
            self.inner = None
            return
        alive = set(self.sparsifier.s_ports)
        if self.delegated:
            self.inner = LubyCore(ctx.rng, ctx.node_id, ctx.word_bits)
        else:
            self.inner = ScalesCore(
                ctx.rng,
                ctx.node_id,
                ctx.word_bits,
                n_param=ctx.n,
                delta_param=self.delta_sub,
                eps=self.eps,
                c_iter=self.c_iter,
            )
        self.inner.begin(alive, start_round=self.phase2_start)

    def step(self, rnd: int, inbox: Mapping[int, Message]) -> tuple[dict[int, Message], bool]:
        if rnd < self.phase2_start:
            self.sparsifier.absorb(rnd, inbox)
            return self.sparsifier.act(rnd), False
        if rnd == self.phase2_start:
            self.sparsifier.absorb(rnd, inbox)
            self._start_inner()
            inbox = {}
        inner = self.inner
        if inner is None:  # not in the dominating set: dominated within 1 hop
            self.passive = True
            return {}, False
        inner.absorb(rnd, inbox)
        outbox = inner.act(rnd)
        if isinstance(inner, LubyCore):
            if inner.done:
                self.in_set = inner.decided == "IN"
                self.passive = True
            return outbox, False
        inner._try_resolve_leftover()
        _drive(self, inner, rnd)
        return outbox, False


def _drive(program: SetProgram, core: ScalesCore, rnd: int) -> None:
    """Update the wrapper's passivity and wakeup from the core's state."""
    if core.resolved:
        program.in_set = core.in_i
        program.passive = True
        program.wake_at = None
        return
    nxt = core.schedule(rnd)
    if nxt is None:
        program.passive = False
        program.wake_at = None
    elif nxt == math.inf:
        program.passive = True
        program.wake_at = None
    else:
        program.passive = True
        program.wake_at = int(nxt)


def greedy_call_lengths(programs) -> dict[tuple, int]:
    """Iterations consumed by each part-2 greedy call, keyed by (kind, scale[, iter])."""
    lengths: dict[tuple, int] = {}
    for prog in programs:
        core = getattr(prog, "core", None) or getattr(prog, "inner", None)
        if not isinstance(core, ScalesCore):
            continue
        if core.kind in ("M", "B") and core.resolve_cycle is not None:
            tag = core._my_tag()
            lengths[tag] = max(lengths.get(tag, 0), core.resolve_cycle)
    return lengths
