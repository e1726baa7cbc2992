"""Shared building blocks for the algorithm programs.

Protocols here are *phase-coded*: the global round number determines which
kind of message travels in a given round, so most payloads need no type
field.  Composite programs route each round's inbox to the sub-protocol that
owns the round the messages were sent in.
"""

from __future__ import annotations

import math

from ..engine import NodeContext, NodeProgram, pack_fields, unpack_fields, words_needed

__all__ = [
    "PRESENT",
    "id_field_max",
    "pack_id",
    "safe_log2",
    "unpack_id",
    "SetProgram",
]

# Single-word presence marker for flag-only messages.
PRESENT = (1,)

IN = "IN"
OUT = "OUT"
UNDECIDED = "UNDECIDED"


def safe_log2(n: int | float) -> float:
    """log2 clamped below at 1 so probability and size formulas stay finite."""
    return max(1.0, math.log2(n)) if n > 1 else 1.0


def id_field_max(word_bits: int) -> int:
    """Upper bound for node ids expressible in this word model (range n^4)."""
    return (1 << word_bits) ** 4


def pack_id(node_id: int, word_bits: int) -> tuple[int, ...]:
    return pack_fields(word_bits, [(node_id, id_field_max(word_bits))])

def unpack_id(words, word_bits: int) -> int:
    return unpack_fields(word_bits, words, [id_field_max(word_bits)])[0]


def id_word_count(word_bits: int) -> int:
    return words_needed(id_field_max(word_bits), word_bits)


class SetProgram(NodeProgram):
    """Base for programs whose per-node result is membership in one set."""

    needs_n = False
    needs_delta = False

    def __init__(self) -> None:
        self.passive = False
        self.wake_at: int | None = None
        self.in_set: bool | None = None
        self.info: dict = {}

    def init(self, ctx: NodeContext) -> None:  # pragma: no cover - overridden
        raise NotImplementedError

    def output(self) -> str:
        if self.in_set is None:
            return UNDECIDED
        return IN if self.in_set else OUT
