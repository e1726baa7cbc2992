"""Algorithm registry: name strings to node-program factories plus verification modes."""

from __future__ import annotations

from collections.abc import Callable, Mapping
from dataclasses import dataclass

from ..engine import NodeProgram
from .five import FiveRulingSet
from .shatter import ShatterPhase
from .greedy import GreedyRulingSet
from .luby import LubyMIS
from .msg import FastTwoRulingSet, MsgEfficientTwoRulingSet
from .scales import ThreeRulingSet, TwoRulingSet, greedy_call_lengths
from .sparsify import Sparsify

__all__ = [
    "ALGORITHMS",
    "AlgorithmSpec",
    "make_factory",
    "parse_params",
    "member_set",
    "greedy_call_lengths",
]

# Output labels that mean "member of the produced set".
_MEMBER_LABELS = frozenset({"IN", "CATEGORY_1"})


@dataclass(frozen=True)
class AlgorithmSpec:
    """Registry entry: how to build the program and how to judge its output.

    ``alpha``/``beta`` drive the matching ruling-set verifier; ``beta`` is
    None when only independence is promised (partial outputs).
    """

    name: str
    build: Callable[..., NodeProgram]
    params: Mapping[str, type]
    alpha: int
    beta: int | None
    summary: str


ALGORITHMS: dict[str, AlgorithmSpec] = {
    "luby": AlgorithmSpec(
        "luby", LubyMIS, {}, 2, 1, "marking MIS, the round-complexity baseline"
    ),
    "greedy-rs": AlgorithmSpec(
        "greedy-rs",
        GreedyRulingSet,
        {"beta": int},
        2,
        1,  # beta widens via the run parameter; see verify_mode
        "greedy ruling set by id order with removal waves",
    ),
    "2rs-time": AlgorithmSpec(
        "2rs-time",
        TwoRulingSet,
        {"eps": float, "c_iter": int},
        2,
        2,
        "scale-structured sublogarithmic 2-ruling set",
    ),
    "sparsify": AlgorithmSpec(
        "sparsify",
        Sparsify,
        {"f": float, "mark_constant": float},
        1,
        1,
        "dominating set with small induced degree",
    ),
    "3rs": AlgorithmSpec(
        "3rs",
        ThreeRulingSet,
        {"eps": float, "c_iter": int, "c_sparsify": float},
        2,
        3,
        "sparsify then 2-ruling set inside the dominating set",
    ),
    "ghaffari-p1": AlgorithmSpec(
        "ghaffari-p1",
        ShatterPhase,
        {"iterations": int, "c_ghaffari": int},
        2,
        None,
        "dynamic-probability shattering phase (partial independent set)",
    ),
    "5rs": AlgorithmSpec(
        "5rs",
        FiveRulingSet,
        {"c_ghaffari": int, "c_sparsify": float},
        2,
        5,
        "sparsify + shattering + greedy sweep",
    ),
    "2rs-msg": AlgorithmSpec(
        "2rs-msg",
        MsgEfficientTwoRulingSet,
        {},
        2,
        2,
        "message-frugal category-labelling 2-ruling set",
    ),
    "2rs-fast": AlgorithmSpec(
        "2rs-fast",
        FastTwoRulingSet,
        {},
        2,
        2,
        "degree-threshold activation + marking MIS (valid whp)",
    ),
}


def parse_params(name: str, items: Mapping[str, str]) -> dict[str, object]:
    """Coerce key=value strings per the algorithm's parameter table."""
    spec = ALGORITHMS.get(name)
    if spec is None:
        raise KeyError(f"unknown algorithm {name!r}")
    out: dict[str, object] = {}
    for key, raw in items.items():
        if key not in spec.params:
            raise KeyError(f"algorithm {name!r} takes no parameter {key!r}")
        out[key] = spec.params[key](raw)
    return out


def make_factory(name: str, **params) -> Callable[[], NodeProgram]:
    spec = ALGORITHMS.get(name)
    if spec is None:
        raise KeyError(f"unknown algorithm {name!r}")
    return lambda: spec.build(**params)


def verify_mode(name: str, params: Mapping[str, object]) -> tuple[int, int | None]:
    """The (alpha, beta) the matching verifier should check for this run.

    The greedy ruling set guarantees independence and beta-coverage; two
    same-iteration joiners may sit anywhere above distance 1, so (2, beta)
    is its contract.
    """
    spec = ALGORITHMS[name]
    if name == "greedy-rs":
        return 2, int(params.get("beta", 1))
    return spec.alpha, spec.beta


def member_set(outputs) -> set[int]:
    return {v for v, label in enumerate(outputs) if label in _MEMBER_LABELS}
