"""congestsim: deterministic CONGEST-model simulation and ruling-set algorithms."""

from .engine import Broadcast, NodeContext, NodeProgram, RunResult, SimStats, WordBudget, run, run_many
from .graph import Graph, GraphFamilySpec, bfs_distances
from .verify import brute_force_ruling_sets, verify_categories, verify_mis, verify_ruling_set

__all__ = [
    "Broadcast",
    "Graph",
    "GraphFamilySpec",
    "NodeContext",
    "NodeProgram",
    "RunResult",
    "SimStats",
    "WordBudget",
    "bfs_distances",
    "brute_force_ruling_sets",
    "run",
    "run_many",
    "verify_categories",
    "verify_mis",
    "verify_ruling_set",
]

__version__ = "0.1.0"
