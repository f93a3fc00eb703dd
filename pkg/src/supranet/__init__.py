"""Interdependent two-layer networks: supra-Laplacians, Fiedler partitions and sweeps."""

from .coupling import (CoupledSystem, InterlinkSet, Strategy, couple_diagonal, couple_general,
                       couple_meanfield, interlink_sequence)
from .errors import SupranetError
from .generators import GenSpec, generate
from .graph import Graph, build_graph, laplacian, load_edge_list, save_edge_list
from .harness import SweepConfig, aggregate, compare, detect_transition, run_sweep
from .metrics import partition_report
from .spectral import fiedler_pair, full_spectrum, simulate_diffusion
from .theory import meanfield_prediction, perturbation_estimate

__version__ = "0.1.0"

__all__ = [
    "CoupledSystem", "InterlinkSet", "Strategy", "couple_diagonal", "couple_general",
    "couple_meanfield", "interlink_sequence", "SupranetError", "GenSpec", "generate",
    "Graph", "build_graph", "laplacian", "load_edge_list", "save_edge_list",
    "SweepConfig", "aggregate", "compare", "detect_transition", "run_sweep",
    "partition_report", "fiedler_pair", "full_spectrum", "simulate_diffusion",
    "meanfield_prediction", "perturbation_estimate",
]
