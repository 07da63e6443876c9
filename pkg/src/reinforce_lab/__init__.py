"""Simulation and statistical verification of reinforced random walks,
reinforced jump processes, and their limiting field measures."""

__version__ = "0.1.0"

from .graphs import (CapacityError, GraphError, LatticeBox, PinnedGraph,
                     WeightedGraph, build_lattice_box, effective_resistance,
                     graph_from_dict, load_graph_file, spanning_trees)
from .measures import (DensityError, cd_log_density, h_functional,
                       limit_log_density, sigma_log_density,
                       tree_log_determinant)
from .processes import (EdgeTimelines, OverflowAbort, ProcessState, Trajectory,
                        run_until, sample_gamma_coupling, time_change)
from .suites import SUITE_NAMES, verify_suite

__all__ = [
    "CapacityError", "GraphError", "LatticeBox", "PinnedGraph", "WeightedGraph",
    "build_lattice_box", "effective_resistance", "graph_from_dict",
    "load_graph_file", "spanning_trees",
    "DensityError", "cd_log_density", "h_functional", "limit_log_density",
    "sigma_log_density", "tree_log_determinant",
    "EdgeTimelines", "OverflowAbort", "ProcessState", "Trajectory", "run_until",
    "sample_gamma_coupling", "time_change",
    "SUITE_NAMES", "verify_suite",
]
