"""Resource allocation for D2D-based vehicular networks.

Clusters sidelink (V2V) pairs for spectrum reuse, solves closed-form
power control that maximizes uplink (V2I) capacity under V2V outage
constraints, assigns V2I links, resource blocks, and clusters by
LP-rounded 3-D matching, and evaluates everything in a seeded freeway
Monte-Carlo harness.
"""

__version__ = "0.1.0"

from .channel import ChannelState, realize_channels
from .matching import Hypergraph3, Matching3D, match_3d
from .montecarlo import CdfData, run_monte_carlo, write_outputs
from .partition import Clustering, max_n_cut_partition
from .pipeline import Allocation, allocate, audit_allocation
from .power import PowerProblem, PowerSolution, optimal_powers
from .scenario import ScenarioConfig, Topology, generate_topology

__all__ = [
    "__version__",
    "Allocation", "CdfData", "ChannelState", "Clustering", "Hypergraph3",
    "Matching3D", "PowerProblem", "PowerSolution", "ScenarioConfig",
    "Topology", "allocate", "audit_allocation", "generate_topology",
    "match_3d", "max_n_cut_partition", "optimal_powers", "realize_channels",
    "run_monte_carlo", "write_outputs",
]
