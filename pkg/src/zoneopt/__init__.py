"""Security-zone optimization for utility SCADA networks.

Finds Pareto-optimal partitions of UCC-plus-substation networks with a
constrained NSGA-2 over edge-removal chromosomes, balancing firewall/ACL
cost against physical-grid resilience, and emits ASA-style firewall
configurations for any chosen solution.
"""

from .fitness import (
    ConstraintParams,
    ConstraintViolation,
    ObjectiveVector,
    OBJECTIVE_NAMES,
    Problem,
    count_acls,
    count_firewalls,
    evaluate,
    f3_security,
    f4_lodf,
)
from .grid_physics import (
    GridModel,
    GridLine,
    IslandingError,
    LodfTable,
    Weights,
    compute_lodf,
    nlodf,
    ps_metric,
    synth_grid,
)
from .nsga2 import (
    GaParams,
    Individual,
    ParetoFront,
    bitflip_mutation,
    crowding_distance,
    k_point_crossover,
    non_dominated_sort,
    run,
)
from .topology import (
    Chromosome,
    Clustering,
    Node,
    NodeKind,
    SubstationProfile,
    SystemModel,
    TopologyError,
    UtilityGraph,
    decompose,
    load_topology,
    synth_hybrid,
    synth_star,
    system_to_document,
)

__version__ = "0.1.0"
