"""Community detection with distance-aware modularity null models.

The null model generalizes the degree-product expectation by giving every
node a power and every node pair a distance-decay weight, so expected edge
counts respect both degree and proximity. Sweeping the decay range exposes
community structure from coarse (connected components) to fine (the
degree-product optimum).
"""

from .distances import (
    DistanceMatrix,
    distance_from_adjacency_rows,
    distance_from_attributes,
    distance_hop,
    load_distance_file,
)
from .errors import DegenerateFieldError, DistModError, ParseError, ValidationError
from .graph import (
    Graph,
    NodeAttributes,
    connected_components,
    degrees,
    drop_isolated_nodes,
    dump_attributes,
    dump_edge_list,
    load_attributes,
    load_edge_list,
)
from .multiscale import (
    PlantedGraph,
    SweepRecord,
    SweepResult,
    generate_planted_graph,
    sigma_grid,
    sweep,
)
from .nullmodel import (
    DistanceFunction,
    NullMatrix,
    PowerSpec,
    build_null_matrix,
    learn_distance_function,
    make_power_spec,
    modularity_matrix,
    ng_null_matrix,
)
from .optimize import (
    AggregatedInstance,
    LevelRecord,
    LouvainResult,
    OptimizerConfig,
    aggregate,
    brute_force_best_partition,
    local_move_pass,
    louvain_optimize,
)
from .partition import Partition, PartitionSimilarity, compare_partitions
from .quality import modularity_q, modularity_q_sigma_zero
from .sampling import SampleBatch, sample_null_graphs, write_sample_summary

__version__ = "0.1.0"

__all__ = [
    "DistanceMatrix",
    "distance_from_adjacency_rows",
    "distance_from_attributes",
    "distance_hop",
    "load_distance_file",
    "DegenerateFieldError",
    "DistModError",
    "ParseError",
    "ValidationError",
    "Graph",
    "NodeAttributes",
    "connected_components",
    "degrees",
    "drop_isolated_nodes",
    "dump_attributes",
    "dump_edge_list",
    "load_attributes",
    "load_edge_list",
    "PlantedGraph",
    "SweepRecord",
    "SweepResult",
    "generate_planted_graph",
    "sigma_grid",
    "sweep",
    "DistanceFunction",
    "NullMatrix",
    "PowerSpec",
    "build_null_matrix",
    "learn_distance_function",
    "make_power_spec",
    "modularity_matrix",
    "ng_null_matrix",
    "AggregatedInstance",
    "LevelRecord",
    "LouvainResult",
    "OptimizerConfig",
    "aggregate",
    "brute_force_best_partition",
    "local_move_pass",
    "louvain_optimize",
    "Partition",
    "PartitionSimilarity",
    "compare_partitions",
    "modularity_q",
    "modularity_q_sigma_zero",
    "SampleBatch",
    "sample_null_graphs",
    "write_sample_summary",
]
