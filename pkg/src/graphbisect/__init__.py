"""Binary search for a hidden target vertex in graphs."""

from .graph import (
    Arc,
    CandidateSet,
    DistanceMatrix,
    Graph,
    GraphError,
    GraphMetadata,
    dijkstra_all_pairs,
    metadata,
    reach,
    reach_dist,
)
from .median import (
    WeightVector,
    dir_median,
    dir_potential,
    median,
    potential,
    weighted_median,
    weighted_potential,
)
from .oracles import (
    CorrectPolicy,
    DistanceOracle,
    EdgeDist,
    EdgeQueryOracle,
    EdgeResponse,
    LiePolicy,
    OracleState,
    Side,
    Target,
    VertexOracle,
)
from .strategies import (
    NoisyConfig,
    ProtocolViolation,
    StrategyOutcome,
    almost_undirected_search,
    deterministic_search,
    distance_informed_search,
    follow_edge_baseline,
    majority_tree_baseline,
    multiweights,
    noisy_search,
    noisy_search_amortized,
    tree_edge_search,
)
from .generators import Family, GeneratorSpec, generate
from .exact import QueryModel, opt_queries, opt_strategy_tree

__version__ = "0.1.0"
