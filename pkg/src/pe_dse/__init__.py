"""Design-space exploration of CGRA processing-element datapaths.

Frequent-subgraph analysis of application dataflow graphs, datapath merging
via maximum-weight clique, PE specification, covering/mapping, functional
simulation, and table-driven area/energy reporting.
"""

from .costs import CostReport, CostTable, default_cost_table, evaluate_mapping, pe_area
from .errors import PEDSEError
from .graph import (
    DataflowGraph,
    Embedding,
    GraphEdge,
    GraphNode,
    Pattern,
    canonical_key,
    find_embeddings,
    graph_from_json,
    graph_to_json,
    parse_graph,
    serialize_graph,
)
from .mapper import Mapping, map_application, emit_netlist, simulate_mapping
from .merge import (
    CompatibilityGraph,
    DatapathConfig,
    MergedDatapath,
    MergeOpportunity,
    build_compatibility_graph,
    build_pe_variants,
    enumerate_opportunities,
    make_baseline,
    max_weight_clique,
    merge_many,
    reconstruct_merged,
)
from .miner import MinedPattern, MiningConfig, mine_frequent_subgraphs
from .mis import MisReport, analyze_patterns, build_overlap_graph, rank_patterns
from .pespec import PESpec, enumerate_configurations, generate_pe_spec
from .sim import SimResult, random_input_vector, simulate_graph

__version__ = "0.1.0"

__all__ = [
    "CostReport",
    "CostTable",
    "default_cost_table",
    "evaluate_mapping",
    "pe_area",
    "PEDSEError",
    "DataflowGraph",
    "Embedding",
    "GraphEdge",
    "GraphNode",
    "Pattern",
    "canonical_key",
    "find_embeddings",
    "graph_from_json",
    "graph_to_json",
    "parse_graph",
    "serialize_graph",
    "Mapping",
    "map_application",
    "emit_netlist",
    "simulate_mapping",
    "CompatibilityGraph",
    "DatapathConfig",
    "MergedDatapath",
    "MergeOpportunity",
    "build_compatibility_graph",
    "build_pe_variants",
    "enumerate_opportunities",
    "make_baseline",
    "max_weight_clique",
    "merge_many",
    "reconstruct_merged",
    "MinedPattern",
    "MiningConfig",
    "mine_frequent_subgraphs",
    "MisReport",
    "analyze_patterns",
    "build_overlap_graph",
    "rank_patterns",
    "PESpec",
    "enumerate_configurations",
    "generate_pe_spec",
    "SimResult",
    "random_input_vector",
    "simulate_graph",
    "__version__",
]
