"""Exact and budget-approximate Shapley interactions for GNN graph
predictions, computed through receptive-field sparsity."""

__version__ = "0.1.0"

from .convert import (bernoulli_numbers, convert_mi, efficiency_check, mi_to_ksii,
                      mi_to_sii, mi_to_stii, mi_to_sv)
from .errors import BudgetExceeded, NonlinearReadout, ParseError
from .explainer import GraphInteractionExplainer
from .game import GameOracle, GraphGame, NodeGame
from .graph import (Graph, NeighborhoodIndex, graph_from_json, graph_stats,
                    khop_neighborhoods, load_graph, make_graph)
from .interactions import InteractionSet, InteractionValues
from .moebius import (build_interaction_set, graphshapiq_approx, graphshapiq_exact,
                      moebius_transform)
from .nn import GnnModel, default_baseline, forward_graph, forward_node, load_model, model_from_json

__all__ = [
    "BudgetExceeded", "GameOracle", "GnnModel", "Graph", "GraphGame",
    "GraphInteractionExplainer", "InteractionSet", "InteractionValues",
    "NeighborhoodIndex", "NodeGame", "NonlinearReadout", "ParseError",
    "bernoulli_numbers", "build_interaction_set", "convert_mi",
    "default_baseline", "efficiency_check", "forward_graph", "forward_node",
    "graph_from_json", "graph_stats", "graphshapiq_approx", "graphshapiq_exact",
    "khop_neighborhoods", "load_graph", "load_model", "make_graph",
    "mi_to_ksii", "mi_to_sii", "mi_to_stii", "mi_to_sv", "model_from_json",
    "moebius_transform",
]
