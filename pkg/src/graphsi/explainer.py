"""Estimator-style front end over the whole pipeline.

Follows the familiar fit/params idiom: construct with hyperparameters,
call fit(graph) to run the computation, read the results off fitted
attributes (trailing underscore). All heavy lifting lives in the
functional modules; this class wires validation, the game, and the
exact-or-truncated run together.
"""

from __future__ import annotations

from .convert import efficiency_check
from .errors import ParseError
from .export import build_si_graph, to_dot
from .game import GraphGame
from .graph import khop_neighborhoods
from .interactions import INDEX_KINDS
from .moebius import DEFAULT_CEILING, graphshapiq_approx, graphshapiq_exact
from .validation import check_positive_int, ensure_baseline, ensure_graph, ensure_model


class GraphInteractionExplainer:
    """Computes interaction attributions for one GNN graph prediction.

    Parameters:
        model: GnnModel, weight-file dict, or path to a weight file
        index: "sv", "sii", "ksii", "stii", or "mi"
        order: explanation order k (defaults: 1 for sv, n for mi, else 2)
        ell: receptive-field range; defaults to the model's layer count
        lam: truncation order; None runs the exact computation
        baseline: "mean", a vector, or a path to a JSON array
        normalize: subtract nu(empty) from every game value
        ceiling: evaluation-budget guard for the exact mode
        workers: threads for batched game evaluations

    Fitted attributes: interactions_, moebius_, call_count_,
    interaction_set_size_ (exact mode), game_, hoods_,
    efficiency_residual_.
    """

    def __init__(self, model, *, index: str = "ksii", order: int | None = None,
                 ell: int | None = None, lam: int | None = None,
                 baseline="mean", normalize: bool = False,
                 ceiling: int = DEFAULT_CEILING, workers: int = 1):
        self.model = model
        self.index = index
        self.order = order
        self.ell = ell
        self.lam = lam
        self.baseline = baseline
        self.normalize = normalize
        self.ceiling = ceiling
        self.workers = workers

    _param_names = ("model", "index", "order", "ell", "lam", "baseline",
                    "normalize", "ceiling", "workers")

    def get_params(self, deep: bool = True) -> dict:
        return {name: getattr(self, name) for name in self._param_names}

    def set_params(self, **params) -> "GraphInteractionExplainer":
        for name, value in params.items():
            if name not in self._param_names:
                raise ValueError(f"unknown parameter {name!r}")
            setattr(self, name, value)
        return self

    def _resolve_order(self, n: int) -> int:
        if self.order is not None:
            order = check_positive_int(self.order, "order")
            if order > n:
                raise ParseError(f"order {order} exceeds the {n} nodes")
            if self.index == "sv" and order != 1:
                raise ParseError("the Shapley value is an order-1 index; use order=1")
            return order
        if self.index == "sv":
            return 1
        if self.index == "mi":
            return n
        return min(2, n)

    def fit(self, graph) -> "GraphInteractionExplainer":
        """Run the pipeline on one graph; returns self with results attached."""
        if self.index not in INDEX_KINDS:
            raise ParseError(f"unknown index {self.index!r}")
        g = ensure_graph(graph)
        model = ensure_model(self.model)
        baseline = ensure_baseline(self.baseline, g)
        ell = self.ell if self.ell is not None else model.num_layers
        check_positive_int(ell, "ell")
        game = GraphGame(model, g, baseline=baseline, normalize=self.normalize,
                         workers=self.workers)
        hoods = khop_neighborhoods(g, ell)
        k = self._resolve_order(g.n)
        if self.lam is None:
            mi, si = graphshapiq_exact(game, hoods, k, index=self.index,
                                       ceiling=self.ceiling)
            self.interaction_set_size_ = len(mi.values)
        else:
            lam = check_positive_int(self.lam, "lambda")
            if lam > g.n:
                raise ParseError(f"lambda {lam} exceeds the {g.n} nodes")
            mi, si = graphshapiq_approx(game, hoods, lam, k, index=self.index)
            self.interaction_set_size_ = None
        self.graph_ = g
        self.game_ = game
        self.hoods_ = hoods
        self.moebius_ = mi
        self.interactions_ = si
        self.call_count_ = game.call_count()
        self.efficiency_residual_ = efficiency_check(si, game.nu_full, game.nu_empty)
        return self

    def _require_fitted(self) -> None:
        if not hasattr(self, "interactions_"):
            raise RuntimeError("call fit(graph) first")

    def to_export(self) -> dict:
        """SI-Graph document for the fitted instance."""
        self._require_fitted()
        return build_si_graph(self.interactions_, self.game_.nu_full,
                              self.game_.nu_empty, self.efficiency_residual_)

    def to_dot(self) -> str:
        self._require_fitted()
        return to_dot(self.to_export(), self.graph_)
