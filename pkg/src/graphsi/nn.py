"""Self-contained GNN forward pass on masked node features.

Supports GCN and GIN convolutions, ReLU between conv layers (none after
the last), sum or mean pooling, and a linear readout. An mlp2 readout
(one hidden ReLU layer) is also accepted; it exists for the deep-readout
audit and the sparse exact solver refuses to run on it.

All arithmetic is float64. 32-bit accumulation loses the tight
invariance tolerances on deeper stacks.
"""

from __future__ import annotations

import json
import weakref
from dataclasses import dataclass

import numpy as np

from .coalitions import contains
from .errors import ParseError
from .graph import Graph


class DimensionMismatch(ParseError):
    """Model and input widths disagree; message names the offending layer."""


@dataclass(frozen=True)
class GcnLayer:
    weight: np.ndarray  # d_in x d_out
    bias: np.ndarray  # d_out

    @property
    def d_in(self) -> int:
        return self.weight.shape[0]

    @property
    def d_out(self) -> int:
        return self.weight.shape[1]


@dataclass(frozen=True)
class GinLayer:
    epsilon: float
    w1: np.ndarray  # d_in x d_hidden
    b1: np.ndarray
    w2: np.ndarray  # d_hidden x d_out
    b2: np.ndarray

    @property
    def d_in(self) -> int:
        return self.w1.shape[0]

    @property
    def d_out(self) -> int:
        return self.w2.shape[1]


@dataclass(frozen=True)
class LinearReadout:
    weight: np.ndarray  # d_ell x d_out
    bias: np.ndarray

    kind = "linear"

    @property
    def d_in(self) -> int:
        return self.weight.shape[0]

    @property
    def d_out(self) -> int:
        return self.weight.shape[1]


@dataclass(frozen=True)
class Mlp2Readout:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    kind = "mlp2"

    @property
    def d_in(self) -> int:
        return self.w1.shape[0]

    @property
    def d_out(self) -> int:
        return self.w2.shape[1]


@dataclass(frozen=True, eq=False)
class GnnModel:
    """Immutable model: conv stack, pooling, readout.

    Attributes:
        layers: conv layers, at least one; widths chain consistently
        pooling: "sum" or "mean"
        readout: LinearReadout or Mlp2Readout
    """

    layers: tuple
    pooling: str
    readout: object

    @property
    def num_layers(self) -> int:
        return len(self.layers)

    @property
    def d_in(self) -> int:
        return self.layers[0].d_in

    @property
    def d_ell(self) -> int:
        return self.layers[-1].d_out

    @property
    def d_out(self) -> int:
        return self.readout.d_out

    def to_json_dict(self) -> dict:
        layers = []
        for layer in self.layers:
            if isinstance(layer, GcnLayer):
                layers.append({"kind": "gcn", "weight": layer.weight.tolist(),
                               "bias": layer.bias.tolist()})
            else:
                layers.append({"kind": "gin", "epsilon": layer.epsilon,
                               "mlp": {"w1": layer.w1.tolist(), "b1": layer.b1.tolist(),
                                       "w2": layer.w2.tolist(), "b2": layer.b2.tolist()}})
        if isinstance(self.readout, LinearReadout):
            readout = {"kind": "linear", "weight": self.readout.weight.tolist(),
                       "bias": self.readout.bias.tolist()}
        else:
            readout = {"kind": "mlp2", "w1": self.readout.w1.tolist(),
                       "b1": self.readout.b1.tolist(), "w2": self.readout.w2.tolist(),
                       "b2": self.readout.b2.tolist()}
        return {"activation": "relu", "layers": layers,
                "pooling": self.pooling, "readout": readout}


def _matrix(obj, name: str) -> np.ndarray:
    try:
        arr = np.asarray(obj, dtype=np.float64)
    except (TypeError, ValueError) as exc:  # ragged rows, non-numeric entries
        raise ParseError(f"{name} must be a non-empty 2-d matrix") from exc
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ParseError(f"{name} must be a non-empty 2-d matrix")
    if not np.all(np.isfinite(arr)):
        raise ParseError(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


def _vector(obj, name: str, length: int) -> np.ndarray:
    try:
        arr = np.asarray(obj, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{name} must be a vector of length {length}") from exc
    if arr.ndim != 1 or arr.shape[0] != length:
        raise ParseError(f"{name} must be a vector of length {length}")
    if not np.all(np.isfinite(arr)):
        raise ParseError(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


def _parse_mlp(obj, name: str) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    if not isinstance(obj, dict):
        raise ParseError(f"{name} must be an object with keys w1, b1, w2, b2")
    missing = {"w1", "b1", "w2", "b2"} - obj.keys()
    if missing:
        raise ParseError(f"{name} is missing keys: {sorted(missing)}")
    try:
        w1 = _matrix(obj["w1"], f"{name}.w1")
        b1 = _vector(obj["b1"], f"{name}.b1", w1.shape[1])
        w2 = _matrix(obj["w2"], f"{name}.w2")
        b2 = _vector(obj["b2"], f"{name}.b2", w2.shape[1])
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"malformed {name}: {exc}") from exc
    if w2.shape[0] != w1.shape[1]:
        raise ParseError(f"{name}: w2 input width {w2.shape[0]} != w1 output width {w1.shape[1]}")
    return w1, b1, w2, b2


def model_from_json(obj) -> GnnModel:
    """Build a GnnModel from a parsed weight-file object.

    Schema: {"activation": "relu", "layers": [...], "pooling": "sum"|"mean",
    "readout": {...}}. Layer widths must chain; activation must be "relu".
    """
    if not isinstance(obj, dict):
        raise ParseError("weights JSON must be an object")
    missing = {"activation", "layers", "pooling", "readout"} - obj.keys()
    if missing:
        raise ParseError(f"weights JSON is missing keys: {sorted(missing)}")
    if obj["activation"] != "relu":
        raise ParseError(f"unsupported activation {obj['activation']!r}; only 'relu' is supported")
    if obj["pooling"] not in ("sum", "mean"):
        raise ParseError(f"pooling must be 'sum' or 'mean', got {obj['pooling']!r}")
    raw_layers = obj["layers"]
    if not isinstance(raw_layers, list) or not raw_layers:
        raise ParseError("layers must be a non-empty list")

    layers = []
    for idx, raw in enumerate(raw_layers):
        name = f"layers[{idx}]"
        if not isinstance(raw, dict) or "kind" not in raw:
            raise ParseError(f"{name} must be an object with a 'kind' field")
        kind = raw["kind"]
        try:
            if kind == "gcn":
                if {"weight", "bias"} - raw.keys():
                    raise ParseError(f"{name} (gcn) needs 'weight' and 'bias'")
                weight = _matrix(raw["weight"], f"{name}.weight")
                bias = _vector(raw["bias"], f"{name}.bias", weight.shape[1])
                layers.append(GcnLayer(weight=weight, bias=bias))
            elif kind == "gin":
                if {"epsilon", "mlp"} - raw.keys():
                    raise ParseError(f"{name} (gin) needs 'epsilon' and 'mlp'")
                eps = raw["epsilon"]
                if not isinstance(eps, (int, float)) or isinstance(eps, bool) or not np.isfinite(eps):
                    raise ParseError(f"{name}.epsilon must be a finite number")
                w1, b1, w2, b2 = _parse_mlp(raw["mlp"], f"{name}.mlp")
                layers.append(GinLayer(epsilon=float(eps), w1=w1, b1=b1, w2=w2, b2=b2))
            else:
                raise ParseError(f"{name} has unknown kind {kind!r}")
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"malformed {name}: {exc}") from exc
    for idx in range(1, len(layers)):
        if layers[idx].d_in != layers[idx - 1].d_out:
            raise DimensionMismatch(
                f"layers[{idx}] input width {layers[idx].d_in} != "
                f"layers[{idx - 1}] output width {layers[idx - 1].d_out}")

    raw_readout = obj["readout"]
    if not isinstance(raw_readout, dict) or "kind" not in raw_readout:
        raise ParseError("readout must be an object with a 'kind' field")
    if raw_readout["kind"] == "linear":
        if {"weight", "bias"} - raw_readout.keys():
            raise ParseError("linear readout needs 'weight' and 'bias'")
        weight = _matrix(raw_readout["weight"], "readout.weight")
        bias = _vector(raw_readout["bias"], "readout.bias", weight.shape[1])
        readout = LinearReadout(weight=weight, bias=bias)
    elif raw_readout["kind"] == "mlp2":
        w1, b1, w2, b2 = _parse_mlp(raw_readout, "readout")
        readout = Mlp2Readout(w1=w1, b1=b1, w2=w2, b2=b2)
    else:
        raise ParseError(f"readout has unknown kind {raw_readout['kind']!r}")
    if readout.d_in != layers[-1].d_out:
        raise DimensionMismatch(
            f"readout input width {readout.d_in} != last layer output width {layers[-1].d_out}")
    return GnnModel(layers=tuple(layers), pooling=obj["pooling"], readout=readout)


def load_model(path) -> GnnModel:
    """Load a model from a weight JSON file. Raises ParseError on any defect."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read weights file {path}: {exc}") from exc
    except (json.JSONDecodeError, UnicodeDecodeError, RecursionError) as exc:
        raise ParseError(f"weights file {path} is not valid JSON: {exc}") from exc
    return model_from_json(obj)


# Derived per-graph matrices, keyed by graph identity.
_ADJ_CACHE: "weakref.WeakKeyDictionary[Graph, tuple[np.ndarray, np.ndarray]]" = (
    weakref.WeakKeyDictionary())


def _graph_matrices(g: Graph) -> tuple[np.ndarray, np.ndarray]:
    """(adjacency A, normalized A_hat) with A_hat = D^-1/2 (A+I) D^-1/2."""
    cached = _ADJ_CACHE.get(g)
    if cached is not None:
        return cached
    adj = np.zeros((g.n, g.n), dtype=np.float64)
    for i, j in g.edges:
        adj[i, j] = 1.0
        adj[j, i] = 1.0
    with_loops = adj + np.eye(g.n)
    inv_sqrt_deg = 1.0 / np.sqrt(with_loops.sum(axis=1))
    a_hat = with_loops * inv_sqrt_deg[:, None] * inv_sqrt_deg[None, :]
    adj.setflags(write=False)
    a_hat.setflags(write=False)
    _ADJ_CACHE[g] = (adj, a_hat)
    return adj, a_hat


def default_baseline(g: Graph) -> np.ndarray:
    """Componentwise mean of the node features."""
    return g.features.mean(axis=0)


def masked_features(g: Graph, baseline: np.ndarray, coalition: int) -> np.ndarray:
    """Realized matrix X^(T): row i is x_i when i is in T, else the baseline."""
    keep = np.fromiter((contains(coalition, i) for i in range(g.n)),
                       dtype=bool, count=g.n)
    return np.where(keep[:, None], g.features, baseline[None, :])


def _relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def _conv_stack(model: GnnModel, g: Graph, x: np.ndarray) -> np.ndarray:
    if x.shape[1] != model.d_in:
        raise DimensionMismatch(
            f"layers[0] expects input width {model.d_in}, features have {x.shape[1]}")
    adj, a_hat = _graph_matrices(g)
    h = x
    last = len(model.layers) - 1
    for idx, layer in enumerate(model.layers):
        if isinstance(layer, GcnLayer):
            h = a_hat @ h @ layer.weight + layer.bias
        else:
            agg = (1.0 + layer.epsilon) * h + adj @ h
            h = _relu(agg @ layer.w1 + layer.b1) @ layer.w2 + layer.b2
        if idx != last:
            h = _relu(h)
    return h


def _apply_readout(readout, pooled: np.ndarray) -> np.ndarray:
    if isinstance(readout, LinearReadout):
        return pooled @ readout.weight + readout.bias
    return _relu(pooled @ readout.w1 + readout.b1) @ readout.w2 + readout.b2


def forward_graph(model: GnnModel, g: Graph, x: np.ndarray) -> np.ndarray:
    """Graph-level output (logits) for a realized feature matrix."""
    h = _conv_stack(model, g, x)
    pooled = h.sum(axis=0) if model.pooling == "sum" else h.mean(axis=0)
    return _apply_readout(model.readout, pooled)


def forward_node(model: GnnModel, g: Graph, x: np.ndarray, i: int) -> np.ndarray:
    """Node embedding after the last conv layer, before pooling."""
    if not (0 <= i < g.n):
        raise IndexError(f"node index {i} out of range for n={g.n}")
    return _conv_stack(model, g, x)[i]
