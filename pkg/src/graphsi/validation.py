"""Input coercion helpers shared by the estimator and the CLI.

Each helper accepts the natural in-memory object, a parsed JSON object,
or a file path, and returns the validated domain type, raising
ParseError with a usable message otherwise.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import ParseError
from .graph import Graph, graph_from_json, load_graph
from .nn import GnnModel, default_baseline, load_model, model_from_json


def ensure_graph(source) -> Graph:
    if isinstance(source, Graph):
        return source
    if isinstance(source, dict):
        return graph_from_json(source)
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        return load_graph(os.fspath(source))
    raise ParseError(f"cannot interpret {type(source).__name__} as a graph")


def ensure_model(source) -> GnnModel:
    if isinstance(source, GnnModel):
        return source
    if isinstance(source, dict):
        return model_from_json(source)
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        return load_model(os.fspath(source))
    raise ParseError(f"cannot interpret {type(source).__name__} as a model")


def ensure_baseline(spec, graph: Graph) -> np.ndarray:
    """Masking vector from "mean", an array-like, or a JSON file of numbers."""
    if spec is None or (isinstance(spec, str) and spec == "mean"):
        return default_baseline(graph)
    if isinstance(spec, (str, bytes)) or hasattr(spec, "__fspath__"):
        import json
        try:
            with open(os.fspath(spec), "r", encoding="utf-8") as fh:
                spec = json.load(fh)
        except OSError as exc:
            raise ParseError(f"cannot read baseline file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ParseError(f"baseline file is not valid JSON: {exc}") from exc
        if not isinstance(spec, list):
            raise ParseError("baseline file must hold a JSON array of numbers")
    try:
        vec = np.asarray(spec, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"baseline is not numeric: {exc}") from exc
    if vec.ndim != 1 or vec.shape[0] != graph.d0:
        raise ParseError(f"baseline must be a vector of length {graph.d0}")
    if not np.all(np.isfinite(vec)):
        raise ParseError("baseline must be finite")
    return vec


def check_positive_int(value, name: str, minimum: int = 1) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise ParseError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return value
