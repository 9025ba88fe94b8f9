"""Neighbour-interaction CTR prediction on heterogeneous graphs."""

from ._hinctr import (
    DataError,
    Graph,
    NumericError,
    auc,
    build_masks,
    evaluate,
    load_graph,
    logloss,
    sample,
    sample_pair,
    synth,
    train,
)

__all__ = [
    "DataError",
    "Graph",
    "NumericError",
    "auc",
    "build_masks",
    "evaluate",
    "load_graph",
    "logloss",
    "sample",
    "sample_pair",
    "synth",
    "train",
]
