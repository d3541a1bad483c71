"""Matrix-free toolkit for weighted shifts on directed trees.

Trees, weights and backward shifts are given as JSON documents (strings or
plain Python objects) in the same format the command-line tool reads.
"""

import json

from . import _core
from ._core import TreeShiftError, krylov_rank, numerical_rank

__all__ = [
    "TreeShiftError",
    "analyze",
    "asymptote",
    "backward_cyclic",
    "krylov_rank",
    "numerical_rank",
    "ratio_bounded",
    "similarity",
    "validate_tree",
]


def _doc(spec):
    return spec if isinstance(spec, str) else json.dumps(spec)


def validate_tree(tree):
    return json.loads(_core.validate_tree(_doc(tree)))


def analyze(tree, weights, levels=(-4, 4), breadth=16):
    """Norm, limit profiles, classification and cyclicity verdict."""
    lo, hi = levels
    return json.loads(_core.analyze(_doc(tree), _doc(weights), lo, hi, breadth))


def asymptote(tree, weights, levels=(-4, 4), breadth=16):
    lo, hi = levels
    return json.loads(_core.asymptote(_doc(tree), _doc(weights), lo, hi, breadth))


def backward_cyclic(spec, length=16, window=50):
    """Cyclic vector for a backward shift and its Krylov verification."""
    return json.loads(_core.backward_cyclic(_doc(spec), length, window))


def similarity(tree, weights, levels=12):
    return json.loads(_core.similarity(_doc(tree), _doc(weights), levels))


def ratio_bounded(tree, weights, horizon=200):
    return json.loads(_core.ratio_bounded(_doc(tree), _doc(weights), horizon))
