import math

import numpy as np
import pytest

import treeshift

BINARY = {"family": "rootless-binary"}
HALF = {"kind": "constant", "value": math.sqrt(0.5)}


def test_validate_finite_and_circuit():
    info = treeshift.validate_tree({"vertices": ["r", "a", "b"], "edges": [["r", "a"], ["r", "b"]], "root": "r"})
    assert info["rooted"] and info["branching"] == "1"
    with pytest.raises(treeshift.TreeShiftError, match="CircuitFound"):
        treeshift.validate_tree({"vertices": ["a", "b"], "edges": [["a", "b"], ["b", "a"]]})


def test_binary_isometry_is_c10():
    out = treeshift.analyze(BINARY, HALF)
    assert out["classification"]["forward"] == "C1."
    assert all(abs(e["estimate"] - 1.0) < 1e-9 for e in out["alpha"])
    assert out["verdict"]["rule"] == "R2"


def test_not_a_contraction():
    with pytest.raises(treeshift.TreeShiftError, match="NotAContraction"):
        treeshift.analyze({"family": "rooted-path"}, {"kind": "constant", "value": 1.5})


def test_backward_cyclic_full_rank():
    out = treeshift.backward_cyclic({"branches": [[1.0] * 10, [1.0] * 10], "tail": 1}, length=16, window=50)
    v = out["verification"]
    assert v["rank"] == v["dimension"] == 102


def test_tilde_similarity():
    out = treeshift.similarity({"family": "tilde"}, {"kind": "family", "name": "geometric", "params": {"scale": 1, "ratio": 0.5}})
    assert out["residual"] < 1e-12


def test_krylov_rank_jordan_block():
    a = np.diag(np.ones(3), 1)
    assert treeshift.krylov_rank(a, np.eye(4)[3]) == 4
    assert treeshift.numerical_rank(np.eye(3)) == 3
