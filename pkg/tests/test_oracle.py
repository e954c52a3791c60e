from __future__ import annotations

import numpy as np
import pytest

from stabloc import oracle
from stabloc.graph_core import Graph, line_graph, star_graph


def test_single_edge_state():
    psi = oracle.dense_graph_state(line_graph(2)).reshape(-1)
    assert np.allclose(psi, np.array([1, 1, 1, -1]) / 2)


def test_stabilizers():
    g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)])
    psi = oracle.dense_graph_state(g)
    for i in range(4):
        v = oracle.apply_1q(psi, oracle.X, i)
        for j in g.neighbors(i):
            v = oracle.apply_1q(v, oracle.Z, j)
        assert np.vdot(psi, v).real == pytest.approx(1.0)


def test_size_cap():
    with pytest.raises(ValueError):
        oracle.dense_graph_state(Graph.empty(oracle.MAX_QUBITS + 1))


def test_graph_basis_is_orthonormal():
    b = oracle.graph_basis_states(star_graph(3))
    assert np.allclose(b.conj().T @ b, np.eye(8))


def test_channel_keeps_trace():
    rho = oracle.density(oracle.dense_graph_state(line_graph(3)))
    out = oracle.apply_channels(rho, {0: (0.7, 0.1, 0.1, 0.1), 2: (0.5, 0, 0.5, 0)})
    m = out.reshape(8, 8)
    assert np.trace(m).real == pytest.approx(1.0)
    assert np.allclose(m, m.conj().T)


def test_projection_probabilities_sum_to_one():
    psi = oracle.dense_graph_state(line_graph(4))
    total = sum(oracle.project_pure(psi, {1: 2, 3: 1}, (a, b))[0] for a in (0, 1) for b in (0, 1))
    assert total == pytest.approx(1.0)
