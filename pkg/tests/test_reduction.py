from __future__ import annotations

from itertools import product

import numpy as np
import pytest

from stabloc import oracle
from stabloc.graph_core import AttributedGraph, CliffordTag, Graph, complete_graph, line_graph
from stabloc.reduction import (
    PauliSetup,
    apply_clifford_tag,
    classify_outcomes,
    measure_graph,
    reduce_setup,
    rotate_setup_to_z,
)

FORBID_GRAPH = Graph.from_edges(4, [(0, 1), (0, 2), (1, 2), (0, 3), (1, 3)])  # S = {0, 1}


def test_setup_parse_and_validation():
    s = PauliSetup.parse("pms: 3:Y 0:X")
    assert s.axes == ((0, 1), (3, 2))
    assert str(s) == "pms: 0:X 3:Y"
    with pytest.raises(ValueError):
        PauliSetup(((0, 0),))
    with pytest.raises(ValueError):
        PauliSetup.parse("0:Q")


def test_rotation_keeps_connectivity():
    g = FORBID_GRAPH
    ag = rotate_setup_to_z(g, PauliSetup.parse("2:X 3:X"))
    assert ag.graph == g
    assert ag.tags[2:] == (CliffordTag.H, CliffordTag.H)
    plain = rotate_setup_to_z(g, PauliSetup.parse("2:Z 3:Z"))
    assert set(plain.tags) == {CliffordTag.I}


def test_y_rotation_tag_matches_oracle():
    g = line_graph(3)
    ag = rotate_setup_to_z(g, PauliSetup.parse("1:Y"))
    psi = oracle.dense_graph_state(ag.graph, ag.tags)
    ref = oracle.apply_1q(oracle.dense_graph_state(g), (oracle.R @ oracle.H).conj().T, 1)
    assert oracle.fidelity_pure(psi, ref) == pytest.approx(1.0)


def test_clifford_rules():
    ag = AttributedGraph(line_graph(3), (CliffordTag.I, CliffordTag.H, CliffordTag.I))
    out = apply_clifford_tag(ag, 1, "R")
    assert out.graph.edges() == [(0, 1), (0, 2), (1, 2)]
    assert out.tags[0] == CliffordTag.R and out.tags[2] == CliffordTag.R
    red = AttributedGraph.plain(line_graph(2))
    assert apply_clifford_tag(red, 0, "Z").tags[0] == CliffordTag.Z
    twice = apply_clifford_tag(apply_clifford_tag(ag, 0, "H"), 0, "H")
    assert twice == ag


def test_forbid_example_x_setup():
    rr = reduce_setup(FORBID_GRAPH, [0, 1], PauliSetup.parse("2:X 3:X"))
    assert rr.reduced.tags == (CliffordTag.H, CliffordTag.Z, CliffordTag.I, CliffordTag.H)
    assert rr.regions.S1 == {2} and rr.regions.S2 == {3}
    cls = classify_outcomes(rr)
    assert cls.kind == "GammaBar"
    assert cls.forbidden == {(0, 1), (1, 0)}


def test_forbid_example_z_setup_is_gamma():
    rr = reduce_setup(FORBID_GRAPH, [0, 1], PauliSetup.parse("2:Z 3:Z"))
    assert classify_outcomes(rr).is_gamma


def test_all_z_echoes_input():
    g = complete_graph(5)
    rr = reduce_setup(g, [0, 1], PauliSetup.parse("2:Z 3:Z 4:Z"))
    assert rr.reduced.graph == g
    assert set(rr.reduced.tags) == {CliffordTag.I}


def test_path_x_gives_bell_pair():
    g = line_graph(4)  # S = ends, X on the path
    rr = reduce_setup(g, [0, 3], PauliSetup.parse("1:X 2:X"))
    for out in product((0, 1), repeat=2):
        pm = measure_graph(rr, out)
        assert pm.subgraph_on_S.edges() == [(0, 1)]
        assert pm.probability == pytest.approx(0.25)


def test_isolated_node_measurements():
    g = Graph.from_edges(3, [(0, 1)])
    rr = reduce_setup(g, [0, 1], PauliSetup.parse("2:Z"))
    for out in ((0,), (1,)):
        pm = measure_graph(rr, out)
        assert pm.probability == 0.5
        assert pm.subgraph_on_S == line_graph(2)
    # X on an isolated node: deterministic outcome, graph untouched
    rr = reduce_setup(g, [0, 1], PauliSetup.parse("2:X"))
    assert measure_graph(rr, (0,)).probability == 1.0
    assert measure_graph(rr, (1,)).probability == 0.0
    assert measure_graph(rr, (0,)).subgraph_on_S == line_graph(2)


def test_z_neighbours_keep_s_edge():
    g = Graph.from_edges(4, [(0, 1), (0, 2), (1, 3)])
    rr = reduce_setup(g, [0, 1], PauliSetup.parse("2:Z 3:Z"))
    assert measure_graph(rr, (1, 0)).subgraph_on_S.edges() == [(0, 1)]


def test_setup_must_cover_outside():
    with pytest.raises(ValueError):
        reduce_setup(line_graph(3), [0], PauliSetup.parse("1:Z"))


def test_outcome_length_checked():
    rr = reduce_setup(line_graph(3), [0], PauliSetup.parse("1:Z 2:Z"))
    with pytest.raises(ValueError):
        measure_graph(rr, (0,))


def test_post_measured_state_matches_oracle():
    g = FORBID_GRAPH
    setup = PauliSetup.parse("2:Y 3:X")
    rr = reduce_setup(g, [0, 1], setup)
    psi = oracle.dense_graph_state(g)
    for out in product((0, 1), repeat=2):
        p, state = oracle.project_pure(psi, setup.as_dict(), out)
        pm = measure_graph(rr, out)
        assert pm.probability == pytest.approx(p, abs=1e-12)
        if p > 0:
            mine = oracle.dense_graph_state(pm.subgraph_on_S)
            for pos, m in enumerate(pm.correction):
                mine = oracle.apply_1q(mine, m, pos)
            assert oracle.fidelity_pure(mine, state) > 1 - 1e-10


def test_op_count_bound_on_complete_graph():
    g = complete_graph(24)
    setup = PauliSetup(tuple((i, 2 if i < 20 else 3) for i in range(4, 24)))
    rr = reduce_setup(g, range(4), setup)
    assert rr.op_count <= 20 * (24 * 24 - 24 + 6)
    assert np.isfinite(rr.op_count)
