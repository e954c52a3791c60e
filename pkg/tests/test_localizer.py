from __future__ import annotations

import math

import numpy as np
import pytest

from stabloc import oracle
from stabloc.gd_engine import noisy_gd_state
from stabloc.graph_core import Bipartition, Graph, bits, is_connected, line_graph
from stabloc.localizer import (
    LatticeSpec,
    alpha_c_for,
    critical_noise,
    enumerate_setups,
    lgme_pure,
    noisy_lower_bound,
    placement,
    subgraph_census,
    toric_bf_closed_form,
    toric_state,
    two_loop_negativity,
)
from stabloc.measures import gd_density, gd_negativity, negativity
from stabloc.noise_channels import ChannelSpec
from stabloc.reduction import classify_outcomes


def test_enumerate_setups():
    assert len(list(enumerate_setups([4, 7]))) == 9
    setups = list(enumerate_setups([0, 1, 2, 3]))
    assert len(setups) == 81 and len(set(setups)) == 81
    assert setups[0].label() == "1111" and setups[-1].label() == "3333"
    with pytest.raises(ValueError):
        next(enumerate_setups(list(range(17))))


def test_lattice_parse():
    assert LatticeSpec.parse("toric:3").n_qubits == 18
    assert LatticeSpec.parse("ladder:2x8").n_qubits == 16
    assert LatticeSpec.parse("square:4x4").graph().n_edges() == 24
    with pytest.raises(ValueError):
        LatticeSpec.parse("hexagonal:3")


def test_two_qubits_joined_by_a_path():
    g = line_graph(6)
    res = lgme_pure(g, [1, 4])
    assert res.value == 1
    assert any(r.subgraph.edges() == [(0, 1)] for r in res.records)


def test_square_bulk_census():
    lat = LatticeSpec.parse("square:4x4")
    res = lgme_pure(lat.graph(), placement(lat, "bulk"))
    assert (res.n_subgraphs, res.n_orbits, res.value) == (38, 2, 2)
    assert sorted(v[0] for v in res.orbit_values.values()) == [1, 2]


def test_linear_census_only_lines():
    lat = LatticeSpec.parse("linear:12")
    res = lgme_pure(lat.graph(), placement(lat, "bulk:5"))
    assert res.n_subgraphs == 1 and res.value == 2
    conn = [r.subgraph for r in res.records if r.connected]
    assert all(g.n_edges() == 4 for g in conn)


def test_census_includes_single_edge():
    assert subgraph_census(line_graph(5), [2, 3]) >= 1


def test_ggm_census_value():
    lat = LatticeSpec.parse("square:4x4")
    assert lgme_pure(lat.graph(), placement(lat, "corner"), "ggm").value == pytest.approx(0.5)


@pytest.mark.parametrize(
    "lat,spec",
    [("linear:12", "bulk:4"), ("linear:12", "boundary:4"), ("ladder:2x6", "bulk:2"), ("square:5x5", "corner"), ("square:5x5", "bulk"), ("cubic:3", "corner")],
)
def test_alpha_c_is_gamma_and_connected(lat, spec):
    ns = alpha_c_for(LatticeSpec.parse(lat), spec)
    rr = ns.reduce()
    assert classify_outcomes(rr).is_gamma
    assert is_connected(rr.subgraph_on_S())


@pytest.mark.parametrize("n_p", [2, 3, 4])
def test_toric_loop_gives_star(n_p):
    ns = alpha_c_for(LatticeSpec("toric", (n_p,)), "loop")
    rr = ns.reduce()
    g = rr.subgraph_on_S()
    assert classify_outcomes(rr).is_gamma
    assert g.n_edges() == n_p - 1 and max(g.degree(i) for i in range(n_p)) == n_p - 1


def test_toric_graph_state_is_code_state():
    ts = toric_state(2, [0])
    psi = oracle.dense_graph_state(ts.graph.graph, ts.graph.tags)

    def expect(mask, p):
        v = psi
        for i in bits(mask):
            v = oracle.apply_1q(v, p, i)
        return np.vdot(psi, v).real

    tc = ts.code
    assert all(expect(m, oracle.Z) == pytest.approx(1) for m in tc.z_generators())
    assert all(expect(m, oracle.X) == pytest.approx(1) for m in tc.x_generators())


def test_two_loop_link():
    ns = alpha_c_for(LatticeSpec("toric", (3,)), "loops:1")
    rr = ns.reduce()
    g = rr.subgraph_on_S()
    a = [ns.s_nodes.index(v) for v in ns.parts[0]]
    b = [ns.s_nodes.index(v) for v in ns.parts[1]]
    assert any(g.has_edge(i, j) for i in a for j in b)
    rows = two_loop_negativity(3, 1, ChannelSpec("BF", 0.0), [0.0, 1.0])
    assert rows[0][1] > 0


def test_noiseless_bound_recovers_pure_state():
    ns = alpha_c_for(LatticeSpec.parse("linear:10"), "bulk:4")
    gd, v = noisy_lower_bound(ns, ChannelSpec("BF", 0.0))
    assert gd.lambdas[0] == 1.0 and v == 1.0


def test_cluster_criterion_near_qc():
    ns = alpha_c_for(LatticeSpec.parse("linear:10"), "bulk:4")
    qc = critical_noise(ns, "BF", 0.0)
    assert noisy_lower_bound(ns, ChannelSpec("BF", qc - 0.01))[1] == 1.0
    assert noisy_lower_bound(ns, ChannelSpec("BF", qc + 0.01))[1] == 0.0


def test_toric_bf_gmc_formula():
    ns = alpha_c_for(LatticeSpec("toric", (3,)), "loop")
    for q in (0.1, 0.5):
        f = q * (1 + 0.4 * (1 - q / 2))
        _, v = noisy_lower_bound(ns, ChannelSpec("BF", q, 0.4), "gmc")
        assert v == pytest.approx(2 * max(0.0, abs((1 - f) ** 3) / 2), abs=1e-12)


def test_toric_bf_closed_form_points():
    assert toric_bf_closed_form(1.0) == pytest.approx(2 - math.sqrt(2))
    assert toric_bf_closed_form(1e-6) == pytest.approx(1.0, abs=1e-5)
    ns = alpha_c_for(LatticeSpec("toric", (3,)), "loop")
    assert critical_noise(ns, "BF", 1.0, "gmc") == pytest.approx(2 - math.sqrt(2), abs=1e-5)


@pytest.mark.parametrize(
    "small,big,spec",
    [("linear:10", "linear:14", "bulk:4"), ("square:5x5", "square:6x6", "bulk"), ("ladder:2x6", "ladder:2x8", "bulk:2"), ("square:4x4", "square:6x6", "corner")],
)
def test_qc_independent_of_size(small, big, spec):
    a = critical_noise(alpha_c_for(LatticeSpec.parse(small), spec), "BF", 0.3)
    b = critical_noise(alpha_c_for(LatticeSpec.parse(big), spec), "BF", 0.3)
    assert a == b


def test_pd_transition_inside_unit_interval():
    ns = alpha_c_for(LatticeSpec.parse("square:5x5"), "corner")
    q = critical_noise(ns, "PD", 0.0)
    assert 0 < q < 1


def test_dense_negativity_cross_check():
    ns = alpha_c_for(LatticeSpec("toric", (3,)), "loops:1")
    rr = ns.reduce()
    st = noisy_gd_state(rr, {i: ChannelSpec("BF", 0.2) for i in range(rr.reduced.graph.n_nodes)})
    mask = sum(1 << ns.s_nodes.index(v) for v in ns.parts[0])
    p = Bipartition(len(ns.s_nodes), mask)
    assert gd_negativity(st, p) == pytest.approx(negativity(gd_density(st), p), abs=1e-10)


def test_placement_errors():
    with pytest.raises(ValueError):
        placement(LatticeSpec.parse("linear:4"), "bulk:4")
    with pytest.raises(ValueError):
        placement(LatticeSpec.parse("toric:3"), "loops:2")
    assert placement(LatticeSpec.parse("linear:8"), "nodes:3,1") == [1, 3]
    assert isinstance(LatticeSpec.parse("linear:8").graph(), Graph)
