from __future__ import annotations

import numpy as np
import pytest

from stabloc import oracle
from stabloc.gd_engine import GDState, ghz_pd_closed_form, noisy_gd_state
from stabloc.graph_core import Bipartition, Graph, complete_graph, line_graph, star_graph
from stabloc.measures import (
    cluster4_gme_test,
    gd_density,
    gd_gmc,
    gd_negativity,
    ggm_pure,
    ghzd_gme_test,
    gme_test,
    gmc_x_state,
    min_vertex_cover,
    negativity,
    schmidt_bounds,
    schmidt_lower,
    schmidt_upper,
    star_x_state,
    to_path_frame,
    to_star_frame,
)
from stabloc.noise_channels import ChannelSpec
from stabloc.reduction import PauliSetup, reduce_setup

SQUARE = Graph.from_edges(4, [(0, 1), (1, 3), (3, 2), (2, 0)])


@pytest.mark.parametrize("n", range(2, 11))
def test_line_schmidt(n):
    assert schmidt_lower(line_graph(n)) == n // 2


def test_schmidt_examples():
    assert schmidt_bounds(star_graph(5)).lower == 1
    assert schmidt_upper(star_graph(4)) == 1
    assert schmidt_upper(complete_graph(4)) == 1
    b = schmidt_bounds(SQUARE)
    assert (b.lower, b.upper) == (2, 2)
    assert schmidt_upper(line_graph(2)) == 1


def test_schmidt_limits():
    with pytest.raises(ValueError):
        schmidt_upper(line_graph(11))
    with pytest.raises(ValueError):
        schmidt_lower(line_graph(25))


def test_vertex_cover():
    assert min_vertex_cover(star_graph(6).adj) == 1
    assert min_vertex_cover(line_graph(7).adj) == 3
    assert min_vertex_cover(complete_graph(5).adj) == 4
    assert min_vertex_cover(Graph.empty(3).adj) == 0


def test_ggm():
    assert ggm_pure(oracle.dense_graph_state(SQUARE)) == pytest.approx(0.5)
    assert ggm_pure(oracle.dense_graph_state(line_graph(2))) == pytest.approx(0.5)
    assert ggm_pure(oracle.dense_graph_state(Graph.empty(3))) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        ggm_pure(np.ones(4))


def test_negativity_examples():
    bell = oracle.density(oracle.dense_graph_state(line_graph(2))).reshape(4, 4)
    assert negativity(bell, Bipartition(2, 1)) == pytest.approx(0.5)
    flat = gd_density(GDState(line_graph(2), np.full(4, 0.25)))
    assert negativity(flat, Bipartition(2, 1)) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        negativity(np.diag([1.0, 0, 0, 0]) + np.eye(4, k=1), Bipartition(2, 1))


def test_composed_state_negativity_matches_dense():
    q = 0.3
    g = Graph.from_edges(4, [(0, 1), (0, 2), (1, 2), (0, 3), (1, 3)])
    rr = reduce_setup(g, [0, 1], PauliSetup.parse("2:Z 3:Z"))
    gd = noisy_gd_state(rr, {i: ChannelSpec("BPF", q) for i in range(4)})
    p = Bipartition(2, 1)
    assert gd_negativity(gd, p) == pytest.approx(negativity(gd_density(gd), p), abs=1e-12)


def test_fast_negativity_random():
    rng = np.random.default_rng(0)
    g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 2)])
    gd = GDState(g, rng.dirichlet(np.full(16, 0.3)))
    for mask in (1, 3, 5, 6):
        p = Bipartition(4, mask)
        assert gd_negativity(gd, p) == pytest.approx(negativity(gd_density(gd), p), abs=1e-12)


def test_ghzd_test():
    pure = GDState(star_graph(3), np.eye(8)[0])
    assert ghzd_gme_test(pure)
    flat = GDState(star_graph(3), np.r_[0.5, 0.5, np.zeros(6)])
    assert not ghzd_gme_test(flat)


def test_ghzd_along_closed_form():
    # with eps = 0 the coherence only vanishes at q = 1
    assert ghzd_gme_test(ghz_pd_closed_form(3, 0.99, 0.0))
    assert not ghzd_gme_test(ghz_pd_closed_form(3, 1.0, 0.0))


def test_gmc():
    assert gmc_x_state([0, 0, 0, 0], [0.5, 0, 0, 0]) == pytest.approx(1.0)
    assert gmc_x_state([0.25] * 4, [0, 0, 0, 0]) == 0.0
    for q in (0.1, 0.4):
        st = ghz_pd_closed_form(4, q, 0.3)
        assert gd_gmc(st) == pytest.approx(2 * max(0.0, st.coherence))
    with pytest.raises(ValueError):
        gmc_x_state([0.1, 0.1], [0.1])


def test_star_x_state_of_pure_star():
    pops, coh = star_x_state(GDState(star_graph(3), np.eye(8)[0]))
    assert pops[0] == pytest.approx(0.5) and coh[0] == pytest.approx(0.5)


def test_cluster_test():
    assert cluster4_gme_test(np.eye(16)[0])
    assert not cluster4_gme_test(np.full(16, 1 / 16))
    with pytest.raises(ValueError):
        cluster4_gme_test(np.ones(15) / 15)


def test_frames_for_orbit_members():
    gd = GDState(complete_graph(4), np.eye(16)[0])
    assert to_star_frame(gd) is not None
    sq = GDState(SQUARE, np.eye(16)[0])
    assert to_star_frame(sq) is None
    assert to_path_frame(sq) is not None
    assert gme_test(sq) and gme_test(gd)


def test_lc_transport_preserves_negativity():
    rng = np.random.default_rng(5)
    gd = GDState(SQUARE, rng.dirichlet(np.full(16, 0.5)))
    path = to_path_frame(gd)
    # same state up to local unitaries and a relabelling, so the multiset of cut values agrees
    vals = sorted(gd_negativity(gd, Bipartition(4, m)) for m in range(1, 15))
    vals2 = sorted(gd_negativity(path, Bipartition(4, m)) for m in range(1, 15))
    assert np.allclose(vals, vals2, atol=1e-12)
