"""Pauli measurements on graph states as graph transformations.

A setup is first rotated to Z measurements by tagging nodes (step A); the
tagged graph is then reduced with two state-preserving moves until every
measured node is either a red node (plain Z measurement) or an isolated
white circle whose outcome is fixed by the others (step B).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Mapping, Sequence

import numpy as np

from .graph_core import (
    FILL,
    SHAPE,
    SIGN,
    AttributedGraph,
    CliffordTag,
    Graph,
    bits,
    lc_rows,
    mask_of,
    popcount,
    reshape_code,
)

AXES = {"X": 1, "Y": 2, "Z": 3}
AXIS_NAMES = {1: "X", 2: "Y", 3: "Z"}

# Whether the step-1 loop also acts on white nodes inside S (see notes in README).
REDUCE_INSIDE_S = False
ENUMERATION_LIMIT = 20


@dataclass(frozen=True)
class PauliSetup:
    axes: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        seen = set()
        for node, axis in self.axes:
            if axis not in (1, 2, 3):
                raise ValueError(f"axis {axis} on node {node} is not one of 1, 2, 3")
            if node in seen:
                raise ValueError(f"node {node} listed twice")
            seen.add(node)

    @classmethod
    def from_mapping(cls, axes: Mapping[int, int]) -> "PauliSetup":
        return cls(tuple(sorted(axes.items())))

    @classmethod
    def parse(cls, text: str) -> "PauliSetup":
        """Parse ``pms: 0:X 3:Y 4:Z`` (the ``pms:`` prefix is optional)."""
        body = text.strip()
        if body.startswith("pms:"):
            body = body[4:]
        axes = {}
        for tok in body.split():
            node, _, ax = tok.partition(":")
            if ax.upper() not in AXES:
                raise ValueError(f"bad setup token {tok!r}")
            axes[int(node)] = AXES[ax.upper()]
        return cls.from_mapping(axes)

    def as_dict(self) -> dict[int, int]:
        return dict(self.axes)

    @property
    def nodes(self) -> tuple[int, ...]:
        return tuple(n for n, _ in self.axes)

    def label(self) -> str:
        return "".join(str(a) for _, a in self.axes)

    def __str__(self) -> str:
        return "pms: " + " ".join(f"{n}:{AXIS_NAMES[a]}" for n, a in self.axes)


@dataclass(frozen=True)
class Regions:
    S: frozenset[int]
    S1: frozenset[int]
    S2: frozenset[int]


@dataclass(frozen=True)
class ReductionResult:
    reduced: AttributedGraph
    regions: Regions
    op_count: int
    z_set: frozenset[int]
    setup: PauliSetup | None = None

    @property
    def measured(self) -> tuple[int, ...]:
        return tuple(sorted(self.regions.S1 | self.regions.S2))

    @property
    def white_nodes(self) -> tuple[int, ...]:
        """Measured nodes left as white circles; their outcomes are fixed by the others."""
        return tuple(sorted(set(self.measured) - self.z_set))

    def subgraph_on_S(self) -> Graph:
        return self.reduced.graph.induced(sorted(self.regions.S))


@dataclass(frozen=True)
class OutcomeClassification:
    kind: str
    forbidden: frozenset[tuple[int, ...]]

    @property
    def is_gamma(self) -> bool:
        return self.kind == "Gamma"


@dataclass(frozen=True)
class PostMeasurement:
    subgraph_on_S: Graph
    correction: tuple[np.ndarray, ...]
    probability: float
    tags: tuple[CliffordTag, ...] | None = None


class ReductionError(RuntimeError):
    pass


class _Work:
    """Mutable working copy used inside the reduction."""

    __slots__ = ("adj", "tags", "ops")

    def __init__(self, adj: Iterable[int], tags: Iterable[int]):
        self.adj = list(adj)
        self.tags = list(tags)
        self.ops = 0

    def lc(self, i: int) -> None:
        self.ops += lc_rows(self.adj, i)

    def flip(self, i: int, bit: int) -> None:
        self.tags[i] ^= bit
        self.ops += 1

    def reshape(self, i: int) -> None:
        self.tags[i] = reshape_code(self.tags[i])
        self.ops += 1

    def apply(self, u: str, i: int) -> None:
        """Left-multiply the tag of node i by u in {H, Z, R}."""
        t = self.tags[i]
        if u == "H":
            self.flip(i, FILL)
        elif u == "Z":
            if not t & FILL:
                self.flip(i, SIGN)
            else:
                for j in bits(self.adj[i]):
                    self.flip(j, SIGN)
                if t & SHAPE:
                    self.flip(i, SIGN)
        elif u == "R":
            if not t & FILL:
                self.reshape(i)
                return
            if t & SHAPE:
                self.flip(i, FILL)
                self.flip(i, SHAPE)
                flip_nb = not t & SIGN
            else:
                flip_nb = bool(t & SIGN)
            self.lc(i)
            nb = self.adj[i]
            for j in bits(nb):
                self.reshape(j)
            if flip_nb:
                for j in bits(nb):
                    self.flip(j, SIGN)
        else:
            raise ValueError(f"unsupported unitary {u!r}")

    def b1(self, i: int) -> None:
        """State-preserving move on a diamond node."""
        self.flip(i, FILL)
        self.lc(i)
        nb = self.adj[i]
        for j in bits(nb):
            self.reshape(j)
        self.flip(i, SIGN)
        if self.tags[i] & SIGN:
            for j in bits(nb):
                self.flip(j, SIGN)

    def b2(self, i: int, j: int) -> None:
        """State-preserving move along an edge between two circle nodes."""
        adj = self.adj
        common = adj[i] & adj[j]
        minus = [v for v in (i, j) if self.tags[v] & SIGN]
        self.flip(i, FILL)
        self.flip(j, FILL)
        self.lc(i)
        self.lc(j)
        self.lc(i)
        for k in bits(common):
            self.flip(k, SIGN)
        for v in minus:
            self.flip(v, SIGN)
            for k in bits(adj[v]):
                self.flip(k, SIGN)

    def rotate(self, setup: Iterable[tuple[int, int]]) -> None:
        for node, axis in setup:
            if axis == 1:
                self.apply("H", node)
            elif axis == 2:
                # U^dagger = H R^dagger = H R Z
                self.apply("Z", node)
                self.apply("R", node)
                self.apply("H", node)

    def reduce(self, s_mask: int, inside_s: bool = REDUCE_INSIDE_S) -> None:
        n = len(self.adj)
        full = (1 << n) - 1
        sp_mask = full ^ s_mask
        scope = full if inside_s else sp_mask
        cap = 4 * n * n + 16
        passes = 0
        adj, tags = self.adj, self.tags
        while True:
            while True:
                passes += 1
                if passes > cap:
                    raise ReductionError("reduction did not terminate")
                acted = False
                for i in bits(scope):
                    if tags[i] & 3 == 3:
                        self.b1(i)
                        acted = True
                for i in bits(scope):
                    for j in bits(adj[i] & scope & ~((2 << i) - 1)):
                        if tags[i] & 3 == 1 and tags[j] & 3 == 1 and (adj[i] >> j) & 1:
                            self.b2(i, j)
                            acted = True
                if not acted:
                    break
            acted = False
            for i in bits(sp_mask):
                for j in bits(adj[i] & s_mask):
                    if tags[i] & 3 != 1 or not (adj[i] >> j) & 1:
                        break
                    if not tags[j] & SHAPE:
                        self.b2(i, j)
                    else:
                        self.b1(j)
                        self.b1(i)
                    acted = True
            if not acted:
                return


def _tags_tuple(tags: Iterable[int]) -> tuple[CliffordTag, ...]:
    return tuple(CliffordTag(t) for t in tags)


def _as_attributed(g: Graph | AttributedGraph) -> AttributedGraph:
    return g if isinstance(g, AttributedGraph) else AttributedGraph.plain(g)


def rotate_setup_to_z(g: Graph | AttributedGraph, setup: PauliSetup) -> AttributedGraph:
    ag = _as_attributed(g)
    for node, _ in setup.axes:
        if not 0 <= node < ag.graph.n_nodes:
            raise IndexError(f"node {node} out of range")
    w = _Work(ag.graph.adj, ag.tags)
    w.rotate(setup.axes)
    return AttributedGraph(Graph(ag.graph.n_nodes, tuple(w.adj)), _tags_tuple(w.tags))


def apply_clifford_tag(ag: AttributedGraph, i: int, u: str) -> AttributedGraph:
    if not 0 <= i < ag.graph.n_nodes:
        raise IndexError(f"node {i} out of range")
    w = _Work(ag.graph.adj, ag.tags)
    w.apply(u, i)
    return AttributedGraph(Graph(ag.graph.n_nodes, tuple(w.adj)), _tags_tuple(w.tags))


def regions_for(g: Graph, s_nodes: Iterable[int]) -> Regions:
    s = frozenset(s_nodes)
    nb = 0
    for i in s:
        nb |= g.adj[i]
    s1 = frozenset(bits(nb & ~mask_of(s)))
    s2 = frozenset(range(g.n_nodes)) - s - s1
    return Regions(s, s1, s2)


def check_properties(ag: AttributedGraph, regions: Regions) -> None:
    """Raise ReductionError unless P1-P3 hold."""
    tags = ag.tags
    for j in regions.S2:
        if tags[j] in (CliffordTag.HR, CliffordTag.HRZ):
            raise ReductionError(f"P1 violated at node {j}")
    for j in regions.S1:
        if tags[j] & FILL:
            raise ReductionError(f"P2 violated at node {j}")
    white = mask_of(j for j in regions.S2 if tags[j] & 3 == 1)
    for j in bits(white):
        if ag.graph.adj[j] & white:
            raise ReductionError(f"P3 violated at node {j}")


def reduce_graph(
    ag: AttributedGraph, regions: Regions | Iterable[int], setup: PauliSetup | None = None
) -> ReductionResult:
    s_nodes = regions.S if isinstance(regions, Regions) else frozenset(regions)
    n = ag.graph.n_nodes
    w = _Work(ag.graph.adj, ag.tags)
    w.reduce(mask_of(s_nodes))
    g2 = Graph(n, tuple(w.adj))
    out = AttributedGraph(g2, _tags_tuple(w.tags))
    reg = regions_for(g2, s_nodes)
    check_properties(out, reg)
    z_set = frozenset(j for j in reg.S1 | reg.S2 if not w.tags[j] & FILL)
    return ReductionResult(out, reg, w.ops, z_set, setup)


def reduce_setup(
    g: Graph | AttributedGraph, s_nodes: Iterable[int], setup: PauliSetup
) -> ReductionResult:
    """Step A followed by step B; op_count covers both."""
    ag = _as_attributed(g)
    s = frozenset(s_nodes)
    if set(setup.nodes) != set(range(ag.graph.n_nodes)) - s:
        raise ValueError("setup must cover exactly the nodes outside S")
    w = _Work(ag.graph.adj, ag.tags)
    w.rotate(setup.axes)
    w.reduce(mask_of(s))
    g2 = Graph(ag.graph.n_nodes, tuple(w.adj))
    out = AttributedGraph(g2, _tags_tuple(w.tags))
    reg = regions_for(g2, s)
    check_properties(out, reg)
    z_set = frozenset(j for j in reg.S1 | reg.S2 if not w.tags[j] & FILL)
    return ReductionResult(out, reg, w.ops, z_set, setup)


def subgraph_adjacency(adj: Sequence[int], tags: Sequence[int], s_mask: int, setup: Sequence[tuple[int, int]]) -> tuple[int, ...]:
    """Fast path for sweeps: adjacency rows of G'[S] (still in global labels) for one setup."""
    w = _Work(adj, tags)
    w.rotate(setup)
    w.reduce(s_mask)
    return tuple(w.adj[i] & s_mask for i in bits(s_mask))


def _cascade(rr: ReductionResult, l_bits: Mapping[int, int]) -> dict[int, int]:
    """Sign flips picked up by unmeasured and white nodes from the Z outcomes."""
    adj = rr.reduced.graph.adj
    flips: dict[int, int] = {}
    for i in rr.z_set:
        if l_bits[i]:
            for k in bits(adj[i]):
                if k not in rr.z_set:
                    flips[k] = flips.get(k, 0) ^ 1
    return flips


def classify_outcomes(rr: ReductionResult) -> OutcomeClassification:
    measured = rr.measured
    white = rr.white_nodes
    if not white:
        return OutcomeClassification("Gamma", frozenset())
    if len(measured) > ENUMERATION_LIMIT:
        raise ValueError(f"forbidden-set enumeration limited to {ENUMERATION_LIMIT} measured nodes")
    tags = rr.reduced.tags
    z_nodes = [j for j in measured if j in rr.z_set]
    forbidden = set()
    for k in product((0, 1), repeat=len(measured)):
        out = dict(zip(measured, k))
        flips = _cascade(rr, {j: out[j] for j in z_nodes})
        for j in white:
            if out[j] != ((tags[j] >> 2) & 1) ^ flips.get(j, 0):
                forbidden.add(k)
                break
    return OutcomeClassification("GammaBar", frozenset(forbidden))


def allowed_outcome(rr: ReductionResult) -> tuple[int, ...]:
    """One outcome with nonzero probability: +1 on every Z node, the forced values elsewhere."""
    tags = rr.reduced.tags
    return tuple(0 if j in rr.z_set else (tags[j] >> 2) & 1 for j in rr.measured)


def _correction_matrices(tags: Sequence[int]) -> tuple[np.ndarray, ...]:
    from .oracle import tag_matrix

    return tuple(tag_matrix(t) for t in tags)


def measure_graph(rr: ReductionResult, outcome: Sequence[int]) -> PostMeasurement:
    """Post-measured state on S as (G_S, correction, probability) for one outcome string.

    outcome bits follow ascending measured-node order, 0 for +1 and 1 for -1.
    """
    measured = rr.measured
    if len(outcome) != len(measured):
        raise ValueError(f"outcome must have {len(measured)} entries")
    out = dict(zip(measured, outcome))
    adj = list(rr.reduced.graph.adj)
    tags = list(rr.reduced.tags)
    z_nodes = [j for j in measured if j in rr.z_set]
    # Z rule: delete the node, Z on its neighbours when the outcome is -1
    for j in z_nodes:
        nb = adj[j]
        if out[j]:
            for k in bits(nb):
                tags[k] ^= SIGN
        for k in bits(nb):
            adj[k] &= ~(1 << j)
        adj[j] = 0
    s_sorted = sorted(rr.regions.S)
    extra: dict[int, np.ndarray] = {}
    free = len(z_nodes)
    for j in rr.white_nodes:
        if adj[j] & ~(1 << j):
            w_adj, w_extra, ok = _x_rule(adj, tags, j, out[j])
            adj = w_adj
            for k, m in w_extra.items():
                extra[k] = m @ extra.get(k, np.eye(2, dtype=complex))
            free += 1
            continue
        if out[j] != (tags[j] >> 2) & 1:
            g_s = Graph(len(adj), tuple(adj)).induced(s_sorted)
            return PostMeasurement(g_s, (), 0.0, None)
    g_s = Graph(len(adj), tuple(adj)).induced(s_sorted)
    s_tags = [tags[i] for i in s_sorted]
    mats = list(_correction_matrices(s_tags))
    exact = not any(k in extra for k in s_sorted)
    for pos, k in enumerate(s_sorted):
        if k in extra:
            mats[pos] = mats[pos] @ extra[k]
    prob = 2.0 ** (-free)
    return PostMeasurement(g_s, tuple(mats), prob, _tags_tuple(s_tags) if exact else None)


def _x_rule(adj: list[int], tags: list[int], j: int, bit: int):
    """X measurement on a non-isolated white circle j, viewed as X on the graph node.

    Uses helper a = lowest-index neighbour; returns the new rows and the
    corrections that act on the remaining graph state, keyed by node.
    """
    from .oracle import H as _H, Z as _Z

    sign = (tags[j] >> 2) & 1
    b = bit ^ sign  # outcome of X on the underlying graph node
    a = (adj[j] & -adj[j]).bit_length() - 1
    na, nj = adj[a], adj[j]
    # G -> O_a(O_j(O_a(G)) \ j)
    rows = list(adj)
    lc_rows(rows, a)
    lc_rows(rows, j)
    lc_rows(rows, a)
    for k in bits(rows[j]):
        rows[k] &= ~(1 << j)
    rows[j] = 0
    extra: dict[int, np.ndarray] = {}
    ry = _Z @ _H  # exp(i pi/4 Y) up to phase
    if b == 0:
        extra[a] = ry
        others = nj & ~na & ~(1 << a)
    else:
        extra[a] = ry.conj().T
        others = na & ~nj & ~(1 << j)
    for k in bits(others):
        extra[k] = _Z @ extra.get(k, np.eye(2, dtype=complex))
    return rows, extra, True
