"""Simple graphs over GF(2) bitsets, Clifford node tags and local complementation.

Adjacency rows are Python ints used as bitsets, so the same code path serves
any number of nodes. Every public function returns a new value.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from itertools import combinations, permutations, product
from typing import Iterable, Iterator, Sequence

ORBIT_LIMIT = 8


def bits(mask: int) -> Iterator[int]:
    """Yield the indices of the set bits of ``mask`` in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def mask_of(nodes: Iterable[int]) -> int:
    m = 0
    for i in nodes:
        m |= 1 << i
    return m


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph; ``adj[i]`` is the neighbourhood bitset of node i."""

    n_nodes: int
    adj: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.adj) != self.n_nodes:
            raise ValueError("adjacency has wrong number of rows")
        full = (1 << self.n_nodes) - 1
        for i, row in enumerate(self.adj):
            if row & ~full:
                raise ValueError(f"row {i} references a node outside the graph")
            if (row >> i) & 1:
                raise ValueError(f"self-loop on node {i}")
            for j in bits(row):
                if not (self.adj[j] >> i) & 1:
                    raise ValueError(f"asymmetric adjacency at ({i}, {j})")

    @classmethod
    def from_edges(cls, n_nodes: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        rows = [0] * n_nodes
        for i, j in edges:
            if not (0 <= i < n_nodes and 0 <= j < n_nodes):
                raise ValueError(f"edge ({i}, {j}) out of range")
            if i == j:
                raise ValueError(f"self-loop on node {i}")
            rows[i] |= 1 << j
            rows[j] |= 1 << i
        return cls(n_nodes, tuple(rows))

    @classmethod
    def empty(cls, n_nodes: int) -> "Graph":
        return cls(n_nodes, (0,) * n_nodes)

    def neighbors(self, i: int) -> list[int]:
        return list(bits(self.adj[i]))

    def has_edge(self, i: int, j: int) -> bool:
        return bool((self.adj[i] >> j) & 1)

    def degree(self, i: int) -> int:
        return popcount(self.adj[i])

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.n_nodes) for j in bits(self.adj[i] >> (i + 1) << (i + 1))]

    def n_edges(self) -> int:
        return sum(popcount(r) for r in self.adj) // 2

    def induced(self, nodes: Sequence[int]) -> "Graph":
        """Induced subgraph relabelled to 0..len(nodes)-1 in the given order."""
        index = {v: k for k, v in enumerate(nodes)}
        rows = []
        for v in nodes:
            rows.append(mask_of(index[u] for u in bits(self.adj[v]) if u in index))
        return Graph(len(nodes), tuple(rows))

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Graph with node i renamed to perm[i]."""
        rows = [0] * self.n_nodes
        for i, row in enumerate(self.adj):
            rows[perm[i]] = mask_of(perm[j] for j in bits(row))
        return Graph(self.n_nodes, tuple(rows))


class CliffordTag(IntEnum):
    """Node tag V = H^f R^s Z^sg stored as bits f (1), s (2), sg (4).

    f: fill red(0)/white(1); s: shape circle(0)/diamond(1); sg: sign +(0)/-(1).
    """

    I = 0
    H = 1
    R = 2
    HR = 3
    Z = 4
    HZ = 5
    RZ = 6
    HRZ = 7

    @property
    def fill(self) -> int:
        return self & 1

    @property
    def shape(self) -> int:
        return (self >> 1) & 1

    @property
    def sign(self) -> int:
        return (self >> 2) & 1

    @classmethod
    def from_attributes(cls, shape: int, fill: int, sign: int) -> "CliffordTag":
        return cls(fill | (shape << 1) | (sign << 2))


FILL, SHAPE, SIGN = 1, 2, 4
RED_TAGS = frozenset({CliffordTag.I, CliffordTag.Z, CliffordTag.R, CliffordTag.RZ})
WHITE_CIRCLE_TAGS = frozenset({CliffordTag.H, CliffordTag.HZ})


def reshape_code(t: int) -> int:
    """Right-multiply by R: circle becomes diamond, diamond becomes circle with flipped sign."""
    if t & SHAPE:
        return t ^ SHAPE ^ SIGN
    return t | SHAPE


ATTRIBUTE_OPS = ("flip_shape", "flip_fill", "flip_sign", "reshape")


def attribute_code(t: int, op: str) -> int:
    if op == "flip_fill":
        return t ^ FILL
    if op == "flip_sign":
        return t ^ SIGN
    if op == "flip_shape":
        return t ^ SHAPE
    if op == "reshape":
        return reshape_code(t)
    raise ValueError(f"unknown attribute operation {op!r}")


@dataclass(frozen=True)
class AttributedGraph:
    graph: Graph
    tags: tuple[CliffordTag, ...]

    def __post_init__(self) -> None:
        if len(self.tags) != self.graph.n_nodes:
            raise ValueError("one tag per node is required")

    @classmethod
    def plain(cls, g: Graph) -> "AttributedGraph":
        return cls(g, (CliffordTag.I,) * g.n_nodes)


@dataclass(frozen=True)
class Bipartition:
    n_nodes: int
    mask: int

    def __post_init__(self) -> None:
        full = (1 << self.n_nodes) - 1
        if self.mask & ~full or self.mask == 0 or self.mask == full:
            raise ValueError("both parts of a bipartition must be non-empty")

    @property
    def complement(self) -> "Bipartition":
        return Bipartition(self.n_nodes, ((1 << self.n_nodes) - 1) ^ self.mask)


def _check_node(g: Graph, i: int) -> None:
    if not 0 <= i < g.n_nodes:
        raise IndexError(f"node {i} out of range for {g.n_nodes} nodes")


def lc_rows(adj: list[int], i: int) -> int:
    """Local complementation at i on a mutable row list; returns the number of toggled edges."""
    nb = adj[i]
    toggled = 0
    for j in bits(nb):
        flip = nb & ~(1 << j)
        adj[j] ^= flip
        toggled += popcount(flip)
    return toggled // 2


def local_complement(g: Graph, i: int) -> Graph:
    _check_node(g, i)
    rows = list(g.adj)
    lc_rows(rows, i)
    return Graph(g.n_nodes, tuple(rows))


def local_complement_edge(g: Graph, i: int, j: int) -> Graph:
    _check_node(g, i)
    _check_node(g, j)
    if not g.has_edge(i, j):
        raise ValueError(f"edge ({i}, {j}) is absent")
    rows = list(g.adj)
    lc_rows(rows, i)
    lc_rows(rows, j)
    lc_rows(rows, i)
    return Graph(g.n_nodes, tuple(rows))


def apply_attribute_op(ag: AttributedGraph, i: int, op: str) -> AttributedGraph:
    _check_node(ag.graph, i)
    tags = list(ag.tags)
    tags[i] = CliffordTag(attribute_code(tags[i], op))
    return AttributedGraph(ag.graph, tuple(tags))


def gf2_rank(rows: Iterable[int]) -> int:
    """Rank over GF(2) of a list of bitset rows."""
    basis: dict[int, int] = {}
    rank = 0
    for r in rows:
        while r:
            top = r.bit_length() - 1
            if top in basis:
                r ^= basis[top]
            else:
                basis[top] = r
                rank += 1
                break
    return rank


def gf2_rank_offdiagonal(g: Graph, p: Bipartition) -> int:
    if p.n_nodes != g.n_nodes:
        raise ValueError("bipartition size does not match the graph")
    a = p.mask
    return gf2_rank(g.adj[j] & a for j in range(g.n_nodes) if not (a >> j) & 1)


def connected_components(g: Graph) -> list[frozenset[int]]:
    seen = 0
    comps = []
    for start in range(g.n_nodes):
        if (seen >> start) & 1:
            continue
        comp = frontier = 1 << start
        while frontier:
            nxt = 0
            for v in bits(frontier):
                nxt |= g.adj[v]
            frontier = nxt & ~comp
            comp |= frontier
        seen |= comp
        comps.append(frozenset(bits(comp)))
    return comps


def is_connected(g: Graph) -> bool:
    return g.n_nodes > 0 and len(connected_components(g)) == 1


def _code(adj: Sequence[int], order: Sequence[int]) -> int:
    """Upper-triangle adjacency word of the graph under the node order ``order``."""
    n = len(order)
    code = 0
    for a in range(n):
        row = adj[order[a]]
        for b in range(a + 1, n):
            code = (code << 1) | ((row >> order[b]) & 1)
    return code


def canonical_form(g: Graph, limit: int = ORBIT_LIMIT) -> tuple[int, int]:
    """Isomorphism-invariant key ``(n, code)``.

    Nodes are first split into cells by (degree, sorted neighbour degrees);
    the key is the maximal adjacency word over all cell-respecting orderings.
    """
    n = g.n_nodes
    if n > limit:
        raise ValueError(f"canonical form limited to {limit} nodes")
    deg = [popcount(r) for r in g.adj]
    inv = [(deg[i], tuple(sorted(deg[j] for j in bits(g.adj[i])))) for i in range(n)]
    cells: dict[tuple, list[int]] = {}
    for i in range(n):
        cells.setdefault(inv[i], []).append(i)
    ordered = [cells[k] for k in sorted(cells)]
    best = -1
    for choice in product(*(permutations(c) for c in ordered)):
        order = [v for cell in choice for v in cell]
        c = _code(g.adj, order)
        if c > best:
            best = c
    return (n, best)


def graph_from_canonical(key: tuple[int, int]) -> Graph:
    n, code = key
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    edges = [pr for k, pr in enumerate(pairs) if (code >> (len(pairs) - 1 - k)) & 1]
    return Graph.from_edges(n, edges)


def lc_orbit(g: Graph, limit: int = ORBIT_LIMIT) -> frozenset[tuple[int, int]]:
    """Canonical representatives of every graph reachable by local complementation."""
    if g.n_nodes > limit:
        raise ValueError(f"orbit computation limited to {limit} nodes")
    start = canonical_form(g, limit)
    seen = {start}
    stack = [start]
    while stack:
        h = graph_from_canonical(stack.pop())
        for i in range(h.n_nodes):
            k = canonical_form(local_complement(h, i), limit)
            if k not in seen:
                seen.add(k)
                stack.append(k)
    return frozenset(seen)


def orbit_key(g: Graph, limit: int = ORBIT_LIMIT) -> tuple[int, int]:
    """Smallest canonical representative of the local-complementation orbit of g."""
    return min(lc_orbit(g, limit))


def bipartitions(n: int) -> Iterator[Bipartition]:
    """All unordered bipartitions, with node n-1 always on the B side."""
    for mask in range(1, 1 << (n - 1)):
        yield Bipartition(n, mask)


def line_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def star_graph(n: int, hub: int = 0) -> Graph:
    return Graph.from_edges(n, [(hub, j) for j in range(n) if j != hub])


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, combinations(range(n), 2))
