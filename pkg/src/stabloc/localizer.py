"""Setup sweeps, lattices, lower bounds on localizable entanglement and critical noise."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from itertools import product
from typing import Iterator, Mapping, Sequence

import numpy as np

from .gd_engine import GDState, noisy_gd_state, noisy_outcome
from .graph_core import (
    AttributedGraph,
    Bipartition,
    CliffordTag,
    Graph,
    bits,
    canonical_form,
    is_connected,
    line_graph,
    mask_of,
    orbit_key,
)
from .measures import gd_gmc, gd_gmc_margin, gd_negativity, gme_test, ggm_pure, schmidt_bounds
from .noise_channels import ChannelSpec, dp_domain
from .reduction import PauliSetup, ReductionResult, allowed_outcome, classify_outcomes, reduce_setup

SWEEP_LIMIT = 16
SCAN_STEP = 1e-3
BISECT_TOL = 1e-6
KINDS = ("linear", "ladder", "square", "cubic", "toric")


# ---------------------------------------------------------------- lattices


@dataclass(frozen=True)
class LatticeSpec:
    kind: str
    dims: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown lattice kind {self.kind!r}")
        if not self.dims or any(d < 1 for d in self.dims):
            raise ValueError("lattice dimensions must be positive")
        if self.kind == "ladder" and len(self.dims) == 2 and self.dims[0] != 2:
            raise ValueError("a ladder has exactly two legs")

    @classmethod
    def parse(cls, text: str) -> "LatticeSpec":
        """``linear:12``, ``ladder:2x8`` (or ``ladder:8`` rungs), ``square:4x4``, ``cubic:3``, ``toric:3``."""
        kind, _, dims = text.strip().partition(":")
        if not dims:
            raise ValueError("lattice spec needs dimensions, e.g. square:4x4")
        return cls(kind.strip().lower(), tuple(int(d) for d in dims.lower().split("x")))

    @property
    def n_qubits(self) -> int:
        return self.graph().n_nodes if self.kind != "toric" else 2 * self.dims[0] ** 2

    def rungs(self) -> int:
        return self.dims[-1]

    def graph(self) -> Graph:
        if self.kind == "linear":
            return line_graph(self.dims[0])
        if self.kind == "ladder":
            return ladder_graph(self.rungs())
        if self.kind == "square":
            lx = self.dims[0]
            ly = self.dims[1] if len(self.dims) > 1 else lx
            return square_graph(lx, ly)
        if self.kind == "cubic":
            return cubic_graph(self.dims[0])
        return toric_state(self.dims[0], [0]).graph.graph


def ladder_graph(rungs: int) -> Graph:
    """Node (leg l, rung r) is 2r + l."""
    edges = []
    for r in range(rungs):
        edges.append((2 * r, 2 * r + 1))
        if r + 1 < rungs:
            edges += [(2 * r, 2 * r + 2), (2 * r + 1, 2 * r + 3)]
    return Graph.from_edges(2 * rungs, edges)


def square_graph(lx: int, ly: int | None = None) -> Graph:
    """Open square grid, node (x, y) is y * lx + x."""
    ly = lx if ly is None else ly
    edges = []
    for y in range(ly):
        for x in range(lx):
            i = y * lx + x
            if x + 1 < lx:
                edges.append((i, i + 1))
            if y + 1 < ly:
                edges.append((i, i + lx))
    return Graph.from_edges(lx * ly, edges)


def cubic_graph(l: int) -> Graph:
    """Open cubic grid, node (x, y, z) is x + l y + l^2 z."""
    edges = []
    for z, y, x in product(range(l), repeat=3):
        i = x + l * y + l * l * z
        if x + 1 < l:
            edges.append((i, i + 1))
        if y + 1 < l:
            edges.append((i, i + l))
        if z + 1 < l:
            edges.append((i, i + l * l))
    return Graph.from_edges(l**3, edges)


def placement(lattice: LatticeSpec, spec: str) -> list[int]:
    """Subsystem nodes for a placement string.

    ``nodes:0,3,5`` works everywhere. linear: ``bulk:n``, ``boundary:n``.
    ladder: ``bulk:R``, ``boundary:R`` (R rungs), ``leg:n``. square/cubic:
    ``bulk``, ``boundary``, ``corner`` plaquettes. toric: ``loop``, ``loops:d``.
    """
    name, _, arg = spec.strip().partition(":")
    name = name.lower()
    if name == "nodes":
        nodes = sorted({int(v) for v in arg.split(",") if v.strip()})
        if not nodes or nodes[-1] >= lattice.n_qubits or nodes[0] < 0:
            raise ValueError("subsystem nodes out of range")
        return nodes
    k = lattice.kind
    if k == "linear" and name in ("bulk", "boundary"):
        n, total = int(arg), lattice.dims[0]
        start = 0 if name == "boundary" else (total - n) // 2
        if n > total or (name == "bulk" and start == 0):
            raise ValueError("lattice too small for this placement")
        return list(range(start, start + n))
    if k == "ladder":
        total = lattice.rungs()
        if name in ("bulk", "boundary"):
            r = int(arg)
            start = 0 if name == "boundary" else (total - r) // 2
            if r > total or (name == "bulk" and start == 0):
                raise ValueError("lattice too small for this placement")
            return [2 * (start + a) + l for a in range(r) for l in (0, 1)]
        if name == "leg":
            n = int(arg)
            if n > total:
                raise ValueError("leg longer than the ladder")
            return [2 * a for a in range(n)]
    if k in ("square", "cubic") and name in ("bulk", "boundary", "corner"):
        lx = lattice.dims[0]
        ly = lattice.dims[1] if k == "square" and len(lattice.dims) > 1 else lx
        if min(lx, ly) < (4 if name == "bulk" else 3):
            raise ValueError("lattice too small for this placement")
        x0 = 0 if name == "corner" else (lx - 2) // 2
        y0 = (ly - 2) // 2 if name == "bulk" else 0
        z_off = 0
        if k == "cubic":
            z_off = (lx // 2) * lx * lx if name == "bulk" else 0
        return sorted(z_off + (y0 + dy) * lx + x0 + dx for dy in (0, 1) for dx in (0, 1))
    if k == "toric":
        tc = ToricCode(lattice.dims[0])
        if name == "loop":
            return sorted(bits(tc.h_loop(0)))
        if name == "loops":
            d = int(arg)
            if not 1 <= d <= lattice.dims[0] // 2:
                raise ValueError("loop distance must lie in 1..N_P/2")
            return sorted(bits(tc.h_loop(0) | tc.h_loop(d)))
    raise ValueError(f"unsupported placement {spec!r} for {k}")


# ---------------------------------------------------------------- toric code


@dataclass(frozen=True)
class ToricCode:
    """Toric code on an N_P x N_P periodic lattice with one qubit per edge.

    Horizontal edge (x, y) -> y N_P + x; vertical edge (x, y) -> N_P^2 + y N_P + x.
    """

    n_p: int

    @property
    def n_qubits(self) -> int:
        return 2 * self.n_p**2

    def h(self, x: int, y: int) -> int:
        n = self.n_p
        return (y % n) * n + x % n

    def v(self, x: int, y: int) -> int:
        n = self.n_p
        return n * n + (y % n) * n + x % n

    def plaquette(self, x: int, y: int) -> int:
        return mask_of((self.h(x, y), self.h(x, y + 1), self.v(x, y), self.v(x + 1, y)))

    def vertex(self, x: int, y: int) -> int:
        return mask_of((self.h(x, y), self.h(x - 1, y), self.v(x, y), self.v(x, y - 1)))

    def h_loop(self, y: int) -> int:
        return mask_of(self.h(x, y) for x in range(self.n_p))

    def v_loop(self, x: int) -> int:
        return mask_of(self.v(x, y) for y in range(self.n_p))

    def z_generators(self) -> list[int]:
        n = self.n_p
        return [self.plaquette(x, y) for y in range(n) for x in range(n)] + [self.h_loop(0), self.v_loop(0)]

    def x_generators(self) -> list[int]:
        n = self.n_p
        return [self.vertex(x, y) for y in range(n) for x in range(n)]


@dataclass(frozen=True)
class ToricGraphState:
    code: ToricCode
    graph: AttributedGraph
    controls: frozenset[int]
    hubs: tuple[int, ...]
    loops: tuple[int, ...]


def _rref(rows: Sequence[int], order: Sequence[int]) -> dict[int, int]:
    pivots: dict[int, int] = {}
    for r in rows:
        for c, pr in pivots.items():
            if (r >> c) & 1:
                r ^= pr
        if not r:
            continue
        col = next(c for c in order if (r >> c) & 1)
        for c in list(pivots):
            if (pivots[c] >> col) & 1:
                pivots[c] ^= r
        pivots[col] = r
    return pivots


def toric_state(n_p: int, loop_rows: Sequence[int]) -> ToricGraphState:
    """Graph form H^{controls}|G> of the toric-code state fixed by plaquettes and both Z loops.

    The first edge of every requested horizontal loop is a control whose
    graph neighbourhood is exactly the rest of that loop, so G[loop] is a star.
    """
    if n_p < 2:
        raise ValueError("toric code needs N_P >= 2")
    tc = ToricCode(n_p)
    loops = tuple(tc.h_loop(y) for y in loop_rows)
    hubs = tuple(min(bits(m)) for m in loops)
    s_mask = 0
    for m in loops:
        s_mask |= m
    rest_s = [i for i in bits(s_mask) if i not in hubs]
    order = list(hubs) + [i for i in range(tc.n_qubits) if not (s_mask >> i) & 1] + rest_s
    pivots = _rref(list(loops) + tc.z_generators(), order)
    if len(pivots) != n_p * n_p + 1:
        raise ValueError("unexpected rank of the Z-type stabilizer group")
    if set(pivots) & set(rest_s):
        raise ValueError("could not keep the loop qubits off the control set")
    edges = [(c, t) for c, r in pivots.items() for t in bits(r) if t != c]
    g = Graph.from_edges(tc.n_qubits, edges)
    tags = tuple(CliffordTag.H if i in pivots else CliffordTag.I for i in range(tc.n_qubits))
    return ToricGraphState(tc, AttributedGraph(g, tags), frozenset(pivots), hubs, loops)


# ---------------------------------------------------------------- setups and sweeps


def enumerate_setups(s_prime: Sequence[int], limit: int = SWEEP_LIMIT) -> Iterator[PauliSetup]:
    nodes = sorted(s_prime)
    if len(nodes) > limit:
        raise ValueError(f"|S'| = {len(nodes)} exceeds the sweep limit {limit}")
    for axes in product((1, 2, 3), repeat=len(nodes)):
        yield PauliSetup(tuple(zip(nodes, axes)))


def setup_at(s_prime: Sequence[int], index: int) -> PauliSetup:
    nodes = sorted(s_prime)
    axes = []
    for _ in nodes:
        axes.append(index % 3 + 1)
        index //= 3
    return PauliSetup(tuple(zip(nodes, reversed(axes))))


@dataclass(frozen=True)
class SweepRecord:
    setup: PauliSetup
    subgraph: Graph
    connected: bool
    orbit: tuple[int, int] | None = None
    value: float | None = None


@dataclass(frozen=True)
class LGMEResult:
    value: float | None
    best_setups: tuple[PauliSetup, ...]
    n_subgraphs: int
    n_orbits: int
    orbit_values: dict = field(default_factory=dict)
    records: tuple[SweepRecord, ...] = ()

    @property
    def localizable(self) -> bool:
        return self.value is not None


def _as_attributed(g: Graph | AttributedGraph) -> AttributedGraph:
    return g if isinstance(g, AttributedGraph) else AttributedGraph.plain(g)


def sweep_subgraphs(g: Graph | AttributedGraph, s_nodes: Sequence[int], threads: int | None = None) -> dict[tuple[int, ...], int]:
    """Distinct G'[S] (rows in local S order) mapped to the first setup index producing them."""
    from .fastsweep import key_to_graph_rows, sweep_keys

    ag = _as_attributed(g)
    s = sorted(s_nodes)
    sp = [i for i in range(ag.graph.n_nodes) if i not in s]
    if len(sp) > SWEEP_LIMIT:
        raise ValueError(f"|S'| = {len(sp)} exceeds the sweep limit {SWEEP_LIMIT}")
    keys = sweep_keys(ag.graph.adj, [int(t) for t in ag.tags], s, sp, threads=threads)
    uniq, first = np.unique(keys, return_index=True)
    return {key_to_graph_rows(int(k), len(s)): int(i) for k, i in zip(uniq, first)}


def subgraph_census(g: Graph | AttributedGraph, s_nodes: Sequence[int], threads: int | None = None) -> int:
    """Number of distinct connected subgraphs on S over all setups."""
    k = len(s_nodes)
    return sum(1 for rows in sweep_subgraphs(g, s_nodes, threads) if is_connected(Graph(k, rows)))


def _pure_value(g: Graph, measure: str) -> float:
    if measure == "schmidt":
        return float(schmidt_bounds(g).lower)
    if measure == "ggm":
        from .oracle import dense_graph_state

        return ggm_pure(dense_graph_state(g))
    raise ValueError(f"unknown measure {measure!r}")


def lgme_pure(g: Graph | AttributedGraph, s_nodes: Sequence[int], measure: str = "schmidt", threads: int | None = None) -> LGMEResult:
    """Largest measure value over connected G'[S] across all setups, with the census.

    For the Schmidt measure the value is the rank lower bound; orbit_values
    maps each orbit key to (lower, upper).
    """
    s = sorted(s_nodes)
    sp = [i for i in range(_as_attributed(g).graph.n_nodes) if i not in s]
    found = sweep_subgraphs(g, s, threads)
    k = len(s)
    orbit_vals: dict = {}
    records = []
    for rows, idx in sorted(found.items(), key=lambda kv: kv[1]):
        sub = Graph(k, rows)
        conn = is_connected(sub)
        if not conn:
            records.append(SweepRecord(setup_at(sp, idx), sub, False))
            continue
        key = orbit_key(sub) if k <= 8 else canonical_form(sub, k)
        if key not in orbit_vals:
            if measure == "schmidt":
                b = schmidt_bounds(sub)
                orbit_vals[key] = (b.lower, b.upper)
            else:
                orbit_vals[key] = (_pure_value(sub, measure),) * 2
        records.append(SweepRecord(setup_at(sp, idx), sub, True, key, float(orbit_vals[key][0])))
    conn_records = [r for r in records if r.connected]
    if not conn_records:
        return LGMEResult(None, (), 0, 0, {}, tuple(records))
    best = max(r.value for r in conn_records)
    best_setups = tuple(r.setup for r in conn_records if r.value == best)
    return LGMEResult(best, best_setups, len(conn_records), len(orbit_vals), orbit_vals, tuple(records))


def census_scaling(g: Graph, placements: Mapping[int, Sequence[int]], threads: int | None = None) -> tuple[list[tuple[int, float]], tuple[float, float]]:
    """Rows (n, log10 M) and the least-squares fit log10 M = a + b n as (a, b)."""
    rows = []
    for n, s in sorted(placements.items()):
        m = subgraph_census(g, s, threads)
        rows.append((n, math.log10(m)))
    ns = np.array([r[0] for r in rows], dtype=float)
    ys = np.array([r[1] for r in rows])
    b, a = np.polyfit(ns, ys, 1)
    return rows, (float(a), float(b))


# ---------------------------------------------------------------- noisy lower bounds


@dataclass(frozen=True)
class NoisySetup:
    """A lattice, subsystem and chosen setup, with the initial node tags."""

    start: AttributedGraph
    s_nodes: tuple[int, ...]
    setup: PauliSetup
    parts: tuple[tuple[int, ...], ...] = ()

    def reduce(self) -> ReductionResult:
        return reduce_setup(self.start, self.s_nodes, self.setup)


def _graph_to_physical(axis: int, tag: int) -> int:
    """Physical axis whose measurement is sigma^axis on the graph node of an H- or I-tagged qubit."""
    if tag & 1:
        return {1: 3, 2: 2, 3: 1}[axis]
    return axis


def _shortest_path(g: Graph, sources: int, targets: int, allowed: int) -> list[int]:
    prev: dict[int, int | None] = {v: None for v in bits(sources & allowed)}
    queue = deque(prev)
    while queue:
        v = queue.popleft()
        if (targets >> v) & 1:
            path = [v]
            while prev[path[-1]] is not None:
                path.append(prev[path[-1]])
            return path[::-1]
        for w in bits(g.adj[v] & allowed):
            if w not in prev:
                prev[w] = v
                queue.append(w)
    raise ValueError("no path joins the two regions")


def path_link_setup(g: Graph, a_nodes: Sequence[int], b_nodes: Sequence[int]) -> dict[int, int]:
    """Graph-frame axes linking regions A and B through a shortest path of outside nodes.

    sigma^2 on the path node next to A, sigma^1 on the rest of the path, sigma^3 elsewhere.
    """
    a, b = mask_of(a_nodes), mask_of(b_nodes)
    outside = ((1 << g.n_nodes) - 1) & ~(a | b)
    near_a = near_b = 0
    for v in bits(a):
        near_a |= g.adj[v]
    for v in bits(b):
        near_b |= g.adj[v]
    path = _shortest_path(g, near_a & outside, near_b & outside, outside)
    axes = {v: 3 for v in bits(outside)}
    for v in path:
        axes[v] = 1
    axes[path[0]] = 2
    return axes


def alpha_c_for(lattice: LatticeSpec, spec: str) -> NoisySetup:
    """Chosen setup for a lattice placement.

    Graph lattices: sigma^3 on every outside node, which keeps G[S] and lies in
    Gamma. Toric ``loop``: sigma^1 on controls and sigma^3 on the remaining
    outside qubits, giving a star on the loop. Toric ``loops:d``: the path
    link pattern between the two loop stars, expressed in physical axes.
    """
    s = placement(lattice, spec)
    if lattice.kind != "toric":
        g = lattice.graph()
        if not is_connected(g.induced(s)):
            raise ValueError("placement is not a connected patch")
        setup = PauliSetup(tuple((i, 3) for i in range(g.n_nodes) if i not in s))
        return NoisySetup(AttributedGraph.plain(g), tuple(s), setup)
    n_p = lattice.dims[0]
    name, _, arg = spec.partition(":")
    if name == "loop":
        ts = toric_state(n_p, [0])
        setup = PauliSetup(tuple((i, 1 if i in ts.controls else 3) for i in range(ts.code.n_qubits) if i not in s))
        return NoisySetup(ts.graph, tuple(s), setup)
    d = int(arg)
    ts = toric_state(n_p, [0, d])
    a_nodes, b_nodes = sorted(bits(ts.loops[0])), sorted(bits(ts.loops[1]))
    axes = path_link_setup(ts.graph.graph, a_nodes, b_nodes)
    phys = tuple((i, _graph_to_physical(ax, ts.graph.tags[i])) for i, ax in sorted(axes.items()))
    return NoisySetup(ts.graph, tuple(s), PauliSetup(phys), (tuple(a_nodes), tuple(b_nodes)))


def _channels(n: int, noise) -> dict[int, object]:
    if isinstance(noise, ChannelSpec):
        return {i: noise for i in range(n)}
    return dict(noise)


def evaluate(gd: GDState, quantifier: str, parts=None) -> float:
    if quantifier == "gme":
        return float(gme_test(gd))
    if quantifier == "gmc":
        return gd_gmc(gd)
    if quantifier == "negativity":
        if parts is None:
            raise ValueError("negativity needs a bipartition")
        return gd_negativity(gd, parts)
    raise ValueError(f"unknown quantifier {quantifier!r}")


def _local_bipartition(s_nodes: Sequence[int], a_nodes: Sequence[int]) -> Bipartition:
    s = sorted(s_nodes)
    return Bipartition(len(s), mask_of(s.index(v) for v in a_nodes))


def noisy_lower_bound(ns: NoisySetup, noise, quantifier: str = "gme", rr: ReductionResult | None = None) -> tuple[GDState, float]:
    """GD state of one representative outcome and the chosen quantifier.

    For a setup in Gamma every outcome gives a locally equivalent state, so
    the value is also the outcome average.
    """
    rr = rr or ns.reduce()
    if not classify_outcomes(rr).is_gamma:
        raise ValueError("the chosen setup has forbidden outcomes")
    gd = noisy_gd_state(rr, _channels(rr.reduced.graph.n_nodes, noise))
    parts = _local_bipartition(ns.s_nodes, ns.parts[0]) if ns.parts else None
    return gd, evaluate(gd, quantifier, parts)


def critical_noise(ns: NoisySetup, kind: str, eps: float, quantifier: str = "gme") -> float:
    """Smallest q at which the chosen setup stops certifying GME.

    Scan in steps of 1e-3, then bisect to 1e-6. When the certificate only
    vanishes at an isolated point (GMC touching zero) the root of the signed
    dominant coherence is returned. 1.0 means no transition was found.
    """
    rr = ns.reduce()
    if not classify_outcomes(rr).is_gamma:
        raise ValueError("the chosen setup has forbidden outcomes")
    q_max = dp_domain(eps) if kind == "DP" else 1.0

    def entangled(q: float) -> bool:
        if quantifier == "gmc":
            # a margin that only touches zero is handled by the root search below
            gd = noisy_gd_state(rr, _channels(rr.reduced.graph.n_nodes, ChannelSpec(kind, q, eps)))
            return gd_gmc_margin(gd) > -1e-14
        _, v = noisy_lower_bound(ns, ChannelSpec(kind, q, eps), quantifier, rr)
        return v > 0

    steps = int(round(q_max / SCAN_STEP))
    prev = 0.0
    if not entangled(0.0):
        return 0.0
    for k in range(1, steps + 1):
        q = min(k * SCAN_STEP, q_max)
        if not entangled(q):
            lo, hi = prev, q
            while hi - lo > BISECT_TOL:
                mid = (lo + hi) / 2
                if entangled(mid):
                    lo = mid
                else:
                    hi = mid
            return hi
        prev = q
    root = _coherence_root(ns, rr, kind, eps, q_max)
    return 1.0 if root is None else root


def _coherence_root(ns: NoisySetup, rr: ReductionResult, kind: str, eps: float, q_max: float) -> float | None:
    """Isolated zero of the GHZ certificate, located through its vanishing spectral factor.

    Every Walsh coefficient of the noisy state is a product over nodes of
    factors 1 - 2 (p_a + p_b) of graph-frame Pauli weights. The certificate
    can only touch zero where one of those factors does, so the minimum found
    on the scan grid is refined by solving for the nearby factor root.
    """
    from scipy.optimize import brentq

    from .gd_engine import graph_frame_probs

    n = rr.reduced.graph.n_nodes

    def margin(q: float) -> float:
        gd = noisy_gd_state(rr, _channels(n, ChannelSpec(kind, q, eps)))
        return gd_gmc_margin(gd)

    grid = np.linspace(0.0, q_max, int(round(q_max / SCAN_STEP)) + 1)
    vals = np.array([margin(q) for q in grid])
    k = int(np.argmin(vals))
    if vals[k] > 1e-6:
        return None
    lo, hi = grid[max(k - 2, 0)], grid[min(k + 2, len(grid) - 1)]
    q0 = grid[k]
    pairs = ((1, 2), (2, 3), (1, 3))

    def factor(q: float, node: int, pair: tuple[int, int]) -> float:
        p = graph_frame_probs(rr, {node: ChannelSpec(kind, q, eps)})[node]
        return 1 - 2 * (p[pair[0]] + p[pair[1]])

    best = None
    for node in range(n):
        for pair in pairs:
            a, b = factor(lo, node, pair), factor(hi, node, pair)
            if a * b > 0:
                continue
            root = brentq(factor, lo, hi, args=(node, pair), xtol=1e-14) if a * b < 0 else (lo if a == 0 else hi)
            if best is None or abs(root - q0) < abs(best - q0):
                best = root
    return None if best is None else float(best)


@dataclass(frozen=True)
class QcCurve:
    rows: tuple[tuple[float, float], ...]
    coefficients: tuple[float, ...]  # highest power first

    def to_csv(self) -> str:
        return "eps,q_c\n" + "".join(f"{e:.9g},{q:.9g}\n" for e, q in self.rows)


def qc_curve(ns: NoisySetup, kind: str, eps_grid: Sequence[float], quantifier: str = "gme") -> QcCurve:
    rows = tuple((float(e), critical_noise(ns, kind, float(e), quantifier)) for e in eps_grid)
    degree = 3 if kind == "DP" else 2
    coeffs: tuple[float, ...] = ()
    if len(rows) > degree:
        coeffs = tuple(float(c) for c in np.polyfit([r[0] for r in rows], [r[1] for r in rows], degree))
    return QcCurve(rows, coeffs)


def toric_bf_closed_form(eps: float) -> float:
    if eps == 0:
        return 1.0
    return (1 + eps - math.sqrt(1 + eps * eps)) / eps


def two_loop_negativity(n_p: int, d: int, noise: ChannelSpec, qs: Sequence[float]) -> list[tuple[float, float]]:
    """Negativity across the loop-loop cut after the path-link setup, per q."""
    if 2 * n_p > 12:
        raise ValueError("two-loop negativity limited to 2 N_P <= 12")
    ns = alpha_c_for(LatticeSpec("toric", (n_p,)), f"loops:{d}")
    rr = ns.reduce()
    parts = _local_bipartition(ns.s_nodes, ns.parts[0])
    gamma = classify_outcomes(rr).is_gamma
    out = []
    for q in qs:
        chans = _channels(rr.reduced.graph.n_nodes, noise.with_q(q))
        if gamma:
            gd = noisy_gd_state(rr, chans)
        else:
            gd = noisy_outcome(rr, chans, allowed_outcome(rr)).state
        out.append((float(q), gd_negativity(gd, parts)))
    return out
