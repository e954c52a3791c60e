"""Entanglement quantifiers and GME tests for graph states and graph-diagonal states."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Callable, Sequence

import numpy as np

from .gd_engine import GDState, walsh_hadamard
from .graph_core import (
    Bipartition,
    Graph,
    bipartitions,
    bits,
    canonical_form,
    gf2_rank_offdiagonal,
    is_connected,
    lc_rows,
    popcount,
)

RANK_LIMIT = 24
PERSISTENCY_LIMIT = 10
DENSE_LIMIT = 12


@dataclass(frozen=True)
class SchmidtBounds:
    lower: int
    upper: int

    def __post_init__(self) -> None:
        if self.lower > self.upper:
            raise ValueError("lower Schmidt bound exceeds the upper bound")

    @property
    def exact(self) -> bool:
        return self.lower == self.upper


def schmidt_lower(g: Graph, limit: int = RANK_LIMIT) -> int:
    """Largest off-diagonal GF(2) rank over all bipartitions."""
    if g.n_nodes > limit:
        raise ValueError(f"schmidt_lower limited to {limit} nodes")
    if g.n_nodes < 2:
        return 0
    return max(gf2_rank_offdiagonal(g, p) for p in bipartitions(g.n_nodes))


def min_vertex_cover(adj: Sequence[int]) -> int:
    """Exact minimum vertex cover size by branch and bound on bitsets."""
    n = len(adj)
    best = [popcount(sum(1 << i for i in range(n) if adj[i]))]

    def go(alive: int, size: int) -> None:
        if size >= best[0]:
            return
        # peel isolated and degree-one nodes
        changed = True
        while changed:
            changed = False
            for v in bits(alive):
                if not (alive >> v) & 1:
                    continue
                nb = adj[v] & alive
                if nb == 0:
                    alive &= ~(1 << v)
                    changed = True
                elif nb & (nb - 1) == 0:
                    alive &= ~(1 << v) & ~nb
                    size += 1
                    changed = True
                    if size >= best[0]:
                        return
        if alive == 0:
            best[0] = min(best[0], size)
            return
        v = max(bits(alive), key=lambda u: popcount(adj[u] & alive))
        nb = adj[v] & alive
        # a cover holds v or all of its neighbours
        go(alive & ~(1 << v), size + 1)
        go(alive & ~nb & ~(1 << v), size + popcount(nb))

    go((1 << n) - 1, 0)
    return best[0]


@lru_cache(maxsize=4096)
def _upper_by_key(key: tuple[int, int]) -> int:
    from .graph_core import graph_from_canonical
    from .reduction import _Work

    g = graph_from_canonical(key)
    n = g.n_nodes
    best = min_vertex_cover(g.adj)
    seen = set()
    for axes in product((1, 2, 3), repeat=n):
        w = _Work(g.adj, [0] * n)
        w.rotate(list(enumerate(axes)))
        w.reduce(0)
        rows = tuple(w.adj)
        if rows in seen:
            continue
        seen.add(rows)
        best = min(best, min_vertex_cover(rows))
        if best <= 1:
            break
    return best


def schmidt_upper(g: Graph, limit: int = PERSISTENCY_LIMIT) -> int:
    """Pauli persistency bound: smallest vertex cover among reduced graphs of all full setups."""
    if g.n_nodes > limit:
        raise ValueError(f"schmidt_upper limited to {limit} nodes")
    if g.n_edges() == 0:
        return 0
    return _upper_by_key(canonical_form(g, limit))


def schmidt_bounds(g: Graph) -> SchmidtBounds:
    return SchmidtBounds(schmidt_lower(g), schmidt_upper(g))


def _check_pure(psi: np.ndarray) -> np.ndarray:
    v = np.asarray(psi, dtype=complex).reshape(-1)
    n = v.size.bit_length() - 1
    if v.size != 1 << n or n > DENSE_LIMIT:
        raise ValueError("state must have 2^n amplitudes with n <= 12")
    if abs(np.vdot(v, v).real - 1) > 1e-10:
        raise ValueError("state is not normalized")
    return v.reshape((2,) * n)


def ggm_pure(psi: np.ndarray) -> float:
    """1 minus the largest squared Schmidt coefficient over all bipartitions."""
    t = _check_pure(psi)
    n = t.ndim
    best = 0.0
    for p in bipartitions(n):
        a = list(bits(p.mask))
        b = [i for i in range(n) if i not in a]
        m = np.moveaxis(t, a + b, list(range(n))).reshape(1 << len(a), -1)
        s = np.linalg.svd(m, compute_uv=False)
        best = max(best, float(s[0] ** 2))
    return 1.0 - best


def partial_transpose(rho: np.ndarray, p: Bipartition) -> np.ndarray:
    n = p.n_nodes
    t = np.asarray(rho).reshape((2,) * (2 * n))
    axes = list(range(2 * n))
    for i in bits(p.mask):
        axes[i], axes[n + i] = axes[n + i], axes[i]
    return t.transpose(axes).reshape(1 << n, 1 << n)


def negativity(rho: np.ndarray, p: Bipartition) -> float:
    """(||rho^{T_A}||_1 - 1) / 2 with A the nodes in p.mask; node 0 is the most significant bit."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (1 << p.n_nodes, 1 << p.n_nodes):
        raise ValueError("density matrix size does not match the bipartition")
    if p.n_nodes > DENSE_LIMIT:
        raise ValueError("dense negativity limited to 12 qubits")
    if np.abs(rho - rho.conj().T).max() > 1e-10:
        raise ValueError("density matrix is not Hermitian")
    ev = np.linalg.eigvalsh(partial_transpose(rho, p))
    return float((np.abs(ev).sum() - 1) / 2)


def gd_density(gd: GDState) -> np.ndarray:
    from .oracle import graph_basis_states

    b = graph_basis_states(gd.basis_graph)
    return (b * gd.lambdas[None, :]) @ b.conj().T


def gd_negativity(gd: GDState, p: Bipartition) -> float:
    """Negativity of a GD state across p without building the density matrix.

    The partial transpose splits into blocks labelled by c in {0,1}^B whose
    spectra are Walsh transforms over A of the lambda vector shifted by the
    cross-cut adjacency.
    """
    g = gd.basis_graph
    n = g.n_nodes
    if p.n_nodes != n:
        raise ValueError("bipartition size does not match the state")
    a_nodes = list(bits(p.mask))
    b_nodes = [i for i in range(n) if not (p.mask >> i) & 1]
    na, nb = len(a_nodes), len(b_nodes)
    lam = np.zeros((1 << nb, 1 << na))
    for psi, v in enumerate(gd.lambdas):
        ia = sum(((psi >> x) & 1) << k for k, x in enumerate(a_nodes))
        ib = sum(((psi >> x) & 1) << k for k, x in enumerate(b_nodes))
        lam[ib, ia] += v
    hat = walsh_hadamard(lam)  # hat[psi_B, d]
    # gamma[d] = B-side neighbourhood of the A-pattern d
    gamma = np.zeros(1 << na, dtype=np.int64)
    for d in range(1 << na):
        acc = 0
        for k, x in enumerate(a_nodes):
            if (d >> k) & 1:
                row = g.adj[x]
                acc ^= sum(((row >> y) & 1) << m for m, y in enumerate(b_nodes))
        gamma[d] = acc
    d_idx = np.arange(1 << na)
    total = 0.0
    for c in range(1 << nb):
        vec = hat[c ^ gamma, d_idx]
        mu = walsh_hadamard(vec) / (1 << na)
        total += float(np.abs(mu).sum())
    return (total - 1) / 2


# ---- transport of lambda vectors along local complementations and relabellings


def lc_gd(gd: GDState, a: int) -> GDState:
    """GD state after the local unitary taking |G> to |tau_a(G)>."""
    n = gd.n
    rows = list(gd.basis_graph.adj)
    flip = rows[a]
    lc_rows(rows, a)
    psi = np.arange(1 << n)
    image = np.where((psi >> a) & 1, psi ^ flip, psi)
    lam = np.zeros_like(gd.lambdas)
    lam[image] = gd.lambdas
    return GDState(Graph(n, tuple(rows)), lam)


def relabel_gd(gd: GDState, perm: Sequence[int]) -> GDState:
    """Rename node i to perm[i]."""
    n = gd.n
    psi = np.arange(1 << n)
    image = np.zeros_like(psi)
    for i in range(n):
        image |= ((psi >> i) & 1) << perm[i]
    lam = np.zeros_like(gd.lambdas)
    lam[image] = gd.lambdas
    return GDState(gd.basis_graph.relabel(perm), lam)


def _search(gd: GDState, target: Callable[[Graph], Sequence[int] | None]) -> GDState | None:
    """Breadth-first LC search for a labelled graph accepted by target; returns it relabelled."""
    found = _transport(gd.basis_graph.adj, target.__name__)
    if found is None:
        return None
    rows, image = found
    lam = np.zeros_like(gd.lambdas)
    lam[image] = gd.lambdas
    return GDState(Graph(gd.n, rows), lam)


@lru_cache(maxsize=1024)
def _transport(start: tuple[int, ...], target_name: str) -> tuple[tuple[int, ...], np.ndarray] | None:
    target = _TARGETS[target_name]
    n = len(start)
    prev: dict[tuple[int, ...], tuple[tuple[int, ...], int] | None] = {start: None}
    queue = deque([start])
    while queue:
        rows = queue.popleft()
        perm = target(Graph(n, rows))
        if perm is not None:
            path = []
            cur = rows
            while prev[cur] is not None:
                cur, a = prev[cur]
                path.append(a)
            image = np.arange(1 << n)
            work = list(start)
            for a in reversed(path):
                image = np.where((image >> a) & 1, image ^ work[a], image)
                lc_rows(work, a)
            out = np.zeros_like(image)
            for i in range(n):
                out |= ((image >> i) & 1) << perm[i]
            return Graph(n, tuple(work)).relabel(perm).adj, out
        for a in range(n):
            nxt = list(rows)
            lc_rows(nxt, a)
            key = tuple(nxt)
            if key not in prev:
                prev[key] = (rows, a)
                queue.append(key)
    return None


def _star_perm(g: Graph) -> list[int] | None:
    n = g.n_nodes
    for h in range(n):
        if g.adj[h] == ((1 << n) - 1) ^ (1 << h) and all(g.adj[j] == 1 << h for j in range(n) if j != h):
            perm = [0] * n
            k = 1
            for j in range(n):
                if j == h:
                    continue
                perm[j] = k
                k += 1
            return perm
    return None


def _path_perm(g: Graph) -> list[int] | None:
    n = g.n_nodes
    if g.n_edges() != n - 1 or not is_connected(g):
        return None
    ends = [i for i in range(n) if popcount(g.adj[i]) == 1]
    if len(ends) != 2 or any(popcount(r) > 2 for r in g.adj):
        return None
    order = [min(ends)]
    while len(order) < n:
        nxt = [j for j in bits(g.adj[order[-1]]) if j not in order]
        order.append(nxt[0])
    perm = [0] * n
    for k, v in enumerate(order):
        perm[v] = k
    return perm


_TARGETS = {"_star_perm": _star_perm, "_path_perm": _path_perm}


def _is_hub0_star(g: Graph) -> bool:
    return g.n_nodes >= 2 and g.adj[0] == ((1 << g.n_nodes) - 1) ^ 1 and g.n_edges() == g.n_nodes - 1


def to_star_frame(gd: GDState) -> GDState | None:
    """Equivalent GD state on the star with hub 0, or None if the graph is not GHZ-class."""
    if gd.n < 2:
        return None
    return _search(gd, _star_perm)


def to_path_frame(gd: GDState) -> GDState | None:
    """Equivalent GD state on the path 0-1-...-(n-1), or None if not reachable."""
    return _search(gd, _path_perm)


# ---- GHZ-diagonal states as X states


def star_x_state(gd: GDState) -> tuple[np.ndarray, np.ndarray]:
    """Pair populations and coherences of a hub-0 star GD state in the GHZ frame.

    Entry b (leaf pattern, hub bit 0) describes the pair |0 b>, |1 ~b>: both
    diagonal entries equal populations[b], the off-diagonal is coherences[b].
    """
    if not _is_hub0_star(gd.basis_graph):
        raise ValueError("basis graph is not a star with hub 0")
    lam = gd.lambdas.reshape(-1, 2)  # [leaf pattern, hub bit]
    pops = (lam[:, 0] + lam[:, 1]) / 2
    coh = (lam[:, 0] - lam[:, 1]) / 2
    return pops, coh


def x_state_margin(populations: Sequence[float], coherences: Sequence[float], partner: Sequence[float] | None = None) -> float:
    """Largest |c_j| minus the geometric means of all other pairs (may be negative)."""
    a = np.asarray(populations, dtype=float)
    b = a if partner is None else np.asarray(partner, dtype=float)
    c = np.abs(np.asarray(coherences))
    if a.shape != c.shape or b.shape != c.shape:
        raise ValueError("inconsistent X-state data")
    if np.any(a < -1e-12) or np.any(b < -1e-12):
        raise ValueError("negative populations")
    g = np.sqrt(np.clip(a, 0, None) * np.clip(b, 0, None))
    return float((c - (g.sum() - g)).max())


def gmc_x_state(populations: Sequence[float], coherences: Sequence[float], partner: Sequence[float] | None = None) -> float:
    """Genuine multiparty concurrence of an X state.

    populations[j] and partner[j] are the two diagonal entries joined by
    coherences[j]; partner defaults to populations (GHZ-diagonal form).
    """
    return 2 * max(0.0, x_state_margin(populations, coherences, partner))


def ghzd_gme_test(gd: GDState) -> bool:
    """True when the GHZ-diagonal biseparability inequality is violated for some pair."""
    star = gd if _is_hub0_star(gd.basis_graph) else to_star_frame(gd)
    if star is None:
        raise ValueError("basis graph is not equivalent to a star")
    pops, coh = star_x_state(star)
    return gmc_x_state(pops, coh) > 1e-13


def gd_gmc_margin(gd: GDState) -> float:
    star = to_star_frame(gd)
    if star is None:
        raise ValueError("basis graph is not equivalent to a star")
    return x_state_margin(*star_x_state(star))


def gd_gmc(gd: GDState) -> float:
    return 2 * max(0.0, gd_gmc_margin(gd))


# ---- four-qubit linear cluster


def cluster4_gme_test(fidelities: Sequence[float]) -> bool:
    """fidelities[i + 2j + 4k + 8l] = F_ijkl for the path 1-2-3-4 (1 and 4 are the ends)."""
    f = np.asarray(fidelities, dtype=float)
    if f.shape != (16,) or np.any(f < -1e-12) or abs(f.sum() - 1) > 1e-9:
        raise ValueError("need 16 fidelities forming a probability vector")
    F = f.reshape(2, 2, 2, 2).transpose(3, 2, 1, 0)  # F[i, j, k, l]
    tol = 1e-13
    mid = F.sum(axis=(1, 2))  # mid[a, d] = sum_ij F_{a i j d}
    for a, d in product((0, 1), repeat=2):
        r1 = 0.5 * (mid[a, d] + mid[1 - a, d] + mid[a, 1 - d])
        if F[a, :, :, d].max() > r1 + tol:
            return True
        r2 = 0.5 * (mid[a, d] + mid[1 - a, d] + mid[a, 1 - d] + mid[1 - a, 1 - d])
        if F[a, :, :, d].max() + F[1 - a, :, :, 1 - d].max() > r2 + tol:
            return True
    return False


def gme_test(gd: GDState) -> bool:
    """GME detection for GD states on connected graphs of 2, 3 or 4 nodes (any orbit)."""
    if not is_connected(gd.basis_graph):
        return False
    if gd.n == 2:
        return gd_negativity(gd, Bipartition(2, 1)) > 1e-13
    star = to_star_frame(gd)
    if star is not None:
        return ghzd_gme_test(star)
    if gd.n == 4:
        path = to_path_frame(gd)
        if path is not None:
            return cluster4_gme_test(path.lambdas)
    raise ValueError("no GME criterion available for this basis graph")
