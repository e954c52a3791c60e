"""Graph-diagonal states produced by Pauli noise followed by Pauli measurements.

Index convention: bit k of psi is the Z applied to the k-th node of S (S in
ascending order), so lambdas[psi] is the weight of Z^psi |G_S>.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Mapping, Sequence

import numpy as np

from .graph_core import CliffordTag, Graph, bits, popcount
from .noise_channels import ChannelSpec, channel_probs, conjugate_probs
from .reduction import ReductionResult, _cascade

D_LIMIT = 20


@dataclass(frozen=True)
class GDState:
    basis_graph: Graph
    lambdas: np.ndarray
    coherence: float | None = None
    frame: tuple[CliffordTag, ...] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        lam = np.asarray(self.lambdas, dtype=float)
        if lam.shape != (1 << self.basis_graph.n_nodes,):
            raise ValueError("lambda vector has the wrong length")
        if np.any(lam < -1e-12) or abs(lam.sum() - 1) > 1e-10:
            raise ValueError("lambda vector is not a probability vector")
        object.__setattr__(self, "lambdas", lam)

    @property
    def n(self) -> int:
        return self.basis_graph.n_nodes

    def to_csv(self) -> str:
        lines = ["psi,lambda"]
        for psi, v in enumerate(self.lambdas):
            label = "".join(str((psi >> k) & 1) for k in range(self.n))
            lines.append(f"{label},{v:.9g}")
        if self.coherence is not None:
            lines.append(f"coherence,{self.coherence:.9g}")
        return "\n".join(lines) + "\n"


def delta_gd(g: Graph) -> GDState:
    lam = np.zeros(1 << g.n_nodes)
    lam[0] = 1.0
    return GDState(g, lam)


def walsh_hadamard(v: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along the last axis (length 2^m)."""
    a = np.array(v, dtype=float, copy=True)
    n = a.shape[-1]
    h = 1
    while h < n:
        a = a.reshape(a.shape[:-1] + (n // (2 * h), 2, h))
        x, y = a[..., 0, :].copy(), a[..., 1, :].copy()
        a[..., 0, :], a[..., 1, :] = x + y, x - y
        a = a.reshape(a.shape[:-3] + (n,))
        h *= 2
    return a


def xor_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape != b.shape:
        raise ValueError("length mismatch")
    n = a.shape[-1]
    return walsh_hadamard(walsh_hadamard(a) * walsh_hadamard(b)) / n


def xor_compose(a: GDState, b: GDState) -> GDState:
    if a.basis_graph != b.basis_graph:
        raise ValueError("GD states refer to different basis graphs")
    out = np.clip(xor_convolve(a.lambdas, b.lambdas), 0.0, None)
    return GDState(a.basis_graph, out / out.sum())


def _z_strings(adj: Sequence[int], i: int) -> tuple[int, int, int, int]:
    """Z-string (as node bitset) equivalent to sigma^s on node i of a graph state."""
    return (0, adj[i], adj[i] | (1 << i), 1 << i)


def _spectrum(dists: list[tuple[Sequence[float], Sequence[int]]], m: int) -> np.ndarray:
    """Walsh spectrum of the XOR of independent sparse distributions over m bits."""
    t = np.arange(1 << m, dtype=np.int64)
    spec = np.ones(1 << m)
    for probs, vecs in dists:
        acc = np.zeros(1 << m)
        for p, v in zip(probs, vecs):
            if p == 0.0:
                continue
            par = np.zeros(1 << m, dtype=np.int64)
            for k in bits(v):
                par ^= (t >> k) & 1
            acc += p * (1 - 2 * par)
        spec *= acc
    return spec


def measurement_unitary(axis: int) -> np.ndarray:
    """U with sigma^axis = U Z U^dagger (identity for unmeasured nodes)."""
    from .oracle import H, I2, R

    return {0: I2, 1: H, 2: R @ H, 3: I2}[axis]


def graph_frame_probs(rr: ReductionResult, channels: Mapping[int, Sequence[float]]) -> dict[int, tuple[float, ...]]:
    """Per-node Pauli weights after conjugation by U_i V_i (reduced-graph frame)."""
    from .oracle import tag_matrix

    setup = rr.setup.as_dict() if rr.setup is not None else {}
    out = {}
    for i, probs in _probs_map(channels).items():
        t = measurement_unitary(setup.get(i, 0)) @ tag_matrix(rr.reduced.tags[i])
        out[i] = conjugate_probs(probs, t)
    return out


def _probs_map(channels) -> dict[int, tuple[float, ...]]:
    out = {}
    for i, c in channels.items():
        out[i] = channel_probs(c) if isinstance(c, ChannelSpec) else tuple(c)
    return out


@dataclass(frozen=True)
class NoisyOutcome:
    probability: float
    state: GDState | None


@lru_cache(maxsize=256)
def _frame(rr: ReductionResult) -> tuple[list[int], list[int], dict[int, np.ndarray], dict[int, np.ndarray]]:
    """Per-node Pauli relabelling and character table over the S + white coordinates.

    chars[i][s] is the +-1 character of the Z-string that the graph-frame Pauli
    s on node i induces, evaluated at every Walsh index.
    """
    from .noise_channels import conjugate_pauli_by
    from .oracle import tag_matrix

    s_nodes = sorted(rr.regions.S)
    white = list(rr.white_nodes)
    coords = s_nodes + white
    pos = {v: k for k, v in enumerate(coords)}
    m = len(coords)
    t = np.arange(1 << m, dtype=np.int64)
    adj = rr.reduced.graph.adj
    setup = rr.setup.as_dict() if rr.setup is not None else {}
    perms: dict[int, np.ndarray] = {}
    chars: dict[int, np.ndarray] = {}
    for i in range(rr.reduced.graph.n_nodes):
        u = measurement_unitary(setup.get(i, 0)) @ tag_matrix(rr.reduced.tags[i])
        perms[i] = np.array([conjugate_pauli_by(u, p) for p in range(4)])
        tab = np.empty((4, 1 << m))
        for s, zs in enumerate(_z_strings(adj, i)):
            par = np.zeros(1 << m, dtype=np.int64)
            for k in bits(zs):
                if k in pos:
                    par ^= (t >> pos[k]) & 1
            tab[s] = 1 - 2 * par
        chars[i] = tab
    return s_nodes, white, perms, chars


def _joint_distribution(rr: ReductionResult, channels) -> tuple[np.ndarray, list[int], list[int]]:
    s_nodes, white, perms, chars = _frame(rr)
    m = len(s_nodes) + len(white)
    spec = np.ones(1 << m)
    for i, probs in _probs_map(channels).items():
        q = np.zeros(4)
        np.add.at(q, perms[i], probs)
        spec *= q @ chars[i]
    joint = walsh_hadamard(spec) / (1 << m)
    return np.clip(joint, 0.0, None), s_nodes, white


def noisy_outcome(rr: ReductionResult, channels, outcome: Sequence[int]) -> NoisyOutcome:
    """Exact probability and GD state on S for one outcome string (any setup class).

    The state is expressed in the frame of the correction tags on S for this
    outcome, so it is the state that remains after undoing those tags.
    """
    measured = rr.measured
    out = dict(zip(measured, outcome))
    joint, s_nodes, white = _joint_distribution(rr, channels)
    n, w = len(s_nodes), len(white)
    flips = _cascade(rr, {j: out[j] for j in rr.z_set})
    tags = rr.reduced.tags
    target = 0
    for k, j in enumerate(white):
        m0 = ((tags[j] >> 2) & 1) ^ flips.get(j, 0)
        target |= (out[j] ^ m0) << k
    block = joint.reshape(1 << w, 1 << n)[target]
    mass = float(block.sum())
    prob = mass * 2.0 ** (-len(rr.z_set))
    g_s = rr.subgraph_on_S()
    if mass < 1e-15:
        return NoisyOutcome(0.0, None)
    frame = tuple(CliffordTag(tags[i] ^ (flips.get(i, 0) << 2)) for i in s_nodes)
    return NoisyOutcome(prob, GDState(g_s, block / mass, frame=frame))


def noisy_gd_state(rr: ReductionResult, channels) -> GDState:
    """Outcome-independent GD state of a setup with no forbidden outcomes."""
    if rr.white_nodes:
        raise ValueError("setup has forbidden outcomes; use noisy_outcome per outcome")
    res = noisy_outcome(rr, channels, (0,) * len(rr.measured))
    assert res.state is not None
    return res.state


@dataclass(frozen=True)
class SubclassPartition:
    n: int
    subclasses: tuple[tuple[int, tuple[int, ...]], ...]

    def classes(self) -> dict[int, list[tuple[int, tuple[int, ...]]]]:
        out: dict[int, list] = {}
        for mask, members in self.subclasses:
            out.setdefault(popcount(mask), []).append((mask, members))
        return out

    @property
    def D(self) -> int:
        from math import comb

        return sum(comb(self.n, m) for m in range(2, self.n + 1))


def partition_subclasses(rr: ReductionResult, per_node_noise) -> SubclassPartition:
    """Group the S1 nodes whose graph-frame noise can flip their outcome by their S-neighbourhood."""
    s_nodes = sorted(rr.regions.S)
    pos = {v: k for k, v in enumerate(s_nodes)}
    gf = graph_frame_probs(rr, _probs_map({i: per_node_noise[i] for i in rr.regions.S1 if i in per_node_noise}))
    adj = rr.reduced.graph.adj
    groups: dict[int, list[int]] = {}
    for j in sorted(rr.regions.S1):
        p = gf.get(j)
        if p is None or p[1] + p[2] == 0:
            continue
        mask = 0
        for k in bits(adj[j]):
            if k in pos:
                mask |= 1 << pos[k]
        groups.setdefault(mask, []).append(j)
    subs = tuple(sorted((m, tuple(v)) for m, v in groups.items()))
    return SubclassPartition(len(s_nodes), subs)


def subclass_flip_probabilities(rr: ReductionResult, part: SubclassPartition, per_node_noise) -> list[float]:
    gf = graph_frame_probs(rr, _probs_map({j: per_node_noise[j] for _, mem in part.subclasses for j in mem}))
    out = []
    for _, members in part.subclasses:
        qs = {round(gf[j][1] + gf[j][2], 15) for j in members}
        if len(qs) != 1:
            raise ValueError("flip probability differs inside a subclass")
        out.append(qs.pop())
    return out


def mixing_probabilities(part: SubclassPartition, q_n: Sequence[float], psi: int) -> float:
    """Weight of Z^psi on S from outcome flips of the S1'' nodes (subclass parity sum)."""
    if len(q_n) != len(part.subclasses):
        raise ValueError("one flip probability per subclass is required")
    for q in q_n:
        if not 0.0 <= q <= 1.0 + 1e-12:
            raise ValueError("flip probabilities must lie in [0, 1]")
    n = part.n
    singles = {mask: (len(mem), q) for (mask, mem), q in zip(part.subclasses, q_n) if popcount(mask) == 1}
    multi = [(mask, len(mem), q) for (mask, mem), q in zip(part.subclasses, q_n) if popcount(mask) >= 2]
    if len(multi) > D_LIMIT:
        raise ValueError(f"too many subclasses with m >= 2 ({len(multi)} > {D_LIMIT})")

    def prob(parity: int, size: int, q: float) -> float:
        return 0.5 * (1 + (-1) ** parity * (1 - 2 * q) ** size)

    total = 0.0
    for gamma in product((0, 1), repeat=len(multi)):
        w = 1.0
        acc = 0
        for g, (mask, size, q) in zip(gamma, multi):
            w *= prob(g, size, q)
            if g:
                acc ^= mask
        if w == 0.0:
            continue
        for i in range(n):
            g1 = ((psi >> i) & 1) ^ ((acc >> i) & 1)
            size, q = singles.get(1 << i, (0, 0.0))
            w *= prob(g1, size, q)
        total += w
    return total


def mixing_gd(part: SubclassPartition, q_n: Sequence[float], basis_graph: Graph) -> GDState:
    lam = np.array([mixing_probabilities(part, q_n, psi) for psi in range(1 << part.n)])
    return GDState(basis_graph, lam / lam.sum())


def noise_on_S_gd(basis_graph: Graph, per_node_noise: Mapping[int, object], tags: Sequence[int] | None = None) -> GDState:
    """GD state of |G_S> after each node k suffers its channel conjugated by tags[k].

    per_node_noise is keyed by position 0..n-1 in basis_graph.
    """
    from .oracle import tag_matrix

    n = basis_graph.n_nodes
    dists = []
    for k, c in _probs_map(per_node_noise).items():
        probs = conjugate_probs(c, tag_matrix(tags[k])) if tags is not None else c
        dists.append((probs, _z_strings(basis_graph.adj, k)))
    lam = walsh_hadamard(_spectrum(dists, n)) / (1 << n)
    lam = np.clip(lam, 0.0, None)
    return GDState(basis_graph, lam / lam.sum())


def ghz_f(q: float, eps: float) -> float:
    return q * (1 + eps * (1 - q / 2))


def ghz_pd_closed_form(n_qubits: int, q: float, eps: float) -> GDState:
    """Star-basis GD state of an n-qubit GHZ state under non-Markovian dephasing on every qubit.

    Node 0 is the hub; coherence is the |0..0><1..1| element in the GHZ frame.
    """
    if n_qubits < 2:
        raise ValueError("need at least two qubits")
    c = (1 - ghz_f(q, eps)) ** n_qubits
    lam = np.zeros(1 << n_qubits)
    lam[0] = (1 + c) / 2
    lam[1] = (1 - c) / 2
    from .graph_core import star_graph

    return GDState(star_graph(n_qubits), lam, coherence=c / 2)
