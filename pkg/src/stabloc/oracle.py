"""Brute-force dense simulator used to cross-check the graph calculus at small N.

Qubit i is tensor axis i (node 0 is the most significant bit of a flat index).
"""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from .graph_core import CliffordTag, Graph

MAX_QUBITS = 12
ZERO_PROBABILITY = 1e-14

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
R = np.array([[1, 0], [0, 1j]], dtype=complex)
PAULIS = (I2, X, Y, Z)


def tag_matrix(tag: int) -> np.ndarray:
    t = CliffordTag(tag)
    m = I2
    if t.fill:
        m = m @ H
    if t.shape:
        m = m @ R
    if t.sign:
        m = m @ Z
    return m


def _check_size(n: int) -> None:
    if n > MAX_QUBITS:
        raise ValueError(f"dense simulation limited to {MAX_QUBITS} qubits")


def dense_graph_state(g: Graph, tags: Sequence[int] | None = None) -> np.ndarray:
    """Amplitudes of V|G> as an array of shape (2,)*N."""
    n = g.n_nodes
    _check_size(n)
    idx = np.arange(1 << n)
    bitvals = (idx[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1
    phase = np.zeros(1 << n, dtype=np.int64)
    for i, j in g.edges():
        phase ^= bitvals[:, i] & bitvals[:, j]
    psi = ((-1.0) ** phase / np.sqrt(1 << n)).astype(complex).reshape((2,) * n)
    if tags is not None:
        for i, t in enumerate(tags):
            if t:
                psi = apply_1q(psi, tag_matrix(t), i)
    return psi


def apply_1q(psi: np.ndarray, u: np.ndarray, i: int) -> np.ndarray:
    out = np.tensordot(u, psi, axes=([1], [i]))
    return np.moveaxis(out, 0, i)


def apply_1q_density(rho: np.ndarray, u: np.ndarray, i: int) -> np.ndarray:
    """rho has shape (2,)*2N with ket axes first."""
    n = rho.ndim // 2
    out = np.moveaxis(np.tensordot(u, rho, axes=([1], [i])), 0, i)
    out = np.moveaxis(np.tensordot(out, u.conj().T, axes=([n + i], [0])), -1, n + i)
    return out


def density(psi: np.ndarray) -> np.ndarray:
    v = psi.reshape(-1)
    n = psi.ndim
    return np.outer(v, v.conj()).reshape((2,) * (2 * n))


def apply_channels(rho: np.ndarray, channels: Mapping[int, Sequence[float]]) -> np.ndarray:
    """Independent single-qubit Pauli channels; channels[i] = (q0, q1, q2, q3)."""
    for i, probs in channels.items():
        p = np.asarray(probs, dtype=float)
        if p.shape != (4,) or np.any(p < -1e-12) or abs(p.sum() - 1) > 1e-12:
            raise ValueError(f"invalid Pauli probabilities on qubit {i}: {probs}")
        acc = np.zeros_like(rho)
        for s in range(4):
            if p[s]:
                acc = acc + p[s] * apply_1q_density(rho, PAULIS[s], i)
        rho = acc
    return rho


def projector(axis: int, bit: int) -> np.ndarray:
    return (I2 + (-1) ** bit * PAULIS[axis]) / 2


def project_pure(
    psi: np.ndarray, setup: Mapping[int, int], outcome: Sequence[int]
) -> tuple[float, np.ndarray]:
    """Project the measured nodes (ascending order) and return (probability, normalized state on S)."""
    measured = sorted(setup)
    n = psi.ndim
    keep = [i for i in range(n) if i not in setup]
    for node, b in zip(measured, outcome):
        psi = apply_1q(psi, projector(setup[node], b), node)
    prob = float(np.vdot(psi, psi).real)
    if prob < ZERO_PROBABILITY:
        return 0.0, np.zeros((2,) * len(keep), dtype=complex)
    # each measured qubit is now in a fixed state, pick the largest slice
    flat = np.moveaxis(psi, keep + measured, list(range(n))).reshape(1 << len(keep), -1)
    col = int(np.argmax(np.linalg.norm(flat, axis=0)))
    out = flat[:, col]
    out = out / np.linalg.norm(out)
    return prob, out.reshape((2,) * len(keep))


def project_and_condition(
    rho: np.ndarray, setup: Mapping[int, int], outcome: Sequence[int]
) -> tuple[float, np.ndarray]:
    """Probability and conditioned reduced density matrix (2^n x 2^n) on the unmeasured nodes."""
    n = rho.ndim // 2
    measured = sorted(setup)
    for node, b in zip(measured, outcome):
        p = projector(setup[node], b)
        rho = np.moveaxis(np.tensordot(p, rho, axes=([1], [node])), 0, node)
        rho = np.moveaxis(np.tensordot(rho, p, axes=([n + node], [0])), -1, n + node)
    for node in sorted(measured, reverse=True):
        m = rho.ndim // 2
        rho = np.trace(rho, axis1=node, axis2=m + node)
    k = rho.ndim // 2
    mat = rho.reshape(1 << k, 1 << k)
    prob = float(np.trace(mat).real)
    if prob < ZERO_PROBABILITY:
        return 0.0, np.zeros_like(mat)
    return prob, mat / prob


def graph_basis_states(g: Graph, frame: Sequence[np.ndarray] | None = None) -> np.ndarray:
    """Columns are C Z^psi |G>; bit k of the column index psi is the Z on node k."""
    n = g.n_nodes
    base = dense_graph_state(g).reshape(-1)
    idx = np.arange(1 << n)
    cols = np.empty((1 << n, 1 << n), dtype=complex)
    for psi in range(1 << n):
        parity = np.zeros(1 << n, dtype=np.int64)
        for i in range(n):
            if (psi >> i) & 1:
                parity ^= (idx >> (n - 1 - i)) & 1
        cols[:, psi] = base * (-1.0) ** parity
    if frame is not None:
        u = np.array([[1.0]], dtype=complex)
        for m in frame:
            u = np.kron(u, m)
        cols = u @ cols
    return cols


def graph_basis_matrix(rho_s: np.ndarray, g: Graph, frame: Sequence[np.ndarray] | None = None) -> np.ndarray:
    b = graph_basis_states(g, frame)
    return b.conj().T @ rho_s @ b


def graph_basis_fidelities(rho_s: np.ndarray, g: Graph, frame: Sequence[np.ndarray] | None = None) -> np.ndarray:
    return np.real(np.diag(graph_basis_matrix(rho_s, g, frame)))


def fidelity_pure(a: np.ndarray, b: np.ndarray) -> float:
    return float(abs(np.vdot(a.reshape(-1), b.reshape(-1))) ** 2)
