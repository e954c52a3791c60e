"""Single-qubit Pauli channels and their conjugation by node tags."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .graph_core import CliffordTag

KINDS = ("BF", "BPF", "PD", "DP")
_AXIS_OF_KIND = {"BF": 1, "BPF": 2, "PD": 3}


@dataclass(frozen=True)
class ChannelSpec:
    """Pauli channel of strength q; eps > 0 selects the non-Markovian variant."""

    kind: str
    q: float
    eps: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown channel kind {self.kind!r}")
        if not (0.0 <= self.q <= 1.0 and 0.0 <= self.eps <= 1.0):
            raise ValueError("q and eps must lie in [0, 1]")

    @classmethod
    def parse(cls, text: str) -> "ChannelSpec":
        """Parse ``BF:q=0.3,eps=0.5``."""
        kind, _, rest = text.strip().partition(":")
        params = {"q": 0.0, "eps": 0.0}
        for item in filter(None, rest.split(",")):
            key, _, val = item.partition("=")
            key = key.strip()
            if key not in params:
                raise ValueError(f"unknown channel parameter {key!r}")
            params[key] = float(val)
        return cls(kind.strip().upper(), params["q"], params["eps"])

    def with_q(self, q: float) -> "ChannelSpec":
        return ChannelSpec(self.kind, q, self.eps)


def dp_domain(eps: float) -> float:
    """Largest q for which the non-Markovian depolarizing weights stay non-negative."""
    return 1.0 if eps <= 4.0 / 9.0 else 4.0 / (9.0 * eps)


def channel_probs(spec: ChannelSpec) -> tuple[float, float, float, float]:
    q, e = spec.q, spec.eps
    if spec.kind == "DP":
        if q > dp_domain(e) + 1e-15:
            raise ValueError(f"DP weights negative for q={q}, eps={e} (q must be <= {dp_domain(e):.6g})")
        q0 = (1 - 3 * q / 4) * (1 - 9 * e * q / 4)
        qi = q / 4 * (1 + 3 * e * (1 - 3 * q / 4))
        return (max(q0, 0.0), qi, qi, qi)
    q0 = (1 - q / 2) * (1 - e * q / 2)
    qa = q / 2 * (1 + e * (1 - q / 2))
    out = [q0, 0.0, 0.0, 0.0]
    out[_AXIS_OF_KIND[spec.kind]] = qa
    return tuple(out)  # type: ignore[return-value]


_PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def pauli_label(m: np.ndarray) -> int:
    """Index s with m proportional to sigma^s; raises if m is not a Pauli up to phase."""
    for s, p in enumerate(_PAULI):
        overlap = np.trace(p.conj().T @ m) / 2
        if abs(abs(overlap) - 1) < 1e-9:
            return s
    raise ValueError("matrix is not a Pauli operator up to phase")


def conjugate_pauli_by(u: np.ndarray, p: int) -> int:
    """Label of u^dagger sigma^p u."""
    return pauli_label(u.conj().T @ _PAULI[p] @ u)


@lru_cache(maxsize=None)
def _tag_table() -> tuple[tuple[int, ...], ...]:
    from .oracle import tag_matrix

    return tuple(tuple(conjugate_pauli_by(tag_matrix(t), p) for p in range(4)) for t in range(8))


def conjugate_pauli(tag: CliffordTag | int, p: int) -> int:
    if not 0 <= p <= 3:
        raise ValueError("Pauli index must be 0..3")
    return _tag_table()[int(tag)][p]


def conjugate_probs(probs, u: np.ndarray) -> tuple[float, float, float, float]:
    """Channel weights seen after conjugation: out[s'] = probs[s] with sigma^{s'} = u^dagger sigma^s u."""
    out = [0.0] * 4
    for s in range(4):
        out[conjugate_pauli_by(u, s)] += probs[s]
    return tuple(out)  # type: ignore[return-value]


def anticommutes(a: int, b: int) -> bool:
    return a != 0 and b != 0 and a != b


def flip_probability(spec: ChannelSpec, measured_axis: int) -> float:
    if measured_axis not in (1, 2, 3):
        raise ValueError("axis must be 1, 2 or 3")
    probs = channel_probs(spec)
    return sum(probs[s] for s in (1, 2, 3) if anticommutes(s, measured_axis))
