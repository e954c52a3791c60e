"""Randomized equivalence suites between the graph calculus and the dense simulator."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import oracle
from .gd_engine import noisy_outcome
from .graph_core import Graph, complete_graph, is_connected
from .reduction import PauliSetup, ReductionError, classify_outcomes, measure_graph, reduce_setup


@dataclass
class SuiteReport:
    name: str
    cases: int = 0
    failures: list[str] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failures

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{self.name}: {status} ({self.cases} cases, {len(self.failures)} failures)"


def random_connected_graph(rng: random.Random, n: int, p: float = 0.45) -> Graph:
    while True:
        edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
        g = Graph.from_edges(n, edges)
        if n == 1 or is_connected(g):
            return g


def _describe(g: Graph, s, setup, extra: str) -> str:
    return f"graph n={g.n_nodes} edges={g.edges()} S={list(s)} setup='{setup}' {extra}"


def oracle_equivalence(seed: int = 0, n_graphs: int = 200, max_n: int = 7, max_sp: int = 4) -> SuiteReport:
    """Probabilities, forbidden sets and post-measured states for every setup and outcome."""
    rep = SuiteReport("oracle-equivalence")
    t0 = time.perf_counter()
    rng = random.Random(seed)
    for _ in range(n_graphs):
        n = rng.randint(2, max_n)
        g = random_connected_graph(rng, n)
        n_sp = rng.randint(1, min(max_sp, n - 1))
        sp = sorted(rng.sample(range(n), n_sp))
        s = [i for i in range(n) if i not in sp]
        psi = oracle.dense_graph_state(g)
        for axes in product((1, 2, 3), repeat=n_sp):
            setup = PauliSetup(tuple(zip(sp, axes)))
            try:
                rr = reduce_setup(g, s, setup)
            except ReductionError as exc:
                rep.failures.append(_describe(g, s, setup, f"reduction error {exc}"))
                continue
            forbidden = classify_outcomes(rr).forbidden
            for out in product((0, 1), repeat=n_sp):
                rep.cases += 1
                p, state = oracle.project_pure(psi, setup.as_dict(), out)
                pm = measure_graph(rr, out)
                if abs(p - pm.probability) > 1e-12 or (p < oracle.ZERO_PROBABILITY) != (out in forbidden):
                    rep.failures.append(_describe(g, s, setup, f"outcome={out} p={p} graph_p={pm.probability}"))
                    continue
                if p < oracle.ZERO_PROBABILITY:
                    continue
                mine = oracle.dense_graph_state(pm.subgraph_on_S)
                for pos, m in enumerate(pm.correction):
                    mine = oracle.apply_1q(mine, m, pos)
                if oracle.fidelity_pure(mine, state) < 1 - 1e-10:
                    rep.failures.append(_describe(g, s, setup, f"outcome={out} fidelity too low"))
    rep.seconds = time.perf_counter() - t0
    return rep


def noisy_equivalence(seed: int = 0, n_graphs: int = 60, max_n: int = 6) -> SuiteReport:
    """GD weights and outcome probabilities under random Pauli channels."""
    rep = SuiteReport("noisy-gd-equivalence")
    t0 = time.perf_counter()
    rng = random.Random(seed)
    nrng = np.random.default_rng(seed)
    for _ in range(n_graphs):
        n = rng.randint(3, max_n)
        g = random_connected_graph(rng, n)
        s = sorted(rng.sample(range(n), rng.randint(2, min(4, n - 1))))
        setup = PauliSetup(tuple((i, rng.randint(1, 3)) for i in range(n) if i not in s))
        chans = {}
        for i in range(n):
            w = nrng.random(4)
            w[0] += 2
            chans[i] = tuple(w / w.sum())
        rr = reduce_setup(g, s, setup)
        rho = oracle.apply_channels(oracle.density(oracle.dense_graph_state(g)), chans)
        for out in product((0, 1), repeat=n - len(s)):
            rep.cases += 1
            p, rho_s = oracle.project_and_condition(rho, setup.as_dict(), out)
            res = noisy_outcome(rr, chans, out)
            if abs(p - res.probability) > 1e-10:
                rep.failures.append(_describe(g, s, setup, f"outcome={out} p={p} gd_p={res.probability}"))
                continue
            if p < 1e-12:
                continue
            frame = [oracle.tag_matrix(t) for t in res.state.frame]
            m = oracle.graph_basis_matrix(rho_s, res.state.basis_graph, frame)
            diag = np.real(np.diag(m))
            off = np.abs(m - np.diag(np.diag(m))).max()
            if np.abs(diag - res.state.lambdas).max() > 1e-10 or off > 1e-10:
                rep.failures.append(_describe(g, s, setup, f"outcome={out} GD weights differ"))
    rep.seconds = time.perf_counter() - t0
    return rep


def op_count_bound(seed: int = 0, n_graphs: int = 100, max_n: int = 24) -> SuiteReport:
    """op_count <= m (N^2 - N + 6) for m Y measurements, random graphs plus complete graphs."""
    rep = SuiteReport("op-count-bound")
    t0 = time.perf_counter()
    rng = random.Random(seed)
    cases = []
    for _ in range(n_graphs):
        n = rng.randint(2, max_n)
        p = rng.choice((0.1, 0.3, 0.6, 0.9, 1.0))
        g = Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p])
        s = rng.sample(range(n), rng.randint(0, n - 1))
        cases.append((g, s, None))
    for n in (max_n,):
        g = complete_graph(n)
        for m in range(n + 1):
            cases.append((g, [], m))
    for g, s, m_fixed in cases:
        n = g.n_nodes
        sp = [i for i in range(n) if i not in s]
        ms = range(len(sp) + 1) if m_fixed is None else [m_fixed]
        for m in ms:
            ys = set(sp[:m]) if m_fixed is not None else set(rng.sample(sp, m))
            setup = PauliSetup(tuple((i, 2 if i in ys else 3) for i in sp))
            rr = reduce_setup(g, s, setup)
            rep.cases += 1
            if rr.op_count > m * (n * n - n + 6):
                rep.failures.append(_describe(g, s, setup, f"op_count={rr.op_count} bound={m * (n * n - n + 6)}"))
    rep.seconds = time.perf_counter() - t0
    return rep
