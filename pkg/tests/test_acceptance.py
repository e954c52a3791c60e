"""Acceptance criteria 1-8. Each test prints one PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v`` or ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
import time

import numpy as np
import pytest

from stabloc import oracle, selfcheck
from stabloc.gd_engine import GDState, noise_on_S_gd, noisy_gd_state, noisy_outcome, xor_compose
from stabloc.graph_core import Graph, line_graph
from stabloc.localizer import (
    LatticeSpec,
    alpha_c_for,
    census_scaling,
    critical_noise,
    lgme_pure,
    placement,
    toric_bf_closed_form,
    two_loop_negativity,
)
from stabloc.noise_channels import ChannelSpec
from stabloc.reduction import PauliSetup, reduce_setup

KINDS = ("BF", "BPF", "PD", "DP")
EPS_GRID = (0.0, 0.25, 0.5, 0.75, 1.0)


def _line(number: int, ok: bool, detail: str, seconds: float) -> str:
    return f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail}; {seconds:.1f} s)"


def _run(number, fn, acceptance_log, capsys):
    t0 = time.perf_counter()
    ok, detail = fn()
    line = _line(number, ok, detail, time.perf_counter() - t0)
    with capsys.disabled():
        print("\n" + line)
    acceptance_log.append(line)
    assert ok, detail


# ---------------------------------------------------------------- 1


def criterion_1():
    rep = selfcheck.oracle_equivalence(seed=0, n_graphs=200, max_n=7, max_sp=4)
    detail = f"{rep.cases} outcomes over 200 graphs"
    if rep.failures:
        detail += f", first failure: {rep.failures[0]}"
    return rep.passed, detail


# ---------------------------------------------------------------- 2


def _census(lat, spec):
    lattice = LatticeSpec.parse(lat)
    return lgme_pure(lattice.graph(), placement(lattice, spec))


def criterion_2():
    problems = []
    for n in range(2, 11):
        res = _census(f"linear:{n + 4}", f"bulk:{n}")
        if res.value != n // 2:
            problems.append(f"linear n={n}: {res.value} != {n // 2}")
    expected = [
        ("square:4x4", "bulk", 38, 2, {1, 2}, 2),
        ("square:4x4", "boundary", 38, 2, {1, 2}, 2),
        ("square:4x4", "corner", 13, 1, {2}, 2),
        ("ladder:2x6", "boundary:2", 3, 1, {2}, 2),
        ("ladder:2x6", "bulk:2", 7, 2, None, 2),
        ("ladder:2x7", "bulk:3", 9, None, {2, 3}, 3),
        ("ladder:2x8", "bulk:4", 9, None, {4}, 4),
        ("ladder:2x8", "bulk:5", 9, None, {5}, 5),
    ]
    for lat, spec, m, orbits, values, best in expected:
        res = _census(lat, spec)
        got_values = {v[0] for v in res.orbit_values.values()}
        exact = all(lo == hi for lo, hi in res.orbit_values.values())
        if res.n_subgraphs != m:
            problems.append(f"{lat} {spec}: {res.n_subgraphs} subgraphs, expected {m}")
        if orbits is not None and res.n_orbits != orbits:
            problems.append(f"{lat} {spec}: {res.n_orbits} orbits, expected {orbits}")
        if values is not None and got_values != values:
            problems.append(f"{lat} {spec}: values {sorted(got_values)}, expected {sorted(values)}")
        if res.value != best or not exact:
            problems.append(f"{lat} {spec}: LGME {res.value} (bounds tight: {exact}), expected {best}")
    return not problems, "; ".join(problems) or "all censuses and values match"


# ---------------------------------------------------------------- 3


def criterion_3():
    lattice = LatticeSpec.parse("ladder:2x8")
    places = {n: placement(lattice, f"leg:{n}") for n in range(2, 9)}
    rows, (a, b) = census_scaling(lattice.graph(), places)
    ok = abs(b - 0.481) <= 0.02 and abs(a + 0.78) <= 0.05
    counts = [round(10**y) for _, y in rows]
    return ok, f"M={counts}, fit a={a:.4f} b={b:.4f}"


# ---------------------------------------------------------------- 4


FORBID_GRAPH = Graph.from_edges(4, [(0, 1), (0, 2), (1, 2), (0, 3), (1, 3)])


def criterion_4():
    worst = 0.0
    for q in (0.1, 0.3, 0.7):
        a, c = 1 - q + q * q / 2, q - q * q / 2
        row = np.array([a, 0, 0, c])
        s_noise = noise_on_S_gd(line_graph(2), {0: ChannelSpec("BPF", q), 1: ChannelSpec("BPF", q)}).lambdas
        rr = reduce_setup(FORBID_GRAPH, [0, 1], PauliSetup.parse("2:Z 3:Z"))
        measured = noisy_gd_state(rr, {i: ChannelSpec("BPF", q) for i in (2, 3)}).lambdas
        composed = xor_compose(GDState(line_graph(2), row), GDState(line_graph(2), row)).lambdas
        full = noisy_gd_state(rr, {i: ChannelSpec("BPF", q) for i in range(4)}).lambdas
        comp_exp = np.array([a * a + c * c, 0, 0, 2 * a * c])
        for got, exp in ((s_noise, row), (measured, row), (composed, comp_exp), (full, comp_exp)):
            worst = max(worst, float(np.abs(got - exp).max()))
        # forbidden-outcome case through the dense path
        setup = PauliSetup.parse("2:X 3:X")
        rrx = reduce_setup(FORBID_GRAPH, [0, 1], setup)
        rho = oracle.apply_channels(oracle.density(oracle.dense_graph_state(FORBID_GRAPH)), {i: (1 - q / 2, 0, q / 2, 0) for i in range(4)})
        p, _ = oracle.project_and_condition(rho, setup.as_dict(), (0, 0))
        worst = max(worst, abs(p - a / 2))
        p2, rho2 = oracle.project_and_condition(rho, setup.as_dict(), (0, 1))
        frame = [oracle.tag_matrix(t) for t in noisy_outcome(rrx, {i: ChannelSpec("BPF", q) for i in range(4)}, (0, 1)).state.frame]
        lam = np.real(np.diag(oracle.graph_basis_matrix(rho2, line_graph(2), frame)))
        worst = max(worst, float(np.abs(lam - [0.5, 0, 0, 0.5]).max()))
    return worst <= 1e-12, f"largest deviation {worst:.2e}"


# ---------------------------------------------------------------- 5


def criterion_5():
    worst = 0.0
    spread = 0.0
    for k in range(1, 11):
        eps = k / 10
        vals = [critical_noise(alpha_c_for(LatticeSpec("toric", (n_p,)), "loop"), "BF", eps, "gmc") for n_p in (3, 4, 5)]
        worst = max(worst, max(abs(v - toric_bf_closed_form(eps)) for v in vals))
        spread = max(spread, max(vals) - min(vals))
    return worst <= 1e-5 and spread <= 1e-9, f"max |q_c - closed form| = {worst:.2e}, spread over N_P = {spread:.1e}"


# ---------------------------------------------------------------- 6

FAMILIES = {
    "linear": ("linear:12", ("bulk:4", "boundary:4")),
    "ladder": ("ladder:2x6", ("bulk:2", "boundary:2")),
    "square": ("square:5x5", ("bulk", "boundary", "corner")),
}


def criterion_6():
    problems = []
    for fam, (lat, specs) in FAMILIES.items():
        lattice = LatticeSpec.parse(lat)
        setups = {s: alpha_c_for(lattice, s) for s in specs}
        for kind in KINDS:
            table = {s: [critical_noise(ns, kind, e) for e in EPS_GRID] for s, ns in setups.items()}
            for s, qs in table.items():
                if any(b > a + 1e-9 for a, b in zip(qs, qs[1:])):
                    problems.append(f"{fam} {s} {kind}: q_c increases in eps {qs}")
            if kind == "PD":
                base = next(iter(table.values()))
                if any(max(abs(x - y) for x, y in zip(qs, base)) > 1e-6 for qs in table.values()):
                    problems.append(f"{fam} PD curves differ across placements")
            else:
                for lo, hi in zip(specs, specs[1:]):
                    if any(a > b + 1e-9 for a, b in zip(table[lo], table[hi])):
                        problems.append(f"{fam} {kind}: {lo} q_c above {hi}")
    for kind in ("PD", "BPF", "DP"):
        for eps in (0.0, 0.5, 1.0):
            qs = [critical_noise(alpha_c_for(LatticeSpec("toric", (n_p,)), "loop"), kind, eps, "gmc") for n_p in (3, 4, 5, 6)]
            if any(b > a + 1e-9 for a, b in zip(qs, qs[1:])):
                problems.append(f"toric {kind} eps={eps}: q_c increases with N_P {qs}")
    return not problems, "; ".join(problems) or "all shape checks hold"


# ---------------------------------------------------------------- 7


def criterion_7():
    rep = selfcheck.op_count_bound(seed=0, n_graphs=100, max_n=24)
    detail = f"{rep.cases} reductions"
    if rep.failures:
        detail += f", first failure: {rep.failures[0]}"
    return rep.passed, detail


# ---------------------------------------------------------------- 8


def criterion_8():
    problems = []
    qs = (0.0, 0.1, 0.2, 0.3)
    for kind in ("BF", "PD"):
        for n_p in (3, 4, 5, 6):
            curves = {d: [e for _, e in two_loop_negativity(n_p, d, ChannelSpec(kind, 0.0), qs)] for d in range(1, n_p // 2 + 1)}
            for d, es in curves.items():
                if not es[0] > 0:
                    problems.append(f"{kind} N_P={n_p} d={d}: E(0)={es[0]}")
            for d in range(2, n_p // 2 + 1):
                for k, q in enumerate(qs):
                    if curves[d][k] > curves[d - 1][k] + 1e-12:
                        problems.append(f"{kind} N_P={n_p} q={q}: E grows from d={d - 1} to d={d}")
    return not problems, "; ".join(problems) or "positive at q=0, non-increasing in d"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8]


@pytest.mark.parametrize("number", range(1, 9))
def test_criterion(number, acceptance_log, capsys):
    _run(number, CRITERIA[number - 1], acceptance_log, capsys)


if __name__ == "__main__":
    for i, fn in enumerate(CRITERIA, 1):
        t0 = time.perf_counter()
        ok, detail = fn()
        print(_line(i, ok, detail, time.perf_counter() - t0), flush=True)
