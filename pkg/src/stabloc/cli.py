"""Command line front end. Every data command writes CSV with a header row."""

from __future__ import annotations

import argparse
import os
import sys
from typing import Sequence

import numpy as np

from .graph_core import AttributedGraph, CliffordTag, Graph
from .localizer import (
    LatticeSpec,
    alpha_c_for,
    census_scaling,
    lgme_pure,
    noisy_lower_bound,
    placement,
    qc_curve,
    two_loop_negativity,
)
from .noise_channels import ChannelSpec
from .reduction import AXIS_NAMES, PauliSetup, classify_outcomes, reduce_setup

SUPPORTED = """supported combinations:
  reduce  --graph FILE | --lattice L   --pms SETUP [--subsystem SPEC]
  lgme    --graph FILE | --lattice L   --subsystem SPEC   [--measure schmidt|ggm]
  sweep   --lattice L --subsystem SPEC --noise KIND:eps=..  --q-grid a:b:step
          (linear/ladder/square/cubic placements; toric loop; toric loops:d -> negativity)
  qc      --lattice L --subsystem SPEC --noise KIND:eps=..  --eps-grid a:b:step
  census  --lattice L --subsystem NAME --n-range a:b        (NAME: leg, bulk, boundary)
  check   [--seed N] [--graph FILE]"""


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------- parsing helpers


def read_graph(path: str) -> AttributedGraph:
    """Graph file: optional first line ``N`` (or ``nodes N``), then ``i j`` edges and
    optional ``tag i TAG`` lines; ``#`` starts a comment."""
    edges = []
    tags: dict[int, CliffordTag] = {}
    declared = None
    seen_content = False
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                if parts[0] == "nodes" or (len(parts) == 1 and not seen_content):
                    if len(parts) != (2 if parts[0] == "nodes" else 1):
                        raise ValueError("expected a node count")
                    declared = int(parts[-1])
                    if declared < 1:
                        raise ValueError("node count must be positive")
                elif parts[0] == "tag":
                    if len(parts) != 3 or parts[2].upper() not in CliffordTag.__members__:
                        raise ValueError("expected 'tag i TAG' with TAG in I,Z,H,HZ,R,RZ,HR,HRZ")
                    tags[int(parts[1])] = CliffordTag[parts[2].upper()]
                else:
                    if len(parts) != 2:
                        raise ValueError("expected two node indices")
                    i, j = int(parts[0]), int(parts[1])
                    if i < 0 or j < 0:
                        raise ValueError("negative node index")
                    if i == j:
                        raise ValueError(f"self-loop on node {i}")
                    edges.append((i, j))
            except ValueError as exc:
                raise UsageError(f"{path}:{lineno}: {exc}") from None
            seen_content = True
    used = [v for e in edges for v in e] + list(tags)
    n = declared if declared is not None else 1 + max(used, default=-1)
    try:
        g = Graph.from_edges(n, edges)
        if any(i >= n for i in tags):
            raise ValueError("tag on a node outside the graph")
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from None
    return AttributedGraph(g, tuple(tags.get(i, CliffordTag.I) for i in range(n)))


def parse_grid(text: str) -> list[float]:
    """``a:b:step`` inclusive of b (up to rounding), or a comma list."""
    if "," in text or ":" not in text:
        return [float(v) for v in text.split(",") if v.strip()]
    a, b, step = (float(v) for v in text.split(":"))
    if step <= 0:
        raise UsageError("grid step must be positive")
    count = int(np.floor((b - a) / step + 1e-9)) + 1
    return [round(a + k * step, 12) for k in range(count)]


def parse_range(text: str) -> list[int]:
    a, _, b = text.partition(":")
    return list(range(int(a), int(b or a) + 1))


def parse_pms(text: str, n: int, s_nodes: Sequence[int] | None) -> PauliSetup:
    body = text.strip()
    if body.isdigit():
        if s_nodes is None:
            raise UsageError("a digit-string setup needs --subsystem to fix the measured nodes")
        sp = [i for i in range(n) if i not in set(s_nodes)]
        if len(body) != len(sp):
            raise UsageError(f"setup has {len(body)} digits for {len(sp)} measured nodes")
        return PauliSetup(tuple((i, int(c)) for i, c in zip(sp, body)))
    try:
        return PauliSetup.parse(body)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def fmt(v: float) -> str:
    return f"{v:.9g}"


class Sink:
    """Single ordered output channel (file or stdout)."""

    def __init__(self, path: str | None):
        self.path = path
        self.parts: list[str] = []

    def write(self, text: str) -> None:
        self.parts.append(text)

    def close(self) -> None:
        data = "".join(self.parts)
        if self.path:
            with open(self.path, "w", newline="\n") as fh:
                fh.write(data)
        else:
            sys.stdout.write(data)


def _graph_and_subsystem(args) -> tuple[AttributedGraph, list[int] | None, LatticeSpec | None]:
    lattice = None
    if args.graph:
        ag = read_graph(args.graph)
    elif args.lattice:
        lattice = LatticeSpec.parse(args.lattice)
        if lattice.kind == "toric":
            raise UsageError("toric lattices are only available in sweep and qc")
        ag = AttributedGraph.plain(lattice.graph())
    else:
        raise UsageError("need --graph or --lattice")
    g = ag.graph
    s = None
    if args.subsystem:
        if lattice is not None:
            s = placement(lattice, args.subsystem)
        else:
            name, _, arg = args.subsystem.partition(":")
            body = arg if name == "nodes" else args.subsystem
            s = sorted({int(v) for v in body.split(",") if v.strip()})
            if any(v >= g.n_nodes for v in s):
                raise UsageError("subsystem node out of range")
    return ag, s, lattice


def _quantifier(args, lattice: LatticeSpec) -> str:
    if args.quantifier != "auto":
        return args.quantifier
    return "gmc" if lattice.kind == "toric" else "gme"


# ---------------------------------------------------------------- commands


def cmd_reduce(args, out: Sink) -> int:
    ag, s, _ = _graph_and_subsystem(args)
    if not args.pms:
        raise UsageError("reduce needs --pms")
    n = ag.graph.n_nodes
    setup = parse_pms(args.pms, n, s)
    if s is None:
        s = [i for i in range(n) if i not in set(setup.nodes)]
    rr = reduce_setup(ag, s, setup)
    cls = classify_outcomes(rr)
    red = rr.reduced
    out.write("# reduced graph\n")
    out.write("i,j\n")
    for i, j in red.graph.edges():
        out.write(f"{i},{j}\n")
    out.write("# tags and regions\n")
    out.write("node,tag,region,axis\n")
    axes = setup.as_dict()
    for i in range(red.graph.n_nodes):
        region = "S" if i in rr.regions.S else ("S1" if i in rr.regions.S1 else "S2")
        axis = AXIS_NAMES.get(axes.get(i, 0), "-")
        out.write(f"{i},{red.tags[i].name},{region},{axis}\n")
    out.write("# summary\n")
    out.write("quantity,value\n")
    out.write(f"op_count,{rr.op_count}\n")
    out.write(f"class,{cls.kind}\n")
    out.write(f"forbidden_outcomes,{len(cls.forbidden)}\n")
    out.write(f"subgraph_on_S,{' '.join(f'{i}-{j}' for i, j in rr.subgraph_on_S().edges())}\n")
    return 0


def cmd_lgme(args, out: Sink) -> int:
    ag, s, _ = _graph_and_subsystem(args)
    if s is None:
        raise UsageError("lgme needs --subsystem")
    res = lgme_pure(ag, s, args.measure, args.threads)
    out.write("orbit,example_edges,lower,upper\n")
    for k, (key, (lo, hi)) in enumerate(sorted(res.orbit_values.items())):
        example = next(r.subgraph for r in res.records if r.orbit == key)
        edges = " ".join(f"{i}-{j}" for i, j in example.edges())
        out.write(f"{k},{edges},{fmt(lo)},{fmt(hi)}\n")
    value = "none" if res.value is None else fmt(res.value)
    print(f"lgme={value} subgraphs={res.n_subgraphs} orbits={res.n_orbits}", file=sys.stderr)
    return 0


def cmd_sweep(args, out: Sink) -> int:
    lattice, spec, noise = _noisy_inputs(args)
    qs = parse_grid(args.q_grid)
    if lattice.kind == "toric" and spec.startswith("loops"):
        d = int(spec.partition(":")[2])
        rows = two_loop_negativity(lattice.dims[0], d, noise, qs)
    else:
        ns = alpha_c_for(lattice, spec)
        quant = _quantifier(args, lattice)
        rr = ns.reduce()
        rows = [(q, noisy_lower_bound(ns, noise.with_q(q), quant, rr)[1]) for q in qs]
    out.write("q,E\n")
    for q, e in rows:
        out.write(f"{fmt(q)},{fmt(e)}\n")
    return 0


def cmd_qc(args, out: Sink) -> int:
    lattice, spec, noise = _noisy_inputs(args)
    if lattice.kind == "toric" and spec.startswith("loops"):
        raise UsageError("qc is not defined for the two-loop negativity\n" + SUPPORTED)
    ns = alpha_c_for(lattice, spec)
    curve = qc_curve(ns, noise.kind, parse_grid(args.eps_grid), _quantifier(args, lattice))
    out.write(curve.to_csv())
    if curve.coefficients:
        print("fit " + " ".join(fmt(c) for c in curve.coefficients), file=sys.stderr)
    return 0


def _noisy_inputs(args) -> tuple[LatticeSpec, str, ChannelSpec]:
    if not (args.lattice and args.subsystem and args.noise):
        raise UsageError("need --lattice, --subsystem and --noise\n" + SUPPORTED)
    return LatticeSpec.parse(args.lattice), args.subsystem, ChannelSpec.parse(args.noise)


def cmd_census(args, out: Sink) -> int:
    if not (args.lattice and args.subsystem and args.n_range):
        raise UsageError("census needs --lattice, --subsystem and --n-range\n" + SUPPORTED)
    lattice = LatticeSpec.parse(args.lattice)
    g = lattice.graph()
    places = {n: placement(lattice, f"{args.subsystem}:{n}") for n in parse_range(args.n_range)}
    rows, (a, b) = census_scaling(g, places, args.threads)
    out.write("n,log10M\n")
    for n, y in rows:
        out.write(f"{n},{fmt(y)}\n")
    print(f"fit log10M = {a:.4f} + {b:.4f} n", file=sys.stderr)
    return 0


def cmd_check(args, out: Sink) -> int:
    from . import selfcheck

    ok = True
    if args.graph:
        try:
            g = read_graph(args.graph).graph
            out.write(f"graph-invariants: PASS ({g.n_nodes} nodes, {g.n_edges()} edges)\n")
        except UsageError as exc:
            out.write(f"graph-invariants: FAIL\n  {exc}\n")
            ok = False
    suites = (
        lambda: selfcheck.oracle_equivalence(args.seed, args.cases),
        lambda: selfcheck.noisy_equivalence(args.seed),
        lambda: selfcheck.op_count_bound(args.seed),
    )
    for run in suites:
        rep = run()
        out.write(rep.line() + "\n")
        print(f"{rep.name}: {rep.seconds:.2f} s", file=sys.stderr)
        if not rep.passed:
            out.write(f"  first counterexample: {rep.failures[0]}\n")
            ok = False
    return 0 if ok else 1


COMMANDS = {
    "reduce": cmd_reduce,
    "lgme": cmd_lgme,
    "sweep": cmd_sweep,
    "qc": cmd_qc,
    "census": cmd_census,
    "check": cmd_check,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stabloc", description=__doc__, epilog=SUPPORTED, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--graph", help="edge list file")
    p.add_argument("--pms", help="setup, e.g. '0:X 3:Y' or digits over the measured nodes")
    p.add_argument("--lattice", help="linear:N, ladder:2xR, square:LxL, cubic:L, toric:N_P")
    p.add_argument("--subsystem", help="placement, e.g. bulk:4, corner, leg, loop, loops:1, nodes:0,1")
    p.add_argument("--noise", help="KIND:q=..,eps=.. with KIND in BF, PD, BPF, DP")
    p.add_argument("--eps-grid", default="0:1:0.1")
    p.add_argument("--q-grid", default="0:0.5:0.05")
    p.add_argument("--n-range", help="a:b for census")
    p.add_argument("--measure", default="schmidt", choices=("schmidt", "ggm"))
    p.add_argument("--quantifier", default="auto", choices=("auto", "gme", "gmc", "negativity"))
    p.add_argument("--cases", type=int, default=200, help="random graphs in the oracle suite")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads is None and os.environ.get("STABLOC_THREADS"):
        args.threads = int(os.environ["STABLOC_THREADS"])
    out = Sink(args.out)
    try:
        code = COMMANDS[args.command](args, out)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out.close()
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
