"""Command-line experiment driver.

Every experiment writes CSV (or JSON for ``simulate``) to ``--out`` or stdout.
The exit status is 1 when a checked bound fails and 2 on bad input.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .backends.counter import CSV_HEADER, CounterStage
from .backends.serialize import load, save
from .backends.simulator import Simulator
from .compiler import compile_shor
from .decompose import TARGET, DecomposeStage
from .engine import ListBackend, Pipeline
from .errors import QcflowError
from .mapping.mapper import MapperStage
from .mapping.placement import Grid, Linear
from .mapping.routing import grid_route, oets_route
from .optimize import OptimizerStage
from .qmath import ShorParams, default_base


def _toggle(v: str) -> list[bool]:
    return {"on": [True], "off": [False], "both": [True, False]}[v]


def _n_list(s: str) -> list[int]:
    return [int(x) for x in s.replace(" ", "").split(",") if x]


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    return int(os.environ.get("QCFLOW_SEED", "0"))


def grid_for(width: int) -> tuple[int, int]:
    """Smallest near-square grid with at least ``width`` cells."""
    rows = math.isqrt(width)
    if rows * rows < width:
        rows += 1
    cols = -(-width // rows)
    return rows, cols


def _graphs(args, width: int):
    out = []
    if args.arch in ("linear", "all"):
        out.append(("linear", Linear(width)))
    if args.arch in ("grid", "all"):
        r, c = (args.rows, args.cols) if args.rows and args.cols else grid_for(width)
        out.append((f"grid{r}x{c}", Grid(r, c)))
    return out


def cmd_shor_resources(args, out) -> int:
    rows = []
    for N in _n_list(args.n_list):
        params = ShorParams(N, default_base(N))
        for cuc in _toggle(args.cuc):
            for igs in _toggle(args.igs):
                run = compile_shor(N, params.a, cuc=cuc, igs=igs, window=args.window)
                rows.append((N, run.variant, run.scaled().csv_row(N, params.n, run.variant)))
    out.write(CSV_HEADER + "\n")
    for _, _, row in sorted(rows):
        out.write(row + "\n")
    return 0


MAP_HEADER = "N,arch,pre_cnot,post_cnot,pre_depth,post_depth,swaps"


def _map_pipeline(graph, window):
    pre = CounterStage()
    post = CounterStage()
    mapper = MapperStage(graph)
    back = ListBackend()
    stages = [DecomposeStage(TARGET), OptimizerStage(window), pre, mapper, DecomposeStage(TARGET),
              OptimizerStage(window), post]
    return Pipeline(stages, back), pre, post, mapper, back


def cmd_map(args, out) -> int:
    out.write(MAP_HEADER + "\n")
    if args.infile:
        cmds, width = load(args.infile)
        width = max(width, len({q for c in cmds for q in c.qubits}))
        for name, g in _graphs(args, width):
            eng, pre, post, mapper, back = _map_pipeline(g, args.window)
            eng._first.receive(cmds)
            eng.flush()
            r0, r1 = pre.report(), post.report()
            out.write(f"-,{name},{r0.cnot},{r1.cnot},{r0.depth},{r1.depth},{mapper.swaps}\n")
            if args.outfile:
                stem, ext = os.path.splitext(args.outfile)
                path = args.outfile if args.arch != "all" else f"{stem}.{name}{ext or '.json'}"
                save(path, back.commands, g.size)
                with open(path + ".placement.json", "w") as f:
                    json.dump({str(k): v for k, v in sorted(mapper.final_placement().items())}, f)
        return 0
    for N in _n_list(args.n_list):
        params = ShorParams(N, default_base(N))
        width = 2 * params.n + 3
        for name, g in _graphs(args, width):
            run = compile_shor(N, params.a, cuc=True, igs=True, window=args.window, graph=g)
            r0, r1 = run.report, run.mapped_report
            out.write(f"{N},{name},{r0.cnot},{r1.cnot},{r0.depth},{r1.depth},{run.swaps}\n")
    return 0


ROUTE_HEADER = "arch,size,trials,max_layers,mean_layers,bound,ok"


def cmd_route_bench(args, out) -> int:
    rng = np.random.default_rng(_seed(args))
    out.write(ROUTE_HEADER + "\n")
    failed = False
    if args.arch in ("linear", "all"):
        for n in _n_list(args.n_list):
            depths = []
            for _ in range(args.trials):
                perm = rng.permutation(n).tolist()
                s = oets_route(perm)
                if s.apply(list(range(n))) != sorted(range(n), key=lambda i: perm[i]):
                    failed = True
                depths.append(s.depth)
            ok = max(depths) <= n
            failed |= not ok
            out.write(f"linear,{n},{args.trials},{max(depths)},{np.mean(depths):.3f},{n},{int(ok)}\n")
    if args.arch in ("grid", "all"):
        r, c = args.rows or 5, args.cols or 5
        size = r * c
        depths = []
        for _ in range(args.trials):
            perm = rng.permutation(size).tolist()
            s = grid_route({i: i for i in range(size)}, {i: perm[i] for i in range(size)}, r, c)
            arr = s.apply(list(range(size)))
            if any(arr[perm[i]] != i for i in range(size)):
                failed = True
            depths.append(s.depth)
        bound = 2 * r + c
        ok = max(depths) <= bound
        failed |= not ok
        out.write(f"grid{r}x{c},{size},{args.trials},{max(depths)},{np.mean(depths):.3f},{bound},{int(ok)}\n")
    return 1 if failed else 0


def cmd_simulate(args, out) -> int:
    if not args.infile:
        raise QcflowError("simulate needs --in FILE")
    cmds, width = load(args.infile)
    sim = Simulator(_seed(args))
    for q in range(width):
        sim.add_qubit(q)
    sim.receive(cmds)
    order = sorted(sim.index)
    amps = sim.amplitudes(order)
    probs = np.abs(amps) ** 2
    top = np.argsort(-probs, kind="stable")[:16]
    doc = {"qubits": order, "outcomes": {str(k): v for k, v in sorted(sim.outcomes.items())},
           "probabilities": [[int(i), float(probs[i])] for i in top if probs[i] > 1e-12]}
    out.write(json.dumps(doc) + "\n")
    return 0


EXPERIMENTS = {"shor-resources": cmd_shor_resources, "map": cmd_map, "route-bench": cmd_route_bench,
               "simulate": cmd_simulate}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qcflow", description=__doc__.splitlines()[0])
    p.add_argument("--experiment", required=True, choices=sorted(EXPERIMENTS))
    p.add_argument("--n-list", default="15", help="comma-separated N values (line sizes for route-bench)")
    p.add_argument("--cuc", choices=["on", "off", "both"], default="both",
                   help="compute/uncompute exception for control scopes")
    p.add_argument("--igs", choices=["on", "off", "both"], default="both", help="intermediate gate set")
    p.add_argument("--arch", choices=["all", "linear", "grid"], default="all")
    p.add_argument("--rows", type=int, default=None)
    p.add_argument("--cols", type=int, default=None)
    p.add_argument("--window", type=int, default=20, help="optimizer window")
    p.add_argument("--trials", type=int, default=1000, help="route-bench samples")
    p.add_argument("--seed", type=int, default=None, help="RNG seed (default: $QCFLOW_SEED or 0)")
    p.add_argument("--in", dest="infile", default=None)
    p.add_argument("--out", dest="outfile", default=None)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    fn = EXPERIMENTS[args.experiment]
    try:
        if args.outfile and args.experiment != "map":
            with open(args.outfile, "w") as f:
                return fn(args, f)
        return fn(args, sys.stdout)
    except (QcflowError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
