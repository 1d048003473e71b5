"""Command-line interface.

Exit codes: 0 success, 1 usage or input error, 2 no alternative flow,
3 algorithm failure or failed regression check.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import generators as gen
from .alt import (Infeasible, alt_edge_potential, alt_electrical_flow, check_alt_kirchhoff)
from .network import flow_state
from .oracle import (OracleGraph, alg1_find_target, alg2_find_path,
                     classical_embedding_baseline)
from .solver import effective_resistance, electrical_flow, vertex_potential
from .walk import (alt_potential_state, alt_walk, lemma_band, pe_zero, projector_antisymmetric,
                   projector_star_space, source_state, trace_distance_pure, walk_unitary)

SCHEMA = "altflow/1"

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_FAILURE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list:
    return [int(x) for x in text.split(",") if x.strip()]


def build_instance(args) -> gen.Instance:
    fam = args.family
    if fam == "welded-tree":
        return gen.welded_tree(args.h, args.seed)
    if fam == "hierarchical":
        if not args.sizes or not args.edges:
            raise ValueError("hierarchical needs --sizes and --edges")
        return gen.hierarchical_1d(gen.HierarchicalSpec(tuple(args.sizes), tuple(args.edges)),
                                   args.seed)
    if fam == "g1":
        return gen.graph_G1()
    if fam == "g2":
        return gen.graph_G2(args.n, args.seed)
    if fam == "circuit":
        return gen.welded_circuit(args.n, args.seed, tree_depth=args.tree_depth)
    if fam == "diamond":
        return gen.diamond(with_alt=not args.no_alt, drop_yt=args.drop_yt)
    if fam == "counterexample":
        return gen.diamond(drop_yt=True)
    raise ValueError(f"unknown family {fam!r}")


def _family_args(p: argparse.ArgumentParser, positional: bool):
    families = ["welded-tree", "hierarchical", "g1", "g2", "circuit", "diamond", "counterexample"]
    if positional:
        p.add_argument("family", choices=families)
    else:
        p.add_argument("input", nargs="?", help="instance JSON written by `gen` ('-' for stdin)")
        p.add_argument("--family", choices=families)
    p.add_argument("--h", type=int, default=2, help="welded tree depth")
    p.add_argument("--n", type=int, default=1, help="circuit layers, or tree depth for g2")
    p.add_argument("--tree-depth", type=int, default=None)
    p.add_argument("--sizes", type=_int_list, default=None, help="layer sizes, comma separated")
    p.add_argument("--edges", type=_int_list, default=None, help="edge counts, comma separated")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-alt", action="store_true", help="diamond without the extra state")
    p.add_argument("--drop-yt", action="store_true", help="diamond without edge (y,t)")


def load_instance(args) -> gen.Instance:
    if getattr(args, "input", None):
        text = sys.stdin.read() if args.input == "-" else open(args.input).read()
        return gen.Instance.from_dict(json.loads(text))
    if getattr(args, "family", None):
        return build_instance(args)
    raise ValueError("give an instance file or --family")


def _emit(obj, args):
    text = json.dumps(dict(obj, schema=SCHEMA), indent=2, default=_jsonable)
    out = getattr(args, "output", None)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _jsonable(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, tuple):
        return list(x)
    raise TypeError(f"cannot serialise {type(x).__name__}")


def _emit_csv(rows: list, header: list, args):
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(header)
    w.writerows(rows)
    out = getattr(args, "output", None)
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


# -- subcommands -------------------------------------------------------------


def cmd_gen(args) -> int:
    inst = build_instance(args)
    _emit(inst.to_dict(), args)
    return EXIT_OK


def _ohm_residual(inst, f, p) -> float:
    net = inst.net
    return max(abs(p[u] - p[v] - f[u, v] / net.weight(u, v)) for u, v in net.arcs)


def cmd_flow(args) -> int:
    inst = load_instance(args)
    net, s, t = inst.net, inst.s, inst.t
    f = electrical_flow(net, s, t)
    p = vertex_potential(net, s, t)
    kirchhoff = max(abs(f.divergence(u)) for u in net.vertices if u not in (s, t))
    if args.format == "csv":
        _emit_csv([[u, v, x] for (u, v), x in zip(net.arcs, f.values)], ["u", "v", "theta"], args)
        return EXIT_OK
    _emit({"R": f.energy(), "theta": f.to_dict()["flow"],
           "potential": {str(k): v for k, v in p.as_dict().items()},
           "kirchhoff_residual": kirchhoff, "ohm_residual": _ohm_residual(inst, f, p)}, args)
    return EXIT_OK


def cmd_altflow(args) -> int:
    inst = load_instance(args)
    net, s, t = inst.net, inst.s, inst.t
    f = alt_electrical_flow(net, inst.psi, s, t)
    if isinstance(f, Infeasible):
        _emit({"feasible": False, "residual": f.residual}, args)
        return EXIT_INFEASIBLE
    pe, coeffs = alt_edge_potential(net, inst.psi, s, t)
    ohm = max(abs(pe[u, v] - pe[v, u] - f[u, v] / net.weight(u, v)) for u, v in net.arcs)
    if args.format == "csv":
        _emit_csv([[u, v, x] for (u, v), x in zip(net.arcs, f.values)], ["u", "v", "theta"], args)
        return EXIT_OK
    report = {"feasible": True, "R_alt": f.energy(), "theta": f.to_dict()["flow"],
              "coefficients": [{"vertex": u, "index": i, "value": x}
                               for (u, i), x in coeffs.items()],
              "edge_potential": [{"arc": list(k), "value": x} for k, x in pe.as_dict().items()],
              "alt_kirchhoff_residual": check_alt_kirchhoff(net, inst.psi, f),
              "alt_ohm_residual": ohm}
    if inst.meta.get("family") == "g1":
        report["x"] = f[s, "v2"]
    elif inst.path:
        report["x"] = f[inst.path[0], inst.path[1]]
    _emit(report, args)
    return EXIT_OK


def _walk_for(inst, classical: bool):
    net, s, t = inst.net, inst.s, inst.t
    if classical:
        return walk_unitary(projector_antisymmetric(net), projector_star_space(net, s, t))
    return alt_walk(net, inst.psi, s, t)


def cmd_walk_spectrum(args) -> int:
    inst = load_instance(args)
    U = _walk_for(inst, args.classical)
    rows = U.spectrum(source_state(inst.net, inst.s))
    _emit_csv([[ph, m, ov] for ph, m, ov in rows], ["phase", "multiplicity", "overlap"], args)
    return EXIT_OK


def cmd_pe(args) -> int:
    inst = load_instance(args)
    net, s, t = inst.net, inst.s, inst.t
    f = alt_electrical_flow(net, inst.psi, s, t)
    if isinstance(f, Infeasible):
        _emit({"feasible": False, "residual": f.residual}, args)
        return EXIT_INFEASIBLE
    R = f.energy()
    ws = net.weighted_degree(s)
    pe, _ = alt_edge_potential(net, inst.psi, s, t)
    phi_norm = float(np.linalg.norm(alt_potential_state(net, pe, s, R)) / math.sqrt(R * ws))
    p = 1 / (R * ws)
    U = alt_walk(net, inst.psi, s, t)
    p_zero, post = pe_zero(U, source_state(net, s), args.T)
    lo, hi = lemma_band(p, phi_norm, args.T)
    _emit({"T": args.T, "p_zero": p_zero, "p": p, "band": [lo, hi],
           "trace_distance": trace_distance_pure(post, flow_state(f)),
           "trace_distance_bound": math.sqrt(17 * math.pi ** 2 * phi_norm / (16 * p * args.T))},
          args)
    return EXIT_OK


def _alg1_trial(job):
    h, seed, delta, mode = job
    inst = gen.welded_tree(h, seed)
    o = OracleGraph.from_instance(inst, seed=seed)
    return alg1_find_target(o, inst.psi, delta, mode=mode, seed=seed).to_dict()


def _alg2_trial(job):
    n, seed, delta, mode = job
    inst = gen.welded_circuit(n, seed)
    o = OracleGraph.from_instance(inst, seed=seed)
    return alg2_find_path(o, inst.psi, delta, n, mode=mode, seed=seed).to_dict()


def _baseline_trial(job):
    n, seed, budget = job
    inst = gen.welded_circuit(n, seed)
    o = OracleGraph.from_instance(inst, seed=seed)
    r = classical_embedding_baseline(o, budget, seed, inst.middle, inst.trees)
    return {"algorithm": "baseline", "params": {"n": n, "budget": budget}, "seed": seed,
            "success": r.win, "queries": r.queries, "found_middle": r.found_middle,
            "found_cycle": r.found_cycle, "cycle_kind": r.cycle_kind or ""}


def _batch(fn, jobs, workers: int) -> list:
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, jobs))
    return [fn(j) for j in jobs]


def _report_batch(rows: list, args, extra_cols=()) -> int:
    seeds = range(args.seed, args.seed + args.seeds)
    header = ["seed", "success", "queries"] + list(extra_cols)
    table = [[r["seed"], int(r["success"]), r["queries"]] + [r.get(c, "") for c in extra_cols]
             for r in rows]
    rate = sum(r["success"] for r in rows) / max(1, len(rows))
    if args.format == "csv":
        _emit_csv(table, header, args)
    else:
        _emit({"runs": rows, "success_rate": rate,
               "mean_queries": float(np.mean([r["queries"] for r in rows])) if rows else 0.0,
               "seeds": [seeds.start, seeds.stop]}, args)
    return EXIT_OK if rate > 0 or not rows else EXIT_FAILURE


def cmd_run_alg1(args) -> int:
    jobs = [(args.h, s, args.delta, args.mode) for s in range(args.seed, args.seed + args.seeds)]
    return _report_batch(_batch(_alg1_trial, jobs, args.workers), args)


def cmd_run_alg2(args) -> int:
    jobs = [(args.n, s, args.delta, args.mode) for s in range(args.seed, args.seed + args.seeds)]
    return _report_batch(_batch(_alg2_trial, jobs, args.workers), args)


def cmd_run_baseline(args) -> int:
    jobs = [(args.n, s, args.budget) for s in range(args.seed, args.seed + args.seeds)]
    rows = _batch(_baseline_trial, jobs, args.workers)
    _report_batch(rows, args, extra_cols=("found_middle", "found_cycle", "cycle_kind"))
    return EXIT_OK


def regression_checks() -> list:
    """(name, passed, detail) for the worked examples."""
    out = []

    def check(name, ok, detail=""):
        out.append((name, bool(ok), detail))

    d = gen.diamond()
    net = d.net
    f = electrical_flow(net, "s", "t")
    wtheta = f.values / np.sqrt(net.weights)
    check("electrical flow", np.allclose(wtheta, [1, 2 / 3, 4 / 3, 2 / 3], atol=1e-9))
    check("effective resistance", abs(effective_resistance(net, "s", "t") - 11 / 3) < 1e-9)
    p = vertex_potential(net, "s", "t")
    check("vertex potential", np.allclose([p[v] for v in "sxyt"], [11 / 3, 8 / 3, 4 / 3, 0], atol=1e-9))
    g = alt_electrical_flow(net, d.psi, "s", "t")
    check("alternative flow", np.allclose(g.values / np.sqrt(net.weights), 1, atol=1e-9))
    check("alternative resistance", abs(g.energy() - 4) < 1e-9)
    pe, coeffs = alt_edge_potential(net, d.psi, "s", "t")
    check("alternative coefficients",
          np.allclose(list(coeffs.values()), [4, 3, -math.sqrt(3) / 3, 2, 0], atol=1e-9))
    want = {("s", "x"): 4, ("x", "s"): 3, ("x", "y"): 4, ("y", "x"): 2, ("x", "t"): 2,
            ("t", "x"): 0, ("y", "t"): 2, ("t", "y"): 0}
    check("edge potentials", all(abs(pe[k] - v) < 1e-9 for k, v in want.items()))
    c = gen.diamond(drop_yt=True)
    res = alt_electrical_flow(c.net, c.psi, "s", "t")
    check("counterexample infeasible", isinstance(res, Infeasible),
          f"residual {getattr(res, 'residual', 0):.3g}")
    g1 = gen.graph_G1()
    f1 = alt_electrical_flow(g1.net, g1.psi, "s", "t")
    check("G1 split", abs(f1["s", "v2"] - 5 / 9) < 1e-9, f"x = {f1['s', 'v2']:.12f}")
    check("G1 resistance", abs(f1.energy() - 47 / 9) < 1e-9)
    for h in (1, 3):
        g2 = gen.graph_G2(h, 0)
        vals = gen.circuit_layer_values(h)
        f2 = alt_electrical_flow(g2.net, g2.psi, g2.s, g2.t)
        check(f"G2 depth {h}", abs(f2.energy() - vals["R_alt"]) < 1e-8
              and abs(f2[g2.path[0], g2.path[1]] - vals["x"]) < 1e-8)
    return out


def cmd_verify(args) -> int:
    checks = regression_checks()
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else ""))
    return EXIT_OK if all(ok for _, ok, _ in checks) else EXIT_FAILURE


def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="altflow", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a network with its alternative states")
    _family_args(g, positional=True)
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    for name, func in (("flow", cmd_flow), ("altflow", cmd_altflow)):
        q = sub.add_parser(name, help=f"solve the {'alternative ' if name == 'altflow' else ''}electrical flow")
        _family_args(q, positional=False)
        q.add_argument("--format", choices=["json", "csv"], default="json")
        q.add_argument("-o", "--output")
        q.set_defaults(func=func)

    q = sub.add_parser("walk-spectrum", help="eigenphases of the walk with source overlaps")
    _family_args(q, positional=False)
    q.add_argument("--classical", action="store_true", help="star states only")
    q.add_argument("-o", "--output")
    q.set_defaults(func=cmd_walk_spectrum)

    q = sub.add_parser("pe", help="phase-estimation zero outcome on the source state")
    _family_args(q, positional=False)
    q.add_argument("--T", type=int, default=100)
    q.add_argument("-o", "--output")
    q.set_defaults(func=cmd_pe)

    for name, func, size in (("run-alg1", cmd_run_alg1, "h"), ("run-alg2", cmd_run_alg2, "n"),
                             ("run-baseline", cmd_run_baseline, "n")):
        q = sub.add_parser(name, help="batch of seeded trials")
        q.add_argument(f"--{size}", type=int, default=2 if size == "h" else 1)
        q.add_argument("--seeds", type=int, default=10)
        q.add_argument("--seed", type=int, default=0, help="first seed")
        q.add_argument("--workers", type=int, default=1)
        q.add_argument("--format", choices=["json", "csv"], default="json")
        q.add_argument("-o", "--output")
        if name == "run-baseline":
            q.add_argument("--budget", type=int, required=True)
        else:
            q.add_argument("--delta", type=float, default=0.1)
            q.add_argument("--mode", choices=["analytic", "faithful"], default="analytic")
        q.set_defaults(func=func)

    q = sub.add_parser("verify", help="run the worked-example regression checks")
    q.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"altflow: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
