"""Command-line entry point ``opinion-shift``.

Exit status is 0 on success, 1 when the input is rejected and 2 when a
numerical routine fails.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from .dynamics import integrate_transient, steady_state
from .errors import BudgetExceededError, NumericalError, ValidationError
from .experiment import ExperimentSpec, generate_er, run_experiment
from .graph import (CUBIC_GRAPHS, LeaderConfig, Model, gadget_graph, is_strongly_connected,
                    is_vertex_cover, load_edge_list, write_edge_list)
from .selector import SelectionProblem, bound_search, brute_force, greedy_fast
from .single_leader import Heuristic, evaluate_single, select_single
from .walks import WalkKernel, effective_resistance, information_centrality

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2


# -- argument helpers ------------------------------------------------------


def _tokens(spec: str) -> list[str]:
    """Labels from a comma/whitespace separated list or from a file of the same."""
    if os.path.isfile(spec):
        with open(spec, encoding="utf-8") as fh:
            text = "\n".join(line.split("#", 1)[0] for line in fh)
    else:
        text = spec
    return [t for t in text.replace(",", " ").split() if t]


def _node_set(g, spec: str | None) -> frozenset:
    if spec is None:
        return frozenset()
    return frozenset(g.index(t) for t in _tokens(spec))


def _kappa(g, spec: str | None) -> np.ndarray:
    """Scalar stubbornness or a file with ``label value`` lines (others default to 1)."""
    if spec is None:
        return np.ones(g.n)
    try:
        value = float(spec)
    except ValueError:
        value = None
    if value is not None:
        if value <= 0:
            raise ValidationError("kappa must be positive")
        return np.full(g.n, value)
    kappa = np.ones(g.n)
    with open(spec, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            fields = line.split("#", 1)[0].split()
            if not fields:
                continue
            if len(fields) != 2:
                raise ValidationError(f"{spec}:{lineno}: expected 'label kappa'")
            kappa[g.index(fields[0])] = float(fields[1])
    if np.any(kappa <= 0):
        raise ValidationError("kappa must be positive")
    return kappa


def _load_graph(args):
    if args.graph:
        with open(args.graph, encoding="utf-8") as fh:
            return load_edge_list(fh, undirected=args.undirected, dedupe=args.dedupe)
    if args.er:
        n, p = args.er
        return generate_er(int(n), float(p), args.seed)
    raise ValidationError("give a graph with --graph FILE or --er N P")


def _add_graph_args(p):
    p.add_argument("--graph", metavar="FILE", help="edge list: 'u v [w]' per line, '#' comments")
    p.add_argument("--er", nargs=2, metavar=("N", "P"), help="use a seeded connected G(N, P) instead")
    p.add_argument("--undirected", action="store_true", help="mirror every edge")
    p.add_argument("--dedupe", action="store_true",
                   help="keep the first weight of a repeated edge instead of summing")
    p.add_argument("--seed", type=int, default=0)


def _add_model_args(p):
    p.add_argument("--model", choices=[m.value for m in Model], default="absolute")
    p.add_argument("--kappa", help="stubbornness: a number or a 'label value' file")


def _emit(obj):
    json.dump(obj, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


# -- subcommands ---------------------------------------------------------


def cmd_analyze(args):
    g = _load_graph(args)
    out = {"n": g.n, "m": g.m, "strongly_connected": is_strongly_connected(g),
           "undirected": g.is_symmetric()}
    if out["strongly_connected"]:
        k = WalkKernel(g)
        out["stationary"] = dict(zip(g.labels, k.pi.tolist()))
        if g.is_symmetric():
            out["information_centrality"] = dict(zip(g.labels, information_centrality(g).tolist()))
        if args.pair:
            u, v = (g.index(t) for t in args.pair)
            pair = {
                "u": args.pair[0], "v": args.pair[1],
                "hitting_time_uv": k.hitting_time(u, v),
                "hitting_time_vu": k.hitting_time(v, u),
                "commute_time": k.commute_time(u, v),
                "domination_uv": k.domination_score(u, v),
                "domination_vu": k.domination_score(v, u),
            }
            if g.is_symmetric():
                pair["effective_resistance"] = effective_resistance(g, u, v)
            out["pair"] = pair
    _emit(out)


def cmd_single(args):
    g = _load_graph(args)
    labels = _tokens(args.s0)
    if len(labels) != 1:
        raise ValidationError("--s0 must name exactly one node")
    (s0,) = _node_set(g, labels[0])
    kappa = _kappa(g, args.kappa)
    k = WalkKernel(g)
    heuristics = [h.value for h in Heuristic] if args.heuristic == "all" else [args.heuristic]
    rows = []
    for h in heuristics:
        node = select_single(k, s0, args.alpha, h, args.model, kappa, seed=args.seed)
        rep = evaluate_single(k, s0, node, args.alpha, args.model, kappa)
        rows.append({"heuristic": h, "s0": g.label(s0), "s1": g.label(node),
                     "mu": rep.mu, "f": rep.f})
    _emit(rows if len(rows) > 1 else rows[0])


def cmd_select(args):
    g = _load_graph(args)
    s0 = _node_set(g, args.s0)
    candidates = _node_set(g, args.candidates) if args.candidates else None
    problem = SelectionProblem(g, s0, args.alpha, args.k, candidates=candidates,
                               model=args.model, kappa=_kappa(g, args.kappa), delta=args.delta)
    trace = []
    if args.method == "bound-search":
        res = bound_search(problem)
        s1, mu, trace = res.s1, res.mu, [vars(t) for t in res.trace]
    elif args.method == "greedy":
        s1, mu = greedy_fast(problem, args.b_hat)
    else:
        s1, mu = brute_force(problem)
    labels = [g.label(v) for v in sorted(s1)]
    result = {"s1": labels, "mu": mu, "f": abs(mu - args.alpha), "alpha": args.alpha,
              "k": args.k, "delta": args.delta, "method": args.method, "trace": trace}
    if args.out == "json":
        _emit(result)
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(["method", "alpha", "k", "delta", "mu", "f", "s1"])
        w.writerow([args.method, repr(args.alpha), args.k, repr(args.delta), repr(mu),
                    repr(abs(mu - args.alpha)), " ".join(labels)])


def cmd_simulate(args):
    g = _load_graph(args)
    cfg = LeaderConfig.for_graph(g, _node_set(g, args.s0), _node_set(g, args.s1), args.model,
                                 _kappa(g, args.kappa) if args.model == "influenced" else None)
    if args.horizon is None:
        ss = steady_state(g, cfg)
        _emit({"model": args.model,
               "s0": [g.label(v) for v in sorted(cfg.s0)],
               "s1": [g.label(v) for v in sorted(cfg.s1)],
               "mu": ss.mu,
               "x_hat": dict(zip(g.labels, ss.x_hat.tolist()))})
        return
    x0 = np.zeros(g.n)
    if args.x0:
        values = [float(t) for t in _tokens(args.x0)]
        if len(values) != g.n:
            raise ValidationError(f"--x0 needs {g.n} values, got {len(values)}")
        x0 = np.array(values)
    traj = integrate_transient(g, cfg, x0, args.horizon, args.step)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", *g.labels])
    for i in range(0, len(traj.times), max(1, args.every)):
        w.writerow([repr(float(traj.times[i])), *(repr(float(x)) for x in traj.states[i])])
    sys.stdout.write(buf.getvalue())


def cmd_experiment(args):
    if args.spec:
        with open(args.spec, encoding="utf-8") as fh:
            data = json.load(fh)
    else:
        data = {}
    if args.output:
        data["output"] = args.output
    if args.seed is not None:
        data["seed"] = args.seed
    spec = ExperimentSpec.from_dict(data)
    result = run_experiment(spec)
    if not spec.output:
        sys.stdout.write(result.to_csv())
    else:
        failed = sum(1 for r in result.rows if r["error"])
        print(f"wrote {spec.output}.csv and {spec.output}.json "
              f"({len(result.rows)} rows, {failed} failed)")


def cmd_gadget(args):
    g, center = gadget_graph(CUBIC_GRAPHS[args.cubic](), args.star_weight)
    if not args.s1:
        sys.stdout.write(f"# center {g.label(center)}\n")
        sys.stdout.write(write_edge_list(g))
        return
    s1 = _node_set(g, args.s1)
    cubic_nodes = frozenset(range(g.n)) - {center}
    if not s1 <= cubic_nodes:
        raise ValidationError("S1 must consist of cubic-graph vertices")
    ss = steady_state(g, LeaderConfig.for_graph(g, {center}, s1))
    cubic = CUBIC_GRAPHS[args.cubic]()
    _emit({"center": g.label(center), "s1": [g.label(v) for v in sorted(s1)], "mu": ss.mu,
           "vertex_cover": is_vertex_cover(cubic, s1),
           "cover_value": (cubic.n + len(s1)) / (2 * g.n)})


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="opinion-shift",
                                     description="Opinion dynamics with two leader parties.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="random-walk analytics of a graph")
    _add_graph_args(p)
    p.add_argument("--pair", nargs=2, metavar=("U", "V"), help="report pairwise quantities")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("single", help="pick one party-1 leader against one party-0 leader")
    _add_graph_args(p)
    _add_model_args(p)
    p.add_argument("--s0", required=True)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--heuristic", choices=[h.value for h in Heuristic] + ["all"], default="optimal")
    p.set_defaults(func=cmd_single)

    p = sub.add_parser("select", help="choose a party-1 leader set of size at most k")
    _add_graph_args(p)
    _add_model_args(p)
    p.add_argument("--s0", required=True, help="labels (comma separated) or a file of labels")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--delta", type=float, default=1e-4)
    p.add_argument("--candidates", help="labels or file; default is every node outside S0")
    p.add_argument("--method", choices=["bound-search", "greedy", "brute-force"],
                   default="bound-search")
    p.add_argument("--b-hat", type=float, default=1.0, help="threshold for --method greedy")
    p.add_argument("--out", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("simulate", help="steady state, or a transient trajectory with --horizon")
    _add_graph_args(p)
    _add_model_args(p)
    p.add_argument("--s0", required=True)
    p.add_argument("--s1")
    p.add_argument("--horizon", type=float)
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--every", type=int, default=1, help="emit every N-th integration step")
    p.add_argument("--x0", help="initial state, one value per node in id order")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("experiment", help="run a JSON experiment spec")
    p.add_argument("--spec", metavar="FILE")
    p.add_argument("--output", metavar="PREFIX", help="write PREFIX.csv and PREFIX.json")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("gadget", help="hardness gadget: edge list, or mu for a given S1")
    p.add_argument("--cubic", choices=sorted(CUBIC_GRAPHS), default="petersen")
    p.add_argument("--star-weight", type=float, default=3.0)
    p.add_argument("--s1")
    p.set_defaults(func=cmd_gadget)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ValidationError, BudgetExceededError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
