"""Command-line interface.

Subcommands: explain, complexity, benchmark, generate, audit-readout.
Exit codes: 0 success, 1 output I/O failure, 2 malformed input or usage,
3 evaluation budget exceeded, 4 nonlinear readout where exactness was
requested. Runtime options resolve as flags > GRAPHSI_* environment >
--config file > defaults.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .baselines import audit_nonlinear_readout, permutation_sampling_sii, permutation_sampling_sv
from .complexity import scaling_study
from .convert import convert_mi
from .errors import BudgetExceeded, NonlinearReadout, ParseError
from .explainer import GraphInteractionExplainer
from .export import atomic_write_text, dumps_json, format_float
from .game import GraphGame
from .generate import generate_instance
from .graph import khop_neighborhoods, load_graph
from .interactions import INDEX_KINDS
from .moebius import DEFAULT_CEILING, build_interaction_set, graphshapiq_approx, graphshapiq_exact
from .validation import ensure_baseline, ensure_model

EXIT_OK = 0
EXIT_IO = 1
EXIT_PARSE = 2
EXIT_BUDGET = 3
EXIT_NONLINEAR = 4


def _runtime_options(args) -> tuple[int, int]:
    """(threads, ceiling) resolved with the documented precedence."""
    cfg = {}
    if getattr(args, "config", None):
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise ParseError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ParseError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ParseError("config file must hold a JSON object")
        unknown = set(cfg) - {"threads", "ceiling", "rng"}
        if unknown:
            raise ParseError(f"unknown config keys: {sorted(unknown)}")
        if "rng" in cfg and cfg["rng"] != "philox":
            raise ParseError(f"unsupported rng {cfg['rng']!r}; only 'philox' is available")

    def pick(flag_value, env_name: str, cfg_key: str, default: int) -> int:
        if flag_value is not None:
            value = flag_value
        elif os.environ.get(env_name) is not None:
            try:
                value = int(os.environ[env_name])
            except ValueError as exc:
                raise ParseError(f"{env_name} must be an integer") from exc
        elif cfg_key in cfg:
            value = cfg[cfg_key]
        else:
            value = default
        if not isinstance(value, int) or isinstance(value, bool) or value < 1:
            raise ParseError(f"{cfg_key} must be a positive integer, got {value!r}")
        return value

    threads = pick(getattr(args, "threads", None), "GRAPHSI_THREADS", "threads", 1)
    ceiling = pick(getattr(args, "ceiling", None), "GRAPHSI_CEILING", "ceiling",
                   DEFAULT_CEILING)
    return threads, ceiling


def _emit(text: str, out_path) -> None:
    if out_path:
        try:
            atomic_write_text(out_path, text)
        except OSError as exc:
            raise _OutputError(f"cannot write {out_path}: {exc}") from exc
    else:
        sys.stdout.write(text)


class _OutputError(RuntimeError):
    pass


def _parse_int_list(text: str, name: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip() != ""]
    except ValueError as exc:
        raise ParseError(f"{name} must be a comma-separated integer list") from exc
    if not values:
        raise ParseError(f"{name} must not be empty")
    return values


# -- explain ------------------------------------------------------------


def cmd_explain(args) -> int:
    threads, ceiling = _runtime_options(args)
    explainer = GraphInteractionExplainer(
        model=args.weights, index=args.index, order=args.order,
        lam=args.lam, baseline=args.baseline, normalize=args.normalize,
        ceiling=ceiling, workers=threads)
    explainer.fit(args.graph)
    if args.format == "json":
        text = dumps_json(explainer.to_export())
    else:
        text = explainer.to_dot()
    _emit(text, args.out)
    return EXIT_OK


# -- complexity ----------------------------------------------------------


def cmd_complexity(args) -> int:
    ells = _parse_int_list(args.ell, "--ell")
    for ell in ells:
        if ell < 1:
            raise ParseError(f"--ell entries must be >= 1, got {ell}")
    target = args.path
    if os.path.isdir(target):
        names = sorted(f for f in os.listdir(target) if f.endswith(".json"))
        if not names:
            raise ParseError(f"no .json graph files in {target}")
        paths = [os.path.join(target, f) for f in names]
        ids = [os.path.splitext(f)[0] for f in names]
    else:
        paths = [target]
        ids = [os.path.splitext(os.path.basename(target))[0]]
    graphs = [load_graph(p) for p in paths]

    if args.csv:
        rows, fits = scaling_study(graphs, ells, out=args.csv, ids=ids)
    else:
        rows, fits = scaling_study(graphs, ells, out=sys.stdout, ids=ids)
    for ell in ells:
        fit = fits[ell]
        if fit["degenerate"]:
            sys.stderr.write(f"ell={ell}: fit degenerate over {fit['count']} rows\n")
        else:
            sys.stderr.write(
                f"ell={ell}: log10(calls) ~ {fit['slope']:.4g} * n + "
                f"{fit['intercept']:.4g} (R^2={fit['r2']:.4f}, rows={fit['count']})\n")
    return EXIT_OK


# -- benchmark ------------------------------------------------------------


def _si_values_map(si, sets: list[int]) -> dict[int, float]:
    return {s: si.get(s) for s in sets}


def _mse(estimate: dict[int, float], truth: dict[int, float]) -> float:
    return sum((estimate[s] - truth[s]) ** 2 for s in truth) / len(truth)


def cmd_benchmark(args) -> int:
    from itertools import combinations

    from .coalitions import mask_of

    threads, ceiling = _runtime_options(args)
    graph = load_graph(args.graph)
    model = ensure_model(args.weights)
    k = args.order
    if k < 1 or k > graph.n:
        raise ParseError(f"--order must be in 1..{graph.n}")
    budgets = _parse_int_list(args.budgets, "--budgets")
    seeds = _parse_int_list(args.seeds, "--seeds")
    index = "sv" if k == 1 else "sii"

    hoods = khop_neighborhoods(graph, model.num_layers)
    game = GraphGame(model, graph, workers=threads)
    mi, exact_si = graphshapiq_exact(game, hoods, k, index=index, ceiling=ceiling)

    sets = [mask_of(c) for size in range(1, k + 1)
            for c in combinations(range(graph.n), size)]
    truth = _si_values_map(exact_si, sets)
    iset = build_interaction_set(hoods, ceiling)
    n_max = max(h.bit_count() for h in hoods.hoods)

    lines = ["method,budget,seed,mse_vs_exact"]

    for lam in range(1, n_max + 1):
        run_game = GraphGame(model, graph, workers=threads)
        _, si_hat = graphshapiq_approx(run_game, hoods, lam, k, index=index)
        mse = _mse(_si_values_map(si_hat, sets), truth)
        lines.append(f"graphshapiq_l{lam},{run_game.call_count()},0,{format_float(mse)}")

    sample_game = GraphGame(model, graph, workers=threads)
    for budget in budgets:
        for seed in seeds:
            if k == 1:
                try:
                    est, _ = permutation_sampling_sv(sample_game, budget, seed)
                except ValueError:
                    lines.append(f"permutation_sv,{budget},{seed},infeasible")
                    continue
                mse = _mse(_si_values_map(est, sets), truth)
                lines.append(f"permutation_sv,{budget},{seed},{format_float(mse)}")
                continue
            for label, informed in (("uninformed", None), ("informed", iset)):
                try:
                    est = permutation_sampling_sii(sample_game, k, budget, seed,
                                                   informed=informed)
                except ValueError:
                    lines.append(f"permutation_sii_{label},{budget},{seed},infeasible")
                    continue
                mse = _mse(_si_values_map(est, sets), truth)
                lines.append(f"permutation_sii_{label},{budget},{seed},{format_float(mse)}")

    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


# -- generate --------------------------------------------------------------


def cmd_generate(args) -> int:
    if args.kind in ("er", "tree") and args.n > 64:
        raise ParseError(f"--kind {args.kind} supports at most 64 nodes, got {args.n}")
    if args.n < 1:
        raise ParseError(f"--n must be >= 1, got {args.n}")
    if args.d0 < 1 or args.layers < 1 or args.hidden < 1:
        raise ParseError("--d0, --layers, and --hidden must all be >= 1")
    if not 0.0 <= args.edge_prob <= 1.0:
        raise ParseError(f"--edge-prob must be in [0, 1], got {args.edge_prob}")
    try:
        graph, model = generate_instance(
            args.kind, args.n, args.d0, args.seed, args.model,
            args.layers, args.hidden, edge_prob=args.edge_prob,
            readout=args.readout)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc
    try:
        atomic_write_text(args.out_graph, dumps_json(graph.to_json_dict()))
        atomic_write_text(args.out_weights, dumps_json(model.to_json_dict()))
    except OSError as exc:
        raise _OutputError(f"cannot write output: {exc}") from exc
    sys.stderr.write(f"wrote {args.out_graph} and {args.out_weights}\n")
    return EXIT_OK


# -- audit-readout -----------------------------------------------------------


def cmd_audit_readout(args) -> int:
    graph = load_graph(args.graph)
    linear = ensure_model(args.weights_linear)
    mlp2 = ensure_model(args.weights_mlp2)
    if linear.readout.kind != "linear":
        raise ParseError("the first weights file must use a linear readout")
    if mlp2.readout.kind != "mlp2":
        raise ParseError("the second weights file must use an mlp2 readout")
    baseline = ensure_baseline(args.baseline, graph)
    try:
        report = audit_nonlinear_readout(linear, mlp2, graph, baseline=baseline)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc
    _emit(dumps_json(report), args.out)
    return EXIT_OK


# -- parser -------------------------------------------------------------------


def _add_runtime_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads for game evaluation (env GRAPHSI_THREADS)")
    parser.add_argument("--ceiling", type=int, default=None,
                        help="evaluation-budget guard for exact mode (env GRAPHSI_CEILING)")
    parser.add_argument("--config", default=None,
                        help="JSON config file; precedence: flags > env > config")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphsi",
        description="Shapley interactions for GNN graph predictions via "
                    "receptive-field sparsity")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("explain", help="compute interactions for one instance")
    p.add_argument("graph", help="graph JSON file")
    p.add_argument("weights", help="model weight JSON file")
    p.add_argument("--order", type=int, default=None, help="explanation order k")
    p.add_argument("--index", choices=INDEX_KINDS, default="ksii")
    p.add_argument("--baseline", default="mean",
                   help="'mean' or a JSON file with a d0-length vector")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--lambda", dest="lam", type=int, default=None,
                      help="truncate interactions above this order")
    mode.add_argument("--exact", action="store_true",
                      help="exact computation (default)")
    p.add_argument("--normalize", action="store_true",
                   help="report values relative to the empty coalition")
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("--format", choices=("json", "dot"), default="json")
    _add_runtime_flags(p)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("complexity", help="pre-flight call estimates for graphs")
    p.add_argument("path", help="graph JSON file or directory of them")
    p.add_argument("--ell", default="1", help="comma-separated list of ranges")
    p.add_argument("--csv", default=None, help="CSV output file (default stdout)")
    p.set_defaults(func=cmd_complexity)

    p = sub.add_parser("benchmark", help="estimator error at equal budgets")
    p.add_argument("graph")
    p.add_argument("weights")
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--budgets", required=True, help="comma-separated budgets")
    p.add_argument("--seeds", default="0", help="comma-separated seeds")
    p.add_argument("--out", default=None, help="CSV output file (default stdout)")
    _add_runtime_flags(p)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("generate", help="write a seeded synthetic instance")
    p.add_argument("--kind", choices=("path", "cycle", "tree", "er"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d0", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--model", choices=("gcn", "gin"), default="gcn")
    p.add_argument("--layers", type=int, default=1)
    p.add_argument("--hidden", type=int, default=4)
    p.add_argument("--edge-prob", type=float, default=0.3)
    p.add_argument("--readout", choices=("linear", "mlp2"), default="linear")
    p.add_argument("--out-graph", default="graph.json")
    p.add_argument("--out-weights", default="weights.json")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("audit-readout", help="quantify interactions outside the "
                                             "receptive fields for two readouts")
    p.add_argument("graph")
    p.add_argument("weights_linear")
    p.add_argument("weights_mlp2")
    p.add_argument("--baseline", default="mean")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_audit_readout)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse prints its own message
        code = exc.code
        return code if isinstance(code, int) else EXIT_PARSE
    try:
        return args.func(args)
    except ParseError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PARSE
    except BudgetExceeded as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_BUDGET
    except NonlinearReadout as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_NONLINEAR
    except _OutputError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
