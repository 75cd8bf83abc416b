"""Command-line interface: ``gne <subcommand> ...``.

Exit codes: 0 success, 2 invalid arguments, 3 unreadable or malformed
files, 4 problem too large for an exact method.
"""
from __future__ import annotations

import argparse
import math
import sys

from . import codec, io
from .entropy import J, RateConstants, h_A, kappa, large_dev_rate
from .errors import CapacityError, DecodeError, ParseError, ValidationError
from .hybrid import HybridParams, collision_stats, e_series, gen_hybrid, mc_entropy, rate_hybrid, \
    rename_duplicates
from .linext import count_linear_extensions, extension_lower_bound
from .models import (MODEL_CLASSES, SmallWorld, TorusDistanceOrdering, edge_length_stats,
                     exact_entropy, generate, name_similarity_stats, rate,
                     smallworld_random_edge_mask)
from .sweep import SweepSpec, run_sweep, write_csv

MODELS = sorted(MODEL_CLASSES) + ["hybrid"]


def _model_args(p: argparse.ArgumentParser, sizes=True):
    p.add_argument("--model", required=True, choices=MODELS)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--A", type=int)
    p.add_argument("--gamma", type=float)
    p.add_argument("--d", type=float)
    if sizes:
        p.add_argument("--N", type=int, help="number of vertices")
        p.add_argument("--n", type=int, help="torus side (smallworld)")
    p.add_argument("--seed", type=int, default=0)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--ordered", dest="ordered", action="store_true", default=True)
    g.add_argument("--unordered", dest="ordered", action="store_false")


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise ValidationError(f"--model {args.model} needs " + ", ".join("--" + m for m in missing))


def build_model(args):
    """Parameter object from parsed arguments."""
    m = args.model
    if m == "smallworld":
        _need(args, "n", "alpha", "gamma")
        return SmallWorld(args.n, args.alpha, args.gamma, seed=args.seed)
    _need(args, "N")
    if m == "hybrid":
        _need(args, "alpha", "beta", "A")
        return HybridParams(args.N, args.alpha, args.beta, args.A, seed=args.seed, ordered=args.ordered)
    keys = {"er-binary": ("alpha",), "er-named": ("alpha", "beta", "A"),
            "hamming": ("alpha", "beta", "A", "d")}.get(m, ())
    _need(args, *keys)
    return MODEL_CLASSES[m](N=args.N, seed=args.seed, **{k: getattr(args, k) for k in keys})


def _constants(args) -> RateConstants:
    return RateConstants(alpha=args.alpha, beta=args.beta, A=args.A, gamma=args.gamma, d=args.d)


def _emit_graph(graph, path):
    if path:
        io.write_graph(path, graph)
    else:
        sys.stdout.write(io.format_graph(graph))


# --- subcommands ------------------------------------------------------------------

def cmd_gen(args):
    model = build_model(args)
    if isinstance(model, HybridParams):
        graph, _, _ = gen_hybrid(model)
        if not model.ordered:
            graph, renamed = rename_duplicates(graph, seed=args.seed)
            if renamed:
                print(f"renamed {renamed} duplicate names", file=sys.stderr)
    else:
        graph = generate(model)
    _emit_graph(graph, args.out)


def cmd_entropy(args):
    model = build_model(args)
    if isinstance(model, HybridParams):
        raise ValidationError("the hybrid model has no exact entropy; use 'estimate'")
    rep = exact_entropy(model)
    print(f"nats={rep.nats!r} bits={rep.bits!r} normalized_rate={rep.normalized_rate!r} method=exact")


def cmd_rate(args):
    if args.model == "hybrid":
        _need(args, "alpha", "beta", "A")
        print(repr(rate_hybrid(_constants(args), ordered=args.ordered, K=args.K)))
    else:
        print(repr(rate(args.model, _constants(args))))


def cmd_estimate(args):
    if args.model != "hybrid":
        raise ValidationError("Monte Carlo estimation is only needed for --model hybrid")
    model = build_model(args)
    if not model.ordered:
        raise ValidationError("estimation targets the ordered hybrid model")
    rep = mc_entropy(model, args.link_samples)
    es = e_series(model.N, _constants(args), L=model.L).total
    print(f"nats={rep.nats!r} stderr={rep.stderr!r} bits={rep.bits!r} "
          f"normalized_rate={rep.normalized_rate!r} e_series={es!r} method=monte_carlo")


def _int_list(text: str) -> list[int]:
    try:
        return [int(float(x)) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ValidationError(f"bad size list {text!r}") from None


def cmd_sweep(args):
    sizes = args.N_list or args.n_list
    if sizes is None:
        raise ValidationError("sweep needs --N-list (or --n-list for smallworld)")
    keys = ("alpha", "beta", "A", "gamma", "d")
    params = {k: getattr(args, k) for k in keys if getattr(args, k) is not None}
    spec = SweepSpec(args.model, params, _int_list(sizes), seeds=args.seeds, root_seed=args.seed,
                     link_samples=args.link_samples, ordered=args.ordered)
    rows = run_sweep(spec)
    write_csv(args.csv or sys.stdout, rows)


def cmd_encode(args):
    model = build_model(args)
    graph = io.read_graph(args.inp)
    stream = codec.encode(model, graph)
    with open(args.out, "wb") as fh:
        fh.write(stream.data)
    ideal = codec.ideal_codelength(model, graph)
    print(f"payload_bits={codec.payload_bits(stream)} ideal_bits={ideal!r} "
          f"container_bytes={len(stream.data)}")


def cmd_decode(args):
    model = build_model(args)
    with open(args.inp, "rb") as fh:
        data = fh.read()
    _emit_graph(codec.decode(model, data), args.out)


def cmd_extensions(args):
    dag = io.read_dag(args.inp)
    if args.bound is not None:
        if args.alpha is None:
            raise ValidationError("--bound needs --alpha")
        print(f"N={dag.N} lower_bound_log={extension_lower_bound(dag.N, args.alpha, args.bound)!r}")
        return
    res = count_linear_extensions(dag)
    print(f"N={dag.N} count={res.count} log_count={res.log_count!r} "
          f"log_factorial={math.lgamma(dag.N + 1)!r} ratio={res.factorial_ratio!r}")


def cmd_diag(args):
    model = build_model(args)
    if args.kind == "collisions":
        if not isinstance(model, HybridParams):
            raise ValidationError("--collisions applies to --model hybrid")
        graph, _, trace = gen_hybrid(model)
        st = collision_stats(trace, graph, pairs=args.pairs, seed=args.seed)
        print(f"duplicate_names={st.duplicate_name_count} theta={st.est_theta!r} "
              f"non_tree_fraction={st.non_tree_fraction!r} pairs={st.pairs_sampled}")
    elif args.kind == "edge-lengths":
        if not isinstance(model, SmallWorld):
            raise ValidationError("--edge-lengths applies to --model smallworld")
        graph = generate(model)
        mask = smallworld_random_edge_mask(graph, model.n)
        st = edge_length_stats(graph, TorusDistanceOrdering(model.n), mask)
        M = args.M if args.M is not None else model.n ** 0.25
        print(f"random_edges={st.lengths.size} median={st.median!r} M={M!r} "
              f"fraction_longer={st.fraction_longer(M)!r}")
    else:
        graph = gen_hybrid(model)[0] if isinstance(model, HybridParams) else generate(model)
        st = name_similarity_stats(graph)
        print(f"total={st.total_edge_hamming} per_edge_mean={st.per_edge_mean!r} "
              f"normalized={st.normalized!r} L={graph.L}")


def cmd_const(args):
    a = args.args
    try:
        if args.name == "hA":
            A, k = int(a[0]), int(a[1])
            val = h_A(A, k)
        elif args.name == "J":
            alpha, k = float(a[0]), int(a[1])
            val = J(alpha, k)
        elif args.name == "kappa":
            val = kappa(float(a[0]))
        else:
            val = large_dev_rate(float(a[0]), float(a[1]))
    except (IndexError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"bad arguments for {args.name}: {' '.join(a)}") from None
    print(",".join([args.name, *a, repr(val)]))


# --- entry point ------------------------------------------------------------------

def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gne", description="Entropy of random graphs with vertex-names")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("gen", help="sample a graph and write GNV1")
    _model_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("entropy", help="exact finite-N entropy")
    _model_args(p)
    p.add_argument("--exact", action="store_true", help="accepted for clarity; always exact")
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("rate", help="asymptotic entropy rate")
    _model_args(p, sizes=False)
    p.add_argument("--K", type=int, help="hybrid series terms (default: by tail bound)")
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("estimate", help="Monte Carlo entropy of the ordered hybrid model")
    _model_args(p)
    p.add_argument("--link-samples", type=int, default=32)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("sweep", help="CSV of normalized entropy against N")
    _model_args(p, sizes=False)
    p.add_argument("--N-list", dest="N_list")
    p.add_argument("--n-list", dest="n_list")
    p.add_argument("--seeds", type=int, default=1)
    p.add_argument("--link-samples", type=int, default=32)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_sweep)

    for name, fn, what in (("encode", cmd_encode, "GNV1 -> GNC1"), ("decode", cmd_decode, "GNC1 -> GNV1")):
        p = sub.add_parser(name, help=what)
        _model_args(p)
        p.add_argument("--in", dest="inp", required=True)
        p.add_argument("--out", required=(name == "encode"))
        p.set_defaults(func=fn)

    p = sub.add_parser("extensions", help="count linear extensions of a DAG file")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--bound", type=int, metavar="K", help="report the K-block lower bound instead")
    p.add_argument("--alpha", type=float)
    p.set_defaults(func=cmd_extensions)

    p = sub.add_parser("diag", help="structural diagnostics")
    _model_args(p)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--collisions", dest="kind", action="store_const", const="collisions")
    g.add_argument("--edge-lengths", dest="kind", action="store_const", const="edge-lengths")
    g.add_argument("--name-similarity", dest="kind", action="store_const", const="name-similarity")
    p.add_argument("--M", type=float, help="length threshold for --edge-lengths")
    p.add_argument("--pairs", type=int, default=100_000)
    p.set_defaults(func=cmd_diag)

    p = sub.add_parser("const", help="print a constant as a CSV row name,args...,value")
    p.add_argument("name", choices=["hA", "J", "kappa", "Lambda"])
    p.add_argument("args", nargs="*", help="hA: A k | J: alpha k | kappa: gamma | Lambda: p x")
    p.set_defaults(func=cmd_const)
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        args.func(args)
    except (ParseError, DecodeError) as exc:
        print(f"gne {args.cmd}: {exc}", file=sys.stderr)
        return 3
    except ValidationError as exc:
        print(f"gne {args.cmd}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"gne {args.cmd}: {exc}", file=sys.stderr)
        return 3
    except CapacityError as exc:
        print(f"gne {args.cmd}: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
