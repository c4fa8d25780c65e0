"""Command-line experiment harness.

Subcommands: collide, rho, converge, ann build|query, gen, ledger.  The
global flags --seed, --threads and --out are accepted by every subcommand;
--threads never changes any output byte, only how chunks are scheduled.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import lab, vectors_io
from .errors import CplshError
from .families import HashFamilyConfig, sample_hasher
from .index import Dataset, IndexParams, build_index, suggest_params
from .ledger import RandomnessLedger, ledger_csv
from .rng import DOMAIN_GEN, derive_rng


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="master 64-bit seed")
    parser.add_argument("--out", default=None, help="output path (default: stdout)")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker processes; output-invariant")


def _family_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--family", required=True,
                        choices=("dense", "fast", "pseudo", "discrete"))
    parser.add_argument("--d", type=int, required=True, help="ambient dimension")
    parser.add_argument("--m", type=int, default=None,
                        help="embedded dimension (fast/discrete; default d/4)")
    parser.add_argument("--dprime", type=int, default=None,
                        help="lifted dimension (fast/discrete; default d)")
    parser.add_argument("--bits", type=int, default=10,
                        help="bit depth of the discrete family")
    parser.add_argument("--lowrand", action="store_true",
                        help="discrete family: use the sparse low-randomness JL")
    parser.add_argument("--show-theory-m", action="store_true",
                        help="print the asymptotic guidance for m and continue")


def _family_from_args(args) -> HashFamilyConfig:
    kind = args.family
    if kind in ("dense", "pseudo"):
        return HashFamilyConfig(kind=kind, d=args.d, seed=args.seed)
    m = args.m if args.m is not None else max(1, args.d // 4)
    return HashFamilyConfig(
        kind=kind, d=args.d, m=m, d_prime=args.dprime,
        bits=args.bits if kind == "discrete" else None,
        seed=args.seed, lowrand=bool(args.lowrand and kind == "discrete"),
    )


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _cmd_collide(args) -> int:
    family = _family_from_args(args)
    if args.show_theory_m:
        print(lab.embedding_dim_note(args.d))
    if not (0.0 < args.rmin <= args.rmax < 2.0 and args.steps >= 1):
        raise CplshError("need 0 < rmin <= rmax < 2 and steps >= 1")
    distances = np.linspace(args.rmin, args.rmax, args.steps)
    estimates = lab.collision_curve(family, distances, args.trials, args.seed,
                                    threads=args.threads)
    _emit(lab.collision_csv(estimates), args.out)
    if args.chart:
        from .charts import collision_chart
        collision_chart(args.chart, [(family.kind, estimates)])
    return 0


def _cmd_rho(args) -> int:
    family = _family_from_args(args)
    cfg = lab.ExperimentConfig(family=family, trials=args.trials, seed=args.seed)
    est = lab.estimate_rho(cfg, args.R, args.c, threads=args.threads)
    print(f"p1_hat={est.p1_hat!r} p2_hat={est.p2_hat!r}")
    print(f"rho_hat={est.rho_hat!r} rho_theory={est.rho_theory!r}")
    if args.out:
        _emit(lab.rho_csv(est), args.out)
    return 0


def _cmd_converge(args) -> int:
    dims = [int(v) for v in args.dims.split(",") if v]
    points = lab.convergence_experiment(
        args.family, args.R, dims, args.trials, seed=args.seed,
        threads=args.threads, bits=args.bits, lowrand=args.lowrand,
        m_fraction=args.mfrac,
    )
    _emit(lab.convergence_csv(points), args.out)
    if args.chart:
        from .charts import convergence_chart
        refs = tuple(float(v) for v in args.ref_c.split(",") if v)
        convergence_chart(args.chart, points, ref_constants=refs)
    return 0


def _cmd_gen(args) -> int:
    if args.n < 1 or args.d < 2:
        raise CplshError("need n >= 1 and d >= 2")
    rng = derive_rng(args.seed, DOMAIN_GEN)
    if args.planted_r is not None:
        if not 0.0 < args.planted_r < 2.0:
            raise CplshError("--planted-r must lie in (0, 2)")
        if args.queries_out is None:
            raise CplshError("--planted-r requires --queries-out")
        nq = args.n_queries
        if not 0 < nq <= args.n:
            raise CplshError("need 0 < n-queries <= n")
        queries = rng.standard_normal((nq, args.d))
        queries /= np.linalg.norm(queries, axis=1, keepdims=True)
        coef_x = 1.0 - args.planted_r ** 2 / 2.0
        coef_t = args.planted_r * math.sqrt(1.0 - args.planted_r ** 2 / 4.0)
        tang = rng.standard_normal((nq, args.d))
        tang -= np.sum(tang * queries, axis=1, keepdims=True) * queries
        tang /= np.linalg.norm(tang, axis=1, keepdims=True)
        planted = coef_x * queries + coef_t * tang
        rest = rng.standard_normal((args.n - nq, args.d))
        rest /= np.linalg.norm(rest, axis=1, keepdims=True)
        data = np.vstack([planted, rest])
        vectors_io.write_vectors(args.queries_out, queries)
        print(f"wrote {nq} queries to {args.queries_out} "
              f"(planted neighbor of query i is record i)")
    else:
        data = rng.standard_normal((args.n, args.d))
        data /= np.linalg.norm(data, axis=1, keepdims=True)
    if args.out is None:
        raise CplshError("gen requires --out")
    vectors_io.write_vectors(args.out, data)
    print(f"wrote {data.shape[0]} vectors of dimension {args.d} to {args.out}")
    return 0


def _index_from_args(args, ds: Dataset) -> tuple:
    family = _family_from_args(args)
    if args.k is not None and args.L is not None:
        params = IndexParams(k=args.k, L=args.L, family=family)
    else:
        R, c = args.R, args.c
        cfg = lab.ExperimentConfig(family=family, trials=args.param_trials,
                                   seed=args.seed)
        p1 = lab.estimate_collision(cfg, R, threads=args.threads).p_hat
        far = lab.ExperimentConfig(family=family, trials=args.param_trials,
                                   seed=args.seed + 1)
        p2 = lab.estimate_collision(far, c * R, threads=args.threads).p_hat
        if not 0.0 < p2 <= p1 < 1.0:
            raise CplshError(
                f"measured probabilities unusable (p1={p1}, p2={p2}); "
                "pass --k and --L explicitly"
            )
        params = suggest_params(ds.n, p1, p2, family=family)
        print(f"measured p1={p1!r} p2={p2!r} -> k={params.k} L={params.L}")
    return ds, build_index(ds, params, seed=args.seed), params


def _cmd_ann_build(args) -> int:
    ds, idx, params = _index_from_args(args, Dataset.from_file(args.data))
    sizes = [len(t) for t in idx.tables]
    print(f"indexed {ds.n} points (d={ds.dim}) into {params.L} tables, "
          f"k={params.k}; occupied buckets per table: min={min(sizes)} "
          f"max={max(sizes)}")
    return 0


def _cmd_ann_query(args) -> int:
    queries = vectors_io.read_vectors(args.queries)
    if queries.shape[0] == 0:
        raise CplshError("queries file is empty")
    ds, idx, params = _index_from_args(args, Dataset.from_file(args.data))
    lines = ["query,answer,distance,candidates"]
    within = 0
    total_cands = 0
    for qi, q in enumerate(np.asarray(queries, dtype=np.float64)):
        res = idx.query(q, args.R, args.c)
        answer = -1 if res.answer is None else res.answer
        dist = "" if res.answer_distance is None else repr(res.answer_distance)
        lines.append(f"{qi},{answer},{dist},{res.distance_evals}")
        total_cands += res.distance_evals
        if res.answer_distance is not None and res.answer_distance < args.c * args.R:
            within += 1
    _emit("\n".join(lines) + "\n", args.out)
    nq = queries.shape[0]
    print(f"{within}/{nq} answers within c*R; "
          f"mean candidates {total_cands / nq:.1f} of {ds.n}")
    return 0


def _cmd_ledger(args) -> int:
    family = HashFamilyConfig(
        kind="discrete", d=args.d, m=args.m, d_prime=args.dprime,
        bits=args.bits, seed=args.seed, lowrand=True,
        jl_sparsity=args.sparsity, jl_indep=args.indep,
    )
    ledger = RandomnessLedger()
    sample_hasher(family, ledger=ledger)
    _emit(ledger_csv(ledger), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cplsh",
        description="cross-polytope LSH experiments: collision curves, "
                    "sensitivity, convergence, ANN search",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("collide", help="collision-probability curve over a distance grid")
    _common(p)
    _family_args(p)
    p.add_argument("--trials", type=int, default=20000)
    p.add_argument("--rmin", type=float, default=0.1)
    p.add_argument("--rmax", type=float, default=1.9)
    p.add_argument("--steps", type=int, default=19)
    p.add_argument("--chart", default=None, help="also write an SVG chart here")
    p.set_defaults(fn=_cmd_collide)

    p = sub.add_parser("rho", help="sensitivity estimate at one (R, c)")
    _common(p)
    _family_args(p)
    p.add_argument("--R", type=float, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--trials", type=int, default=20000)
    p.set_defaults(fn=_cmd_rho)

    p = sub.add_parser("converge", help="ln(1/p) against the leading term over dimensions")
    _common(p)
    p.add_argument("--family", required=True,
                   choices=("dense", "fast", "pseudo", "discrete"))
    p.add_argument("--R", type=float, required=True)
    p.add_argument("--dims", required=True, help="comma-separated increasing list")
    p.add_argument("--trials", type=int, default=20000)
    p.add_argument("--bits", type=int, default=10)
    p.add_argument("--lowrand", action="store_true")
    p.add_argument("--mfrac", type=float, default=0.25,
                   help="embedded dimension as a fraction of d")
    p.add_argument("--chart", default=None)
    p.add_argument("--ref-c", default="", help="comma-separated C values for C/ln(d) guides")
    p.set_defaults(fn=_cmd_converge)

    p = sub.add_parser("ann", help="(R, c) near-neighbor search")
    annsub = p.add_subparsers(dest="ann_command", required=True)
    for name, fn in (("build", _cmd_ann_build), ("query", _cmd_ann_query)):
        q = annsub.add_parser(name)
        _common(q)
        _family_args(q)
        q.add_argument("--data", required=True, help="vectors file to index")
        q.add_argument("--k", type=int, default=None)
        q.add_argument("--L", type=int, default=None)
        q.add_argument("--R", type=float, default=0.5)
        q.add_argument("--c", type=float, default=2.0)
        q.add_argument("--param-trials", type=int, default=4000,
                       help="trials per distance when measuring (p1, p2)")
        if name == "query":
            q.add_argument("--queries", required=True, help="vectors file of queries")
        q.set_defaults(fn=fn)

    p = sub.add_parser("gen", help="generate synthetic unit vectors (optionally planted)")
    _common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--planted-r", type=float, default=None,
                   help="plant one neighbor at this distance per query")
    p.add_argument("--queries-out", default=None)
    p.add_argument("--n-queries", type=int, default=200)
    p.set_defaults(fn=_cmd_gen)

    p = sub.add_parser("ledger", help="randomness accounting of a discrete family")
    _common(p)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--dprime", type=int, default=None)
    p.add_argument("--bits", type=int, default=10)
    p.add_argument("--sparsity", type=int, default=None)
    p.add_argument("--indep", type=int, default=4)
    p.set_defaults(fn=_cmd_ledger)

    return parser


def run_cli(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except CplshError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))
