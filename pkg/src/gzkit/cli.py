"""Batch CLI: evaluation, classification, solving, sampling, flows, and
the acceptance suites, with seeded reproducibility.

Reports are JSON with sorted keys; for a fixed config and seed the output
bytes are identical across runs (timings are only included on request,
since they are inherently nondeterministic).  Exit codes: 0 success,
1 suite failure, 2 invalid configuration or input.
"""

import argparse
import hashlib
import json
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import algebra as alg
from . import fibres as fib
from . import invariants as inv
from . import regularity as reg
from . import strata as st
from . import suites as su
from .numerics import DEFAULT_TOLS

_FAMILIES = {"so": "orthogonal", "gl": "general-linear"}


@dataclass
class RunConfig:
    family: str = "orthogonal"
    n: int = 5
    seed: int = 0
    samples: int = None
    out: str = None
    suites: list = field(default_factory=list)
    timings: bool = False
    tol: object = DEFAULT_TOLS

    def validate(self):
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        for name in ("rank_rel", "spec", "solve"):
            if getattr(self.tol, name) <= 0:
                raise ValueError(f"tolerance {name} must be positive")
        return self


def _emit(doc, path=None):
    text = json.dumps(doc, sort_keys=True, indent=2, default=float)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _load_matrix(path):
    with open(path) as fh:
        doc = json.load(fh)
    return alg.matrix_from_json(doc)


def _x_hash(me):
    text = json.dumps(me.to_json(), sort_keys=True)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _tols_from(args):
    return DEFAULT_TOLS.with_overrides(
        rank_rel=getattr(args, "tol_rank", None),
        spec=getattr(args, "tol_spec", None),
        solve=getattr(args, "tol_solve", None),
    )


def cmd_build(args):
    ctx = alg.build_algebra(_FAMILIES[args.family], args.n)
    ids = alg.numerical_identities(ctx.family, ctx.n) if ctx.n >= 3 else {}
    _emit({
        "family": args.family,
        "n": ctx.n,
        "dim": ctx.dim,
        "rank": ctx.rank,
        "sub_ranks": ctx.sub_ranks(),
        "gz_slots": len(inv.gz_index(ctx)),
        "identities": ids,
    }, args.out)
    return 0


def cmd_eval(args):
    me = _load_matrix(args.infile)
    me.context.check_member(me.entries, _tols_from(args))
    _emit(inv.kw_map(me.context, me.entries, _tols_from(args)).to_json(), args.out)
    return 0


def cmd_classify(args):
    me = _load_matrix(args.infile)
    tol = _tols_from(args)
    me.context.check_member(me.entries, tol)
    _emit(st.in_g_theta(me.context, me.entries, tol).to_json(), args.out)
    return 0


def cmd_sreg(args):
    me = _load_matrix(args.infile)
    tol = _tols_from(args)
    me.context.check_member(me.entries, tol)
    a = reg.sreg_rank_decision(me.context, me.entries, tol)
    b = reg.sreg_chain_decision(me.context, me.entries, tol)
    _emit({
        "x_hash": _x_hash(me),
        "sreg_rank": bool(a),
        "sreg_chain": bool(b),
        "margin": float(min(a.margin, b.margin)),
    }, args.out)
    return 0


def cmd_solve(args):
    ctx = alg.build_algebra(_FAMILIES[args.family], args.n)
    with open(args.target) as fh:
        doc = json.load(fh)
    c = np.asarray(doc["re"], dtype=float) + 1j * np.asarray(doc["im"], dtype=float)
    rep = fib.solve_fibre(ctx, c, seed=args.seed, restarts=args.restarts,
                          tol=_tols_from(args))
    _emit(rep.to_json(), args.out)
    return 0 if rep.success else 1


def cmd_fibre_sample(args):
    me = _load_matrix(args.infile)
    tol = _tols_from(args)
    ctx = me.context
    sam = fib.FibreSampler.at(ctx, me.entries, seed=args.seed, tol=tol)
    rng = np.random.default_rng(args.seed)
    phi0 = inv.kw_map(ctx, me.entries, tol).values
    scale = max(1.0, float(np.abs(phi0).max()))
    worst, sreg_ok = 0.0, 0
    for _ in range(args.count):
        y = sam.draw(rng)
        worst = max(worst, float(np.abs(inv.kw_map(ctx, y, tol).values - phi0).max()) / scale)
        sreg_ok += bool(reg.is_sreg_rank(ctx, y, tol))
    _emit({
        "x_hash": _x_hash(me),
        "count": args.count,
        "max_rel_drift": worst,
        "sreg_draws": sreg_ok,
        "differential_rank": fib.psi_differential_rank(sam, tol),
    }, args.out)
    return 0


def cmd_flow(args):
    me = _load_matrix(args.infile)
    i, j = (int(t) for t in args.index.split(","))
    xt = fib.gz_flow(me.context, me.entries, (i, j), args.t, _tols_from(args))
    _emit(alg.MatrixElement(xt, me.context).to_json(), args.out)
    return 0


def cmd_nilfibre(args):
    res = su.suite_nilfibre(ns=(args.n,), samples=args.samples, seed=args.seed,
                            tol=_tols_from(args))
    _emit(res.to_json(), args.report)
    return 0 if res.passed else 1


def _suite_kwargs(name, args):
    kw = {"seed": args.seed, "tol": _tols_from(args)}
    if name == "identities":
        if args.n:
            kw["n_max"] = max(3, args.n)
        return kw
    if args.n:
        kw["ns"] = (args.n,)
    if args.samples:
        for key in ("samples", "targets", "draws"):
            import inspect

            if key in inspect.signature(su.ALL_SUITES[name]).parameters:
                kw[key] = args.samples
                break
    return kw


def cmd_suite(args):
    names = list(su.ALL_SUITES) if args.all or not args.only else args.only
    for name in names:
        if name not in su.ALL_SUITES:
            raise ValueError(f"unknown suite {name!r}; known: {', '.join(su.ALL_SUITES)}")
    results, timings = [], {}
    for name in names:
        t0 = time.perf_counter()
        res = su.ALL_SUITES[name](**_suite_kwargs(name, args))
        timings[name] = time.perf_counter() - t0
        results.append(res)
        print(f"[{'PASS' if res.passed else 'FAIL'}] {name}", file=sys.stderr)
    doc = {
        "config": {"seed": args.seed, "n": args.n, "samples": args.samples,
                   "suites": names},
        "results": [r.to_json() for r in results],
        "passed": all(r.passed for r in results),
    }
    if args.timings:
        doc["timings"] = timings
    _emit(doc, args.out)
    return 0 if doc["passed"] else 1


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0,
                        help="RNG seed (fixed seed => identical output)")
    common.add_argument("--out", default=None,
                        help="write JSON output to this path instead of stdout")
    common.add_argument("--tol-rank", type=float, default=None, help="relative SVD rank cutoff")
    common.add_argument("--tol-spec", type=float, default=None,
                        help="spectral disjointness tolerance")
    common.add_argument("--tol-solve", type=float, default=None,
                        help="fibre solver residual tolerance")

    p = argparse.ArgumentParser(
        prog="gz",
        description="Numerical toolkit for orthogonal Gelfand-Zeitlin systems.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    q = add("build", help="realize an algebra and print chain data")
    q.add_argument("--family", choices=("so", "gl"), default="so")
    q.add_argument("--n", type=int, required=True)
    q.set_defaults(fn=cmd_build)

    q = add("eval", help="evaluate the KW map on a matrix JSON file")
    q.add_argument("--in", dest="infile", required=True)
    q.set_defaults(fn=cmd_eval)

    q = add("classify", help="stratum report for a matrix JSON file")
    q.add_argument("--in", dest="infile", required=True)
    q.set_defaults(fn=cmd_classify)

    q = add("sreg", help="strong regularity verdicts for a matrix")
    q.add_argument("--in", dest="infile", required=True)
    q.set_defaults(fn=cmd_sreg)

    q = add("solve", help="Gauss-Newton solve Phi(x) = c")
    q.add_argument("--family", choices=("so", "gl"), default="so")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--target", required=True, help='JSON file {"re": [...], "im": [...]}')
    q.add_argument("--restarts", type=int, default=20)
    q.set_defaults(fn=cmd_solve)

    q = add("fibre-sample", help="draw fibre points through a stratum base")
    q.add_argument("--in", dest="infile", required=True)
    q.add_argument("--count", type=int, default=200)
    q.set_defaults(fn=cmd_fibre_sample)

    q = add("flow", help="apply a GZ Hamiltonian flow")
    q.add_argument("--in", dest="infile", required=True)
    q.add_argument("--index", required=True, help="GZ index i,j")
    q.add_argument("--t", type=float, default=1.0)
    q.set_defaults(fn=cmd_flow)

    q = add("nilfibre", help="run the nilfibre suite for one size")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--samples", type=int, default=200)
    q.add_argument("--report", default=None)
    q.set_defaults(fn=cmd_nilfibre)

    q = add("suite", help="run acceptance suites")
    q.add_argument("--all", action="store_true")
    q.add_argument("--only", action="append", default=None,
                   help="run a single suite (repeatable)")
    q.add_argument("--n", type=int, default=None, help="restrict suites to one size")
    q.add_argument("--samples", type=int, default=None, help="override sample counts")
    q.add_argument("--timings", action="store_true", help="include wall-clock timings")
    q.set_defaults(fn=cmd_suite)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (alg.AlgebraError, st.StratumError, fib.SolveError, ValueError,
            OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"gz: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
