"""Command-line front end: ``dtinf <command> [options]``.

Exit codes: 0 when every check holds, 1 when some inequality fails, 2 on
usage or parse errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import families, thresholds
from .arith import from_str, mode_of, parse_number, pretty, to_str
from .measures import influences, variation
from .model import DEFAULT_CAP, ModelError, OutputSpace, ProductSpace, TabulatedFunction, parse_function, parse_label
from .optimal import MAX_ENUMERATION_VARS, enumerate_all_ddts, optimal_depth, optimal_expected_cost
from .report import NotApplicable, VerificationReport, skipped_report
from .tree import (
    delta, depth, expected_cost, format_tree, is_read_once, is_separated, leaf_count, parse_tree,
    sequential_tree,
)
from . import verify

METRICS = ("boolean", "discrete", "rho1", "rho2")
INEQUALITIES = ("main", "efron-stein", "os", "two-function")
MAX_SWEEP_N = 5
MAX_EXHAUSTIVE_N = 3


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# reports

def _nums(values) -> list[str]:
    return [to_str(v) for v in values]


def _unnums(values) -> list:
    return [from_str(v) for v in values]


@dataclass
class AnalysisReport:
    source: str
    space: dict
    metric: str
    variation: object
    influences: tuple
    total_influence: object
    tree: dict | None = None
    optimal: dict | None = None
    checks: list[VerificationReport] = field(default_factory=list)

    @property
    def mode(self) -> str:
        return mode_of(self.variation, *self.influences)

    @property
    def holds(self) -> bool:
        return all(r.holds for r in self.checks)

    def to_dict(self) -> dict:
        tree = None
        if self.tree is not None:
            tree = dict(self.tree)
            tree["delta"] = _nums(tree["delta"])
            tree["expected_cost"] = to_str(tree["expected_cost"])
        opt = None
        if self.optimal is not None:
            opt = dict(self.optimal)
            opt["delta_f"] = to_str(opt["delta_f"])
        return {
            "source": self.source,
            "mode": self.mode,
            "space": {"n": self.space["n"], "sizes": list(self.space["sizes"]),
                      "weights": [_nums(w) for w in self.space["weights"]]},
            "metric": self.metric,
            "variation": to_str(self.variation),
            "influences": _nums(self.influences),
            "total_influence": to_str(self.total_influence),
            "tree": tree,
            "optimal": opt,
            "checks": [r.to_dict() for r in self.checks],
            "holds": self.holds,
        }

    @classmethod
    def from_dict(cls, d: dict) -> AnalysisReport:
        tree = d.get("tree")
        if tree is not None:
            tree = dict(tree, delta=_unnums(tree["delta"]), expected_cost=from_str(tree["expected_cost"]))
        opt = d.get("optimal")
        if opt is not None:
            opt = dict(opt, delta_f=from_str(opt["delta_f"]))
        sp = d["space"]
        space = {"n": sp["n"], "sizes": tuple(sp["sizes"]), "weights": [tuple(_unnums(w)) for w in sp["weights"]]}
        return cls(d["source"], space, d["metric"], from_str(d["variation"]), tuple(_unnums(d["influences"])),
                   from_str(d["total_influence"]), tree, opt,
                   [VerificationReport.from_dict(r) for r in d.get("checks", [])])


def _space_dict(sp: ProductSpace) -> dict:
    return {"n": sp.n, "sizes": sp.sizes, "weights": [c.weights for c in sp.coords]}


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False)


# ---------------------------------------------------------------------------
# loading inputs

def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "rb") as fh:
        data = fh.read()
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ModelError(f"{path}: not valid UTF-8 ({exc.reason})") from None


def _p_value(args) -> object:
    try:
        p = parse_number(args.p, exact=args.exact) if args.p is not None else Fraction(1, 2)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"bad --p value {args.p!r}") from None
    if not 0 <= p <= 1:
        raise UsageError(f"--p {args.p} outside [0, 1]")
    return p


def _load(args, need_boolean: bool = False):
    """(function, canonical tree or None, source string) from --function / --family."""
    if bool(args.function) == bool(args.family):
        raise UsageError("give exactly one of --function FILE and --family NAME")
    if args.function:
        f = parse_function(_read_text(args.function), cap=args.cap, exact=args.exact)
        if args.p is not None:
            if not f.space.is_binary_cube():
                raise UsageError("--p applies only to functions on a {-1,1} cube")
            f = f.rebias(_p_value(args))
        canonical, source = None, args.function
    else:
        spec = families.parse_family(args.family)
        f, canonical = families.build(spec, _p_value(args))
        source = f"family:{spec}"
        if f.space.size > args.cap:
            raise ModelError(f"{f.space.size} points exceed the enumeration cap {args.cap}")
    metric = getattr(args, "metric", None)
    if metric:
        f = f.with_outputs(OutputSpace.builtin(metric, f.outputs.labels))
    if need_boolean and not f.is_boolean:
        raise UsageError("this command needs a function with {-1,1} outputs")
    return f, canonical, source


def _resolve_tree(args, f: TabulatedFunction, canonical):
    spec = getattr(args, "tree", None)
    if spec is None:
        return None
    if spec == "canonical":
        if canonical is None:
            name = args.family or args.function
            raise UsageError(f"{name} has no canonical tree")
        return canonical
    if spec == "optimal":
        return optimal_expected_cost(f, cap=args.cap)[1]
    if spec == "sequential":
        return sequential_tree(f)
    return parse_tree(_read_text(spec), f.space)


def _guard(fn, *a) -> VerificationReport:
    try:
        return fn(*a)
    except NotApplicable as exc:
        name = fn.__name__.removeprefix("check_").replace("_", "-")
        return skipped_report(name, str(exc))


# ---------------------------------------------------------------------------
# commands

def cmd_analyze(args) -> AnalysisReport:
    f, canonical, source = _load(args)
    tree = _resolve_tree(args, f, canonical)
    inf = influences(f)
    rep = AnalysisReport(source, _space_dict(f.space), f.outputs.name, variation(f), inf.values, inf.total)
    checks = rep.checks
    if f.outputs.kind == "metric" or f.outputs.name == "rho2":
        checks.append(_guard(verify.check_efron_stein, f))
    if tree is not None:
        deltas = delta(tree, f.space)
        separated = is_separated(tree, f.space)
        rep.tree = {
            "text": format_tree(tree, f.space),
            "delta": deltas,
            "expected_cost": expected_cost(tree, f.space),
            "depth": depth(tree),
            "leaves": leaf_count(tree),
            "read_once": is_read_once(tree),
            "separated": separated,
        }
        if f.outputs.kind == "metric":
            checks.append(_guard(verify.check_main, tree, f))
            checks.append(_guard(verify.check_improvement, tree, f))
        else:
            checks.append(_guard(verify.check_semimetric, tree, f, f))
        if f.outputs.is_real:
            checks.append(_guard(verify.check_real_corollary, tree, f))
            checks.append(_guard(verify.check_real_influence_floor, tree, f))
        if separated:
            checks.append(_guard(verify.check_separated_equality, tree, f))
    if args.optimal:
        d_f, t_exp = optimal_expected_cost(f, cap=args.cap)
        dd_f, t_depth = optimal_depth(f, cap=args.cap)
        rep.optimal = {"delta_f": d_f, "depth_f": dd_f,
                       "expected_cost_tree": format_tree(t_exp, f.space),
                       "depth_tree": format_tree(t_depth, f.space)}
        if f.is_boolean:
            checks.append(_guard(verify.check_imax_corollary, f))
    return rep


def _print_analysis(rep: AnalysisReport, out):
    print(f"function     {rep.source}", file=out)
    print(f"space        n={rep.space['n']} sizes={list(rep.space['sizes'])}", file=out)
    print(f"metric       {rep.metric}   mode {rep.mode}", file=out)
    print(f"variation    {pretty(rep.variation)}", file=out)
    for i, v in enumerate(rep.influences):
        print(f"Inf_{i + 1:<8} {pretty(v)}", file=out)
    print(f"total Inf    {pretty(rep.total_influence)}", file=out)
    if rep.tree:
        t = rep.tree
        print(f"tree         {t['text']}", file=out)
        for i, v in enumerate(t["delta"]):
            print(f"delta_{i + 1:<6} {pretty(v)}", file=out)
        print(f"Delta(T)     {pretty(t['expected_cost'])}", file=out)
        print(f"depth        {t['depth']}   leaves {t['leaves']}   read-once {t['read_once']}"
              f"   separated {t['separated']}", file=out)
    if rep.optimal:
        o = rep.optimal
        print(f"Delta(f)     {pretty(o['delta_f'])}   witness {o['expected_cost_tree']}", file=out)
        print(f"D(f)         {o['depth_f']}   witness {o['depth_tree']}", file=out)
    for r in rep.checks:
        _print_check(r, out)


def _print_check(r: VerificationReport, out):
    if isinstance(r.witness, dict) and "skipped" in r.witness:
        print(f"check {r.inequality:<22} skipped: {r.witness['skipped']}", file=out)
        return
    tag = "equality" if r.equality else ("holds" if r.holds else "FAILS")
    print(f"check {r.inequality:<22} {pretty(r.lhs)} <= {pretty(r.rhs)}  {tag}", file=out)
    for k, v in r.details.items():
        if isinstance(v, (list, tuple)):
            v = "(" + ", ".join(pretty(t) for t in v) + ")"
        elif not isinstance(v, str):
            v = pretty(v)
        print(f"      {k:<24} {v}", file=out)


# --- sweep -----------------------------------------------------------------

def _sweep_tables(args) -> list[tuple[int, ...]]:
    n = args.n
    if not 1 <= n <= MAX_SWEEP_N:
        raise UsageError(f"sweep supports 1 <= n <= {MAX_SWEEP_N}")
    size = 1 << n
    if args.sample is None:
        if n > MAX_EXHAUSTIVE_N:
            raise UsageError(f"n = {n} needs --sample K (exhaustive sweeps stop at n = {MAX_EXHAUSTIVE_N})")
        return [tuple((t >> x) & 1 for x in range(size)) for t in range(1 << size)]
    rng = np.random.default_rng(args.seed)
    return [tuple(int(b) for b in rng.integers(0, 2, size=size)) for _ in range(args.sample)]


def _cube_function(n: int, p, table) -> TabulatedFunction:
    sp = ProductSpace.biased_cube(n, p)
    return TabulatedFunction(sp, OutputSpace.boolean((-1, 1)), table)


def _sweep_job(job) -> dict:
    """Check one function; returns counts that add up across functions."""
    inequality, n, p_str, table, others, tol = job
    p = from_str(p_str)
    f = _cube_function(n, p, table)
    res = {"instances": 0, "failures": 0, "equalities": 0, "not_applicable": 0,
           "non_separated_equalities": 0, "failed": []}

    def record(r: VerificationReport, tree=None):
        res["instances"] += 1
        if r.equality:
            res["equalities"] += 1
            if tree is not None and not is_separated(tree, f.space):
                res["non_separated_equalities"] += 1
        if not r.holds:
            res["failures"] += 1
            res["failed"].append({"table": list(table), "report": r.to_dict()})

    if inequality == "main":
        if n <= MAX_ENUMERATION_VARS:
            trees = enumerate_all_ddts(f)
        else:
            trees = [optimal_expected_cost(f)[1], sequential_tree(f)]
        for t in trees:
            record(verify.check_main(t, f), t)
    elif inequality == "efron-stein":
        record(verify.check_efron_stein(f))
    elif inequality == "os":
        if thresholds.is_monotone(f):
            record(verify.check_os_inequality(f, tol=tol))
        else:
            res["not_applicable"] += 1
    elif inequality == "two-function":
        witness = optimal_expected_cost(f)[1]
        for other in others:
            record(verify.check_two_function(witness, f, _cube_function(n, p, other)))
    return res


def cmd_sweep(args) -> dict:
    p = _p_value(args)
    tables = _sweep_tables(args)
    others = tuple(tables) if args.inequality == "two-function" else ()
    jobs = [(args.inequality, args.n, to_str(p), t, others, args.tol) for t in tables]
    if args.threads > 1:
        with ProcessPoolExecutor(max_workers=args.threads) as pool:
            results = list(pool.map(_sweep_job, jobs, chunksize=max(1, len(jobs) // (4 * args.threads))))
    else:
        results = [_sweep_job(j) for j in jobs]
    summary = {"inequality": args.inequality, "n": args.n, "p": to_str(p),
               "functions": len(tables), "sampled": args.sample is not None,
               "seed": args.seed if args.sample is not None else None}
    for key in ("instances", "failures", "equalities", "not_applicable", "non_separated_equalities"):
        summary[key] = sum(r[key] for r in results)
    summary["failed"] = [e for r in results for e in r["failed"]][:10]
    return summary


def _print_sweep(s: dict, out):
    for k, v in s.items():
        if k != "failed":
            print(f"{k:<26} {v}", file=out)
    for e in s["failed"]:
        print(f"FAILED table={e['table']} {e['report']['lhs']} <= {e['report']['rhs']}", file=out)


# --- optimal / critical / defect / trace -----------------------------------

def cmd_optimal(args) -> dict:
    f, _, source = _load(args)
    d_f, t_exp = optimal_expected_cost(f, cap=args.cap)
    dd_f, t_depth = optimal_depth(f, cap=args.cap)
    return {"source": source, "delta_f": d_f, "expected_cost_tree": format_tree(t_exp, f.space),
            "depth_f": dd_f, "depth_tree": format_tree(t_depth, f.space)}


def _graph_automorphisms(spec: families.FamilySpec):
    v = spec.params[1]
    swap = [1, 0] + list(range(2, v))
    cycle = list(range(1, v)) + [0]
    return [families.vertex_permutation_action(v, s) for s in (swap, cycle)]


def cmd_critical(args) -> dict:
    f, _, source = _load(args, need_boolean=True)
    out = {"source": source, "tol": args.tol}
    if not args.pipeline:
        c = thresholds.critical_probability(f, args.tol)
        out.update(p_star=c.p_star, bracket=list(c.bracket), residual=c.residual)
        return out
    autos = None
    if args.family and families.parse_family(args.family).name == "graph":
        autos = _graph_automorphisms(families.parse_family(args.family))
    rep = thresholds.theorem21_pipeline(f, args.tol, automorphisms=autos)
    c = rep.critical
    out.update(p_star=c.p_star, bracket=list(c.bracket), residual=c.residual,
               variance=rep.variance, total_influence=rep.total_influence,
               delta_f=rep.delta_f, bound=rep.bound, checks=[r.to_dict() for r in rep.checks],
               holds=rep.holds)
    return out


def _print_critical(d: dict, out):
    for k in ("source", "p_star", "bracket", "residual", "variance", "total_influence", "delta_f", "bound"):
        if k in d:
            v = d[k]
            v = "[" + ", ".join(f"{t:.17g}" for t in v) + "]" if isinstance(v, list) else v
            print(f"{k:<16} {v}", file=out)
    for r in d.get("checks", []):
        _print_check(VerificationReport.from_dict(r), out)


def cmd_defect(args) -> dict:
    if args.function:
        outputs = parse_function(_read_text(args.function), cap=args.cap, exact=args.exact).outputs
        if args.metric:
            outputs = OutputSpace.builtin(args.metric, outputs.labels)
    else:
        if not args.outputs:
            raise UsageError("give --outputs LABELS or --function FILE")
        labels = [parse_label(t) for t in args.outputs.split(",") if t.strip()]
        outputs = OutputSpace.builtin(args.metric or "discrete", labels)
    if args.k < 1:
        raise UsageError("--k must be at least 1")
    value = verify.defect(outputs, args.k, cap=args.cap)
    return {"labels": _nums(outputs.labels), "metric": outputs.name, "k": args.k, "defect": value}


def _point(f: TabulatedFunction, text: str) -> int:
    labels = [parse_label(t) for t in text.split(",")]
    if len(labels) != f.n:
        raise UsageError(f"point {text!r} has {len(labels)} coordinates, expected {f.n}")
    return f.space.point(labels)


def cmd_trace(args) -> dict:
    f, canonical, source = _load(args)
    if args.tree is None:
        args.tree = "canonical" if canonical is not None else "optimal"
    tree = _resolve_tree(args, f, canonical)
    out = {"source": source, "tree": format_tree(tree, f.space)}
    if (args.x is None) != (args.y is None):
        raise UsageError("give both --x and --y, or neither")
    if args.x is not None:
        tr = verify.hybrid_trace(tree, f, _point(f, args.x), _point(f, args.y))
        sp = f.space
        out["query_sequence"] = [i + 1 for i in tr.query_sequence]
        out["hybrids"] = [[to_str(v) for v in sp.labels_of(u)] for u in tr.hybrids]
        out["values"] = [to_str(f(u)) for u in tr.hybrids]
        out["step_distances"] = _nums(tr.step_distances)
        out["total"] = to_str(tr.total)
    report = verify.check_hybrid_identity(tree, f)
    out["identity"] = report.to_dict()
    return out


def _print_trace(d: dict, out):
    print(f"function   {d['source']}", file=out)
    print(f"tree       {d['tree']}", file=out)
    if "hybrids" in d:
        print(f"queries    {d['query_sequence']}", file=out)
        for t, (u, v) in enumerate(zip(d["hybrids"], d["values"])):
            step = "" if t == 0 else f"   d = {d['step_distances'][t - 1]}"
            print(f"u[{t}] = ({', '.join(u)})   f = {v}{step}", file=out)
        print(f"total      {d['total']}", file=out)
    _print_check(VerificationReport.from_dict(d["identity"]), out)


# ---------------------------------------------------------------------------
# argument parsing

def _global_options(parser: argparse.ArgumentParser, suppress: bool):
    def dflt(v):
        return argparse.SUPPRESS if suppress else v
    parser.add_argument("--exact", action="store_true", default=dflt(False),
                        help="read decimal inputs as exact rationals")
    parser.add_argument("--json", action="store_true", default=dflt(False), help="machine-readable output")
    parser.add_argument("--threads", type=int, default=dflt(1), metavar="N", help="worker processes for sweeps")
    parser.add_argument("--seed", type=int, default=dflt(0), metavar="S", help="seed for sampled sweeps")
    parser.add_argument("--cap", type=int, default=dflt(DEFAULT_CAP), metavar="POINTS",
                        help="largest space that may be enumerated")


def _source_options(parser):
    parser.add_argument("--function", metavar="FILE", help="function file ('-' for stdin)")
    parser.add_argument("--family", metavar="NAME[:PARAMS]", help="named family, e.g. tribes:2,2")
    parser.add_argument("--p", metavar="VALUE", help="bias of each {-1,1} coordinate (default 1/2)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dtinf", description="Influences, decision-tree costs and the "
                                     "variance/influence inequalities, computed exactly.")
    _global_options(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    _global_options(common, suppress=True)

    p = sub.add_parser("analyze", parents=[common], help="measures, tree metrics and inequality checks")
    _source_options(p)
    p.add_argument("--tree", metavar="FILE|canonical|optimal|sequential")
    p.add_argument("--metric", choices=METRICS)
    p.add_argument("--optimal", action="store_true", help="also compute Delta(f) and D(f)")

    p = sub.add_parser("sweep", parents=[common], help="check an inequality over many functions")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", metavar="VALUE")
    p.add_argument("--inequality", choices=INEQUALITIES, required=True)
    p.add_argument("--sample", type=int, metavar="K", help="check K seeded random functions")
    p.add_argument("--tol", type=float, default=1e-9)

    p = sub.add_parser("optimal", parents=[common], help="Delta(f), D(f) and witness trees")
    _source_options(p)
    p.add_argument("--metric", choices=METRICS)

    p = sub.add_parser("critical", parents=[common], help="critical probability of a monotone function")
    _source_options(p)
    p.add_argument("--tol", type=float, default=thresholds.DEFAULT_TOL)
    p.add_argument("--pipeline", action="store_true", help="check the lower-bound chain at p*")

    p = sub.add_parser("defect", parents=[common], help="k-step defect of an output distance")
    p.add_argument("--outputs", metavar="LABELS", help="comma-separated output labels")
    p.add_argument("--function", metavar="FILE", help="take the output space from a function file")
    p.add_argument("--metric", choices=METRICS)
    p.add_argument("--k", type=int, required=True)

    p = sub.add_parser("trace", parents=[common], help="hybrid inputs along a tree's query path")
    _source_options(p)
    p.add_argument("--tree", metavar="FILE|canonical|optimal|sequential")
    p.add_argument("--metric", choices=METRICS)
    p.add_argument("--x", metavar="LABELS")
    p.add_argument("--y", metavar="LABELS")
    return parser


def _emit(obj, printer, args, out):
    if args.json:
        print(_dump(obj), file=out)
    else:
        printer(out)


def _jsonify(d: dict) -> dict:
    return {k: (to_str(v) if isinstance(v, (Fraction, float)) and k not in ("tol", "residual", "p_star") else v)
            for k, v in d.items()}


def run(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be at least 1")
    try:
        if args.command == "analyze":
            rep = cmd_analyze(args)
            _emit(rep.to_dict(), lambda o: _print_analysis(rep, o), args, out)
            failed = [r for r in rep.checks if not r.holds]
        elif args.command == "sweep":
            s = cmd_sweep(args)
            _emit(s, lambda o: _print_sweep(s, o), args, out)
            failed = s["failures"]
        elif args.command == "optimal":
            d = _jsonify(cmd_optimal(args))
            _emit(d, lambda o: [print(f"{k:<20} {v}", file=o) for k, v in d.items()], args, out)
            failed = 0
        elif args.command == "critical":
            d = cmd_critical(args)
            d = {k: (to_str(v) if k in ("variance", "total_influence", "delta_f") else v) for k, v in d.items()}
            _emit(d, lambda o: _print_critical(d, o), args, out)
            failed = not d.get("holds", True)
        elif args.command == "defect":
            d = _jsonify(cmd_defect(args))
            _emit(d, lambda o: print(d["defect"], file=o), args, out)
            failed = 0
        else:
            d = cmd_trace(args)
            _emit(d, lambda o: _print_trace(d, o), args, out)
            failed = not d["identity"]["holds"]
    except (UsageError, ModelError, NotApplicable, OSError, json.JSONDecodeError) as exc:
        print(f"dtinf {args.command}: error: {exc}", file=sys.stderr)
        return 2
    if failed:
        print(f"dtinf {args.command}: inequality check failed", file=sys.stderr)
        return 1
    return 0


def main(argv: Sequence[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
