"""Instance checks of the tree-influence inequality and its relatives.

Every ``check_*`` function returns a VerificationReport for ``lhs <= rhs``.
Randomized trees are accepted wherever a tree is; a plain tree is treated
as a one-branch randomized tree.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .arith import FLOAT_SLACK, Number, ratio
from .measures import covariance, covariation, influences, rho1_view, rho2_view, variation
from .model import CapExceeded, DEFAULT_CAP, ModelError, OutputSpace, TabulatedFunction, check_same_domain
from .optimal import optimal_expected_cost
from .report import NotApplicable, VerificationReport, make_report, skipped_report
from .thresholds import is_monotone
from .tree import (
    DecisionTree, RandomizedTree, as_randomized, computes, delta, delta_randomized, evaluate,
    is_separated, leaf_count, separation_witness,
)


def weighted_influence_sum(deltas, f: TabulatedFunction) -> Number:
    """sum_i delta_i * Inf_i(f), skipping coordinates that are never read."""
    inf = influences(f)
    return sum(d * inf[i] for i, d in enumerate(deltas) if d)


def _require_computes(rt: RandomizedTree, f: TabulatedFunction):
    for _, t in rt.branches:
        if not computes(t, f):
            raise NotApplicable("tree does not compute f")


def _require_metric(outputs: OutputSpace, alternative: str):
    if outputs.kind != "metric":
        raise NotApplicable(f"output distance is a semimetric; use {alternative}")


def check_main(tree: DecisionTree, f: TabulatedFunction) -> VerificationReport:
    """Vr[f] <= sum_i delta_i(T) Inf_i(f) for a metric output space."""
    _require_metric(f.outputs, "check_semimetric")
    rt = as_randomized(tree)
    _require_computes(rt, f)
    deltas = delta_randomized(rt, f.space)
    return make_report("main", variation(f), weighted_influence_sum(deltas, f), details={"delta": deltas})


def check_improvement(tree: DecisionTree, f: TabulatedFunction) -> VerificationReport:
    """sum_i delta_i(T) Inf_i(f) <= Inf(f): the tree bound never exceeds Efron-Stein's."""
    deltas = delta_randomized(as_randomized(tree), f.space)
    return make_report("improvement", weighted_influence_sum(deltas, f), influences(f).total)


def check_imax_corollary(f: TabulatedFunction) -> VerificationReport:
    """Var[f] / Inf_max(f) <= Delta(f)."""
    if not f.is_boolean:
        raise NotApplicable("needs {-1,1} outputs")
    if f.is_constant():
        return skipped_report("imax-corollary", "constant function: Inf_max = 0")
    inf_max = influences(f).max
    delta_f, _ = optimal_expected_cost(f)
    return make_report("imax-corollary", ratio(variation(f), inf_max), delta_f,
                       details={"inf_max": inf_max})


def check_two_function(rt, f: TabulatedFunction, g: TabulatedFunction) -> VerificationReport:
    """|CoVr[f, g]| <= sum_i delta_i(RT) Inf_i(g) where RT computes f."""
    check_same_domain(f, g)
    _require_metric(f.outputs, "check_semimetric")
    rt = as_randomized(rt)
    _require_computes(rt, f)
    deltas = delta_randomized(rt, f.space)
    return make_report("two-function", abs(covariation(f, g)), weighted_influence_sum(deltas, g))


def check_covariance(rt, f: TabulatedFunction, g: TabulatedFunction) -> VerificationReport:
    """|Cov[f, g]| <= sum_i delta_i(RT) Inf_i^rho1(g) for f with values in [-1, 1]."""
    if not f.outputs.is_real or not g.outputs.is_real:
        raise NotApplicable("needs real-valued outputs")
    if any(not -1 <= f.outputs.labels[z] <= 1 for z in set(f.table)):
        raise NotApplicable("f takes values outside [-1, 1]")
    rt = as_randomized(rt)
    _require_computes(rt, f)
    deltas = delta_randomized(rt, f.space)
    return make_report("covariance", abs(covariance(f, g)), weighted_influence_sum(deltas, rho1_view(g)))


def defect(outputs: OutputSpace, k: int, cap: int = DEFAULT_CAP) -> Number:
    """Largest rho(z_0, z_k) / sum_t rho(z_{t-1}, z_t) over sequences z_0..z_k.

    0/0 counts as 1 and a/0 with a > 0 as infinity.  For fixed endpoints the
    worst sequence is the cheapest k-step path, found by min-plus products.
    """
    if k < 1:
        raise ModelError("defect needs k >= 1")
    m = len(outputs.labels)
    if m ** (k + 1) > cap:
        raise CapExceeded(f"{m}^{k + 1} sequences exceed the cap {cap}")
    d = outputs.dist
    cheapest = [list(row) for row in d]
    for _ in range(k - 1):
        cheapest = [[min(cheapest[a][c] + d[c][b] for c in range(m)) for b in range(m)] for a in range(m)]
    worst: Number = 1
    for a in range(m):
        for b in range(m):
            if d[a][b] == 0:
                continue
            if cheapest[a][b] == 0:
                return math.inf
            worst = max(worst, ratio(d[a][b], cheapest[a][b]))
    return worst


def check_semimetric(rt, f: TabulatedFunction, g: TabulatedFunction) -> VerificationReport:
    """|CoVr[f, g]| <= Def_k(rho) sum_i delta_i(RT) Inf_i(g), k the longest path in RT."""
    check_same_domain(f, g)
    rt = as_randomized(rt)
    _require_computes(rt, f)
    k = max(1, rt.depth())
    def_k = defect(f.outputs, k)
    plain = weighted_influence_sum(delta_randomized(rt, f.space), g)
    details = {"k": k, "defect": def_k, "weighted_influence_sum": plain}
    lhs = abs(covariation(f, g))
    if math.isinf(def_k):
        details["note"] = "unbounded defect: holds vacuously"
        return make_report("semimetric", lhs, math.inf, details=details)
    return make_report("semimetric", lhs, def_k * plain, details=details)


def _real_rho2(f: TabulatedFunction) -> TabulatedFunction:
    if not f.outputs.is_real:
        raise NotApplicable("needs real-valued outputs")
    return rho2_view(f)


def check_real_corollary(rt, f: TabulatedFunction) -> VerificationReport:
    """Var[f] <= k sum_i delta_i(RT) Inf_i^rho2(f)."""
    fr = _real_rho2(f)
    rt = as_randomized(rt)
    _require_computes(rt, fr)
    k = max(1, rt.depth())
    plain = weighted_influence_sum(delta_randomized(rt, f.space), fr)
    return make_report("real-corollary", variation(fr), k * plain,
                       details={"k": k, "weighted_influence_sum": plain})


def check_real_influence_floor(rt, f: TabulatedFunction) -> VerificationReport:
    """Var[f] / k^2 <= max_i Inf_i^rho2(f)."""
    fr = _real_rho2(f)
    rt = as_randomized(rt)
    _require_computes(rt, fr)
    k = max(1, rt.depth())
    return make_report("real-influence-floor", ratio(variation(fr), k ** 2), influences(fr).max,
                       details={"k": k})


def check_efron_stein(f: TabulatedFunction) -> VerificationReport:
    """Vr[f] <= Inf(f), for any metric and for rho2."""
    if f.outputs.kind != "metric" and f.outputs.name != "rho2":
        raise NotApplicable("Efron-Stein is checked for metrics and rho2 only")
    return make_report("efron-stein", variation(f), influences(f).total)


def check_separated_equality(tree: DecisionTree, f: TabulatedFunction) -> VerificationReport:
    """Vr[f] == sum_i delta_i(T) Inf_i(f) for a separated tree, metric or not."""
    witness = separation_witness(tree, f.space)
    if witness is not None:
        raise NotApplicable(f"tree is not separated: {witness}")
    if not computes(tree, f):
        raise NotApplicable("tree does not compute f")
    deltas = delta(tree, f.space)
    return make_report("separated-equality", variation(f), weighted_influence_sum(deltas, f),
                       require_equality=True)


def check_approximation_bound(rt, f: TabulatedFunction, g: TabulatedFunction) -> VerificationReport:
    """(Vr[g] - 2 eps) / Inf_max(g) <= Delta(RT), eps = E d(f(x), g(x)), RT computing f."""
    check_same_domain(f, g)
    _require_metric(f.outputs, "a metric output space")
    rt = as_randomized(rt)
    _require_computes(rt, f)
    inf_max = influences(g).max
    if not inf_max:
        return skipped_report("approximation", "g is constant: Inf_max(g) = 0")
    d = f.outputs.dist
    eps = sum(px * d[a][b] for a, b, px in zip(f.table, g.table, f.space.probabilities))
    cost = sum(delta_randomized(rt, f.space))
    return make_report("approximation", ratio(variation(g) - 2 * eps, inf_max), cost,
                       details={"eps": eps, "inf_max": inf_max, "deviation": "read as Vr[g]"})


def binary_entropy(p) -> float:
    p = float(p)
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def _cube_bias(f: TabulatedFunction):
    sp = f.space
    if not sp.is_binary_cube():
        raise NotApplicable("needs a {-1,1} cube")
    ps = {c.weights[c.index(1)] for c in sp.coords}
    if len(ps) > 1:
        raise NotApplicable("coordinates have different biases")
    return ps.pop() if ps else Fraction(1, 2)


def check_entropy_bound(tree: DecisionTree, f: TabulatedFunction, tol: float = 1e-12) -> VerificationReport:
    """Delta(f) <= log2(#leaves(T)) / H(p) on the p-biased cube."""
    p = _cube_bias(f)
    if not 0 < p < 1:
        raise NotApplicable("entropy bound needs 0 < p < 1")
    if not computes(tree, f):
        raise NotApplicable("tree does not compute f")
    delta_f, _ = optimal_expected_cost(f)
    return make_report("entropy-size", float(delta_f), math.log2(leaf_count(tree)) / binary_entropy(p), tol=tol)


def check_os_inequality(f: TabulatedFunction, p=None, tol: float = FLOAT_SLACK) -> VerificationReport:
    """Inf(f) <= 2 sqrt(p q Delta(f)) for monotone f on the p-biased cube."""
    if p is not None:
        f = f.rebias(p)
    p = _cube_bias(f)
    if not is_monotone(f):
        raise NotApplicable("OS inequality refused: f is not monotone")
    delta_f, _ = optimal_expected_cost(f)
    total = influences(f).total
    rhs = 2 * math.sqrt(float(p * (1 - p) * delta_f))
    return make_report("os", float(total), rhs, tol=tol, details={"delta_f": delta_f})


def talagrand_diagnostic(f: TabulatedFunction, p=None) -> float:
    """sum_i Inf_i / ln(1 / Inf_i); zero influences add 0, influences >= 1 give inf."""
    if p is not None:
        f = f.rebias(p)
    total = 0.0
    for v in influences(f):
        if v == 0:
            continue
        if v >= 1:
            return math.inf
        total += float(v) / math.log(1 / float(v))
    return total


def lower_bound_formula(n: int | None, p, graph_vertices: int | None = None) -> float:
    """n^(2/3) / (4pq)^(1/3), or (v-1)^(4/3) / (16pq)^(1/3) for a v-vertex graph property."""
    if not 0 < p < 1:
        raise ModelError(f"p = {p} must lie strictly between 0 and 1")
    pq = float(p) * (1 - float(p))
    if graph_vertices is not None:
        return (graph_vertices - 1) ** (4 / 3) / (16 * pq) ** (1 / 3)
    return n ** (2 / 3) / (4 * pq) ** (1 / 3)


# ---------------------------------------------------------------------------
# hybrid inputs

@dataclass(frozen=True)
class HybridTrace:
    x: int
    y: int
    query_sequence: tuple[int, ...]
    hybrids: tuple[int, ...]
    step_distances: tuple

    @property
    def total(self) -> Number:
        return sum(self.step_distances)


def hybrid(space, x: int, y: int, coords) -> int:
    """Point agreeing with x on ``coords`` and with y elsewhere."""
    vx, vy = space.decode(x), space.decode(y)
    return space.encode([vx[i] if i in coords else vy[i] for i in range(space.n)])


def hybrid_trace(tree: DecisionTree, f: TabulatedFunction, x: int, y: int) -> HybridTrace:
    """u[t] keeps x on the coordinates read after step t and takes y elsewhere."""
    sp = f.space
    _, seq = evaluate(tree, sp, x)
    s = len(seq)
    us = tuple(hybrid(sp, x, y, set(seq[t:])) for t in range(s + 1))
    if us[-1] != y:
        raise AssertionError("last hybrid differs from y")
    if f.table[us[0]] != f.table[x]:
        raise NotApplicable("f(u[0]) != f(x): the tree does not compute f")
    d = f.outputs.dist
    steps = tuple(d[f.table[us[t - 1]]][f.table[us[t]]] for t in range(1, s + 1))
    return HybridTrace(x, y, seq, us, steps)


def hybrid_aggregate(tree: DecisionTree, f: TabulatedFunction) -> Number:
    """E over independent x, y of the summed hybrid step distances."""
    sp = f.space
    probs = sp.probabilities
    total: Number = 0
    for x, y in itertools.product(sp.points(), repeat=2):
        w = probs[x] * probs[y]
        if w:
            total += w * hybrid_trace(tree, f, x, y).total
    return total


def check_hybrid_identity(tree: DecisionTree, f: TabulatedFunction) -> VerificationReport:
    """The averaged hybrid steps reproduce sum_i delta_i(T) Inf_i(f) exactly."""
    return make_report("hybrid-identity", hybrid_aggregate(tree, f),
                       weighted_influence_sum(delta(tree, f.space), f), require_equality=True)


def separated_equality_witness(tree: DecisionTree, f: TabulatedFunction) -> dict | None:
    """Describe an equality instance of the main inequality whose tree is not separated."""
    report = check_main(tree, f)
    if report.equality and not is_separated(tree, f.space):
        return {"equality": True, "separated": False}
    return None
