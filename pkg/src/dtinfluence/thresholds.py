"""Monotone functions on the biased cube: critical probability and the
lower-bound chain for monotone transitive functions."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .measures import bias_polynomial, influences, variation
from .model import ModelError, TabulatedFunction
from .optimal import optimal_expected_cost
from .report import NotApplicable, VerificationReport, make_report

# exponent of Snir's randomized tree for the recursive AND-OR function
SNIR_BETA = math.log2((1 + math.sqrt(33)) / 4)

DEFAULT_TOL = 1e-12


def _require_boolean_cube(f: TabulatedFunction):
    if not f.space.is_binary_cube():
        raise ModelError("needs a {-1,1} cube")
    if not f.is_boolean:
        raise ModelError("needs {-1,1} outputs")


def is_monotone(f: TabulatedFunction) -> bool:
    """f(x) <= f(x with one coordinate raised from -1 to 1) for every covering pair."""
    _require_boolean_cube(f)
    sp = f.space
    rank = [f.outputs.labels[z] for z in f.table]
    for i, c in enumerate(sp.coords):
        lo, hi = c.index(-1), c.index(1)
        for x in sp.points():
            if sp.coord_value(x, i) == lo and rank[x] > rank[sp.with_coord(x, i, hi)]:
                return False
    return True


@dataclass(frozen=True)
class CriticalProbability:
    p_star: float
    bracket: tuple[float, float]
    residual: float


def critical_probability(f: TabulatedFunction, tol: float = DEFAULT_TOL, max_iter: int = 200) -> CriticalProbability:
    """Bisect Pr_p[f = 1] - 1/2 on (0, 1)."""
    if f.is_constant():
        raise NotApplicable("constant function has no critical probability")
    if not is_monotone(f):
        raise NotApplicable("bisection refused: f is not monotone")
    poly = bias_polynomial(f)
    counts = poly.counts

    def excess(p: float) -> float:
        return poly.evaluate(p) - 0.5

    lo, hi = 0.0, 1.0
    for _ in range(max_iter):
        mid = (lo + hi) / 2
        r = excess(mid)
        if abs(r) <= tol:
            return CriticalProbability(mid, (lo, hi), abs(r))
        if r < 0:
            lo = mid
        else:
            hi = mid
        if not lo < (lo + hi) / 2 < hi:
            break
    raise ArithmeticError(f"bisection stalled at residual {abs(excess((lo + hi) / 2))} > {tol} for {counts}")


def is_automorphism(f: TabulatedFunction, perm: Sequence[int]) -> bool:
    """f(x_perm[0], ..., x_perm[n-1]) == f(x) for every x."""
    sp = f.space
    for x in sp.points():
        v = sp.decode(x)
        if f.table[sp.encode([v[perm[i]] for i in range(sp.n)])] != f.table[x]:
            return False
    return True


def orbit(n: int, generators: Sequence[Sequence[int]], start: int = 0) -> set[int]:
    seen = {start}
    todo = [start]
    while todo:
        i = todo.pop()
        for g in generators:
            if g[i] not in seen:
                seen.add(g[i])
                todo.append(g[i])
    return seen


@dataclass
class Theorem21Report:
    critical: CriticalProbability
    n: int
    variance: float
    influences: tuple
    total_influence: float
    delta_f: float
    bound: float
    checks: list[VerificationReport] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return all(r.holds for r in self.checks)


def theorem21_pipeline(f: TabulatedFunction, tol: float = DEFAULT_TOL, automorphisms=None,
                       assume_transitive: bool = True, slack: float = 1e-9) -> Theorem21Report:
    """Balance f at its critical bias and check both steps of the lower-bound chain.

    Transitivity is taken on trust unless ``automorphisms`` (coordinate
    permutations) are supplied; the equal-influence consequence is checked
    directly in either case.
    """
    crit = critical_probability(f, tol)
    p = crit.p_star
    q = 1 - p
    fp = f.rebias(p)
    n = f.n
    var = variation(fp)
    inf = influences(fp)
    total = inf.total
    delta_f, _ = optimal_expected_cost(fp)
    bound = n ** (2 / 3) / (4 * p * q) ** (1 / 3)

    checks = []
    if automorphisms is not None:
        bad = [list(g) for g in automorphisms if not is_automorphism(f, g)]
        transitive = not bad and orbit(n, automorphisms) == set(range(n))
        checks.append(make_report("transitivity-spot-check", 0 if transitive else 1, 0,
                                  witness={"non_automorphisms": bad} if bad else None))
    elif not assume_transitive:
        raise NotApplicable("transitivity neither asserted nor spot-checked")
    spread = max(abs(v - total / n) for v in inf.values)
    checks.append(make_report("equal-influences", spread, slack, details={"influences": inf.values}))
    checks.append(make_report("variance-at-critical", abs(var - 1), 4 * tol))
    checks.append(make_report("chain-influence", 1, total / n * delta_f, tol=slack))
    checks.append(make_report("chain-three-halves", 1, 2 * math.sqrt(p * q) / n * delta_f ** 1.5, tol=slack))
    checks.append(make_report("final-bound", bound, delta_f, tol=slack))
    return Theorem21Report(crit, n, var, inf.values, total, delta_f, bound, checks)


def bias_increasing_on_grid(f: TabulatedFunction, points: int = 101) -> bool:
    """Strictly increasing Pr_p[f = 1] on an interior grid of (0, 1), exactly."""
    poly = bias_polynomial(f)
    grid = [Fraction(k, points + 1) for k in range(1, points + 1)]
    vals = [poly.evaluate(p) for p in grid]
    return all(a < b for a, b in zip(vals, vals[1:]))
