"""Exact probabilistic functionals of tabulated functions.

Influences use the rerandomizing convention: coordinate i of x is redrawn
from its own marginal, and the expected output distance is measured with
the function's own output distance.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

from .arith import Number, ratio
from .model import ModelError, OutputSpace, TabulatedFunction, check_same_domain


def output_distribution(f: TabulatedFunction) -> list[Number]:
    dist: list[Number] = [0] * len(f.outputs.labels)
    for z, px in zip(f.table, f.space.probabilities):
        dist[z] += px
    return dist


def variation(f: TabulatedFunction) -> Number:
    """E d(f(x), f(y)) for independent x, y."""
    pz = output_distribution(f)
    d = f.outputs.dist
    m = len(pz)
    return sum(pz[a] * pz[b] * d[a][b] for a in range(m) for b in range(m) if pz[a] and pz[b])


def _lines(f: TabulatedFunction, i: int):
    """Group the lines along coordinate i by output pattern.

    Returns {pattern: total probability of the other coordinates}, where
    a pattern lists f's output index for each value of coordinate i.
    """
    sp = f.space
    if not 0 <= i < sp.n:
        raise ModelError(f"coordinate {i} out of range")
    grid = np.asarray(f.table, dtype=np.int64).reshape(sp.sizes)
    rows = np.moveaxis(grid, i, -1).reshape(-1, sp.sizes[i])
    rest: list[Number] = [1]
    for j, c in enumerate(sp.coords):
        if j != i:
            rest = [q * w for q in rest for w in c.weights]
    acc: dict = defaultdict(int)
    for row, r in zip(map(tuple, rows.tolist()), rest):
        acc[row] += r
    return acc


def influence(f: TabulatedFunction, i: int) -> Number:
    """E d(f(x), f(x with coordinate i rerandomized))."""
    if not 0 <= i < f.n:
        raise ModelError(f"coordinate {i} out of range")
    weights = f.space.coords[i].weights
    d = f.outputs.dist
    k = len(weights)
    total: Number = 0
    for pattern, r in _lines(f, i).items():
        if len(set(pattern)) == 1:
            continue
        line = sum(weights[a] * weights[b] * d[pattern[a]][pattern[b]] for a in range(k) for b in range(k))
        total += r * line
    return total


@dataclass(frozen=True)
class InfluenceVector:
    values: tuple
    metric_tag: str

    @property
    def total(self) -> Number:
        return sum(self.values)

    @property
    def max(self) -> Number:
        return max(self.values, default=0)

    def __getitem__(self, i):
        return self.values[i]

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)


@lru_cache(maxsize=2048)
def influences(f: TabulatedFunction) -> InfluenceVector:
    return InfluenceVector(tuple(influence(f, i) for i in range(f.n)), f.outputs.name)


def total_influence(f: TabulatedFunction) -> Number:
    return influences(f).total


def to_flip_convention(values, f: TabulatedFunction) -> list[Number]:
    """Convert boolean-metric influences to Pr[f(x) != f(x with x_i flipped)].

    The rerandomizing convention is 4 p (1 - p) times the flip convention on
    a binary coordinate with weights (1 - p, p).
    """
    if not f.is_boolean or f.outputs.name != "boolean":
        raise ModelError("flip convention needs the boolean metric")
    out = []
    for v, c in zip(values, f.space.coords):
        if len(c) != 2:
            raise ModelError("flip convention needs binary coordinates")
        scale = 4 * c.weights[0] * c.weights[1]
        out.append(ratio(v, scale) if scale else 0)
    return out


def covariation(f: TabulatedFunction, g: TabulatedFunction) -> Number:
    """E d(f(x), g(y)) - E d(f(x), g(x))."""
    check_same_domain(f, g)
    d = f.outputs.dist
    pf, pg = output_distribution(f), output_distribution(g)
    m = len(pf)
    cross = sum(pf[a] * pg[b] * d[a][b] for a in range(m) for b in range(m) if pf[a] and pg[b])
    diag = sum(px * d[a][b] for a, b, px in zip(f.table, g.table, f.space.probabilities))
    return cross - diag


def _real_values(f: TabulatedFunction):
    if not f.outputs.is_real:
        raise ModelError("function does not have real-valued outputs")
    return [f.outputs.labels[z] for z in f.table]


def mean(f: TabulatedFunction) -> Number:
    return sum(px * v for px, v in zip(f.space.probabilities, _real_values(f)))


def covariance(f: TabulatedFunction, g: TabulatedFunction) -> Number:
    if f.space != g.space:
        raise ModelError("functions live on different spaces")
    fv, gv = _real_values(f), _real_values(g)
    probs = f.space.probabilities
    efg = sum(px * a * b for px, a, b in zip(probs, fv, gv))
    return efg - mean(f) * mean(g)


def rho1_view(f: TabulatedFunction) -> TabulatedFunction:
    return f.with_outputs(OutputSpace.rho1(f.outputs.labels))


def rho2_view(f: TabulatedFunction) -> TabulatedFunction:
    return f.with_outputs(OutputSpace.rho2(f.outputs.labels))


@dataclass(frozen=True)
class BiasPolynomial:
    """Pr_p[f = 1] = sum_k counts[k] p^k (1 - p)^(n - k)."""

    counts: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.counts) - 1

    def evaluate(self, p: Number) -> Number:
        q = 1 - p
        return sum(c * p ** k * q ** (self.n - k) for k, c in enumerate(self.counts) if c)

    def __call__(self, p: Number) -> Number:
        return self.evaluate(p)


def bias_polynomial(f: TabulatedFunction) -> BiasPolynomial:
    sp = f.space
    if not sp.is_binary_cube():
        raise ModelError("bias polynomial needs a {-1,1} cube")
    if not f.is_boolean:
        raise ModelError("bias polynomial needs {-1,1} outputs")
    one = f.outputs.index(1)
    counts = [0] * (sp.n + 1)
    for x, z in enumerate(f.table):
        if z == one:
            counts[sum(1 for v in sp.labels_of(x) if v == 1)] += 1
    assert all(c <= comb(sp.n, k) for k, c in enumerate(counts))
    return BiasPolynomial(tuple(counts))
