"""Named functions and their canonical trees.

Family strings follow the CLI syntax ``name[:param,param...]``, e.g.
``and:3``, ``tribes:2,2`` (tribe width, number of tribes), ``fk:1``,
``graph:connectivity,4`` and ``figure1``.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .arith import Number
from .model import CapExceeded, ModelError, OutputSpace, ProductSpace, TabulatedFunction
from .tree import DecisionTree, Leaf, Query, compose_disjoint, compose_functions, sequential_tree

MAX_FK_TABULATED = 2
MAX_FK_SAMPLED = 6
MAX_GRAPH_VERTICES = 6
GRAPH_PROPERTIES = ("nonempty", "triangle", "connectivity")

FIGURE1_TABLE = (0, 2, -1, -1, -1, 2, -1, 0)
FIGURE1_TREE = Query(0, (
    Query(1, (Query(2, (Leaf(0), Leaf(2))), Leaf(-1))),
    Query(2, (Leaf(-1), Query(1, (Leaf(2), Leaf(0))))),
))


@dataclass(frozen=True)
class FamilySpec:
    name: str
    params: tuple = ()

    def __str__(self):
        if not self.params:
            return self.name
        return f"{self.name}:" + ",".join(str(p) for p in self.params)


_ARITY = {
    "and": (1,), "or": (1,), "xor": (1,), "maj": (1,), "dictator": (0, 1), "constant": (1, 2),
    "sel": (0,), "tribes": (2,), "fk": (1,), "graph": (2,), "figure1": (0,),
}


def parse_family(text: str) -> FamilySpec:
    name, _, rest = text.strip().partition(":")
    name = name.lower()
    if name not in _ARITY:
        raise ModelError(f"unknown family {name!r}; known: {', '.join(sorted(_ARITY))}")
    raw = [t.strip() for t in rest.split(",")] if rest else []
    if len(raw) not in _ARITY[name]:
        raise ModelError(f"family {name!r} takes {' or '.join(map(str, _ARITY[name]))} parameters")
    params = []
    for t in raw:
        try:
            params.append(int(t))
        except ValueError:
            params.append(t)
    if name == "graph":
        prop, v = params
        if isinstance(prop, int):
            prop, v = v, prop
        params = [prop, v]
    return FamilySpec(name, tuple(params))


def _bool(b: bool) -> int:
    return 1 if b else -1


def boolean_function(space: ProductSpace, fn) -> TabulatedFunction:
    """Tabulate a predicate on tuples of +-1 values as a {-1,1}-valued function."""
    return TabulatedFunction.from_callable(space, OutputSpace.boolean(), lambda v: _bool(fn(v)))


def and_function(n: int, p: Number = Fraction(1, 2)) -> TabulatedFunction:
    return boolean_function(ProductSpace.biased_cube(n, p), lambda v: all(t == 1 for t in v))


def or_function(n: int, p: Number = Fraction(1, 2)) -> TabulatedFunction:
    return boolean_function(ProductSpace.biased_cube(n, p), lambda v: any(t == 1 for t in v))


def xor_function(n: int, p: Number = Fraction(1, 2)) -> TabulatedFunction:
    """Parity with +1 read as true: +1 iff an odd number of inputs are +1."""
    return boolean_function(ProductSpace.biased_cube(n, p), lambda v: v.count(1) % 2 == 1)


def maj_function(n: int, p: Number = Fraction(1, 2)) -> TabulatedFunction:
    if n % 2 == 0:
        raise ModelError("majority needs an odd number of inputs")
    return boolean_function(ProductSpace.biased_cube(n, p), lambda v: sum(v) > 0)


def sel_function(p: Number = Fraction(1, 2)) -> TabulatedFunction:
    """x2 if x1 = 1, else x3."""
    return TabulatedFunction.from_callable(ProductSpace.biased_cube(3, p), OutputSpace.boolean(),
                                           lambda v: v[1] if v[0] == 1 else v[2])


SEL_TREE = Query(0, (Query(2, (Leaf(-1), Leaf(1))), Query(1, (Leaf(-1), Leaf(1)))))


def dictator_function(n: int = 1, p: Number = Fraction(1, 2)) -> TabulatedFunction:
    return TabulatedFunction.from_callable(ProductSpace.biased_cube(n, p), OutputSpace.boolean(), lambda v: v[0])


def constant_function(n: int, value: int = 1, p: Number = Fraction(1, 2)) -> TabulatedFunction:
    return TabulatedFunction.from_callable(ProductSpace.biased_cube(n, p), OutputSpace.boolean(), lambda v: value)


def tribes_function(width: int, count: int, p: Number = Fraction(1, 2)) -> TabulatedFunction:
    """OR of ``count`` disjoint ANDs of ``width`` inputs each."""
    def fn(v):
        return any(all(t == 1 for t in v[j * width:(j + 1) * width]) for j in range(count))
    return boolean_function(ProductSpace.biased_cube(width * count, p), fn)


def tribes_tree(width: int, count: int, p: Number = Fraction(1, 2)) -> DecisionTree:
    """OR chain over AND chains, grafted by disjoint composition."""
    outer = or_function(count, p)
    inner = and_function(width, p)
    return compose_disjoint(sequential_tree(outer), [(sequential_tree(inner), inner)] * count, outer.space)


def figure1_function() -> TabulatedFunction:
    labels = (-1, 0, 2)
    return TabulatedFunction.from_labels(ProductSpace.biased_cube(3), OutputSpace.rho2(labels), FIGURE1_TABLE)


def recursive_fk(k: int, p: Number = Fraction(1, 2)) -> tuple[TabulatedFunction, DecisionTree]:
    """f_0 = x1; f_k = (f^1 and f^2) or (f^3 and f^4) on 4^k inputs, with its composed tree."""
    if not 0 <= k <= MAX_FK_TABULATED:
        raise CapExceeded(f"fk:{k} is not tabulated beyond k = {MAX_FK_TABULATED}; use random_child_mean")
    f = dictator_function(1, p)
    t: DecisionTree = Query(0, (Leaf(-1), Leaf(1)))
    outer = tribes_function(2, 2, p)
    outer_tree = tribes_tree(2, 2, p)
    for _ in range(k):
        t = compose_disjoint(outer_tree, [(t, f)] * 4, outer.space)
        f = compose_functions(outer, [f] * 4)
    return f, t


def graph_edges(v: int) -> list[tuple[int, int]]:
    return list(itertools.combinations(range(v), 2))


def _connected(v: int, edges: list[tuple[int, int]]) -> bool:
    adj = [0] * v
    for a, b in edges:
        adj[a] |= 1 << b
        adj[b] |= 1 << a
    reach, frontier = 1, 1
    while frontier:
        nxt = 0
        for a in range(v):
            if frontier >> a & 1:
                nxt |= adj[a]
        frontier = nxt & ~reach
        reach |= nxt
    return reach == (1 << v) - 1


def _has_triangle(v: int, edges: list[tuple[int, int]]) -> bool:
    es = set(edges)
    return any((a, b) in es and (a, c) in es and (b, c) in es for a, b, c in itertools.combinations(range(v), 3))


def graph_property(v: int, prop: str, p: Number = Fraction(1, 2)) -> TabulatedFunction:
    """Monotone property of graphs on v vertices; one input per vertex pair, +1 = edge present."""
    if not 2 <= v <= MAX_GRAPH_VERTICES:
        raise CapExceeded(f"graph properties are tabulated for 2 <= v <= {MAX_GRAPH_VERTICES}")
    all_edges = graph_edges(v)
    tests = {
        "nonempty": lambda es: bool(es),
        "triangle": lambda es: _has_triangle(v, es),
        "connectivity": lambda es: _connected(v, es),
    }
    if prop not in tests:
        raise ModelError(f"unknown graph property {prop!r}; known: {', '.join(GRAPH_PROPERTIES)}")
    test = tests[prop]
    return boolean_function(ProductSpace.biased_cube(len(all_edges), p),
                            lambda x: test([e for e, t in zip(all_edges, x) if t == 1]))


def vertex_permutation_action(v: int, sigma: Sequence[int]) -> list[int]:
    """Coordinate permutation induced on edge variables by relabeling vertices with sigma."""
    edges = graph_edges(v)
    index = {e: k for k, e in enumerate(edges)}
    return [index[tuple(sorted((sigma[a], sigma[b])))] for a, b in edges]


def build(spec: FamilySpec | str, p: Number = Fraction(1, 2)) -> tuple[TabulatedFunction, DecisionTree | None]:
    if isinstance(spec, str):
        spec = parse_family(spec)
    name, ps = spec.name, spec.params
    if name == "and":
        f = and_function(ps[0], p)
        return f, sequential_tree(f)
    if name == "or":
        f = or_function(ps[0], p)
        return f, sequential_tree(f)
    if name == "xor":
        f = xor_function(ps[0], p)
        return f, sequential_tree(f)
    if name == "maj":
        f = maj_function(ps[0], p)
        return f, sequential_tree(f)
    if name == "sel":
        return sel_function(p), SEL_TREE
    if name == "tribes":
        return tribes_function(ps[0], ps[1], p), tribes_tree(ps[0], ps[1], p)
    if name == "fk":
        return recursive_fk(ps[0], p)
    if name == "graph":
        return graph_property(ps[1], ps[0], p), None
    if name == "dictator":
        f = dictator_function(ps[0] if ps else 1, p)
        return f, Query(0, (Leaf(-1), Leaf(1)))
    if name == "constant":
        f = constant_function(ps[0], ps[1] if len(ps) > 1 else 1, p)
        return f, Leaf(f(0))
    if name == "figure1":
        if p != Fraction(1, 2):
            raise ModelError("figure1 is defined on the uniform cube")
        return figure1_function(), FIGURE1_TREE
    raise ModelError(f"unknown family {name!r}")


# ---------------------------------------------------------------------------
# random-child evaluation of f_k

def _fk_eval(x: Sequence[int], level: int, start: int, rng: random.Random) -> tuple[int, int]:
    """(value, leaves read) evaluating children of each gate in random order."""
    if level == 0:
        return x[start], 1
    q = 4 ** (level - 1)

    def gate_and(a, b):
        first, second = (a, b) if rng.random() < 0.5 else (b, a)
        v1, c1 = _fk_eval(x, level - 1, first, rng)
        if v1 == -1:
            return -1, c1
        v2, c2 = _fk_eval(x, level - 1, second, rng)
        return v2, c1 + c2

    pairs = [(start, start + q), (start + 2 * q, start + 3 * q)]
    if rng.random() < 0.5:
        pairs.reverse()
    v1, c1 = gate_and(*pairs[0])
    if v1 == 1:
        return 1, c1
    v2, c2 = gate_and(*pairs[1])
    return v2, c1 + c2


def _fk_input(k: int, x) -> list[int]:
    n = 4 ** k
    if isinstance(x, (int, np.integer)):
        if not 0 <= x < 2 ** n:
            raise ModelError("point index out of range")
        return [1 if (x >> (n - 1 - i)) & 1 else -1 for i in range(n)]
    x = list(x)
    if len(x) != n or any(t not in (-1, 1) for t in x):
        raise ModelError(f"fk:{k} needs {n} inputs in {{-1, 1}}")
    return x


def random_child_cost(k: int, x, rng: random.Random | int | None = None) -> int:
    """Leaves read by one random-child-first evaluation of f_k on x.

    ``x`` is a point index of the {-1,1}^(4^k) cube or a sequence of +-1 values.
    """
    if not 0 <= k <= MAX_FK_SAMPLED:
        raise CapExceeded(f"fk:{k} outside 0..{MAX_FK_SAMPLED}")
    if not isinstance(rng, random.Random):
        rng = random.Random(rng)
    return _fk_eval(_fk_input(k, x), k, 0, rng)[1]


def expected_random_child_cost(k: int, x) -> Fraction:
    """Exact expected cost on input x, averaging over the evaluator's coin flips."""
    xs = _fk_input(k, x)

    def ev(level, start):
        if level == 0:
            return xs[start], Fraction(1)
        q = 4 ** (level - 1)

        def gate(children, stop, sub):
            (va, ca), (vb, cb) = (sub(c) for c in children)
            value = stop if stop in (va, vb) else va
            cost_a = ca + (0 if va == stop else cb)
            cost_b = cb + (0 if vb == stop else ca)
            return value, (cost_a + cost_b) / 2

        def and_gate(pair):
            return gate(pair, -1, lambda s: ev(level - 1, s))

        return gate([(start, start + q), (start + 2 * q, start + 3 * q)], 1, and_gate)

    return ev(k, 0)[1]


def random_child_mean(k: int, samples: int, seed: int = 0, p: float = 0.5) -> tuple[float, float]:
    """Monte Carlo mean cost and its standard error over p-biased random inputs."""
    n = 4 ** k
    rng = random.Random(seed)
    draws = np.random.default_rng(seed).random((samples, n)) < p
    costs = np.empty(samples)
    for s in range(samples):
        xs = [1 if b else -1 for b in draws[s]]
        costs[s] = _fk_eval(xs, k, 0, rng)[1]
    mean = float(costs.mean())
    se = float(costs.std(ddof=1) / math.sqrt(samples)) if samples > 1 else math.inf
    return mean, se
