"""Deterministic and randomized decision trees over a product space.

A tree is built from two immutable node types: ``Leaf(label)`` and
``Query(coord, children)`` where ``children[a]`` is followed when the
queried coordinate takes its a-th value.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterator, Sequence, Union

from .arith import Number, is_exact, to_str
from .model import (
    DEFAULT_CAP, CapExceeded, ModelError, OutputSpace, ParseError, ProductSpace, SpaceMismatch,
    TabulatedFunction, parse_label, WEIGHT_TOL,
)


@dataclass(frozen=True)
class Leaf:
    label: object


@dataclass(frozen=True)
class Query:
    coord: int
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))


DecisionTree = Union[Leaf, Query]


class TreeError(ModelError):
    pass


def validate(tree: DecisionTree, space: ProductSpace, outputs: OutputSpace | None = None):
    """Raise TreeError unless ``tree`` is a well-formed DDT over ``space``."""
    def visit(node, seen):
        if isinstance(node, Leaf):
            if outputs is not None and node.label not in outputs:
                raise TreeError(f"leaf label {node.label!r} not an output label")
            return
        i = node.coord
        if not 0 <= i < space.n:
            raise TreeError(f"query on coordinate {i + 1} outside 1..{space.n}")
        if i in seen:
            raise TreeError(f"coordinate {i + 1} repeats on a root-leaf path")
        if len(node.children) != space.sizes[i]:
            raise TreeError(f"coordinate {i + 1} node needs {space.sizes[i]} children")
        for child in node.children:
            visit(child, seen | {i})
    visit(tree, frozenset())


def walk(tree: DecisionTree, values: Sequence[int]) -> tuple[object, tuple[int, ...]]:
    """Follow ``tree`` on a tuple of value indices; return (label, queried coords in order)."""
    queried = []
    node = tree
    while isinstance(node, Query):
        queried.append(node.coord)
        node = node.children[values[node.coord]]
    return node.label, tuple(queried)


def evaluate(tree: DecisionTree, space: ProductSpace, x: int) -> tuple[object, tuple[int, ...]]:
    return walk(tree, space.decode(x))


def tabulate(tree: DecisionTree, space: ProductSpace, outputs: OutputSpace) -> TabulatedFunction:
    validate(tree, space, outputs)
    return TabulatedFunction.from_labels(space, outputs, (evaluate(tree, space, x)[0] for x in space.points()))


def computes(tree: DecisionTree, f: TabulatedFunction) -> bool:
    validate(tree, f.space)
    for x in f.space.points():
        label, _ = evaluate(tree, f.space, x)
        if label not in f.outputs or f.outputs.index(label) != f.table[x]:
            return False
    return True


def delta(tree: DecisionTree, space: ProductSpace) -> list[Number]:
    """Probability that each coordinate is read, by summing reach probabilities of query nodes."""
    out: list[Number] = [0] * space.n

    def visit(node, reach):
        if isinstance(node, Leaf):
            return
        out[node.coord] += reach
        weights = space.coords[node.coord].weights
        for w, child in zip(weights, node.children):
            visit(child, reach * w)

    visit(tree, 1)
    return out


def delta_by_enumeration(tree: DecisionTree, space: ProductSpace) -> list[Number]:
    """Same quantity as ``delta`` computed point by point."""
    out: list[Number] = [0] * space.n
    for x, px in zip(space.points(), space.probabilities):
        for i in evaluate(tree, space, x)[1]:
            out[i] += px
    return out


def expected_cost(tree: DecisionTree, space: ProductSpace) -> Number:
    return sum(delta(tree, space))


def depth(tree: DecisionTree) -> int:
    if isinstance(tree, Leaf):
        return 0
    return 1 + max(depth(c) for c in tree.children)


def leaf_count(tree: DecisionTree) -> int:
    if isinstance(tree, Leaf):
        return 1
    return sum(leaf_count(c) for c in tree.children)


def nodes(tree: DecisionTree, path: tuple = ()) -> Iterator[tuple[tuple, DecisionTree]]:
    """Pre-order (path, node) pairs; a path is a tuple of (coord, value index) edges."""
    yield path, tree
    if isinstance(tree, Query):
        for a, child in enumerate(tree.children):
            yield from nodes(child, path + ((tree.coord, a),))


def is_read_once(tree: DecisionTree) -> bool:
    coords = [node.coord for _, node in nodes(tree) if isinstance(node, Query)]
    return len(coords) == len(set(coords))


def separation_witness(tree: DecisionTree, space: ProductSpace):
    """A point and two subtrees that disagree on it yet share a queried coordinate, or None.

    Every node roots a subtree read as a tree on the whole space; pairs include a
    node with itself and with its ancestors.
    """
    validate(tree, space)
    subtrees = list(nodes(tree))
    if len(subtrees) ** 2 * space.size > 4 * DEFAULT_CAP:
        raise CapExceeded("separation check too large for exhaustive scan")
    for x in space.points():
        vals = space.decode(x)
        runs = []
        for path, node in subtrees:
            label, queried = walk(node, vals)
            mask = 0
            for i in queried:
                mask |= 1 << i
            runs.append((label, mask, path))
        for (la, ma, pa), (lb, mb, pb) in itertools.combinations(runs, 2):
            if la != lb and ma & mb:
                return {
                    "point": space.labels_of(x),
                    "subtrees": [_path_str(pa, space), _path_str(pb, space)],
                    "shared": sorted(i + 1 for i in range(space.n) if (ma & mb) >> i & 1),
                }
    return None


def is_separated(tree: DecisionTree, space: ProductSpace) -> bool:
    return separation_witness(tree, space) is None


def _path_str(path, space) -> str:
    if not path:
        return "root"
    return " ".join(f"x{i + 1}={to_str(space.coords[i].values[a])}" for i, a in path)


def sequential_tree(f: TabulatedFunction, order: Sequence[int] | None = None) -> DecisionTree:
    """Query coordinates in ``order``, skipping ones the current restriction ignores."""
    sp = f.space
    order = list(range(sp.n)) if order is None else list(order)

    def build(fixed: dict, rest: list):
        pts = [x for x in sp.points() if all(sp.coord_value(x, i) == a for i, a in fixed.items())]
        outs = {f.table[x] for x in pts}
        if len(outs) == 1:
            return Leaf(f.outputs.labels[outs.pop()])
        for k, i in enumerate(rest):
            if _restriction_depends(f, pts, i):
                return Query(i, tuple(build({**fixed, i: a}, rest[k + 1:]) for a in range(sp.sizes[i])))
        raise TreeError("order does not cover the coordinates f depends on")

    return build({}, order)


def _restriction_depends(f, pts, i) -> bool:
    sp = f.space
    base = [x for x in pts if sp.coord_value(x, i) == 0]
    return any(f.table[sp.with_coord(x, i, a)] != f.table[x] for x in base for a in range(1, sp.sizes[i]))


# ---------------------------------------------------------------------------
# disjoint composition

def compose_disjoint(outer: DecisionTree, factors: Sequence[tuple[DecisionTree, TabulatedFunction]],
                     outer_space: ProductSpace) -> DecisionTree:
    """Tree for F = f(f_1, ..., f_m) on the concatenation of the factor spaces.

    Every query of coordinate j in ``outer`` is replaced by a copy of factor j's
    tree whose leaves lead to the outer child named by the leaf label.
    """
    if len(factors) != outer_space.n:
        raise SpaceMismatch(f"outer tree has {outer_space.n} coordinates, got {len(factors)} factors")
    validate(outer, outer_space)
    offsets = []
    off = 0
    for j, (tj, fj) in enumerate(factors):
        dom = outer_space.coords[j]
        if set(fj.outputs.labels) != set(dom.values):
            raise SpaceMismatch(f"factor {j + 1} outputs {fj.outputs.labels} ≠ outer domain {dom.values}")
        validate(tj, fj.space, fj.outputs)
        offsets.append(off)
        off += fj.space.n

    def graft(t, j, children):
        if isinstance(t, Leaf):
            return children[outer_space.coords[j].index(t.label)]
        return Query(t.coord + offsets[j], tuple(graft(c, j, children) for c in t.children))

    def build(node):
        if isinstance(node, Leaf):
            return node
        children = tuple(build(c) for c in node.children)
        return graft(factors[node.coord][0], node.coord, children)

    return build(outer)


def compose_functions(outer: TabulatedFunction, inners: Sequence[TabulatedFunction]) -> TabulatedFunction:
    """Tabulate F(x^1, ..., x^m) = outer(f_1(x^1), ..., f_m(x^m))."""
    if len(inners) != outer.n:
        raise SpaceMismatch("need one inner function per outer coordinate")
    for j, g in enumerate(inners):
        if set(g.outputs.labels) != set(outer.space.coords[j].values):
            raise SpaceMismatch(f"inner {j + 1} outputs do not match outer domain")
    space = ProductSpace.concat(g.space for g in inners)
    table = []
    for parts in itertools.product(*(range(g.space.size) for g in inners)):
        vals = [outer.space.coords[j].index(g(x)) for j, (g, x) in enumerate(zip(inners, parts))]
        table.append(outer.table[outer.space.encode(vals)])
    return TabulatedFunction(space, outer.outputs, tuple(table))


# ---------------------------------------------------------------------------
# randomized trees

@dataclass(frozen=True)
class RandomizedTree:
    branches: tuple[tuple[Number, DecisionTree], ...]

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple((p, t) for p, t in self.branches))
        probs = [p for p, _ in self.branches]
        if not probs:
            raise TreeError("randomized tree with no branches")
        if any(p < 0 for p in probs):
            raise TreeError("negative branch probability")
        total = sum(probs)
        if (total != 1) if all(is_exact(p) for p in probs) else abs(total - 1) > WEIGHT_TOL:
            raise TreeError("branch probabilities must sum to 1")

    @classmethod
    def single(cls, tree: DecisionTree) -> RandomizedTree:
        return cls(((1, tree),))

    def computes(self, f: TabulatedFunction) -> bool:
        return all(computes(t, f) for _, t in self.branches)

    def depth(self) -> int:
        return max(depth(t) for _, t in self.branches)


def as_randomized(tree) -> RandomizedTree:
    return tree if isinstance(tree, RandomizedTree) else RandomizedTree.single(tree)


def delta_randomized(rt: RandomizedTree, space: ProductSpace) -> list[Number]:
    out: list[Number] = [0] * space.n
    for p, t in rt.branches:
        for i, d in enumerate(delta(t, space)):
            out[i] += p * d
    return out


# ---------------------------------------------------------------------------
# tree files

_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def parse_tree(text: str, space: ProductSpace) -> DecisionTree:
    """Parse ``(q 1 (-1 (leaf 0)) (1 (leaf 2)))`` style text (1-based coordinates)."""
    body = "\n".join(line.split("#", 1)[0] for line in text.splitlines())
    tokens = _TOKEN.findall(body)
    pos = 0

    def expect(tok):
        nonlocal pos
        if pos >= len(tokens) or tokens[pos] != tok:
            got = tokens[pos] if pos < len(tokens) else "end of input"
            raise ParseError(f"expected {tok!r} at token {pos}, got {got!r}")
        pos += 1

    def atom():
        nonlocal pos
        if pos >= len(tokens) or tokens[pos] in "()":
            raise ParseError(f"expected an atom at token {pos}")
        pos += 1
        return tokens[pos - 1]

    def tree(seen):
        expect("(")
        kind = atom()
        if kind == "leaf":
            node = Leaf(parse_label(atom()))
            expect(")")
            return node
        if kind != "q":
            raise ParseError(f"expected 'leaf' or 'q', got {kind!r}")
        tok = atom()
        if not tok.isdigit() or not 1 <= int(tok) <= space.n:
            raise ParseError(f"bad coordinate {tok!r}")
        i = int(tok) - 1
        if i in seen:
            raise ParseError(f"coordinate {i + 1} repeats on a path")
        dom = space.coords[i]
        children: dict[int, DecisionTree] = {}
        while pos < len(tokens) and tokens[pos] == "(":
            expect("(")
            try:
                a = dom.index(parse_label(atom()))
            except ModelError as exc:
                raise ParseError(f"coordinate {i + 1}: {exc}") from None
            if a in children:
                raise ParseError(f"coordinate {i + 1}: value given twice")
            children[a] = tree(seen | {i})
            expect(")")
        expect(")")
        if len(children) != len(dom):
            raise ParseError(f"coordinate {i + 1} needs a branch for each of its {len(dom)} values")
        return Query(i, tuple(children[a] for a in range(len(dom))))

    result = tree(frozenset())
    if pos != len(tokens):
        raise ParseError("trailing tokens after tree")
    return result


def format_tree(tree: DecisionTree, space: ProductSpace) -> str:
    if isinstance(tree, Leaf):
        return f"(leaf {to_str(tree.label)})"
    vals = space.coords[tree.coord].values
    branches = " ".join(f"({to_str(v)} {format_tree(c, space)})" for v, c in zip(vals, tree.children))
    return f"(q {tree.coord + 1} {branches})"
