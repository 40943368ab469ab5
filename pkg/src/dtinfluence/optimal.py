"""Minimum expected cost and minimum depth over all decision trees for f.

The recursion runs over subfunctions of f.  A state is the truth table of a
restriction over its free coordinates, with coordinates the restriction
ignores projected away first, so distinct assignments that induce the same
subfunction share one memo entry.
"""
from __future__ import annotations

import itertools
from typing import Callable, Iterator

import numpy as np

from .arith import Number
from .model import CapExceeded, ModelError, TabulatedFunction
from .tree import DecisionTree, Leaf, Query

MAX_ENUMERATION_VARS = 4


class Restriction:
    """A subfunction of f: its free coordinates and truth table over them."""

    __slots__ = ("free", "table")

    def __init__(self, free: tuple[int, ...], table: np.ndarray):
        # drop coordinates the subfunction ignores
        keep = []
        for axis in range(table.ndim):
            first = np.take(table, [0], axis=axis)
            if np.array_equal(np.broadcast_to(first, table.shape), table):
                table = first
            else:
                keep.append(axis)
        self.free = tuple(free[a] for a in keep)
        self.table = table.reshape([table.shape[a] for a in keep])

    @classmethod
    def of(cls, f: TabulatedFunction) -> Restriction:
        table = np.asarray(f.table, dtype=np.int32).reshape(f.space.sizes)
        return cls(tuple(range(f.n)), table)

    @property
    def signature(self):
        return self.free, self.table.tobytes()

    def constant(self):
        """The constant output index, or None if the subfunction is not constant."""
        flat = self.table.ravel()
        return int(flat[0]) if not self.free else None

    def fix(self, axis: int, a: int) -> Restriction:
        sub = np.take(self.table, a, axis=axis)
        return Restriction(self.free[:axis] + self.free[axis + 1:], sub)


def _solve(f: TabulatedFunction, combine: Callable, cap: int | None):
    if cap is not None and f.space.size > cap:
        raise CapExceeded(f"{f.space.size} points exceed the cap {cap}")
    labels = f.outputs.labels
    weights = [c.weights for c in f.space.coords]
    memo: dict = {}

    def solve(r: Restriction) -> tuple[Number, DecisionTree]:
        z = r.constant()
        if z is not None:
            return 0, Leaf(labels[z])
        key = r.signature
        hit = memo.get(key)
        if hit is not None:
            return hit
        best = None
        for axis, i in enumerate(r.free):
            subs = [solve(r.fix(axis, a)) for a in range(r.table.shape[axis])]
            cost = combine(weights[i], [c for c, _ in subs])
            if best is None or cost < best[0]:
                best = (cost, Query(i, tuple(t for _, t in subs)))
        memo[key] = best
        return best

    return solve(Restriction.of(f))


def optimal_expected_cost(f: TabulatedFunction, cap: int | None = None) -> tuple[Number, DecisionTree]:
    """Delta(f) and a tree attaining it; ties go to the lowest coordinate."""
    return _solve(f, lambda w, costs: 1 + sum(wa * c for wa, c in zip(w, costs)), cap)


def optimal_depth(f: TabulatedFunction, cap: int | None = None) -> tuple[int, DecisionTree]:
    """D(f), the least worst-case number of queries, and a tree attaining it."""
    return _solve(f, lambda w, costs: 1 + max(costs), cap)


def enumerate_all_ddts(f: TabulatedFunction) -> Iterator[DecisionTree]:
    """Every tree computing f that only queries coordinates the current restriction depends on.

    Brute force, independent of the memoized recursion above; limited to at
    most four binary coordinates.
    """
    sp = f.space
    if sp.n > MAX_ENUMERATION_VARS or any(k != 2 for k in sp.sizes):
        raise ModelError(f"tree enumeration refused: needs at most {MAX_ENUMERATION_VARS} binary coordinates")
    labels = f.outputs.labels
    cache: dict = {}

    def trees(fixed: frozenset) -> list[DecisionTree]:
        if fixed in cache:
            return cache[fixed]
        pts = [x for x in sp.points() if all(sp.coord_value(x, i) == a for i, a in fixed)]
        outs = {f.table[x] for x in pts}
        if len(outs) == 1:
            result = [Leaf(labels[outs.pop()])]
        else:
            result = []
            free = sorted(set(range(sp.n)) - {i for i, _ in fixed})
            for i in free:
                if all(f.table[x] == f.table[sp.with_coord(x, i, 1 - sp.coord_value(x, i))] for x in pts):
                    continue
                options = [trees(fixed | {(i, a)}) for a in (0, 1)]
                result.extend(Query(i, combo) for combo in itertools.product(*options))
        cache[fixed] = result
        return result

    yield from trees(frozenset())
