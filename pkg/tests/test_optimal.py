from fractions import Fraction

import pytest
from hypothesis import given, settings

from dtinfluence import (
    CapExceeded, Leaf, ModelError, ProductSpace, Query, computes, depth, enumerate_all_ddts, expected_cost,
    optimal_depth, optimal_expected_cost,
)
from dtinfluence.families import (
    and_function, constant_function, dictator_function, maj_function, or_function, recursive_fk, sel_function,
    tribes_function, xor_function,
)
from dtinfluence.model import CoordDomain, OutputSpace, TabulatedFunction

from oracles import boolean_functions


def test_expected_cost_examples():
    assert optimal_expected_cost(constant_function(3))[0] == 0
    assert optimal_expected_cost(constant_function(3))[1] == Leaf(1)
    assert optimal_expected_cost(maj_function(3))[0] == Fraction(5, 2)
    assert optimal_expected_cost(and_function(2))[0] == Fraction(3, 2)
    for n in (1, 2, 3, 4):
        assert optimal_expected_cost(xor_function(n))[0] == n


def test_depth_examples():
    assert optimal_depth(constant_function(2))[0] == 0
    assert optimal_depth(sel_function())[0] == 2
    for n in (1, 2, 3):
        assert optimal_depth(xor_function(n))[0] == n
    assert optimal_depth(recursive_fk(1)[0])[0] == 4


def test_biased_expected_cost():
    # AND2 at bias p: read one input, read the other only if the first is +1
    p = Fraction(1, 3)
    assert optimal_expected_cost(and_function(2, p))[0] == 1 + p
    assert optimal_expected_cost(or_function(2, p))[0] == 1 + (1 - p)


def test_tie_break_prefers_lowest_coordinate():
    _, t = optimal_expected_cost(and_function(2))
    assert t.coord == 0


def test_enumeration_counts():
    assert list(enumerate_all_ddts(dictator_function(1))) == [Query(0, (Leaf(-1), Leaf(1)))]
    assert list(enumerate_all_ddts(constant_function(1))) == [Leaf(1)]
    # hand count: root x1 or x2, the other coordinate read only on one branch
    assert len(list(enumerate_all_ddts(and_function(2)))) == 2
    assert len(list(enumerate_all_ddts(xor_function(2)))) == 2
    # SEL: root x1 (1 way); root x2 or x3 (each 4 ways)
    assert len(list(enumerate_all_ddts(sel_function()))) == 9
    assert len(list(enumerate_all_ddts(maj_function(3)))) == 12


def test_enumeration_refuses_large_inputs():
    with pytest.raises(ModelError):
        list(enumerate_all_ddts(xor_function(5)))


def test_cap():
    with pytest.raises(CapExceeded):
        optimal_expected_cost(xor_function(4), cap=8)


@settings(max_examples=120, deadline=None)
@given(boolean_functions(max_n=3))
def test_optimal_matches_enumeration(f):
    trees = list(enumerate_all_ddts(f))
    assert all(computes(t, f) for t in trees)
    d_f, witness = optimal_expected_cost(f)
    assert computes(witness, f)
    assert expected_cost(witness, f.space) == d_f
    assert d_f == min(expected_cost(t, f.space) for t in trees)
    dd_f, wd = optimal_depth(f)
    assert computes(wd, f) and depth(wd) == dd_f
    assert dd_f == min(depth(t) for t in trees)
    assert d_f <= dd_f


def test_non_binary_coordinates():
    # ternary coordinate selecting which binary input is returned
    sp = ProductSpace((CoordDomain((0, 1, 2), (Fraction(1, 2), Fraction(1, 4), Fraction(1, 4))),
                       CoordDomain((-1, 1), (Fraction(1, 2),) * 2),
                       CoordDomain((-1, 1), (Fraction(1, 2),) * 2)))
    f = TabulatedFunction.from_callable(sp, OutputSpace.boolean(), lambda v: -1 if v[0] == 0 else v[v[0]])
    d_f, t = optimal_expected_cost(f)
    assert computes(t, f)
    assert d_f == 1 + Fraction(1, 2)
    assert optimal_depth(f)[0] == 2


def test_tribes_values():
    assert optimal_expected_cost(tribes_function(2, 2))[0] == Fraction(21, 8)
    assert optimal_depth(tribes_function(2, 2))[0] == 4
