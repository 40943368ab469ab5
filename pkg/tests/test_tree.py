from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from dtinfluence import (
    Leaf, ModelError, ParseError, ProductSpace, Query, RandomizedTree, TreeError, compose_disjoint, computes,
    delta, depth, evaluate, expected_cost, format_tree, is_read_once, is_separated, leaf_count, parse_function,
    parse_tree, sequential_tree,
)
from dtinfluence.families import (
    FIGURE1_TREE, SEL_TREE, and_function, figure1_function, maj_function, or_function, tribes_function,
    tribes_tree, xor_function,
)
from dtinfluence.model import OutputSpace, TabulatedFunction
from dtinfluence.optimal import enumerate_all_ddts
from dtinfluence.tree import (
    as_randomized, compose_functions, delta_by_enumeration, delta_randomized, nodes, separation_witness,
    tabulate, validate,
)

from oracles import boolean_functions, brute_delta, leaf_count_brute

DATA = Path(__file__).parent / "data"
UNIFORM3 = ProductSpace.biased_cube(3)
AND2_TREE = Query(0, (Leaf(-1), Query(1, (Leaf(-1), Leaf(1)))))


def test_leaf_evaluates_without_queries():
    assert evaluate(Leaf(7), UNIFORM3, 5) == (7, ())


def test_figure1_paths():
    assert evaluate(FIGURE1_TREE, UNIFORM3, UNIFORM3.point((-1, -1, 1))) == (2, (0, 1, 2))
    for x3 in (-1, 1):
        assert evaluate(FIGURE1_TREE, UNIFORM3, UNIFORM3.point((-1, 1, x3))) == (-1, (0, 1))


def test_computes():
    assert computes(FIGURE1_TREE, figure1_function())
    assert not computes(Leaf(1), xor_function(2))
    assert computes(AND2_TREE, and_function(2))


def test_delta_figure1():
    assert delta(FIGURE1_TREE, UNIFORM3) == [1, Fraction(3, 4), Fraction(3, 4)]
    assert expected_cost(FIGURE1_TREE, UNIFORM3) == Fraction(5, 2)


def test_delta_majority():
    t = sequential_tree(maj_function(3))
    assert delta(t, UNIFORM3) == [1, 1, Fraction(1, 2)]
    assert expected_cost(t, UNIFORM3) == Fraction(5, 2)
    assert expected_cost(Leaf(0), UNIFORM3) == 0


def test_structure_metrics():
    assert depth(Leaf(0)) == 0 and depth(FIGURE1_TREE) == 3 and depth(AND2_TREE) == 2
    assert is_read_once(AND2_TREE) and is_read_once(SEL_TREE)
    assert not is_read_once(FIGURE1_TREE)
    assert leaf_count(FIGURE1_TREE) == 6
    assert len(list(nodes(FIGURE1_TREE))) == 11


def test_separation():
    assert is_separated(AND2_TREE, ProductSpace.biased_cube(2))
    assert is_separated(SEL_TREE, UNIFORM3)
    t = tribes_tree(2, 2)
    assert is_separated(t, ProductSpace.biased_cube(4))
    assert not is_read_once(t)
    w = separation_witness(sequential_tree(maj_function(3)), UNIFORM3)
    assert w is not None


def test_composition_builds_tribes():
    f = tribes_function(2, 2)
    t = tribes_tree(2, 2)
    assert computes(t, f)
    sp = f.space
    for x in sp.points():
        v = sp.labels_of(x)
        assert f(x) == (1 if (v[0] == 1 and v[1] == 1) or (v[2] == 1 and v[3] == 1) else -1)


def test_composition_with_identity_outer():
    g = and_function(2)
    outer = ProductSpace.biased_cube(1)
    t = compose_disjoint(Query(0, (Leaf(-1), Leaf(1))), [(AND2_TREE, g)], outer)
    assert t == AND2_TREE


def test_compose_functions_matches_direct_formula():
    outer = or_function(2)
    h = compose_functions(outer, [and_function(2), and_function(2)])
    assert h == tribes_function(2, 2)


def test_randomized_delta():
    sp = ProductSpace.biased_cube(2)
    assert delta_randomized(as_randomized(AND2_TREE), sp) == delta(AND2_TREE, sp)
    mirror = Query(1, (Leaf(-1), Query(0, (Leaf(-1), Leaf(1)))))
    rt = RandomizedTree(((Fraction(1, 2), AND2_TREE), (Fraction(1, 2), mirror)))
    assert delta_randomized(rt, sp) == [Fraction(3, 4), Fraction(3, 4)]
    assert rt.computes(and_function(2))
    x1 = Query(0, (Query(1, (Leaf(1), Leaf(-1))), Query(1, (Leaf(-1), Leaf(1)))))
    x2 = Query(1, (Query(0, (Leaf(1), Leaf(-1))), Query(0, (Leaf(-1), Leaf(1)))))
    rt = RandomizedTree(((Fraction(1, 2), x1), (Fraction(1, 2), x2)))
    assert delta_randomized(rt, sp) == [1, 1]


def test_randomized_tree_validation():
    with pytest.raises(TreeError):
        RandomizedTree(((Fraction(1, 2), AND2_TREE),))
    with pytest.raises(TreeError):
        RandomizedTree(())


def test_repeated_coordinate_rejected():
    with pytest.raises(ModelError):
        validate(Query(0, (Query(0, (Leaf(1), Leaf(1))), Leaf(1))), UNIFORM3)
    with pytest.raises(ModelError):
        validate(Query(5, (Leaf(1), Leaf(1))), UNIFORM3)


def test_parse_tree_file():
    assert parse_tree((DATA / "figure1.tree").read_text(), UNIFORM3) == FIGURE1_TREE


@pytest.mark.parametrize("text", [
    "(q 1 (-1 (leaf 0)))",
    "(q 4 (-1 (leaf 0)) (1 (leaf 1)))",
    "(q 1 (-1 (q 1 (-1 (leaf 0)) (1 (leaf 0)))) (1 (leaf 1)))",
    "(q 1 (-1 (leaf 0)) (1 (leaf 1))) extra",
    "(node 1)",
    "(q 1 (0 (leaf 0)) (1 (leaf 1)))",
    "(leaf",
])
def test_parse_tree_errors(text):
    with pytest.raises(ParseError):
        parse_tree(text, UNIFORM3)


def test_tabulate_round_trip():
    f = figure1_function()
    assert tabulate(FIGURE1_TREE, f.space, f.outputs) == f


def test_sequential_tree_skips_ignored_coordinates():
    sp = ProductSpace.biased_cube(3)
    f = parse_function("space 3\n" + "".join(f"coord {i} values -1 1 weights 1/2 1/2\n" for i in (1, 2, 3))
                       + "outputs -1 1\nvalues -1 -1 1 1 -1 -1 1 1\n")
    t = sequential_tree(f)
    assert computes(t, f)
    assert delta(t, sp) == [0, 1, 0]


# --- properties --------------------------------------------------------------

@st.composite
def function_and_tree(draw, max_n=3):
    f = draw(boolean_functions(max_n=max_n))
    trees = list(enumerate_all_ddts(f))
    return f, trees[draw(st.integers(0, len(trees) - 1))]


@settings(max_examples=80, deadline=None)
@given(function_and_tree())
def test_delta_matches_point_enumeration(ft):
    f, t = ft
    d = delta(t, f.space)
    assert d == brute_delta(t, f.space) == delta_by_enumeration(t, f.space)
    assert all(0 <= v <= 1 for v in d)
    if isinstance(t, Query):
        assert d[t.coord] == 1
    assert sum(d) <= depth(t)


@settings(max_examples=80, deadline=None)
@given(function_and_tree())
def test_tree_text_round_trip(ft):
    f, t = ft
    assert parse_tree(format_tree(t, f.space), f.space) == t
    assert leaf_count(t) == leaf_count_brute(t)


@settings(max_examples=60, deadline=None)
@given(function_and_tree())
def test_read_once_implies_separated(ft):
    f, t = ft
    if is_read_once(t):
        assert is_separated(t, f.space)


@settings(max_examples=40, deadline=None)
@given(boolean_functions(max_n=2, min_n=1), boolean_functions(max_n=2, min_n=1))
def test_disjoint_composition_of_read_once_trees_is_separated(g, h):
    # outer AND over two disjoint blocks, each with its own read-once sequential tree
    g, h = g.rebias(Fraction(1, 2)), h.rebias(Fraction(1, 2))
    outer = and_function(2)
    tg, th = sequential_tree(g), sequential_tree(h)
    if not (is_read_once(tg) and is_read_once(th)):
        return
    t = compose_disjoint(sequential_tree(outer), [(tg, g), (th, h)], outer.space)
    composed = compose_functions(outer, [g, h])
    assert computes(t, composed)
    assert is_separated(t, composed.space)
    assert isinstance(composed, TabulatedFunction) and composed.outputs == OutputSpace.boolean()
