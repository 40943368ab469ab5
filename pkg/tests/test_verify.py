import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from dtinfluence import (
    Leaf, NotApplicable, OutputSpace, ProductSpace, Query, RandomizedTree, TabulatedFunction,
    VerificationReport, check_approximation_bound, check_covariance, check_efron_stein, check_entropy_bound,
    check_hybrid_identity, check_imax_corollary, check_main, check_os_inequality, check_real_corollary,
    check_real_influence_floor, check_semimetric, check_separated_equality, check_two_function, defect, delta,
    enumerate_all_ddts, hybrid_trace, influences, is_separated, sequential_tree,
)
from dtinfluence.families import (
    FIGURE1_TREE, SEL_TREE, and_function, constant_function, dictator_function, figure1_function, maj_function,
    or_function, sel_function, tribes_function, tribes_tree, xor_function,
)
from dtinfluence.verify import (
    binary_entropy, hybrid, hybrid_aggregate, lower_bound_formula, talagrand_diagnostic, weighted_influence_sum,
)

from oracles import boolean_functions, brute_defect

AND2_TREE = Query(0, (Leaf(-1), Query(1, (Leaf(-1), Leaf(1)))))


def full_tree(n, f):
    """Read every coordinate in order, then answer from the table."""
    sp = f.space

    def build(i, prefix):
        if i == n:
            return Leaf(f(sp.encode(prefix)))
        return Query(i, tuple(build(i + 1, prefix + [a]) for a in range(2)))
    return build(0, [])


# --- main inequality -------------------------------------------------------

def test_main_and2_equality():
    r = check_main(AND2_TREE, and_function(2))
    assert (r.lhs, r.rhs, r.equality, r.holds) == (Fraction(3, 4), Fraction(3, 4), True, True)
    assert r.mode == "rational"


def test_main_sel_equality():
    r = check_main(SEL_TREE, sel_function())
    assert r.lhs == r.rhs == 1 and r.equality


def test_main_majority_strict():
    r = check_main(sequential_tree(maj_function(3)), maj_function(3))
    assert (r.lhs, r.rhs, r.equality) == (1, Fraction(5, 4), False)


def test_main_refusals():
    with pytest.raises(NotApplicable):
        check_main(Leaf(1), xor_function(2))
    with pytest.raises(NotApplicable, match="semimetric"):
        check_main(FIGURE1_TREE, figure1_function())


def test_main_float_mode():
    f = and_function(2, 0.3)
    r = check_main(AND2_TREE, f)
    assert r.mode == "float" and r.holds and r.equality


def test_imax_corollary():
    r = check_imax_corollary(dictator_function(1))
    assert (r.lhs, r.rhs, r.equality) == (1, 1, True)
    r = check_imax_corollary(maj_function(3))
    assert (r.lhs, r.rhs) == (2, Fraction(5, 2))
    r = check_imax_corollary(xor_function(3))
    assert (r.lhs, r.rhs) == (1, 3)
    r = check_imax_corollary(constant_function(2))
    assert r.holds and "skipped" in r.witness


def test_two_function_examples():
    f = maj_function(3)
    t = sequential_tree(f)
    r2 = check_two_function(t, f, f)
    r1 = check_main(t, f)
    assert (r2.lhs, r2.rhs) == (r1.lhs, r1.rhs)
    xor2, and2 = xor_function(2), and_function(2)
    r = check_two_function(full_tree(2, xor2), xor2, and2)
    assert r.holds
    r = check_two_function(Leaf(1), constant_function(2), and2)
    assert r.lhs == 0 and r.rhs == 0


def test_covariance_examples():
    d = dictator_function(1)
    r = check_covariance(Query(0, (Leaf(-1), Leaf(1))), d, d)
    assert (r.lhs, r.rhs, r.equality) == (1, 1, True)
    sp = ProductSpace.biased_cube(2)
    x1 = TabulatedFunction.from_callable(sp, OutputSpace.boolean(), lambda v: v[0])
    x2 = TabulatedFunction.from_callable(sp, OutputSpace.boolean(), lambda v: v[1])
    r = check_covariance(Query(0, (Leaf(-1), Leaf(1))), x1, x2)
    assert r.lhs == 0 and r.holds
    f = maj_function(3)
    g = TabulatedFunction.from_callable(f.space, OutputSpace.boolean(), lambda v: v[0])
    r = check_covariance(sequential_tree(f), f, g)
    assert (r.lhs, r.rhs) == (Fraction(1, 2), 1)
    with pytest.raises(NotApplicable):
        check_covariance(FIGURE1_TREE, figure1_function(), figure1_function())


# --- defect ------------------------------------------------------------------

def test_defect_metric_is_one():
    for outputs in (OutputSpace.boolean(), OutputSpace.discrete("abcd"), OutputSpace.rho1((0, 1, 5))):
        for k in (1, 2, 3, 4):
            assert defect(outputs, k) == 1


def test_defect_rho2_three_points():
    assert defect(OutputSpace.rho2((0, 1, 2)), 2) == 2
    assert defect(OutputSpace.rho2((-1, 0, 2)), 3) == Fraction(9, 5)


def test_defect_unbounded():
    z = OutputSpace((0, 1, 2), ((0, 0, 1), (0, 0, 0), (1, 0, 0)), "semimetric")
    assert defect(z, 2) == math.inf


label_sets = st.lists(st.integers(-4, 4), min_size=1, max_size=5, unique=True)


@settings(max_examples=60, deadline=None)
@given(label_sets, st.integers(1, 3))
def test_defect_matches_brute_force(labels, k):
    out = OutputSpace.rho2(labels)
    assert defect(out, k) == brute_defect(out, k)
    assert 1 <= defect(out, k) <= k


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=3, max_size=3), st.integers(1, 3))
def test_defect_matches_brute_force_custom(entries, k):
    a, b, c = entries
    out = OutputSpace((0, 1, 2), ((0, a, b), (a, 0, c), (b, c, 0)), "semimetric")
    assert defect(out, k) == brute_defect(out, k)


# --- semimetric and real-valued ---------------------------------------------

def test_figure1_semimetric():
    f = figure1_function()
    r = check_semimetric(FIGURE1_TREE, f, f)
    assert r.lhs == Fraction(3, 2)
    assert r.details["weighted_influence_sum"] == Fraction(23, 16) < Fraction(3, 2)
    assert r.details["k"] == 3 and r.details["defect"] == Fraction(9, 5)
    assert r.rhs == Fraction(9, 5) * Fraction(23, 16) and r.holds


def test_semimetric_metric_case_matches_two_function():
    f, g = maj_function(3), xor_function(3)
    t = sequential_tree(f)
    a, b = check_semimetric(t, f, g), check_two_function(t, f, g)
    assert (a.lhs, a.rhs) == (b.lhs, b.rhs)
    c = constant_function(3)
    assert check_semimetric(Leaf(1), c, c).lhs == 0


def test_figure1_real_corollary():
    f = figure1_function()
    r = check_real_corollary(FIGURE1_TREE, f)
    assert (r.lhs, r.rhs) == (Fraction(3, 2), Fraction(69, 16)) and r.holds
    r = check_real_influence_floor(FIGURE1_TREE, f)
    assert (r.lhs, r.rhs) == (Fraction(1, 6), Fraction(7, 8)) and r.holds


def test_real_corollary_on_boolean():
    f = maj_function(3)
    t = sequential_tree(f)
    r = check_real_corollary(t, f)
    assert r.lhs == 1 and r.holds
    # rho2 on {-1,1} is half the boolean metric, times k = depth
    assert r.rhs == 3 * check_main(t, f).rhs


def test_efron_stein_examples():
    r = check_efron_stein(dictator_function(1))
    assert (r.lhs, r.rhs, r.equality) == (1, 1, True)
    r = check_efron_stein(xor_function(2))
    assert (r.lhs, r.rhs) == (1, 2)
    r = check_efron_stein(figure1_function())
    assert r.holds
    semi = OutputSpace((0, 1, 2), ((0, 1, 5), (1, 0, 1), (5, 1, 0)), "semimetric")
    with pytest.raises(NotApplicable):
        check_efron_stein(figure1_function().with_outputs(
            OutputSpace((-1, 0, 2), semi.dist, "semimetric")))


def test_separated_equality_examples():
    for f, t in [(and_function(2), AND2_TREE), (tribes_function(2, 2), tribes_tree(2, 2)),
                 (sel_function(), SEL_TREE)]:
        r = check_separated_equality(t, f)
        assert r.equality and r.holds
    with pytest.raises(NotApplicable, match="not separated"):
        check_separated_equality(sequential_tree(maj_function(3)), maj_function(3))


def test_approximation_bound():
    f = maj_function(3)
    t = sequential_tree(f)
    r = check_approximation_bound(t, f, f)
    assert r.rhs == Fraction(5, 2) and r.lhs == 2 and r.holds
    r = check_approximation_bound(t, f, constant_function(3))
    assert r.holds and "skipped" in r.witness


# --- entropy, OS, diagnostics ------------------------------------------------

def test_binary_entropy():
    assert binary_entropy(Fraction(1, 2)) == 1
    assert binary_entropy(0) == 0
    assert binary_entropy(0.25) == pytest.approx(0.8112781244591328)


def test_entropy_bound():
    r = check_entropy_bound(AND2_TREE, and_function(2))
    assert r.lhs == 1.5 and r.rhs == pytest.approx(math.log2(3)) and r.holds
    with pytest.raises(NotApplicable):
        check_entropy_bound(Leaf(1), and_function(2))


def test_os_examples():
    r = check_os_inequality(dictator_function(1), Fraction(1, 2))
    assert r.lhs == 1 and r.rhs == 1 and r.equality
    r = check_os_inequality(and_function(2))
    assert r.lhs == 1 and r.rhs == pytest.approx(2 * math.sqrt(3 / 8))
    with pytest.raises(NotApplicable, match="monotone"):
        check_os_inequality(xor_function(2))


def test_talagrand_diagnostic():
    assert talagrand_diagnostic(constant_function(3)) == 0
    assert talagrand_diagnostic(dictator_function(1)) == math.inf
    assert talagrand_diagnostic(maj_function(3)) == pytest.approx(3 * 0.5 / math.log(2))


def test_lower_bound_formula():
    assert lower_bound_formula(8, Fraction(1, 2)) == pytest.approx(4)
    assert lower_bound_formula(9, 0.5) == pytest.approx(4.3267487109)
    assert lower_bound_formula(None, 0.5, graph_vertices=3) == pytest.approx(2 ** (2 / 3))
    with pytest.raises(ValueError):
        lower_bound_formula(3, 0)


# --- hybrids --------------------------------------------------------------------

def test_worked_hybrid_example():
    sp = ProductSpace.biased_cube(4)
    x, y = sp.point((1, -1, 1, 1)), sp.point((1, 1, -1, -1))
    tree = Query(3, (Leaf(-1), Query(1, (Leaf(-1), Leaf(1)))))
    f = TabulatedFunction.from_callable(sp, OutputSpace.boolean(),
                                        lambda v: 1 if v[3] == 1 and v[1] == 1 else -1)
    tr = hybrid_trace(tree, f, x, y)
    assert tr.query_sequence == (3, 1)
    assert [sp.labels_of(u) for u in tr.hybrids] == [(1, -1, -1, 1), (1, -1, -1, -1), (1, 1, -1, -1)]
    assert hybrid(sp, x, y, {3, 1}) == tr.hybrids[0]


def test_hybrid_refuses_tree_not_computing_f():
    f = and_function(2)
    with pytest.raises(NotApplicable):
        hybrid_trace(Leaf(-1), f, 3, 0)


@st.composite
def function_and_tree(draw):
    f = draw(boolean_functions(max_n=3))
    trees = list(enumerate_all_ddts(f))
    return f, trees[draw(st.integers(0, len(trees) - 1))]


@settings(max_examples=60, deadline=None)
@given(function_and_tree())
def test_hybrid_identity_property(ft):
    f, t = ft
    r = check_hybrid_identity(t, f)
    assert r.equality and r.holds
    assert hybrid_aggregate(t, f) == weighted_influence_sum(delta(t, f.space), f)


@settings(max_examples=100, deadline=None)
@given(function_and_tree())
def test_main_inequality_property(ft):
    f, t = ft
    r = check_main(t, f)
    assert r.holds
    if is_separated(t, f.space):
        assert r.equality
    assert check_efron_stein(f).holds


@settings(max_examples=60, deadline=None)
@given(function_and_tree(), boolean_functions(max_n=3))
def test_two_function_property(ft, g):
    f, t = ft
    if g.space != f.space:
        g = g.with_space(f.space) if g.space.sizes == f.space.sizes else f
    assert check_two_function(t, f, g).holds
    assert check_covariance(t, f, g).holds


@settings(max_examples=40, deadline=None)
@given(function_and_tree(), function_and_tree())
def test_randomized_tree_property(a, b):
    f, t1 = a
    trees = list(enumerate_all_ddts(f))
    rt = RandomizedTree(((Fraction(1, 3), t1), (Fraction(2, 3), trees[-1])))
    assert check_two_function(rt, f, f).holds
    assert check_main(t1, f).holds


def test_report_json_round_trip():
    r = check_semimetric(FIGURE1_TREE, figure1_function(), figure1_function())
    assert VerificationReport.from_dict(r.to_dict()) == r
    d = r.to_dict()
    assert d["lhs"] == "3/2" and d["slack"] == str(r.rhs - r.lhs)
    r = check_os_inequality(and_function(2))
    assert VerificationReport.from_dict(r.to_dict()) == r


def test_weighted_sum_ignores_unread_coordinates():
    f = or_function(3)
    assert weighted_influence_sum([1, 0, 0], f) == influences(f)[0]
