import itertools

import pytest

from bcov.action import action_on_fields, build_action, vertex
from bcov.errors import KahlerAxiomError, ParamError, ShapeMismatch, TooFewLegs
from bcov.genus0 import (
    count_trees_bruteforce,
    enumerate_trees,
    f0_hpl,
    f0_tree_sum,
    harmonic_field,
    harmonic_universe,
    tree_amplitude,
)
from bcov.hodge import propagator
from oracles import RawModel, compatible_split_families, count_trees_by_pruning


@pytest.mark.parametrize("n, count", [(3, 1), (4, 4), (5, 26), (6, 236)])
def test_tree_counts(n, count):
    trees = enumerate_trees(n)
    assert len(trees) == count == count_trees_by_pruning(n) == len(compatible_split_families(n))
    assert count_trees_bruteforce(n) == count
    assert len({t.splits() for t in trees}) == count


def test_trees_are_rigid_and_stable():
    for n in (3, 4, 5, 6):
        for t in enumerate_trees(n):
            assert t.automorphism_count() == 1 == t.symmetry_factor
            assert all(v >= 3 for v in t.valences().values())


def test_too_few_legs():
    with pytest.raises(TooFewLegs):
        enumerate_trees(2)


def _star(n):
    return next(t for t in enumerate_trees(n) if t.n_internal == 1)


def test_single_vertex_amplitude_is_vertex(torus1):
    e = torus1.basis_element
    for ids in itertools.product(torus1.ids, repeat=3):
        legs = [(e(i), 0) for i in ids]
        assert tree_amplitude(_star(3), legs) == vertex(legs)
    legs = [(e("e0"), 1), (e("e0"), 0), (e("e1"), 0), (e("e2"), 0)]
    assert tree_amplitude(_star(4), legs) == vertex(legs) == 1


def test_zero_propagator_kills_edges(torus1):
    e = torus1.basis_element
    binary = [t for t in enumerate_trees(4) if t.internal_edges()]
    for t in binary:
        for ids in itertools.product(torus1.ids, repeat=4):
            assert tree_amplitude(t, [(e(i), 0) for i in ids]) == 0


def test_shape_mismatch(torus1):
    with pytest.raises(ShapeMismatch):
        tree_amplitude(_star(4), [(torus1.basis_element("e0"), 0)] * 3)


def test_binary_tree_hand_contraction(twostep_del):
    # The propagator kernel of twostep-del is P^{e,e} = -1 (see the Hodge tests), so the
    # tree with split {0,1}|{2,3} evaluates to
    #   -sum_{a,b} Tr(x0 x1 e_a) P^{ab} Tr(e_b x2 x3) = Tr(x0 x1 e) Tr(e x2 x3).
    tree = next(t for t in enumerate_trees(4) if t.splits() == frozenset({frozenset({0, 1})}))
    raw = RawModel(twostep_del.to_spec())
    e_idx = raw.idx["e"]

    def tr(*xs):
        prod = raw.e(xs[0])
        for x in xs[1:]:
            prod = raw.mul(prod, raw.e(x))
        return raw.trace(prod)

    P = propagator(twostep_del)
    nonzero = 0
    for legs in itertools.product(range(raw.n), repeat=4):
        want = tr(legs[0], legs[1], e_idx) * tr(e_idx, legs[2], legs[3])
        got = tree_amplitude(tree, [(twostep_del.basis_element(a), 0) for a in legs], P=P)
        assert got == want
        nonzero += want != 0
    assert nonzero > 0


def test_torus1_potential_is_restricted_action(torus1):
    F = f0_tree_sum(torus1, 5)
    S = build_action(torus1, 5, 2)
    assert F.series.universe.coords == S.universe.coords
    assert F.series.terms == S.series.terms
    u = F.series.universe
    assert abs(F.series.coefficient((u.coord("e0"), u.coord("e1"), u.coord("e2")))) == 1


@pytest.mark.parametrize("name, order", [("twostep-del", 5), ("twostep-del(2)", 5), ("torus(1)", 5)])
def test_trees_equal_recursion(name, order):
    from conftest import zoo_model

    model = zoo_model(name)
    assert f0_tree_sum(model, order).series == f0_hpl(model, order).series


def test_depth_zero_is_single_vertex_part(twostep_del2):
    order = 5
    u = harmonic_universe(twostep_del2, order - 3)
    single = action_on_fields(harmonic_field(twostep_del2, u, order), order)
    assert f0_hpl(twostep_del2, order, depth=0).series == single
    # on this model the propagator contributes, so the edges are really tested
    assert f0_hpl(twostep_del2, order).series != single


def test_guards(heisenberg, torus1):
    with pytest.raises(KahlerAxiomError):
        f0_tree_sum(heisenberg, 3)
    with pytest.raises(ParamError):
        f0_hpl(torus1, 2)
    with pytest.raises(ParamError):
        f0_tree_sum(torus1, 2)
