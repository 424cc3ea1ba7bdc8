from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import at, star
from treedyn.errors import BudgetExceeded, ValidationError
from treedyn.harness import grid_points, random_instance
from treedyn.plmap import Iterates, PLMap, retraction_map
from treedyn.tree import Subtree, parse_region


def tent_value(x):
    return 2 * x if x <= F(1, 2) else 2 - 2 * x


def test_tent_pointwise(tent):
    tree, f = tent
    for k in range(17):
        x = F(k, 16)
        assert f(at(tree, x)) == at(tree, tent_value(x))


def test_tent_power_matches_repeated_evaluation(tent):
    tree, f = tent
    g = f.power(5)
    for k in range(65):
        x = F(k, 64)
        y = x
        for _ in range(5):
            y = tent_value(y)
        assert g(at(tree, x)) == at(tree, y)
    assert len(g.breakpoints("e0")) == 2 ** 5 + 1


def test_power_zero_and_negative(tent):
    tree, f = tent
    assert f.power(0) == PLMap.identity(tree)
    assert f.power(1) == f
    with pytest.raises(ValueError):
        f.power(-1)


def test_tent_budget_exceeded(tent):
    _, f = tent
    with pytest.raises(BudgetExceeded):
        f.power(60, budget=1000)
    with pytest.raises(BudgetExceeded):
        Iterates(f, budget=1000).power(60)


def test_fixed_sets_of_tent(tent):
    tree, f = tent
    assert f.fixed_set() == parse_region(tree, "{v:v0, e0@2/3}")
    assert f.power(2).fixed_set() == parse_region(tree, "{v:v0, e0@2/5, e0@2/3, e0@4/5}")


def test_fixed_set_with_intervals(interval):
    # identity on [0, 1/2], then constant 1/2
    f = PLMap.from_items(interval, [("e0", 0, F(1, 2), at(interval, 0), at(interval, F(1, 2))),
                                    ("e0", F(1, 2), 1, at(interval, F(1, 2)), at(interval, F(1, 2)))])
    assert f.fixed_set() == parse_region(interval, "{e0@[0,1/2]}")


def test_identity_and_constant(star3):
    ident = PLMap.identity(star3)
    assert ident.is_identity() and not ident.is_constant()
    assert ident.fixed_set() == star3.whole()
    c = PLMap.constant(star3, star3.vertex_point("c"))
    assert c.is_constant()
    assert c.image() == Subtree.point(star3, star3.vertex_point("c"))


def test_preimages_tent(tent):
    tree, f = tent
    assert f.preimages_point(at(tree, F(1, 2))) == parse_region(tree, "{e0@1/4, e0@3/4}")
    assert f.preimages_point(at(tree, 1)) == parse_region(tree, "{e0@1/2}")


def test_images(tent, clamped):
    tree, f = tent
    assert f.image() == tree.whole()
    arc = tree.geodesic(at(tree, 0), at(tree, F(1, 4)))
    assert f.image_arc(arc) == parse_region(tree, "{e0@[0,1/2]}")
    tree2, g = clamped
    assert g.image() == tree2.whole()
    assert g.image_subtree(parse_region(tree2, "{e0@[1/2,1]}")) == parse_region(tree2, "{v:v1}")


def test_star_rotation_order(rotation):
    tree, f = rotation
    assert not f.is_identity()
    assert not f.power(2).is_identity()
    assert f.power(3).is_identity()
    assert f(tree.point("a1", F(1, 3))) == tree.point("a2", F(1, 3))
    assert f.max_speed() == 1


def test_continuity_validation(interval, star3):
    with pytest.raises(ValidationError, match="continuity"):
        PLMap.from_items(interval, [("e0", 0, F(1, 2), at(interval, 0), at(interval, F(1, 4))),
                                    ("e0", F(1, 2), 1, at(interval, F(1, 3)), at(interval, 1))])
    # each arm sends the center somewhere different
    items = [(f"a{i}", 0, 1, star3.point(f"a{i}", F(1, 2)), star3.vertex_point(f"l{i}")) for i in (1, 2, 3)]
    with pytest.raises(ValidationError, match="continuity at vertex"):
        PLMap.from_items(star3, items)


def test_pieces_must_cover_edges(interval):
    with pytest.raises(ValidationError):
        PLMap.from_items(interval, [("e0", 0, F(1, 2), at(interval, 0), at(interval, 1))])


def test_retraction_map(star3):
    Y = Subtree.build(star3, [("a1", 0, 1)])
    r = retraction_map(Y)
    assert r(star3.point("a2", F(1, 2))) == star3.vertex_point("c")
    assert r(star3.point("a1", F(1, 2))) == star3.point("a1", F(1, 2))
    assert r.image() == Y


def test_compose_is_associative_on_star():
    tree = star(3)
    f = PLMap.from_items(tree, [(f"a{i}", 0, 1, tree.vertex_point("c"), tree.vertex_point(f"l{i % 3 + 1}"))
                                 for i in (1, 2, 3)])
    g = retraction_map(Subtree.build(tree, [("a1", 0, F(1, 2)), ("a2", 0, 1)]))
    h = PLMap.constant(tree, tree.point("a3", F(1, 4)))
    assert f.compose(g).compose(h) == f.compose(g.compose(h))
    assert f.compose(g) != g.compose(f)


# -- exhaustive checks on random instances -----------------------------------------


@pytest.mark.parametrize("seed", range(15))
def test_fixed_set_agrees_with_grid(seed):
    tree, f = random_instance(seed)
    fixed = f.fixed_set()
    for p in grid_points(tree, F(1, 32), f):
        assert fixed.contains(p) == (f(p) == p), str(p)


@pytest.mark.parametrize("seed", range(15))
def test_image_contains_values_and_is_subtree(seed):
    tree, f = random_instance(seed)
    img = f.image()
    assert tree.is_connected(img)
    for p in grid_points(tree, F(1, 16), f):
        assert img.contains(f(p))
    for q in img.extreme_points():
        assert not f.preimages_point(q).is_empty()


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 300), data=st.data())
def test_preimages_are_exact(seed, data):
    tree, f = random_instance(seed)
    pts = grid_points(tree, F(1, 8), f)
    y = f(data.draw(st.sampled_from(pts)))
    pre = f.preimages_point(y)
    assert not pre.is_empty()
    for p in pts:
        assert pre.contains(p) == (f(p) == y)
    for comp in pre.components():
        for p in comp.extreme_points():
            assert f(p) == y


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 300), n=st.integers(2, 3))
def test_powers_pointwise(seed, n):
    tree, f = random_instance(seed, max_pieces=3)
    g = f.power(n)
    for p in grid_points(tree, F(1, 8), f):
        q = p
        for _ in range(n):
            q = f(q)
        assert g(p) == q
