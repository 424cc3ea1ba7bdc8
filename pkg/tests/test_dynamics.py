from fractions import Fraction as F

import pytest

from conftest import at
from treedyn.catalog import build_catalog
from treedyn.dynamics import (
    CERTIFIED_LIMIT,
    ENCLOSURE,
    EXACT,
    eventual_image,
    modulus_probe,
    omega_limit_estimate,
    orbit,
    periodic_set,
)
from treedyn.plmap import PLMap
from treedyn.tree import parse_region


def test_orbit_fixed_after_one_step(tent):
    tree, f = tent
    rec = orbit(f, at(tree, F(1, 3)), 10)
    assert rec.points == (at(tree, F(1, 3)), at(tree, F(2, 3)))
    assert (rec.preperiod, rec.period) == (1, 1)


def test_orbit_period_two(tent):
    tree, f = tent
    rec = orbit(f, at(tree, F(1, 5)), 10)
    assert (rec.preperiod, rec.period) == (1, 2)
    assert set(rec.cycle()) == {at(tree, F(2, 5)), at(tree, F(4, 5))}
    # odd iterates sit at 2/5, even ones at 4/5
    assert rec.at(100) == at(tree, F(4, 5))
    assert rec.at(101) == at(tree, F(2, 5))


def test_orbit_without_repetition(half):
    tree, f = half
    rec = orbit(f, at(tree, 1), 5)
    assert not rec.eventually_periodic
    assert rec.points[-1] == at(tree, F(1, 32))
    with pytest.raises(IndexError):
        rec.at(6)


def test_orbit_rotation_period(rotation):
    tree, f = rotation
    rec = orbit(f, tree.point("a1", F(1, 3)), 10)
    assert (rec.preperiod, rec.period) == (0, 3)


def test_eventual_image_exact():
    tree, f = build_catalog("star_shift_truncated", {"k": 3})
    res = eventual_image(f, 12)
    assert res.status == EXACT and res.depth == 3
    assert res.candidate == parse_region(tree, "{v:c}")


def test_eventual_image_surjective(tent):
    tree, f = tent
    res = eventual_image(f, 12)
    assert res.status == EXACT and res.depth == 0 and res.candidate == tree.whole()


def test_eventual_image_certified_limit(half):
    tree, f = half
    res = eventual_image(f, 12)
    assert res.status == CERTIFIED_LIMIT
    assert res.candidate == parse_region(tree, "{v:v0}")
    assert res.contraction == F(1, 2)


def test_eventual_image_enclosure_when_nothing_certifies(interval):
    # x -> x/2 + 1/4 on [0, 1]: fixed point 1/2 but with max_power 0 no candidate is tried
    f = PLMap.from_items(interval, [("e0", 0, 1, at(interval, F(1, 4)), at(interval, F(3, 4)))])
    res = eventual_image(f, 4, max_power=0)
    assert res.status == ENCLOSURE
    assert res.candidate == parse_region(interval, "{e0@[15/32,17/32]}")
    assert eventual_image(f, 4).candidate == parse_region(interval, "{e0@1/2}")


def test_periodic_set(tent):
    tree, f = tent
    assert periodic_set(f, 2) == parse_region(tree, "{v:v0, e0@2/5, e0@2/3, e0@4/5}")


def test_omega_limit(tent, half):
    tree, f = tent
    est = omega_limit_estimate(f, at(tree, F(1, 5)), 10, 3)
    assert est.exact and set(est.points) == {at(tree, F(2, 5)), at(tree, F(4, 5))}
    tree, g = half
    est = omega_limit_estimate(g, at(tree, 1), 40, 5)
    assert not est.exact and est.points == (tree.vertex_point("v0"),)
    with pytest.raises(ValueError):
        omega_limit_estimate(g, at(tree, 1), 5, 5)


def test_probe_finds_confirmed_pair_on_tent(tent):
    tree, f = tent
    w = modulus_probe(f, F(1, 8), F(1, 64), 200)
    assert w is not None
    x, y = w.x, w.y
    assert tree.distance(x, y) <= F(1, 64)
    for _ in range(w.n):
        x, y = f(x), f(y)
    assert tree.distance(x, y) == w.separation > F(1, 8)


@pytest.mark.parametrize("name,params", [("star_rotation", {"k": 3}), ("interval_scaling", {"alpha": F(1, 2)}),
                                         ("star_shift_truncated", {"k": 3})])
def test_probe_silent_on_equicontinuous(name, params):
    _, f = build_catalog(name, params)
    assert modulus_probe(f, F(1, 8), F(1, 64), 200) is None


def test_probe_rejects_bad_parameters(tent):
    with pytest.raises(ValueError):
        modulus_probe(tent[1], 0, F(1, 8), 10)
