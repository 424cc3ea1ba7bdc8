from fractions import Fraction as F

import pytest

from treedyn.catalog import build_catalog
from treedyn.fileformat import serialize
from treedyn.harness import (
    CrossCheckSummary,
    brute_force_expanding,
    check_instance,
    cross_check,
    grid_points,
    random_instance,
    summary_text,
)


def test_random_instances_are_reproducible():
    assert serialize(*random_instance(42)) == serialize(*random_instance(42))
    texts = {serialize(*random_instance(s)) for s in range(30)}
    assert len(texts) == 30


def test_random_instance_bounds():
    for seed in range(40):
        tree, f = random_instance(seed, max_vertices=2, max_pieces=2)
        assert len(tree.vertices) == 2 and len(tree.edges) == 1
        assert all(len(ps) <= 2 for ps in f.pieces.values())
        tree, f = random_instance(seed)
        assert 2 <= len(tree.vertices) <= 8
        assert all(F(1, 4) <= e.length <= 1 for e in tree.edges.values())
    with pytest.raises(ValueError):
        random_instance(0, max_vertices=0)


def test_grid_points_include_breakpoints(tent):
    tree, f = tent
    pts = grid_points(tree, F(1, 3), f)
    assert [str(p) for p in pts] == ["e0@1/2", "e0@1/3", "e0@2/3", "v:v0", "v:v1"]


def test_brute_force_finds_a_valid_arc_on_tent(tent):
    tree, f = tent
    bf = brute_force_expanding(f, F(1, 8), 4)
    assert bf.found and bf.n == 1
    A = tree.geodesic(bf.start, bf.end).to_region()
    img = f.image_subtree(A)
    assert A.issubset(img) and img != A


@pytest.mark.parametrize("name,params", [("star_rotation", {"k": 3}), ("interval_scaling", {"alpha": F(1, 2)}),
                                         ("star_shift_truncated", {"k": 3})])
def test_brute_force_finds_nothing_on_equicontinuous(name, params):
    _, f = build_catalog(name, params)
    bf = brute_force_expanding(f, F(1, 8), 4)
    assert not bf.found


def test_empty_corpus():
    s = cross_check([])
    assert s.instances == 0 and s.breaches == 0
    assert "n/a" in summary_text(s)


def test_cross_check_is_deterministic_and_parallel_safe():
    a = cross_check(range(6), probe=False)
    b = cross_check(range(6), probe=False, jobs=2)
    assert a.to_json() == b.to_json()
    assert a.instances == 6 and a.inconsistencies == 0


def test_expected_mismatch_is_a_breach(tent):
    _, f = tent
    s = CrossCheckSummary()
    check_instance("tent", f, s, brute=False, probe=False, expected=True)
    assert s.expected_mismatches == 1 and s.breaches == 1
    assert "expected equicontinuous=True" in s.failures[0]


def test_catalog_corpus_has_no_breaches():
    s = cross_check([], catalog=True)
    assert s.instances == 14
    assert s.breaches == 0, s.failures
    assert s.expected_checked == s.instances
