import heapq
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import at, star
from treedyn.errors import DegeneratePoint, EmptySubtree, ParseError, ValidationError
from treedyn.harness import random_instance
from treedyn.tree import (
    FiniteTree,
    RegionSet,
    Subtree,
    format_rational,
    format_region,
    parse_rational,
    parse_region,
)


def subdivided_distance(tree, p, q, grid=F(1, 8)):
    """Dijkstra on the graph subdivided at multiples of ``grid``; p and q must be grid points.

    ``grid=None`` uses the bare vertex graph.
    """
    nodes = {}
    adj = {}

    def node(pt):
        key = str(pt)
        nodes[key] = pt
        adj.setdefault(key, [])
        return key

    for e in tree.edges.values():
        k = 0
        prev = node(tree.vertex_point(e.tail))
        while grid is not None and (k + 1) * grid < e.length:
            cur = node(tree.point(e.id, (k + 1) * grid))
            adj[prev].append((cur, grid))
            adj[cur].append((prev, grid))
            prev = cur
            k += 1
        end = node(tree.vertex_point(e.head))
        step = e.length - k * (grid or 0)
        adj[prev].append((end, step))
        adj[end].append((prev, step))
    dist = {str(p): F(0)}
    heap = [(F(0), str(p))]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for w, c in adj[u]:
            if w not in dist or d + c < dist[w]:
                dist[w] = d + c
                heapq.heappush(heap, (d + c, w))
    return dist[str(q)]


# -- points and parsing ------------------------------------------------------


def test_rational_format_round_trip():
    assert format_rational(F(6, 4)) == "3/2"
    assert format_rational(F(4, 2)) == "2"
    assert parse_rational("-3/6") == F(-1, 2)
    with pytest.raises(ParseError):
        parse_rational("1/0")
    with pytest.raises(ParseError):
        parse_rational("0.5")


def test_vertex_offsets_are_canonical(interval):
    assert interval.point("e0", 0) == interval.vertex_point("v0")
    assert interval.point("e0", 1) == interval.vertex_point("v1")
    assert str(interval.point("e0", F(1, 2))) == "e0@1/2"


def test_tree_validation():
    with pytest.raises(ValidationError, match="cycle"):
        FiniteTree(["a", "b", "c"], [("x", "a", "b", 1), ("y", "b", "c", 1), ("z", "c", "a", 1)])
    with pytest.raises(ValidationError, match="disconnected"):
        FiniteTree(["a", "b", "c"], [("x", "a", "b", 1)])
    with pytest.raises(ValidationError):
        FiniteTree(["a", "b"], [("x", "a", "b", 0)])


# -- geodesic ------------------------------------------------------------------


def test_geodesic_whole_edge(interval):
    arc = interval.geodesic(at(interval, 0), at(interval, 1))
    assert list(arc.segments) == [("e0", 0, 1)]
    assert arc.length == 1


def test_geodesic_through_center(star3):
    arc = star3.geodesic(star3.vertex_point("l1"), star3.vertex_point("l2"))
    assert [s[0] for s in arc.segments] == ["a1", "a2"]
    assert arc.length == 2 == subdivided_distance(star3, arc.start, arc.end)


def test_geodesic_degenerate(interval):
    with pytest.raises(DegeneratePoint):
        interval.geodesic(at(interval, F(1, 3)), at(interval, F(1, 3)))


# -- distance --------------------------------------------------------------------


def test_distance_examples(interval, star3):
    p = at(interval, F(1, 3))
    assert interval.distance(p, p) == 0
    assert interval.distance(at(interval, 0), at(interval, 1)) == 1
    assert star3.distance(star3.vertex_point("l1"), star3.vertex_point("l3")) == 2


@pytest.mark.parametrize("seed", range(12))
def test_vertex_distances_match_dijkstra(seed):
    tree, _ = random_instance(seed)
    for u in tree.vertices:
        for v in tree.vertices:
            p, q = tree.vertex_point(u), tree.vertex_point(v)
            assert tree.distance(p, q) == subdivided_distance(tree, p, q, grid=None)


def test_distance_matches_dijkstra_on_star():
    tree = star(4)
    pts = [tree.point("a1", F(3, 8)), tree.point("a3", F(5, 8)), tree.vertex_point("l4"), tree.vertex_point("c")]
    for p in pts:
        for q in pts:
            assert tree.distance(p, q) == subdivided_distance(tree, p, q)


# -- retraction ---------------------------------------------------------------------


def test_retraction_examples(interval, star3):
    Y = Subtree.build(interval, [("e0", 0, F(1, 2))])
    assert interval.first_point_retraction(Y, at(interval, F(3, 4))) == at(interval, F(1, 2))
    x = at(interval, F(1, 4))
    assert interval.first_point_retraction(Y, x) == x
    arm1 = Subtree.build(star3, [("a1", 0, 1)])
    assert star3.first_point_retraction(arm1, star3.point("a2", F(1, 2))) == star3.vertex_point("c")


def test_retraction_empty(interval):
    with pytest.raises(EmptySubtree):
        interval.first_point_retraction(RegionSet.empty(interval), at(interval, 0))


# -- components and connectivity ---------------------------------------------------


def test_components_minus_point(interval, star3):
    assert len(interval.components_minus_point(at(interval, F(1, 2)))) == 2
    assert len(interval.components_minus_point(at(interval, 0))) == 1
    comps = star3.components_minus_point(star3.vertex_point("c"))
    assert len(comps) == 3
    for i, h in enumerate(comps, start=1):
        assert h.contains(star3.point(f"a{i}", F(1, 2)))
        assert not h.contains(star3.vertex_point("c"))
        assert sum(other.contains(star3.point(f"a{i}", F(1, 2))) for other in comps) == 1


def test_is_connected_examples(interval):
    assert not interval.is_connected(parse_region(interval, "{v:v0, e0@[1/2,1]}"))
    assert interval.is_connected(interval.whole())
    assert not interval.is_connected(parse_region(interval, "{v:v0, e0@2/3}"))
    empty = interval.is_connected(RegionSet.empty(interval))
    assert empty.connected and empty.vacuous


def test_region_merges_across_vertices(star3):
    r = RegionSet.build(star3, [("a1", F(1, 2), 1), ("a2", 0, F(1, 4))])
    assert len(r.components()) == 2  # a1 piece does not reach the center
    r2 = RegionSet.build(star3, [("a1", 0, F(1, 2)), ("a2", 0, F(1, 4))])
    assert len(r2.components()) == 1


def test_region_text_round_trip(interval, star3):
    for text in ["{}", "{v:v0}", "{v:v0, e0@2/3}", "{e0@[1/3,1/2], e0@3/4}", "{e0@[0,1]}"]:
        assert format_region(parse_region(interval, text)) == text
    r = RegionSet.build(star3, [("a1", 0, F(1, 2)), ("a3", F(1, 3), F(1, 3))], ["l2"])
    assert parse_region(star3, format_region(r)) == r
    assert RegionSet.from_json(star3, r.to_json()) == r


# -- properties on random trees ---------------------------------------------------


def _random_point(tree, data):
    eid = data.draw(st.sampled_from(sorted(tree.edges)))
    L = tree.edges[eid].length
    t = data.draw(st.fractions(min_value=0, max_value=1, max_denominator=24))
    return tree.point(eid, L * t)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 400), data=st.data())
def test_metric_properties(seed, data):
    tree, _ = random_instance(seed)
    p, q, r = (_random_point(tree, data) for _ in range(3))
    assert tree.distance(p, q) == tree.distance(q, p)
    assert (tree.distance(p, q) == 0) == (p == q)
    lhs = tree.distance(p, q) + tree.distance(q, r)
    assert lhs >= tree.distance(p, r)
    if p != r:
        assert (lhs == tree.distance(p, r)) == tree.geodesic(p, r).contains(q)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 400), data=st.data())
def test_retraction_properties(seed, data):
    tree, _ = random_instance(seed)
    a, b, x = (_random_point(tree, data) for _ in range(3))
    Y = Subtree.point(tree, a) if a == b else tree.geodesic(a, b).to_region()
    r = tree.first_point_retraction(Y, x)
    assert Y.contains(r)
    assert tree.first_point_retraction(Y, r) == r
    for y in (a, b):
        assert tree.between(x, r, y)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 400), data=st.data())
def test_order_and_serialization(seed, data):
    tree, _ = random_instance(seed)
    p = _random_point(tree, data)
    assert len(tree.components_minus_point(p)) == tree.order(p)
    if p.vertex is None:
        assert tree.order(p) == 2
    assert tree.parse_point(str(p)) == p
    assert str(tree.parse_point(str(p))) == str(p)
