"""Named instance families with their expected equicontinuity verdicts."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

from .errors import BadParams, ParseError, UnknownEntry
from .plmap import PLMap
from .tree import ZERO, FiniteTree, parse_rational


def _interval() -> FiniteTree:
    return FiniteTree(["v0", "v1"], [("e0", "v0", "v1", 1)])


def interval_scaling(alpha: Fraction) -> tuple[FiniteTree, PLMap]:
    if not 0 <= alpha <= 1:
        raise BadParams("interval_scaling needs 0 <= alpha <= 1")
    t = _interval()
    return t, PLMap.from_items(t, [("e0", 0, 1, t.vertex_point("v0"), t.point("e0", alpha))])


def interval_clamped_scaling(alpha: Fraction) -> tuple[FiniteTree, PLMap]:
    """x -> min(alpha x, 1) for alpha > 1."""
    if not alpha > 1:
        raise BadParams("interval_clamped_scaling needs alpha > 1")
    t = _interval()
    one = t.vertex_point("v1")
    return t, PLMap.from_items(t, [
        ("e0", 0, 1 / alpha, t.vertex_point("v0"), one),
        ("e0", 1 / alpha, 1, one, one),
    ])


def tent() -> tuple[FiniteTree, PLMap]:
    t = _interval()
    zero, one = t.vertex_point("v0"), t.vertex_point("v1")
    half = Fraction(1, 2)
    return t, PLMap.from_items(t, [("e0", 0, half, zero, one), ("e0", half, 1, one, zero)])


def _star(k: int) -> FiniteTree:
    if k < 2:
        raise BadParams("a star needs k >= 2 arms")
    return FiniteTree(["c"] + [f"l{i}" for i in range(1, k + 1)],
                      [(f"a{i}", "c", f"l{i}", 1) for i in range(1, k + 1)])


def star_rotation(k: int) -> tuple[FiniteTree, PLMap]:
    """Isometric cyclic permutation of the k unit arms."""
    t = _star(k)
    c = t.vertex_point("c")
    items = [(f"a{i}", 0, 1, c, t.vertex_point(f"l{i % k + 1}")) for i in range(1, k + 1)]
    return t, PLMap.from_items(t, items)


def star_shift_truncated(k: int) -> tuple[FiniteTree, PLMap]:
    """Arm i onto arm i+1 for i < k; the last arm collapses to the center."""
    t = _star(k)
    c = t.vertex_point("c")
    items = [(f"a{i}", 0, 1, c, t.vertex_point(f"l{i + 1}")) for i in range(1, k)]
    items.append((f"a{k}", 0, 1, c, c))
    return t, PLMap.from_items(t, items)


def _random(seed: int, max_vertices: int, max_pieces: int) -> tuple[FiniteTree, PLMap]:
    from .harness import random_instance

    return random_instance(seed, max_vertices, max_pieces)


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    params: dict[str, tuple[Callable[[str], Any], Any]]  # name -> (parser, default)
    builder: Callable[..., tuple[FiniteTree, PLMap]]
    expected: Callable[[dict], bool | None]  # expected equicontinuity, None if unknown
    provenance: str = ""
    examples: tuple[dict, ...] = field(default=())


CATALOG: dict[str, CatalogEntry] = {
    e.name: e
    for e in [
        CatalogEntry("interval_scaling", {"alpha": (parse_rational, Fraction(1, 2))}, interval_scaling,
                     lambda p: True, "closed form: 0 <= alpha <= 1 is equicontinuous",
                     ({"alpha": Fraction(1, 3)}, {"alpha": Fraction(1, 2)}, {"alpha": Fraction(1)}, {"alpha": ZERO})),
        CatalogEntry("interval_clamped_scaling", {"alpha": (parse_rational, Fraction(2))}, interval_clamped_scaling,
                     lambda p: False, "closed form: alpha > 1 expands [0, 1/alpha]",
                     ({"alpha": Fraction(2)}, {"alpha": Fraction(3)}, {"alpha": Fraction(3, 2)})),
        CatalogEntry("tent", {}, tent, lambda p: False, "slope 2 everywhere", ({},)),
        CatalogEntry("star_rotation", {"k": (int, 3)}, star_rotation, lambda p: True,
                     "isometry with f^k = identity", ({"k": 2}, {"k": 3}, {"k": 5})),
        CatalogEntry("star_shift_truncated", {"k": (int, 3)}, star_shift_truncated, lambda p: True,
                     "f^k is constant", ({"k": 2}, {"k": 3}, {"k": 4})),
        CatalogEntry("random", {"seed": (int, 0), "max_vertices": (int, 8), "max_pieces": (int, 6)}, _random,
                     lambda p: None, "no annotation"),
    ]
}


def resolve_params(name: str, params: dict[str, Any] | None = None) -> dict[str, Any]:
    if name not in CATALOG:
        raise UnknownEntry(f"unknown catalog entry {name!r}; known: {', '.join(sorted(CATALOG))}")
    entry = CATALOG[name]
    params = dict(params or {})
    unknown = set(params) - set(entry.params)
    if unknown:
        raise BadParams(f"unknown parameter(s) for {name}: {', '.join(sorted(unknown))}")
    out = {}
    for key, (parse, default) in entry.params.items():
        raw = params.get(key, default)
        try:
            out[key] = parse(raw) if isinstance(raw, str) else raw
        except (ValueError, TypeError, ArithmeticError, ParseError) as exc:
            raise BadParams(f"bad value for {key}: {raw!r}") from exc
    return out


def build_catalog(name: str, params: dict[str, Any] | None = None) -> tuple[FiniteTree, PLMap]:
    resolved = resolve_params(name, params)
    return CATALOG[name].builder(**resolved)


def expected_equicontinuity(name: str, params: dict[str, Any] | None = None) -> bool | None:
    return CATALOG[name].expected(resolve_params(name, params))
