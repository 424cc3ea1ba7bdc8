"""Serialization of analysis reports and independent re-checking of their certificates.

The JSON form is a plain key-value tree written with sorted keys, so equal
analyses give byte-identical documents.  Run times are deliberately left
out for the same reason.  The analyzed instance is embedded in its
canonical text form, which makes a report self-contained for
:func:`verify_report`.
"""
from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

from .certificates import (
    EVENTUALLY_PERIODIC,
    Avoidance,
    DivergentSequenceCert,
    verify_divergent,
)
from .criteria import (
    ITEMS,
    NO,
    YES,
    AnalysisReport,
    ExpandingArcCert,
    IdentityCert,
    verify_core,
    verify_expanding_arc,
    verify_identity_cert,
)
from .dynamics import EventualImageResult
from .errors import ParseError, TreeDynError
from .fileformat import parse, serialize
from .plmap import DEFAULT_BUDGET, PLMap
from .tree import FiniteTree, RegionSet, Subtree, format_rational, parse_rational

FORMAT = "treedyn-report 1"
SET_CLAIMS = ("fix_disconnected", "per_disconnected", "per_outside_core", "per_equals_core", "fix_equals_core")

ITEM_TITLES = {
    "a": "f is equicontinuous",
    "b": "some f^n is the identity on the eventual image",
    "c": "some fix(f^n) equals the eventual image",
    "d": "per(f) equals the eventual image",
    "e": "there is no expanding arc",
    "f": "every fix(f^n) is connected",
    "g": "per(f) is connected",
    "h": "every remainder function is continuous",
    "i": "some remainder function is continuous",
}


def _json_value(obj: Any) -> Any:
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if hasattr(obj, "to_json"):
        return obj.to_json()
    if isinstance(obj, dict):
        return {k: _json_value(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_value(v) for v in obj]
    return str(obj)


def report_to_json(tree: FiniteTree, f: PLMap, report: AnalysisReport, params: dict[str, Any] | None = None) -> dict:
    """The machine-readable report; mirrors the AnalysisReport fields."""
    decided = report.decided
    return {
        "format": FORMAT,
        "instance": serialize(tree, f),
        "parameters": _json_value(dict(params or {}, depth=report.depth, budget=report.budget)),
        "items": {k: v.to_json() for k, v in report.items.items()},
        "expanding_arc": report.expanding_arc.to_json(),
        "certificates": {k: _json_value(v) for k, v in report.certificates.items()},
        "core": report.core.to_json() if report.core is not None else None,
        "core_error": report.core_error,
        "depth_reached": report.depth_reached,
        "budget_exceeded": report.budget_exceeded,
        "decided": decided,
        "equicontinuous": report.equicontinuous,
        "evidence": {k: _json_value(v) for k, v in report.evidence.items()},
    }


def dumps(data: dict) -> str:
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def report_text(report: AnalysisReport) -> str:
    """Human-readable summary, one line per item followed by certificate summaries."""
    a = report.items["a"]
    if a.status == YES:
        head = "verdict: equicontinuous"
    elif a.status == NO:
        head = "verdict: NOT equicontinuous"
    else:
        head = f"verdict: UNDECIDED at depth {report.depth_reached} (no certificate found; this is not a negative answer)"
    lines = [head, ""]
    for k in ITEMS:
        lines.append(f"  ({k}) {ITEM_TITLES[k]:<48} {report.items[k]}")
    lines.append(f"  expanding arc exists{'':<31} {report.expanding_arc}")
    lines.append("")
    core = report.core
    if core is not None:
        lines.append(f"eventual image: {core.candidate} [{core.status}, depth {core.depth}]")
    if report.core_error:
        lines.append(f"eventual image: {report.core_error}")
    certs = report.certificates
    if "expanding_arc" in certs:
        c = certs["expanding_arc"]
        lines.append(f"expanding arc: {c.start} .. {c.end} with n={c.n}, image {c.image}")
    if "identity" in certs:
        c = certs["identity"]
        lines.append(f"identity certificate: f^{c.n} is the identity on {c.core.candidate}")
    if "divergent" in certs:
        d = certs["divergent"]
        pts = ", ".join(str(p) for p in d.points)
        state = "fully certified" if d.fully_certified else "partial (finite orbit prefix)"
        lines.append(f"divergent sequence (m={d.m}): {pts} -> {d.limit}, radius {format_rational(d.radius)}, {state}")
    for key in ("fix_disconnected", "per_disconnected", "per_outside_core"):
        if key in certs:
            lines.append(f"{key.replace('_', ' ')}: {certs[key].region} at n={certs[key].n}")
    probe = report.evidence.get("probe")
    if "probe" in report.evidence:
        if probe is None:
            lines.append("probe (heuristic): no separating pair found")
        else:
            lines.append(f"probe (heuristic): {probe.x}, {probe.y} separate by "
                         f"{format_rational(probe.separation)} after {probe.n} steps")
    if "divergent_error" in report.evidence:
        lines.append(f"divergent sequence not built: {report.evidence['divergent_error']}")
    lines.append(f"depth {report.depth} (reached {report.depth_reached}), budget {report.budget}"
                 + (", budget exceeded" if report.budget_exceeded else ""))
    return "\n".join(lines) + "\n"


# -- reading certificates back ---------------------------------------------------


def _core_from_json(tree: FiniteTree, data: dict) -> EventualImageResult:
    cand = Subtree.of(RegionSet.from_json(tree, data["candidate"]))
    if data["status"] == "CertifiedLimit":
        return EventualImageResult(cand, data["status"], data["depth"], data["power"],
                                   parse_rational(data["radius"]), parse_rational(data["contraction"]))
    return EventualImageResult(cand, data["status"], data["depth"])


def expanding_arc_from_json(tree: FiniteTree, data: dict) -> ExpandingArcCert:
    start, end = (tree.parse_point(s) for s in data["arc"])
    image = Subtree.of(RegionSet.from_json(tree, data["image"]))
    witness = None
    if "witness" in data:
        witness = (tree.parse_point(data["witness"]["x"]), tree.parse_point(data["witness"]["y"]))
    return ExpandingArcCert(start, end, data["n"], image, witness)


def identity_from_json(tree: FiniteTree, data: dict) -> IdentityCert:
    return IdentityCert(data["n"], _core_from_json(tree, data["core"]))


def divergent_from_json(tree: FiniteTree, data: dict) -> DivergentSequenceCert:
    av = data["avoidance"]
    avoid = Avoidance(av["kind"], av["steps"], av.get("preperiod"), av.get("period"))
    return DivergentSequenceCert(
        data["m"], tuple(tree.parse_point(p) for p in data["points"]), tree.parse_point(data["limit"]),
        parse_rational(data["radius"]), avoid, data["case"], data.get("shifted", False))


def _check_set(f: PLMap, name: str, data: dict, core: EventualImageResult | None, budget: int) -> bool:
    """Recompute a fixed or periodic set claim and the relation it asserts."""
    tree = f.tree
    n = data["n"]
    claimed = RegionSet.from_json(tree, data["set"])
    if name.startswith("fix_"):
        actual = f.power(n, budget).fixed_set()
    else:
        actual = RegionSet.empty(tree)
        for k in range(1, n + 1):
            actual = actual.union(f.power(k, budget).fixed_set())
    if actual != claimed:
        return False
    if name.endswith("_disconnected"):
        return not tree.is_connected(claimed)
    if core is None or not verify_core(f, core, budget):
        return False
    if name == "per_outside_core":
        return not claimed.issubset(core.candidate)
    return claimed == core.candidate


def verify_report(data: dict, budget: int = DEFAULT_BUDGET) -> list[tuple[str, bool | str]]:
    """Re-check every certificate of a serialized report from its embedded instance.

    Returns ``(name, result)`` pairs where result is True, False or
    ``"partial"`` (a divergent sequence whose orbit avoidance covers only a
    finite prefix).  Item statuses are also checked against each other.
    """
    if not isinstance(data, dict) or data.get("format") != FORMAT:
        raise ParseError(f"not a {FORMAT!r} document")
    if not isinstance(data.get("instance"), str):
        raise ParseError("report does not embed an instance")
    tree, f = parse(data["instance"])
    out: list[tuple[str, bool | str]] = []
    certs = data.get("certificates", {})
    for name in sorted(certs):
        payload = certs[name]
        try:
            if name == "expanding_arc":
                ok: bool | str = verify_expanding_arc(f, expanding_arc_from_json(tree, payload))
            elif name == "identity":
                ok = verify_identity_cert(f, identity_from_json(tree, payload), budget)
            elif name == "divergent":
                cert = divergent_from_json(tree, payload)
                ok = verify_divergent(f, cert, budget)
                if payload.get("fully_certified") and ok is not True:
                    ok = False
            elif name in SET_CLAIMS:
                core = _core_from_json(tree, data["core"]) if data.get("core") else None
                ok = _check_set(f, name, payload, core, budget)
            else:
                ok = False
        except (TreeDynError, KeyError, TypeError, ValueError):
            ok = False
        out.append((name, ok))
    statuses = {k: v["status"] for k, v in data.get("items", {}).items()}
    decided = {s for s in statuses.values() if s in (YES, NO)}
    out.append(("items consistent", len(decided) <= 1))
    if statuses.get("a") == NO and "expanding_arc" not in certs:
        out.append(("negative verdict has an expanding arc", False))
    if statuses.get("a") == YES and "identity" not in certs:
        out.append(("positive verdict has an identity certificate", False))
    div = certs.get("divergent")
    if statuses.get("h") == NO and statuses.get("a") == NO and div is not None:
        avoid = div.get("avoidance", {}).get("kind")
        if data["items"]["h"].get("provenance") == "Direct" and avoid != EVENTUALLY_PERIODIC:
            out.append(("direct remainder verdict is fully certified", False))
    return out


def loads(text: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
