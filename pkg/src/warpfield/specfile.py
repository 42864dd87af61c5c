"""Manifold-spec JSON documents: a metric or warped product, plus optional soliton data.

Layout::

    {"schema": 1, "dim": 2, "coordinates": ["r", "t"],
     "warped": {"base": <chart>, "fiber": <chart>, "warping": <expr>},
     "domain": [[0, null], [0, 6.283185307]],
     "potential": <expr> or [<expr>, ...], "rho": 0.0, "flags": {...}}

A chart is ``{"metric": [[<expr>, ...], ...], "domain": [[lo, hi], ...]}``
with optional ``coordinates``, ``sample_box`` and ``complete``.  A
non-warped document puts ``metric`` (and optionally ``sample_box``,
``complete``) at the top level instead of ``warped``.  ``null`` marks an
unbounded side of an interval.  Unknown keys are rejected everywhere.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .errors import SpecFormatError
from .expr import Expr, from_json, to_json
from .riemann import MetricField
from .warped import WarpedSpec

_TOP_KEYS = {"schema", "id", "notes", "dim", "coordinates", "metric", "warped", "domain",
             "sample_box", "complete", "potential", "potential_index", "rho", "flags"}
_CHART_KEYS = {"coordinates", "metric", "domain", "sample_box", "complete"}
_WARPED_KEYS = {"base", "fiber", "warping", "trivial_product"}
_FLAG_KEYS = {"complete_total", "complete_base", "trivial", "soliton_class"}


@dataclass(frozen=True)
class ManifoldSpec:
    geometry: MetricField | WarpedSpec
    coordinates: tuple[str, ...]
    potentials: tuple[Expr, ...] = ()
    potential_index: int = 0
    rho: float | None = None
    flags: Mapping[str, Any] = field(default_factory=dict)
    id: str | None = None
    notes: str | None = None

    @property
    def metric(self) -> MetricField:
        return self.geometry.metric if isinstance(self.geometry, WarpedSpec) else self.geometry

    @property
    def dim(self) -> int:
        return self.metric.dim

    @property
    def potential(self) -> Expr | None:
        return self.potentials[self.potential_index] if self.potentials else None


def _check_keys(doc: Any, allowed: set[str], where: str) -> None:
    if not isinstance(doc, dict):
        raise SpecFormatError(f"{where}: expected an object")
    extra = set(doc) - allowed
    if extra:
        raise SpecFormatError(f"{where}: unknown keys {sorted(extra)}")


def _bound(v: Any, default: float, where: str) -> float:
    if v is None:
        return default
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SpecFormatError(f"{where}: interval ends must be numbers or null")
    return float(v)


def _intervals(doc: Any, where: str) -> list[tuple[float, float]]:
    if not isinstance(doc, list) or not all(isinstance(iv, list) and len(iv) == 2 for iv in doc):
        raise SpecFormatError(f"{where}: expected a list of [lo, hi] pairs")
    return [(_bound(lo, -math.inf, where), _bound(hi, math.inf, where)) for lo, hi in doc]


def _encode_intervals(box) -> list[list[float | None]]:
    return [[None if math.isinf(lo) else lo, None if math.isinf(hi) else hi] for lo, hi in box]


def _expr(doc: Any, where: str) -> Expr:
    try:
        return from_json(doc)
    except (ValueError, TypeError, KeyError) as exc:
        raise SpecFormatError(f"{where}: {exc}") from exc


def _chart(doc: Mapping[str, Any], where: str, keys: set[str] = _CHART_KEYS) -> MetricField:
    _check_keys(doc, keys, where)
    for k in ("metric", "domain"):
        if k not in doc:
            raise SpecFormatError(f"{where}: missing '{k}'")
    rows = doc["metric"]
    domain = _intervals(doc["domain"], f"{where}.domain")
    d = len(domain)
    if not isinstance(rows, list) or len(rows) != d or any(not isinstance(r, list) or len(r) != d for r in rows):
        raise SpecFormatError(f"{where}.metric: expected a {d}x{d} matrix")
    for i in range(d):
        for j in range(i + 1, d):
            if rows[i][j] != rows[j][i]:
                raise SpecFormatError(f"{where}.metric: entries ({i},{j}) and ({j},{i}) differ")
    exprs = [[_expr(rows[i][j], f"{where}.metric[{i}][{j}]") for j in range(d)] for i in range(d)]
    box = doc.get("sample_box")
    names = doc.get("coordinates")
    if names is not None and (not isinstance(names, list) or len(names) != d):
        raise SpecFormatError(f"{where}.coordinates: expected {d} names")
    complete = doc.get("complete", False)
    if not isinstance(complete, bool):
        raise SpecFormatError(f"{where}.complete: expected true or false")
    try:
        return MetricField.from_matrix(
            exprs, domain, complete=complete,
            names=tuple(map(str, names)) if names is not None else None,
            sample_box=tuple(_intervals(box, f"{where}.sample_box")) if box is not None else None,
        )
    except ValueError as exc:
        raise SpecFormatError(f"{where}: {exc}") from exc


def parse(doc: Any) -> ManifoldSpec:
    _check_keys(doc, _TOP_KEYS, "spec")
    if doc.get("schema", 1) != 1:
        raise SpecFormatError(f"unsupported schema {doc['schema']!r}")
    if ("metric" in doc) == ("warped" in doc):
        raise SpecFormatError("exactly one of 'metric' and 'warped' is required")
    if "warped" in doc:
        w = doc["warped"]
        _check_keys(w, _WARPED_KEYS, "warped")
        for k in ("base", "fiber", "warping"):
            if k not in w:
                raise SpecFormatError(f"warped: missing '{k}'")
        for k in ("sample_box", "complete"):
            if k in doc:
                raise SpecFormatError(f"'{k}' belongs to the base or fiber chart of a warped spec")
        base = _chart(w["base"], "warped.base")
        fiber = _chart(w["fiber"], "warped.fiber")
        try:
            geometry: MetricField | WarpedSpec = WarpedSpec(
                base, fiber, _expr(w["warping"], "warped.warping"), None,
                bool(w.get("trivial_product", False)))
        except ValueError as exc:
            raise SpecFormatError(f"warped: {exc}") from exc
        metric = geometry.metric
        if "domain" in doc and _intervals(doc["domain"], "domain") != list(metric.domain):
            raise SpecFormatError("domain must equal the base domain followed by the fiber domain")
    else:
        geometry = metric = _chart({k: doc[k] for k in _CHART_KEYS if k in doc}, "spec")
    d = metric.dim
    if doc.get("dim", d) != d:
        raise SpecFormatError(f"dim is {doc['dim']} but the metric has dimension {d}")
    names = doc.get("coordinates")
    if names is None:
        names = list(metric.names) if metric.names else [f"x{i}" for i in range(d)]
    if not isinstance(names, list) or len(names) != d:
        raise SpecFormatError(f"coordinates: expected {d} names")

    raw = doc.get("potential")
    if raw is None:
        pots: tuple[Expr, ...] = ()
    elif isinstance(raw, list):
        pots = tuple(_expr(p, f"potential[{i}]") for i, p in enumerate(raw))
    else:
        pots = (_expr(raw, "potential"),)
    index = doc.get("potential_index", 0)
    if pots and not (isinstance(index, int) and 0 <= index < len(pots)):
        raise SpecFormatError("potential_index out of range")
    rho = doc.get("rho")
    if rho is not None and (isinstance(rho, bool) or not isinstance(rho, (int, float))):
        raise SpecFormatError("rho must be a number")
    flags = doc.get("flags", {})
    _check_keys(flags, _FLAG_KEYS, "flags")
    if isinstance(geometry, WarpedSpec) and rho is not None:
        geometry = geometry.with_rho(float(rho))
    return ManifoldSpec(geometry, tuple(map(str, names)), pots, index,
                        None if rho is None else float(rho), dict(flags), doc.get("id"), doc.get("notes"))


def loads(text: str) -> ManifoldSpec:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecFormatError(f"invalid JSON: {exc}") from exc
    return parse(doc)


def load(path: str | Path) -> ManifoldSpec:
    return loads(Path(path).read_text())


def _chart_json(metric: MetricField) -> dict[str, Any]:
    doc: dict[str, Any] = {}
    if metric.names:
        doc["coordinates"] = list(metric.names)
    doc["metric"] = [[to_json(e) for e in row] for row in metric.matrix()]
    doc["domain"] = _encode_intervals(metric.domain)
    if metric.sample_box is not None:
        doc["sample_box"] = _encode_intervals(metric.sample_box)
    doc["complete"] = metric.complete
    return doc


def to_document(spec: ManifoldSpec) -> dict[str, Any]:
    doc: dict[str, Any] = {"schema": 1}
    if spec.id is not None:
        doc["id"] = spec.id
    if spec.notes is not None:
        doc["notes"] = spec.notes
    doc["dim"] = spec.dim
    doc["coordinates"] = list(spec.coordinates)
    g = spec.geometry
    if isinstance(g, WarpedSpec):
        doc["warped"] = {"base": _chart_json(g.base), "fiber": _chart_json(g.fiber),
                         "warping": to_json(g.warping), "trivial_product": g.trivial_product}
        doc["domain"] = _encode_intervals(g.metric.domain)
    else:
        doc.update(_chart_json(g))
    if spec.potentials:
        doc["potential"] = ([to_json(p) for p in spec.potentials] if len(spec.potentials) > 1
                            else to_json(spec.potentials[0]))
        if spec.potential_index:
            doc["potential_index"] = spec.potential_index
    if spec.rho is not None:
        doc["rho"] = spec.rho
    if spec.flags:
        doc["flags"] = dict(spec.flags)
    return doc


def dumps(spec: ManifoldSpec) -> str:
    return json.dumps(to_document(spec), indent=2) + "\n"
