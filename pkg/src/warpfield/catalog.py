"""Registry of the explicit warped-product solitons with their expected curvature.

Where a recorded value disagrees with direct computation, the entry keeps
the computed value in ``expected_scalar`` and the recorded one in
``claimed_scalar`` (or, for potentials, records which candidate was claimed)
so that reports show the discrepancy instead of hiding it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .charts import euclidean, hyperbolic_halfspace, round_sphere
from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import UnknownId
from .expr import Const, Coord, Expr, cosh, is_constant, ln, sin, sqrt, tanh
from .grids import random_points
from .jets import eval_value
from .riemann import MetricField, PointGeometry
from .soliton import SolitonInstance, classify, residual
from .specfile import ManifoldSpec
from .warped import WarpedSpec, chain_check, fiber_constancy

INF = math.inf


@dataclass(frozen=True)
class EntryFlags:
    complete_total: bool
    complete_base: bool
    trivial: bool
    soliton_class: str

    def to_json(self) -> dict:
        return {
            "complete_total": self.complete_total,
            "complete_base": self.complete_base,
            "trivial": self.trivial,
            "soliton_class": self.soliton_class,
        }


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    spec: WarpedSpec
    potentials: tuple[Expr, ...]
    rho: float
    rho_source: str
    expected_scalar: Expr
    flags: EntryFlags
    notes: str
    # index of the candidate potential that solves the soliton equation
    verified_index: int = 0
    claimed_potential_index: int | None = None
    claimed_scalar: Expr | None = None
    C: float = 1.0

    def __post_init__(self) -> None:
        if self.flags.trivial != is_constant(self.potential):
            raise ValueError(f"{self.id}: trivial flag disagrees with the potential")
        if self.flags.soliton_class != classify(self.rho):
            raise ValueError(f"{self.id}: soliton class disagrees with rho")

    @property
    def potential(self) -> Expr:
        return self.potentials[self.verified_index]

    @property
    def metric(self) -> MetricField:
        return self.spec.metric

    def instance(self, index: int | None = None) -> SolitonInstance:
        h = self.potential if index is None else self.potentials[index]
        return SolitonInstance(self.spec, h, self.rho, self.flags.soliton_class)

    def default_grid(self, count: int = 50, seed: int = 0) -> np.ndarray:
        return random_points(self.metric.window(), count, seed, DEFAULT_TOLERANCES.boundary_margin)

    def base_grid(self, count: int = 50, seed: int = 0) -> np.ndarray:
        return random_points(self.spec.base.window(), count, seed, DEFAULT_TOLERANCES.boundary_margin)

    def expected_at(self, point) -> float:
        return eval_value(self.expected_scalar, point)

    def claimed_at(self, point) -> float | None:
        return None if self.claimed_scalar is None else eval_value(self.claimed_scalar, point)

    def manifold_spec(self) -> ManifoldSpec:
        names = tuple(f"x{i}" for i in range(self.metric.dim))
        return ManifoldSpec(self.spec.with_rho(self.rho), names, self.potentials, self.verified_index,
                            self.rho, self.flags.to_json(), self.id, self.notes)


def _r_line(lo: float, hi: float, box: tuple[float, float]) -> MetricField:
    return MetricField.diagonal([Const(1.0)], [(lo, hi)], sample_box=(box,))


def _flags(spec: WarpedSpec, h: Expr, rho: float, complete_total: bool | None = None) -> EntryFlags:
    total = spec.metric.complete if complete_total is None else complete_total
    return EntryFlags(total, spec.base.complete, is_constant(h), classify(rho))


def punctured_euclidean(n: int, rho: float = 1.0) -> CatalogEntry:
    """``(0, inf) x_r S^(n-1)``, flat, with ``h = -rho r^2 / 2``."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if rho == 0:
        raise ValueError("rho must be nonzero")
    r = Coord(0)
    spec = WarpedSpec(_r_line(0.0, INF, (0.5, 5.0)), round_sphere(n - 1), r, rho)
    h = -rho * r * r / 2
    return CatalogEntry(
        id=f"punctured-euclidean-{n}", spec=spec, potentials=(h,), rho=rho,
        rho_source="parameter (any nonzero value)", expected_scalar=Const(0.0),
        flags=_flags(spec, h, rho), notes="punctured Euclidean space, noncomplete",
        # growth bound along r needs C >= 2 (h'' = -rho against -C |A2| / 2)
        C=4.0,
    )


def hyperbolic_product() -> CatalogEntry:
    """Half-space ``x3 > 0`` with ``|dx|^2 / x3^2``, flat fiber, ``f = 1/x3``.

    The total metric is ``|dx|^2 + |dy|^2`` over ``x3^2``, i.e. hyperbolic
    6-space, so ``Ric = -5 g`` and ``R = -30``; the recorded claim is
    ``-(5/6) g``.
    """
    base = hyperbolic_halfspace(3)
    spec = WarpedSpec(base, euclidean(3), 1 / Coord(2), -30.0)
    h = Const(0.0)
    return CatalogEntry(
        id="hyperbolic-product", spec=spec, potentials=(h,), rho=-30.0,
        rho_source="derived: trivial soliton, rho equals the constant R",
        expected_scalar=Const(-30.0), claimed_scalar=Const(-5.0),
        flags=_flags(spec, h, -30.0, complete_total=True),
        notes="trivial soliton; claimed Ric = -(5/6) g (R = -5), computed Ric = -5 g (R = -30)",
    )


def sphere_sector(n: int = 3) -> CatalogEntry:
    """``(0, pi/2) x_sin S^(n-1)``: a piece of the unit sphere, trivial soliton."""
    if n < 2:
        raise ValueError("n must be at least 2")
    rho = float(n * (n - 1))
    spec = WarpedSpec(_r_line(0.0, math.pi / 2, (0.1, math.pi / 2 - 0.1)), round_sphere(n - 1),
                      sin(Coord(0)), rho)
    h = Const(0.0)
    return CatalogEntry(
        id=f"sphere-sector-{n}", spec=spec, potentials=(h,), rho=rho,
        rho_source="derived: trivial soliton, rho equals the constant R",
        expected_scalar=Const(rho), flags=_flags(spec, h, rho),
        notes="sectional curvature 1 on the interval (0, pi/2), noncomplete",
    )


def conformal_steady() -> CatalogEntry:
    """``(20/s) |dx|^2 + (20/s) |dy|^2`` with ``s = x1 + x2 + x3`` and ``h = 20 ln s``.

    Computed ``R = -3/(2s)``; the recorded claim is ``-1/s``.
    """
    x = [Coord(i) for i in range(3)]
    s = x[0] + x[1] + x[2]
    conf = 20 / s
    base = MetricField.diagonal([conf] * 3, [(0.0, INF)] * 3,
                                sample_box=((1 / 3, 4 / 3),) * 3)
    fiber = MetricField(euclidean(3).upper, euclidean(3).domain, True, sample_box=((-1.0, 1.0),) * 3)
    spec = WarpedSpec(base, fiber, sqrt(conf), 0.0)
    h = 20 * ln(s)
    return CatalogEntry(
        id="conformal-steady", spec=spec, potentials=(h,), rho=0.0,
        rho_source="stated: steady", expected_scalar=Const(-1.5) / s,
        claimed_scalar=Const(-1.0) / s, flags=_flags(spec, h, 0.0),
        notes="steady nontrivial, noncomplete base (chart restricted to the positive octant); "
              "claimed R = -1/s, computed R = -3/(2s)",
    )


def cosh_hyperbolic(m: int = 2) -> CatalogEntry:
    """Flat plane warped by ``cosh(x1 + x2)`` over hyperbolic m-space scaled by 1/2."""
    if m < 1:
        raise ValueError("m must be positive")
    rho = -2.0 * m * (m + 1)
    base = MetricField(euclidean(2).upper, euclidean(2).domain, True, sample_box=((-1.0, 1.0),) * 2)
    spec = WarpedSpec(base, hyperbolic_halfspace(m, 0.5), cosh(Coord(0) + Coord(1)), rho)
    h = Coord(0) - Coord(1)
    return CatalogEntry(
        id=f"cosh-hyperbolic-{m}", spec=spec, potentials=(h,), rho=rho,
        rho_source="derived via fit_rho (not stated)", expected_scalar=Const(rho),
        flags=_flags(spec, h, rho), notes="complete nontrivial, constant R = -2m(m+1)",
    )


def cigar() -> CatalogEntry:
    """``dr^2 + tanh^2 r dth^2`` with candidates ``2 ln cosh r`` (claimed) and ``4 ln cosh r``."""
    r = Coord(0)
    spec = WarpedSpec(_r_line(0.0, INF, (0.1, 5.0)), round_sphere(1), tanh(r), 0.0)
    candidates = (2 * ln(cosh(r)), 4 * ln(cosh(r)))
    return CatalogEntry(
        id="cigar", spec=spec, potentials=candidates, rho=0.0, rho_source="stated: steady",
        expected_scalar=4 / cosh(r) ** 2, flags=_flags(spec, candidates[1], 0.0),
        verified_index=1, claimed_potential_index=0,
        notes="punctured cigar; the claimed potential 2 ln cosh r does not solve the equation, "
              "4 ln cosh r does",
    )


def cone_product(n: int = 2, rho: float = 1.0) -> CatalogEntry:
    """Punctured Euclidean n-space (polar chart) warped by ``r`` over ``S^n`` scaled by 1/3."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if rho == 0:
        raise ValueError("rho must be nonzero")
    r = Coord(0)
    polar = WarpedSpec(_r_line(0.0, INF, (0.5, 3.0)), round_sphere(n - 1), r).metric
    spec = WarpedSpec(polar, round_sphere(n, scale=1 / 3), r, rho)
    h = -rho * r * r / 2
    return CatalogEntry(
        id=f"cone-product-{n}", spec=spec, potentials=(h,), rho=rho,
        rho_source="parameter (any nonzero value)", expected_scalar=Const(0.0),
        flags=_flags(spec, h, rho), notes="zero scalar curvature, noncomplete",
        C=4.0,
    )


_BUILDERS: dict[str, Callable[[], CatalogEntry]] = {
    "punctured-euclidean-2": lambda: punctured_euclidean(2),
    "punctured-euclidean-3": lambda: punctured_euclidean(3),
    "punctured-euclidean-4": lambda: punctured_euclidean(4),
    "hyperbolic-product": hyperbolic_product,
    "sphere-sector-3": lambda: sphere_sector(3),
    "conformal-steady": conformal_steady,
    "cosh-hyperbolic-2": lambda: cosh_hyperbolic(2),
    "cosh-hyperbolic-3": lambda: cosh_hyperbolic(3),
    "cigar": cigar,
    "cone-product-2": lambda: cone_product(2),
    "cone-product-3": lambda: cone_product(3),
}

ALIASES = {
    "exm1": "hyperbolic-product",
    "exm3": "sphere-sector-3",
    "exm4": "punctured-euclidean-3",
    "exm5": "cigar",
    "exm6": "conformal-steady",
    "exm7": "cosh-hyperbolic-2",
}

_CACHE: dict[str, CatalogEntry] = {}


def list_ids() -> list[str]:
    return list(_BUILDERS)


def get(entry_id: str) -> CatalogEntry:
    key = ALIASES.get(entry_id, entry_id)
    if key not in _BUILDERS:
        raise UnknownId(f"unknown catalog id {entry_id!r}; known: {', '.join(list_ids())}")
    if key not in _CACHE:
        _CACHE[key] = _BUILDERS[key]()
    return _CACHE[key]


@dataclass
class EntryReport:
    id: str
    scalar_ok: bool
    scalar_error: float
    scalar_point: list[float]
    residual_ok: list[bool]
    residuals: list[float]
    residual_points: list[list[float]]
    chain_ok: bool
    chain_deviation: float
    chain_point: list[float]
    fiber_const_ok: bool
    fiber_deviation: float
    claim_ok: bool | None
    claim_error: float | None
    triviality: bool
    verified_index: int
    notes: str = ""

    @property
    def passed(self) -> bool:
        return (self.scalar_ok and self.residual_ok[self.verified_index]
                and self.chain_ok and self.fiber_const_ok)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "passed": self.passed,
            "scalar_ok": self.scalar_ok,
            "scalar_error": self.scalar_error,
            "scalar_point": self.scalar_point,
            "residual_ok": self.residual_ok,
            "residuals": self.residuals,
            "residual_points": self.residual_points,
            "verified_index": self.verified_index,
            "chain_ok": self.chain_ok,
            "chain_deviation": self.chain_deviation,
            "chain_point": self.chain_point,
            "fiber_const_ok": self.fiber_const_ok,
            "fiber_deviation": self.fiber_deviation,
            "claim_ok": self.claim_ok,
            "claim_error": self.claim_error,
            "triviality": self.triviality,
            "notes": self.notes,
        }


@dataclass
class CatalogReport:
    entries: list[EntryReport] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def by_id(self, entry_id: str) -> EntryReport:
        key = ALIASES.get(entry_id, entry_id)
        for e in self.entries:
            if e.id == key:
                return e
        raise UnknownId(entry_id)

    def to_json(self) -> dict:
        return {"passed": self.passed, "entries": [e.to_json() for e in self.entries]}


@dataclass(frozen=True)
class VerifyTolerances:
    scalar: float = 1e-6
    residual: float = 1e-6
    chain: float = 1e-6
    fiber: float = 1e-6

    @classmethod
    def uniform(cls, value: float) -> VerifyTolerances:
        return cls(value, value, value, value)


def verify_entry(entry: CatalogEntry, tols: VerifyTolerances = VerifyTolerances(),
                 count: int = 50, seed: int = 0, tol: Tolerances = DEFAULT_TOLERANCES) -> EntryReport:
    """Check one entry on its default grid; every comparison is a strict ``<``."""
    grid = entry.default_grid(count, seed)
    metric = entry.metric
    scalars = np.array([PointGeometry(metric, p, tol).scalar for p in grid])
    expected = np.array([entry.expected_at(p) for p in grid])
    err = np.abs(scalars - expected) / np.maximum(1.0, np.abs(expected))
    i = int(err.argmax())

    claim_ok = claim_err = None
    if entry.claimed_scalar is not None:
        claimed = np.array([entry.claimed_at(p) for p in grid])
        cerr = np.abs(scalars - claimed) / np.maximum(1.0, np.abs(claimed))
        claim_err = float(cerr.max())
        claim_ok = claim_err < tols.scalar

    reports = [residual(entry.instance(k), grid, tol) for k in range(len(entry.potentials))]
    res_ok = [r.max_residual < tols.residual for r in reports]
    if entry.claimed_potential_index is not None:
        claim_ok = res_ok[entry.claimed_potential_index]

    fc = fiber_constancy(entry.spec, tol=tol)
    fiber_ok = fc.deviation < tols.fiber * max(1.0, abs(fc.mean))

    base_pts = entry.base_grid(count, seed + 1)
    devs = [chain_check(entry.spec, entry.potential, p, fiber_scalar=fc.mean, tol=tol).deviation
            for p in base_pts]
    j = int(np.argmax(devs))

    return EntryReport(
        id=entry.id,
        scalar_ok=bool(err[i] < tols.scalar), scalar_error=float(err[i]), scalar_point=grid[i].tolist(),
        residual_ok=res_ok, residuals=[r.max_residual for r in reports],
        residual_points=[r.worst_point.tolist() for r in reports],
        chain_ok=bool(devs[j] < tols.chain), chain_deviation=float(devs[j]), chain_point=base_pts[j].tolist(),
        fiber_const_ok=bool(fiber_ok), fiber_deviation=fc.deviation,
        claim_ok=claim_ok, claim_error=claim_err,
        triviality=reports[entry.verified_index].triviality,
        verified_index=entry.verified_index, notes=entry.notes,
    )


def verify_all(tolerances: VerifyTolerances | float | None = None, ids: list[str] | None = None,
               count: int = 50, seed: int = 0) -> CatalogReport:
    if tolerances is None:
        tols = VerifyTolerances()
    elif isinstance(tolerances, VerifyTolerances):
        tols = tolerances
    else:
        tols = VerifyTolerances.uniform(float(tolerances))
    selected = list_ids() if ids is None else ids
    return CatalogReport([verify_entry(get(i), tols, count, seed) for i in selected])
