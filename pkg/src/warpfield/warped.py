"""Warped products ``B x_f F`` with metric ``g_B + f^2 g_F``.

Coordinates of the assembled chart are the base coordinates followed by
the fiber coordinates.  The warping function and any potential defined on
the base are expressions in the first ``n`` coordinates only, so they can
be evaluated unchanged on the product chart.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import ConstancyError, DomainError, PositivityError
from .expr import Const, Expr, Mul, max_coord, shift_coords
from .grids import uniform_grid
from .jets import eval_values
from .riemann import MetricField, PointGeometry


@dataclass(frozen=True)
class WarpedSpec:
    base: MetricField
    fiber: MetricField
    warping: Expr
    rho: float | None = None
    trivial_product: bool = False

    def __post_init__(self) -> None:
        if max_coord(self.warping) >= self.base.dim:
            raise ValueError("the warping function may only depend on base coordinates")

    @property
    def n(self) -> int:
        return self.base.dim

    @property
    def m(self) -> int:
        return self.fiber.dim

    @property
    def dim(self) -> int:
        return self.n + self.m

    def with_rho(self, rho: float | None) -> WarpedSpec:
        return WarpedSpec(self.base, self.fiber, self.warping, rho, self.trivial_product)

    def base_grid(self, per_axis: int = 5, margin: float = 1e-3) -> np.ndarray:
        return uniform_grid(self.base.window(), per_axis, margin)

    def fiber_grid(self, per_axis: int = 3, margin: float = 1e-3) -> np.ndarray:
        return uniform_grid(self.fiber.window(), per_axis, margin)

    def fiber_center(self) -> np.ndarray:
        return np.array([(lo + hi) / 2.0 for lo, hi in self.fiber.window()])

    def lift(self, point_b: Iterable[float], fiber_point: Iterable[float] | None = None) -> np.ndarray:
        q = self.fiber_center() if fiber_point is None else np.asarray(fiber_point, dtype=float)
        return np.concatenate([np.asarray(point_b, dtype=float), q])

    @cached_property
    def metric(self) -> MetricField:
        """The assembled product chart (no positivity check; see :func:`assemble`)."""
        n, d = self.n, self.dim
        f2 = Mul((self.warping, self.warping))
        fiber = [shift_coords(e, n) for e in self.fiber.upper]
        upper: list[Expr] = []
        for i in range(d):
            for j in range(i, d):
                if j < n:
                    upper.append(self.base.component(i, j))
                elif i >= n:
                    k = self.fiber.dim
                    a, b = i - n, j - n
                    upper.append(Mul((f2, fiber[a * k - a * (a - 1) // 2 + (b - a)])))
                else:
                    upper.append(Const(0.0))
        names = None
        if self.base.names and self.fiber.names:
            names = self.base.names + self.fiber.names
        return MetricField(
            tuple(upper),
            self.base.domain + self.fiber.domain,
            complete=self.base.complete and self.fiber.complete,
            names=names,
            sample_box=self.base.window() + self.fiber.window(),
        )


def check_warping(spec: WarpedSpec, base_points: np.ndarray | None = None,
                  tol: Tolerances = DEFAULT_TOLERANCES) -> None:
    """Raise unless ``f > 0`` on the sample and ``f`` is nonconstant (or flagged trivial)."""
    pts = spec.base_grid() if base_points is None else np.atleast_2d(base_points)
    values = np.array([eval_values([spec.warping], p)[0] for p in pts])
    bad = np.flatnonzero(~(values > 0.0))
    if bad.size:
        p = pts[bad[0]]
        raise PositivityError(f"warping function is {values[bad[0]]!r} at base point {p.tolist()}")
    if not spec.trivial_product and values.max() - values.min() <= tol.nonconstant_warping:
        raise PositivityError(
            "warping function is constant on the sample; flag the spec as a trivial product"
        )


def assemble(spec: WarpedSpec, base_points: np.ndarray | None = None,
             tol: Tolerances = DEFAULT_TOLERANCES) -> MetricField:
    check_warping(spec, base_points, tol)
    return spec.metric


@dataclass(frozen=True)
class FiberConstancy:
    mean: float
    deviation: float
    samples: int

    def within(self, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
        return self.deviation <= tol.fiber_constancy * max(1.0, abs(self.mean))


def fiber_constancy(spec: WarpedSpec, fiber_grid: np.ndarray | None = None,
                    tol: Tolerances = DEFAULT_TOLERANCES) -> FiberConstancy:
    grid = spec.fiber_grid() if fiber_grid is None else np.atleast_2d(fiber_grid)
    values = np.array([PointGeometry(spec.fiber, q, tol).scalar for q in grid])
    mean = float(values.mean())
    return FiberConstancy(mean, float(np.abs(values - mean).max()), len(values))


def require_constant_fiber(spec: WarpedSpec, fiber_grid: np.ndarray | None = None,
                           tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Mean fiber scalar curvature, or :class:`ConstancyError` if it varies."""
    fc = fiber_constancy(spec, fiber_grid, tol)
    if not fc.within(tol):
        raise ConstancyError(
            f"fiber scalar curvature varies by {fc.deviation:.3e} around {fc.mean:.6g}"
        )
    return fc.mean


def _base_terms(spec: WarpedSpec, point_b: np.ndarray, tol: Tolerances) -> tuple[PointGeometry, float, float, float]:
    geo = PointGeometry(spec.base, point_b, tol)
    f = geo.potential(spec.warping)[0]
    if not f > 0.0:
        raise PositivityError(f"warping function is {f!r} at base point {point_b.tolist()}")
    return geo, f, geo.laplacian(spec.warping), geo.grad_norm2(spec.warping)


def lambda_field(spec: WarpedSpec, point_b: Iterable[float], fiber_scalar: float | None = None,
                 tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Almost-soliton function of the base induced by the product structure.

    ``fiber_scalar`` skips the constancy scan when the caller already has it.
    """
    if spec.rho is None:
        raise ValueError("lambda needs the soliton constant rho on the spec")
    rf = require_constant_fiber(spec, tol=tol) if fiber_scalar is None else fiber_scalar
    m = spec.m
    _, f, lap_f, grad_f2 = _base_terms(spec, np.asarray(point_b, dtype=float), tol)
    return -rf / f**2 + 2 * m * lap_f / f + m * (m - 1) * grad_f2 / f**2 + spec.rho


@dataclass(frozen=True)
class ChainResult:
    """The chain ``g_B(grad f, grad h)/f = R_B - lambda = R - rho`` at one point."""

    gradient_term: float
    base_term: float
    total_term: float

    @property
    def terms(self) -> tuple[float, float, float]:
        return (self.gradient_term, self.base_term, self.total_term)

    @property
    def deviation(self) -> float:
        t = self.terms
        return max(abs(a - b) for a in t for b in t)


def chain_check(spec: WarpedSpec, h: Expr, point_b: Iterable[float],
               fiber_point: Iterable[float] | None = None, fiber_scalar: float | None = None,
               tol: Tolerances = DEFAULT_TOLERANCES) -> ChainResult:
    if max_coord(h) >= spec.n:
        raise ValueError("the potential must be a function on the base")
    pb = np.asarray(point_b, dtype=float)
    rf = require_constant_fiber(spec, tol=tol) if fiber_scalar is None else fiber_scalar
    geo, f, _, _ = _base_terms(spec, pb, tol)
    grad_term = geo.inner(geo.gradient(spec.warping), geo.gradient(h)) / f
    lam = lambda_field(spec, pb, rf, tol)
    total = PointGeometry(spec.metric, spec.lift(pb, fiber_point), tol).scalar
    return ChainResult(grad_term, geo.scalar - lam, total - spec.rho)


def warped_scalar_identity_check(spec: WarpedSpec, h: Expr, points: Sequence[Iterable[float]],
                       rho: float | None = None, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Max over product points of ``|(R - rho) - g(grad h, grad f)/f|``."""
    rho = spec.rho if rho is None else rho
    if rho is None:
        raise ValueError("rho is required")
    worst = 0.0
    for p in points:
        geo = PointGeometry(spec.metric, p, tol)
        f = geo.potential(spec.warping)[0]
        rhs = geo.inner(geo.gradient(h), geo.gradient(spec.warping)) / f
        worst = max(worst, abs(geo.scalar - rho - rhs))
    return worst


def warped_scalar_formula(spec: WarpedSpec, point: Iterable[float],
                          tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Scalar curvature from base and fiber data alone.

    ``R_B + R_F/f^2 - 2m lap f / f - m(m-1)|grad f|^2 / f^2``; serves as an
    independent check of the assembled-chart computation.
    """
    p = np.asarray(point, dtype=float)
    if p.shape != (spec.dim,):
        raise DomainError(f"expected a point of dimension {spec.dim}")
    geo, f, lap_f, grad_f2 = _base_terms(spec, p[: spec.n], tol)
    rf = PointGeometry(spec.fiber, p[spec.n:], tol).scalar
    m = spec.m
    return geo.scalar + rf / f**2 - 2 * m * lap_f / f - m * (m - 1) * grad_f2 / f**2
