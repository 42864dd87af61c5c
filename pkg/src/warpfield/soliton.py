"""Pointwise checks of the gradient soliton equation ``Hess h = (R - rho) g``."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .expr import Expr, max_coord
from .riemann import MetricField, PointGeometry
from .warped import WarpedSpec

SOLITON_CLASSES = ("steady", "shrinking", "expanding")


def classify(rho: float) -> str:
    if rho == 0.0:
        return "steady"
    return "shrinking" if rho > 0.0 else "expanding"


def _metric_of(geometry: MetricField | WarpedSpec) -> MetricField:
    return geometry.metric if isinstance(geometry, WarpedSpec) else geometry


@dataclass(frozen=True)
class SolitonInstance:
    geometry: MetricField | WarpedSpec
    potential: Expr
    rho: float
    declared_class: str | None = None

    def __post_init__(self) -> None:
        if max_coord(self.potential) >= self.metric.dim:
            raise ValueError("potential uses coordinates outside the chart")
        if self.declared_class is not None:
            if self.declared_class not in SOLITON_CLASSES:
                raise ValueError(f"unknown soliton class {self.declared_class!r}")
            if self.declared_class != classify(self.rho):
                raise ValueError(
                    f"declared {self.declared_class} soliton but rho = {self.rho} "
                    f"makes it {classify(self.rho)}"
                )

    @property
    def metric(self) -> MetricField:
        return _metric_of(self.geometry)

    @property
    def soliton_class(self) -> str:
        return classify(self.rho)


def _points(grid: Iterable[Iterable[float]]) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(grid, dtype=float))
    if pts.size == 0:
        raise ValueError("grid is empty")
    return pts


def _g_norm_sym(geo: PointGeometry, tensor: np.ndarray) -> float:
    """Chart-independent norm of a symmetric (0,2) tensor."""
    a = geo.ginv @ tensor
    return math.sqrt(max(0.0, float(np.trace(a @ a))))


def _g_norm_vec(geo: PointGeometry, vec: np.ndarray) -> float:
    return math.sqrt(max(0.0, float(vec @ geo.g @ vec)))


@dataclass
class ResidualReport:
    points: np.ndarray
    residuals: np.ndarray
    scalars: np.ndarray
    grad_norms: np.ndarray
    rho: float

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max())

    @property
    def worst_point(self) -> np.ndarray:
        return self.points[int(self.residuals.argmax())]

    @property
    def triviality(self) -> bool:
        return bool(np.all(self.grad_norms < DEFAULT_TOLERANCES.triviality))

    def passed(self, tol: float = DEFAULT_TOLERANCES.soliton_residual) -> bool:
        return self.max_residual <= tol

    def to_json(self) -> dict:
        return {
            "rho": self.rho,
            "max_residual": self.max_residual,
            "worst_point": self.worst_point.tolist(),
            "triviality": self.triviality,
            "points": len(self.points),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        d = self.points.shape[1]
        writer.writerow([f"x{i}" for i in range(d)] + ["R", "grad_h_norm", "residual"])
        for p, r, gn, res in zip(self.points, self.scalars, self.grad_norms, self.residuals):
            writer.writerow([f"{v:.12g}" for v in (*p, r, gn, res)])
        return buf.getvalue()


def residual(inst: SolitonInstance, grid, tol: Tolerances = DEFAULT_TOLERANCES) -> ResidualReport:
    pts = _points(grid)
    res, scal, gnorm = [], [], []
    for p in pts:
        geo = PointGeometry(inst.metric, p, tol)
        t = geo.hessian(inst.potential) - (geo.scalar - inst.rho) * geo.g
        res.append(_g_norm_sym(geo, t))
        scal.append(geo.scalar)
        gnorm.append(math.sqrt(max(0.0, geo.grad_norm2(inst.potential))))
    return ResidualReport(pts, np.array(res), np.array(scal), np.array(gnorm), inst.rho)


def trace_identity_check(inst: SolitonInstance, grid, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Max of ``|lap h - dim (R - rho)|`` over the grid."""
    d = inst.metric.dim
    worst = 0.0
    for p in _points(grid):
        geo = PointGeometry(inst.metric, p, tol)
        worst = max(worst, abs(geo.laplacian(inst.potential) - d * (geo.scalar - inst.rho)))
    return worst


@dataclass(frozen=True)
class RhoFit:
    rho: float
    max_residual: float


def fit_rho(geometry: MetricField | WarpedSpec, h: Expr, grid,
            tol: Tolerances = DEFAULT_TOLERANCES) -> RhoFit:
    """Least-squares rho from the traced equation ``lap h = dim (R - rho)``."""
    metric = _metric_of(geometry)
    d = metric.dim
    pts = _points(grid)
    estimates = []
    for p in pts:
        geo = PointGeometry(metric, p, tol)
        estimates.append(geo.scalar - geo.laplacian(h) / d)
    rho = float(np.mean(estimates))
    report = residual(SolitonInstance(metric, h, rho), pts, tol)
    return RhoFit(rho, report.max_residual)


def gradient_identity_check(inst: SolitonInstance, grid, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Max of ``|grad |grad h|^2 - 2 (R - rho) grad h|``.

    ``d |grad h|^2`` is differentiated directly in coordinates from the jets of
    ``g`` and ``h``, without going through the covariant Hessian.
    """
    worst = 0.0
    for p in _points(grid):
        geo = PointGeometry(inst.metric, p, tol)
        _, dh, ddh = geo.potential(inst.potential)
        dginv = -np.einsum("ka,mab,bl->mkl", geo.ginv, geo.dg, geo.ginv)
        d_norm2 = np.einsum("k,mkl,l->m", dh, dginv, dh) + 2.0 * ddh @ (geo.ginv @ dh)
        diff = geo.ginv @ d_norm2 - 2.0 * (geo.scalar - inst.rho) * geo.gradient(inst.potential)
        worst = max(worst, _g_norm_vec(geo, diff))
    return worst


def curvature_commutation_check(inst: SolitonInstance, grid,
                                pairs: Sequence[tuple[int, int]] | None = None,
                                tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Max deviation of ``R(grad h, X) Y`` from ``Y(R) X - g(X, Y) grad R``.

    ``X = d_a`` and ``Y = d_b`` run over coordinate fields.  With the sign
    convention of this package the identity reads ``R(grad h, X) Y``; under
    the opposite convention it is written ``R(X, grad h) Y``.
    """
    d = inst.metric.dim
    pairs = [(a, b) for a in range(d) for b in range(d)] if pairs is None else list(pairs)
    worst = 0.0
    for p in _points(grid):
        geo = PointGeometry(inst.metric, p, tol)
        grad_h = geo.gradient(inst.potential)
        dR = geo.scalar_differential
        grad_R = geo.ginv @ dR
        for a, b in pairs:
            lhs = np.einsum("j,lj->l", grad_h, geo.riemann[:, b, :, a])
            rhs = -geo.g[a, b] * grad_R
            rhs[a] += dR[b]
            worst = max(worst, _g_norm_vec(geo, lhs - rhs))
    return worst


def gradient_alignment_check(inst: SolitonInstance, grid, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Max of ``|grad h(R) grad h - |grad h|^2 grad R|`` (the commutation identity at X = Y = grad h)."""
    worst = 0.0
    for p in _points(grid):
        geo = PointGeometry(inst.metric, p, tol)
        grad_h = geo.gradient(inst.potential)
        dR = geo.scalar_differential
        diff = (dR @ grad_h) * grad_h - geo.grad_norm2(inst.potential) * (geo.ginv @ dR)
        worst = max(worst, _g_norm_vec(geo, diff))
    return worst


@dataclass(frozen=True)
class Proportionality:
    c: float
    deviation: float


def _hess_data(base: MetricField, f: Expr, pts: np.ndarray, tol: Tolerances):
    for p in pts:
        geo = PointGeometry(base, p, tol)
        fv = geo.potential(f)[0]
        yield fv, geo.ginv @ geo.hessian(f)


def proportionality_deviation(base: MetricField, f: Expr, grid, c: float,
                              tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    pts = _points(grid)
    d = base.dim
    worst = 0.0
    for fv, a in _hess_data(base, f, pts, tol):
        b = a - c * fv * np.eye(d)
        worst = max(worst, math.sqrt(max(0.0, float(np.trace(b @ b)))))
    return worst


def hess_f_proportionality(base: MetricField, f: Expr, grid,
                           tol: Tolerances = DEFAULT_TOLERANCES) -> Proportionality:
    """Least-squares ``c`` in ``Hess f = c f g`` and the worst pointwise misfit."""
    pts = _points(grid)
    d = base.dim
    num = den = 0.0
    for fv, a in _hess_data(base, f, pts, tol):
        num += fv * float(np.trace(a))
        den += fv * fv * d
    c = num / den
    return Proportionality(c, proportionality_deviation(base, f, pts, c, tol))
