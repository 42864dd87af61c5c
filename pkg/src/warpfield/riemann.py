"""Pointwise Levi-Civita curvature on a single coordinate chart.

Index conventions (all arrays are plain numpy arrays):

* ``dg[k, i, j] = d_k g_ij`` and ``ddg[k, l, i, j] = d_k d_l g_ij``
* ``gamma[k, i, j] = Gamma^k_ij``
* ``riemann[l, i, j, k]`` is the ``l`` component of ``R(d_j, d_k) d_i`` with
  ``R(X, Y) = [nabla_X, nabla_Y] - nabla_[X,Y]``; the round sphere has
  positive sectional curvature in this convention.
* ``ricci[i, k] = riemann[l, i, l, k]`` summed over ``l``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable, Sequence

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import DomainError, SPDError
from .expr import Const, Expr, as_expr, max_coord
from .jets import eval_grad_hess_many, eval_values

Interval = tuple[float, float]

# window used for grids on unbounded axes
_UNBOUNDED_SPAN = 2.0


@dataclass(frozen=True)
class MetricField:
    """Symmetric matrix of expressions on an open coordinate box.

    Only the upper triangle is kept; ``component(i, j)`` mirrors it.
    """

    upper: tuple[Expr, ...]
    domain: tuple[Interval, ...]
    complete: bool = False
    names: tuple[str, ...] | None = None
    sample_box: tuple[Interval, ...] | None = None

    def __post_init__(self) -> None:
        d = len(self.domain)
        if d == 0:
            raise ValueError("metric needs at least one coordinate")
        if len(self.upper) != d * (d + 1) // 2:
            raise ValueError(f"expected {d * (d + 1) // 2} upper-triangle entries, got {len(self.upper)}")
        for lo, hi in self.domain:
            if not lo < hi:
                raise ValueError(f"empty domain interval ({lo}, {hi})")
        if self.names is not None and len(self.names) != d:
            raise ValueError("one coordinate name per axis required")
        if self.sample_box is not None and len(self.sample_box) != d:
            raise ValueError("sample box dimension mismatch")
        worst = max(max_coord(e) for e in self.upper)
        if worst >= d:
            raise ValueError(f"component uses coordinate x{worst} on a {d}-dimensional chart")

    @classmethod
    def from_matrix(cls, rows: Sequence[Sequence[Expr | float]], domain: Sequence[Interval],
                    **kwargs: Any) -> MetricField:
        d = len(rows)
        if any(len(r) != d for r in rows):
            raise ValueError("metric matrix must be square")
        upper = tuple(as_expr(rows[i][j]) for i in range(d) for j in range(i, d))
        return cls(upper, tuple(tuple(map(float, iv)) for iv in domain), **kwargs)

    @classmethod
    def diagonal(cls, entries: Sequence[Expr | float], domain: Sequence[Interval],
                 **kwargs: Any) -> MetricField:
        d = len(entries)
        rows = [[entries[i] if i == j else Const(0.0) for j in range(d)] for i in range(d)]
        return cls.from_matrix(rows, domain, **kwargs)

    @property
    def dim(self) -> int:
        return len(self.domain)

    def component(self, i: int, j: int) -> Expr:
        if i > j:
            i, j = j, i
        d = self.dim
        return self.upper[i * d - i * (i - 1) // 2 + (j - i)]

    def matrix(self) -> list[list[Expr]]:
        return [[self.component(i, j) for j in range(self.dim)] for i in range(self.dim)]

    def window(self) -> tuple[Interval, ...]:
        """Finite box used for default grids (the domain with unbounded sides clipped)."""
        if self.sample_box is not None:
            return self.sample_box
        out = []
        for lo, hi in self.domain:
            if math.isinf(lo) and math.isinf(hi):
                out.append((-_UNBOUNDED_SPAN / 2, _UNBOUNDED_SPAN / 2))
            elif math.isinf(hi):
                out.append((lo, lo + _UNBOUNDED_SPAN))
            elif math.isinf(lo):
                out.append((hi - _UNBOUNDED_SPAN, hi))
            else:
                out.append((lo, hi))
        return tuple(out)

    def check_point(self, point: np.ndarray, margin: float = 0.0) -> None:
        if point.shape != (self.dim,):
            raise DomainError(f"point {point.tolist()} does not have dimension {self.dim}")
        for i, (x, (lo, hi)) in enumerate(zip(point, self.domain)):
            if not (lo + margin < x < hi - margin):
                raise DomainError(
                    f"coordinate {i} = {x!r} outside ({lo}, {hi}) with margin {margin}"
                )

    def value(self, point: Iterable[float], tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
        p = np.asarray(point, dtype=float)
        self.check_point(p)
        vals = eval_values(self.upper, p)
        g = _symmetric_from_upper(np.array(vals), self.dim)
        check_spd(g, tol)
        return g

    def jets(self, point: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``g``, ``dg`` and ``ddg`` at ``point`` (see module docstring)."""
        d = self.dim
        js = eval_grad_hess_many(self.upper, point)
        g = np.empty((d, d))
        dg = np.empty((d, d, d))
        ddg = np.empty((d, d, d, d))
        idx = 0
        for i in range(d):
            for j in range(i, d):
                jet = js[idx]
                idx += 1
                g[i, j] = g[j, i] = jet.value
                dg[:, i, j] = dg[:, j, i] = jet.grad
                ddg[:, :, i, j] = ddg[:, :, j, i] = jet.hess
        return g, dg, ddg


def _symmetric_from_upper(vals: np.ndarray, d: int) -> np.ndarray:
    g = np.empty((d, d))
    idx = 0
    for i in range(d):
        for j in range(i, d):
            g[i, j] = g[j, i] = vals[idx]
            idx += 1
    return g


def check_spd(g: np.ndarray, tol: Tolerances = DEFAULT_TOLERANCES) -> None:
    """Cholesky factorisation with a relative pivot floor."""
    if not np.all(np.isfinite(g)):
        raise SPDError(f"non-finite metric entries: {g.tolist()}")
    try:
        chol = np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise SPDError(f"metric is not positive definite: {g.tolist()}") from exc
    pivots = np.diag(chol) ** 2
    if pivots.min() <= tol.spd_pivot_ratio * pivots.max():
        raise SPDError(f"metric is numerically degenerate (pivots {pivots.tolist()})")


class PointGeometry:
    """All curvature quantities of one metric at one point, computed lazily."""

    def __init__(self, metric: MetricField, point: Iterable[float],
                 tol: Tolerances = DEFAULT_TOLERANCES):
        self.metric = metric
        self.point = np.asarray(point, dtype=float)
        self.tol = tol
        metric.check_point(self.point)
        self.g, self.dg, self.ddg = metric.jets(self.point)
        check_spd(self.g, tol)
        # keyed by id(); the expression is stored too so a recycled id cannot alias
        self._potentials: dict[int, tuple[Expr, tuple[float, np.ndarray, np.ndarray]]] = {}

    @cached_property
    def ginv(self) -> np.ndarray:
        inv = np.linalg.inv(self.g)
        return 0.5 * (inv + inv.T)

    @cached_property
    def _gamma_lower(self) -> np.ndarray:
        dg = self.dg
        # Gamma_{l,ij} = (d_i g_jl + d_j g_il - d_l g_ij) / 2
        return 0.5 * (np.einsum("ijl->lij", dg) + np.einsum("jil->lij", dg) - dg)

    @cached_property
    def gamma(self) -> np.ndarray:
        return np.einsum("kl,lij->kij", self.ginv, self._gamma_lower)

    @cached_property
    def dgamma(self) -> np.ndarray:
        """``dgamma[m, k, i, j] = d_m Gamma^k_ij``."""
        ddg = self.ddg
        dlow = 0.5 * (np.einsum("mijl->mlij", ddg) + np.einsum("mjil->mlij", ddg) - ddg)
        dginv = -np.einsum("ka,mab,bl->mkl", self.ginv, self.dg, self.ginv)
        return (np.einsum("mkl,lij->mkij", dginv, self._gamma_lower)
                + np.einsum("kl,mlij->mkij", self.ginv, dlow))

    @cached_property
    def riemann(self) -> np.ndarray:
        dG, G = self.dgamma, self.gamma
        return (np.einsum("jlki->lijk", dG) - np.einsum("klji->lijk", dG)
                + np.einsum("ljm,mki->lijk", G, G) - np.einsum("lkm,mji->lijk", G, G))

    @cached_property
    def ricci(self) -> np.ndarray:
        ric = np.einsum("lilk->ik", self.riemann)
        return 0.5 * (ric + ric.T)

    @cached_property
    def scalar(self) -> float:
        return float(np.einsum("ik,ik->", self.ginv, self.ricci))

    def riemann_lower(self) -> np.ndarray:
        """``Rm[i, j, k, l] = g(R(d_i, d_j) d_k, d_l)``."""
        return np.einsum("ml,mkij->ijkl", self.g, self.riemann)

    def sectional(self, a: int, b: int) -> float:
        num = float(np.einsum("l,l->", self.g[:, a], self.riemann[:, b, a, b]))
        den = self.g[a, a] * self.g[b, b] - self.g[a, b] ** 2
        return num / den

    def scalar_gradient(self) -> np.ndarray:
        """Raised gradient of the scalar curvature by central differences."""
        h = self.tol.fd_step
        self.metric.check_point(self.point, margin=h)
        d = self.metric.dim
        dR = np.empty(d)
        for k in range(d):
            step = np.zeros(d)
            step[k] = h
            plus = PointGeometry(self.metric, self.point + step, self.tol).scalar
            minus = PointGeometry(self.metric, self.point - step, self.tol).scalar
            dR[k] = (plus - minus) / (2.0 * h)
        return self.ginv @ dR

    @cached_property
    def scalar_differential(self) -> np.ndarray:
        return self.g @ self.scalar_gradient()

    def potential(self, h: Expr) -> tuple[float, np.ndarray, np.ndarray]:
        hit = self._potentials.get(id(h))
        if hit is None or hit[0] is not h:
            jet = eval_grad_hess_many([h], self.point)[0]
            hit = (h, (jet.value, jet.grad, jet.hess))
            self._potentials[id(h)] = hit
        return hit[1]

    def hessian(self, h: Expr) -> np.ndarray:
        _, dh, ddh = self.potential(h)
        hess = ddh - np.einsum("kij,k->ij", self.gamma, dh)
        return 0.5 * (hess + hess.T)

    def gradient(self, h: Expr) -> np.ndarray:
        return self.ginv @ self.potential(h)[1]

    def grad_norm2(self, h: Expr) -> float:
        dh = self.potential(h)[1]
        return float(dh @ self.ginv @ dh)

    def laplacian(self, h: Expr) -> float:
        return float(np.einsum("ij,ij->", self.ginv, self.hessian(h)))

    def inner(self, u: np.ndarray, v: np.ndarray) -> float:
        return float(u @ self.g @ v)

    def sample(self, with_scalar_gradient: bool = False) -> CurvatureSample:
        return CurvatureSample(
            point=self.point.copy(),
            christoffel=self.gamma,
            riemann=self.riemann,
            ricci=self.ricci,
            scalar=self.scalar,
            scalar_gradient=self.scalar_gradient() if with_scalar_gradient else None,
        )


@dataclass
class CurvatureSample:
    point: np.ndarray
    christoffel: np.ndarray
    riemann: np.ndarray
    ricci: np.ndarray
    scalar: float
    scalar_gradient: np.ndarray | None = field(default=None)

    def to_json(self) -> dict[str, Any]:
        out = {
            "point": self.point.tolist(),
            "christoffel": self.christoffel.tolist(),
            "riemann": self.riemann.tolist(),
            "ricci": self.ricci.tolist(),
            "scalar": self.scalar,
        }
        if self.scalar_gradient is not None:
            out["scalar_gradient"] = self.scalar_gradient.tolist()
        return out


def christoffel(metric: MetricField, point: Iterable[float],
                tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    return PointGeometry(metric, point, tol).gamma


def curvature_sample(metric: MetricField, point: Iterable[float], with_scalar_gradient: bool = False,
                     tol: Tolerances = DEFAULT_TOLERANCES) -> CurvatureSample:
    return PointGeometry(metric, point, tol).sample(with_scalar_gradient)


def scalar_curvature(metric: MetricField, point: Iterable[float],
                     tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    return PointGeometry(metric, point, tol).scalar


def covariant_hessian(metric: MetricField, h: Expr, point: Iterable[float],
                      tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    return PointGeometry(metric, point, tol).hessian(h)


def gradient_and_laplacian(metric: MetricField, h: Expr, point: Iterable[float],
                           tol: Tolerances = DEFAULT_TOLERANCES) -> tuple[np.ndarray, float, float]:
    """Raised gradient, its squared length and the Laplacian of ``h``."""
    geo = PointGeometry(metric, point, tol)
    return geo.gradient(h), geo.grad_norm2(h), geo.laplacian(h)
