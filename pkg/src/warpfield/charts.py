"""Ready-made coordinate charts for the model spaces used by the catalog."""

from __future__ import annotations

import math

from .expr import Const, Expr, coords, sin
from .riemann import MetricField

INF = math.inf


def euclidean(dim: int, domain=None, **kwargs) -> MetricField:
    dom = domain or [(-INF, INF)] * dim
    return MetricField.diagonal([Const(1.0)] * dim, dom, complete=domain is None, **kwargs)


def round_sphere(dim: int, radius: float = 1.0, scale: float | None = None,
                 start: int = 0) -> MetricField:
    """Polar chart ``dth0^2 + sin^2 th0 dth1^2 + ...`` of the sphere of ``radius``.

    ``scale`` multiplies the whole metric (it overrides ``radius``); the last
    angle runs over (0, 2 pi), the others over (0, pi).
    """
    a2 = scale if scale is not None else radius * radius
    th = coords(dim, start)
    entries: list[Expr] = []
    prod: Expr | None = None
    for i in range(dim):
        entries.append(Const(a2) if prod is None else a2 * prod)
        s2 = sin(th[i]) ** 2
        prod = s2 if prod is None else prod * s2
    domain = [(0.0, math.pi)] * (dim - 1) + [(0.0, 2.0 * math.pi)]
    box = [(0.3, math.pi - 0.3)] * (dim - 1) + [(0.3, 2.0 * math.pi - 0.3)]
    return MetricField.diagonal(entries, domain, complete=False, sample_box=tuple(box))


def sphere_scalar(dim: int, radius: float = 1.0) -> float:
    return dim * (dim - 1) / radius**2


def hyperbolic_halfspace(dim: int, scale: float = 1.0) -> MetricField:
    """Upper half-space chart ``scale * |dy|^2 / y_last^2``; curvature ``-1/scale``."""
    y = coords(dim)
    conf = scale / y[-1] ** 2
    domain = [(-INF, INF)] * (dim - 1) + [(0.0, INF)]
    box = [(-1.0, 1.0)] * (dim - 1) + [(0.5, 2.0)]
    return MetricField.diagonal([conf] * dim, domain, complete=True, sample_box=tuple(box))


def space_form(dim: int, scalar: float) -> MetricField:
    """Constant-curvature chart of dimension ``dim`` with scalar curvature ``scalar``."""
    if dim == 1 or scalar == 0.0:
        if scalar != 0.0:
            raise ValueError("a one-dimensional metric has zero scalar curvature")
        flat = euclidean(dim)
        return MetricField(flat.upper, flat.domain, True, sample_box=tuple([(-1.0, 1.0)] * dim))
    k = scalar / (dim * (dim - 1))
    if k > 0:
        return round_sphere(dim, radius=1.0 / math.sqrt(k))
    return hyperbolic_halfspace(dim, scale=-1.0 / k)
