"""Sampled lower/upper scalar-curvature bounds for warped product solitons.

The bounds involve a positive constant ``C`` that the theory only asserts
to exist.  Here ``C`` is an input, and :func:`bound_report` also returns the
smallest ``C`` for which the sampled inequality holds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import DimensionError, NoValidPoints
from .expr import Expr
from .jets import eval_jet2
from .riemann import MetricField, PointGeometry
from .warped import WarpedSpec


@dataclass(frozen=True)
class BoundsConfig:
    C: float
    grid: np.ndarray
    direction_floor: float = DEFAULT_TOLERANCES.direction_floor

    def __post_init__(self) -> None:
        if not self.C > 0:
            raise ValueError("C must be positive")
        if len(np.atleast_2d(self.grid)) == 0:
            raise ValueError("grid must be nonempty")


@dataclass
class DirectionalSample:
    """Per-point unit-direction quantities along ``u = grad h / |grad h|``."""

    points: np.ndarray
    ric_uu: np.ndarray
    hess_uu: np.ndarray
    skipped: int

    def to_csv_rows(self) -> list[list[float]]:
        return [[*p, a, b] for p, a, b in zip(self.points, self.ric_uu, self.hess_uu)]


def directional_sample(base: MetricField, h: Expr, grid, floor: float,
                       tol: Tolerances = DEFAULT_TOLERANCES) -> DirectionalSample:
    pts, ric, hess = [], [], []
    skipped = 0
    for p in np.atleast_2d(grid):
        geo = PointGeometry(base, p, tol)
        grad = geo.gradient(h)
        norm = math.sqrt(max(0.0, geo.grad_norm2(h)))
        if norm <= floor:
            skipped += 1
            continue
        u = grad / norm
        pts.append(p)
        ric.append(float(u @ geo.ricci @ u))
        hess.append(float(u @ geo.hessian(h) @ u))
    if not pts:
        raise NoValidPoints(f"|grad h| <= {floor} at all {skipped} grid points")
    return DirectionalSample(np.array(pts), np.array(ric), np.array(hess), skipped)


@dataclass(frozen=True)
class AResult:
    A: float
    argmin: np.ndarray
    skipped: int


def ricci_hessian_infimum(spec: WarpedSpec, h: Expr, config: BoundsConfig,
               tol: Tolerances = DEFAULT_TOLERANCES) -> AResult:
    """Grid infimum of ``(n+m-1)/(n-1) Ric_B(u,u) - Hess h(u,u) / (2(n+m-1))``."""
    n, m = spec.n, spec.m
    if n < 2:
        raise DimensionError("the Ricci coefficient (n+m-1)/(n-1) needs a base of dimension >= 2")
    s = directional_sample(spec.base, h, config.grid, config.direction_floor, tol)
    k = n + m - 1
    values = k / (n - 1) * s.ric_uu - s.hess_uu / (2 * k)
    i = int(values.argmin())
    return AResult(float(values[i]), s.points[i], s.skipped)


def lower_bound_from_A(A: float, C: float, n: int, m: int, rho: float) -> float:
    if not C > 0:
        raise ValueError("C must be positive")
    bound = -(n + m - 1) * C * abs(A)
    return bound + rho if rho < 0 else bound


@dataclass(frozen=True)
class ScalarInf:
    value: float
    argmin: np.ndarray


def empirical_scalar_inf(metric: MetricField, grid, tol: Tolerances = DEFAULT_TOLERANCES) -> ScalarInf:
    pts = np.atleast_2d(grid)
    values = np.array([PointGeometry(metric, p, tol).scalar for p in pts])
    i = int(values.argmin())
    return ScalarInf(float(values[i]), pts[i])


def _critical_C(A: float, inf_R: float, n: int, m: int, rho: float) -> float:
    """Smallest C > 0 (0 if every C works) making the bound hold; -inf if C plays no role."""
    offset = rho if rho < 0 else 0.0
    if A == 0.0:
        return -math.inf if inf_R >= offset - 1e-9 else math.inf
    need = (offset - inf_R) / ((n + m - 1) * abs(A))
    return max(0.0, need)


@dataclass
class BoundReport:
    C: float
    rho: float
    n: int
    m: int
    A: float | None
    bound: float | None
    inf_R: float
    inf_R_point: np.ndarray
    satisfied: bool | None
    margin: float | None
    critical_C: float | None
    skipped: int
    complete_base: bool
    notes: list[str] = field(default_factory=list)

    @property
    def degenerate(self) -> bool:
        return self.A is None

    def to_json(self) -> dict[str, Any]:
        crit = self.critical_C
        if crit is not None and math.isinf(crit):
            crit = "-inf" if crit < 0 else "inf"
        return {
            "A": self.A,
            "C": self.C,
            "rho": self.rho,
            "n": self.n,
            "m": self.m,
            "bound": self.bound,
            "inf_R": self.inf_R,
            "inf_R_point": self.inf_R_point.tolist(),
            "satisfied": self.satisfied,
            "margin": self.margin,
            "critical_C": crit,
            "skipped_points": self.skipped,
            "hypotheses": {"complete_base": self.complete_base},
            "degenerate": self.degenerate,
            "notes": list(self.notes),
        }


def bound_report(spec: WarpedSpec, h: Expr, rho: float, config: BoundsConfig,
                 complete_base: bool | None = None, fiber_point=None,
                 tol: Tolerances = DEFAULT_TOLERANCES) -> BoundReport:
    """Compare the sampled infimum of R with the lower bound for the given ``C``."""
    complete = spec.base.complete if complete_base is None else complete_base
    base_pts = np.atleast_2d(config.grid)
    total_pts = np.array([spec.lift(p, fiber_point) for p in base_pts])
    inf = empirical_scalar_inf(spec.metric, total_pts, tol)
    notes = []
    if not complete:
        notes.append("hypothesis violated: complete base = false")
    try:
        a = ricci_hessian_infimum(spec, h, config, tol)
    except (NoValidPoints, DimensionError) as exc:
        notes.append(f"degenerate: {exc}")
        return BoundReport(config.C, rho, spec.n, spec.m, None, None, inf.value, inf.argmin,
                           None, None, None, len(base_pts) if isinstance(exc, NoValidPoints) else 0,
                           complete, notes)
    bound = lower_bound_from_A(a.A, config.C, spec.n, spec.m, rho)
    return BoundReport(
        C=config.C, rho=rho, n=spec.n, m=spec.m, A=a.A, bound=bound,
        inf_R=inf.value, inf_R_point=inf.argmin,
        satisfied=inf.value >= bound - 1e-9, margin=inf.value - bound,
        critical_C=_critical_C(a.A, inf.value, spec.n, spec.m, rho),
        skipped=a.skipped, complete_base=complete, notes=notes,
    )


@dataclass(frozen=True)
class DirectionalExtrema:
    A1: float
    A2: float
    skipped: int


def ricci_hessian_extrema(spec: WarpedSpec, h: Expr, config: BoundsConfig,
                          tol: Tolerances = DEFAULT_TOLERANCES) -> DirectionalExtrema:
    """Grid ``inf Ric_B(u,u)`` and ``sup Hess h(u,u)`` with ``u = grad h / |grad h|``."""
    s = directional_sample(spec.base, h, config.grid, config.direction_floor, tol)
    return DirectionalExtrema(float(s.ric_uu.min()), float(s.hess_uu.max()), s.skipped)


def two_sided_bounds(A1: float, A2: float, C: float, n: int, m: int, rho: float) -> tuple[float, float]:
    """``(lower, upper)`` bounds on R.

    The ``|A1| / (n-1)`` term is dropped when ``A1 == 0`` (always the case for
    a one-dimensional base); otherwise ``n = 1`` is rejected.
    """
    if not C > 0:
        raise ValueError("C must be positive")
    if n < 1:
        raise DimensionError("base dimension must be positive")
    k = n + m - 1
    if A1 == 0.0:
        ric_term = 0.0
    elif n == 1:
        raise DimensionError("the |A1| term divides by n - 1 = 0")
    else:
        ric_term = k * k / (n - 1) * abs(A1)
    lower = -C * (ric_term + abs(A2) / 2.0)
    if rho < 0:
        lower += rho
    return lower, A2 + rho


@dataclass(frozen=True)
class GrowthCheck:
    satisfied: bool
    variant: str
    coefficient: float
    C1: float
    C2: float
    min_slack: float
    min_second: float
    critical_C: float
    constants: dict[str, float]
    note: str = ""


def _growth_scale(spec: WarpedSpec, h: Expr, config: BoundsConfig, variant: str,
                  tol: Tolerances) -> tuple[float, dict[str, float], str]:
    """``S`` in the growth coefficient ``-C S (+ rho if rho < 0)`` for either variant."""
    k = spec.n + spec.m - 1
    if variant == "combined":
        if spec.n == 1:
            return 0.0, {"A": 0.0}, "one-dimensional base, A = 0 sentinel"
        try:
            A = ricci_hessian_infimum(spec, h, config, tol).A
        except NoValidPoints:
            return 0.0, {"A": 0.0}, "no valid direction, A = 0 sentinel"
        return k * abs(A), {"A": A}, ""
    if variant == "split":
        try:
            c = ricci_hessian_extrema(spec, h, config, tol)
        except NoValidPoints:
            return 0.0, {"A1": 0.0, "A2": 0.0}, "no valid direction, A1 = A2 = 0 sentinel"
        if c.A1 == 0.0:
            ric = 0.0
        elif spec.n == 1:
            raise DimensionError("the |A1| term divides by n - 1 = 0")
        else:
            ric = k * k / (spec.n - 1) * abs(c.A1)
        return ric + abs(c.A2) / 2.0, {"A1": c.A1, "A2": c.A2}, ""
    raise ValueError(f"unknown variant {variant!r}")


def potential_growth_check(spec: WarpedSpec, h: Expr, rho: float, config: BoundsConfig,
                           ray_origin: Sequence[float], axis: int, ray: Sequence[float],
                           variant: str = "auto", complete_base: bool | None = None,
                           tol: Tolerances = DEFAULT_TOLERANCES) -> GrowthCheck:
    """Quadratic lower bound for ``h`` along a coordinate ray.

    The ray is ``ray_origin + t e_axis`` for ``t`` in ``ray``; ``t`` plays the
    role of the radial distance.  The bound ``h >= coef t^2/2 + C1 t + C2``
    follows from ``h'' >= coef`` along the ray, where ``coef = -C S`` (plus
    ``rho`` when ``rho < 0``) and ``S`` is ``(n+m-1)|A|`` for a complete base
    or ``(n+m-1)^2/(n-1) |A1| + |A2|/2`` otherwise (``variant="auto"``).
    ``C1, C2`` are the constants of the tangent bound at the first ray sample.
    """
    complete = spec.base.complete if complete_base is None else complete_base
    if variant == "auto":
        variant = "combined" if complete and spec.n >= 2 else "split"
    S, constants, note = _growth_scale(spec, h, config, variant, tol)
    shift = rho if rho < 0 else 0.0
    coef = -config.C * S + shift
    origin = np.asarray(ray_origin, dtype=float)
    e = np.zeros(origin.size)
    e[axis] = 1.0
    ts = np.asarray(ray, dtype=float)
    jets = [eval_jet2(h, origin + t * e, e, e) for t in ts]
    second = np.array([j.duv for j in jets])
    t0, j0 = ts[0], jets[0]
    C1 = j0.du - coef * t0
    C2 = j0.value - j0.du * t0 + coef * t0 * t0 / 2.0
    slack = np.array([j.value - (coef * t * t / 2.0 + C1 * t + C2) for t, j in zip(ts, jets)])
    ok = bool(np.all(second >= coef - 1e-9) and np.all(slack >= -1e-9))
    lowest = float(second.min())
    if S > 0:
        crit = max(0.0, (shift - lowest) / S)
    else:
        crit = -math.inf if lowest >= shift - 1e-9 else math.inf
    return GrowthCheck(ok, variant, coef, float(C1), float(C2), float(slack.min()), lowest,
                       crit, constants, note)
