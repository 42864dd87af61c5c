"""Rotationally symmetric solitons rebuilt from their one-dimensional profile.

Away from critical points of ``h`` a nontrivial soliton whose level sets
have constant scalar curvature takes the form ``dr^2 + phi(r)^2 g_N`` with
``phi = h'``.  Substituting the scalar curvature of that metric,

    R = R_N / phi^2 - 2(n-1) phi'' / phi - (n-1)(n-2) (phi' / phi)^2,

into ``phi' = R - rho`` gives a closed second-order ODE for ``phi``, which
is integrated here with fixed-step classical RK4 (locally extrapolated
against two half steps).  ``h`` is the exact integral of the quintic
interpolant of ``phi``, so ``h' = phi`` holds at every node.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import ConstancyError
from .expr import Coord, Spline
from .grids import product_points, uniform_grid
from .riemann import MetricField
from .soliton import ResidualReport, SolitonInstance, residual
from .warped import WarpedSpec, fiber_constancy

DEFAULT_STEP = 1e-3
_OVERFLOW = 1e150


class InvalidInput(ValueError):
    pass


@dataclass(frozen=True)
class Termination:
    """Why integration stopped before the requested end point."""

    reason: str  # "critical_point" or "overflow"
    r: float


@dataclass
class ProfileSolution:
    r_grid: np.ndarray
    phi: np.ndarray
    phi_prime: np.ndarray
    phi_second: np.ndarray
    h: np.ndarray
    n: int
    R_N: float
    rho: float
    r0: float
    phi0: float
    phi_prime0: float
    step: float
    terminations: list[Termination] = field(default_factory=list)

    @property
    def window(self) -> tuple[float, float]:
        return float(self.r_grid[0]), float(self.r_grid[-1])

    def critical_points(self) -> list[float]:
        return sorted(t.r for t in self.terminations if t.reason == "critical_point")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r", "phi", "phi_prime", "h"])
        for row in zip(self.r_grid, self.phi, self.phi_prime, self.h):
            w.writerow([f"{v:.12g}" for v in row])
        return buf.getvalue()


def _second_derivative(phi: float, dphi: float, n: int, R_N: float, rho: float) -> float:
    k = n - 1
    return (R_N / phi - k * (k - 1) * dphi * dphi / phi - phi * (dphi + rho)) / (2.0 * k)


def _rhs(y: tuple[float, float, float], n: int, R_N: float, rho: float) -> tuple[float, float, float]:
    _, phi, dphi = y
    return phi, dphi, _second_derivative(phi, dphi, n, R_N, rho)


def _rk4_step(y, dt, n, R_N, rho):
    k1 = _rhs(y, n, R_N, rho)
    k2 = _rhs(tuple(a + 0.5 * dt * b for a, b in zip(y, k1)), n, R_N, rho)
    k3 = _rhs(tuple(a + 0.5 * dt * b for a, b in zip(y, k2)), n, R_N, rho)
    k4 = _rhs(tuple(a + dt * b for a, b in zip(y, k3)), n, R_N, rho)
    return tuple(a + dt / 6.0 * (b1 + 2 * b2 + 2 * b3 + b4)
                 for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4))


def _extrapolated_step(y, dt, n, R_N, rho):
    """One RK4 step combined with two half steps (local Richardson extrapolation).

    The extra order keeps the nodal errors of ``phi`` and ``phi'`` consistent
    with each other to ``O(dt^5)``, which the Hermite interpolant needs: any
    mismatch is amplified by ``1/dt^2`` in its second derivative.
    """
    full = _rk4_step(y, dt, n, R_N, rho)
    half = _rk4_step(_rk4_step(y, 0.5 * dt, n, R_N, rho), 0.5 * dt, n, R_N, rho)
    return tuple(b + (b - a) / 15.0 for a, b in zip(full, half))


def _try_step(y, dt, n, R_N, rho, tol: Tolerances):
    """Integration step, or ``None`` when it reaches or crosses ``phi = 0``."""
    try:
        out = _extrapolated_step(y, dt, n, R_N, rho)
    except (ZeroDivisionError, OverflowError):
        return None
    if not all(math.isfinite(v) for v in out) or out[1] <= tol.critical_phi:
        return None
    return out


def _overflowed(y) -> bool:
    return not all(math.isfinite(v) and abs(v) < _OVERFLOW for v in y)


def _integrate(n, R_N, rho, r0, y0, r_end, step, tol: Tolerances):
    """March from ``r0`` toward ``r_end`` (either direction); returns nodes and termination."""
    direction = 1.0 if r_end >= r0 else -1.0
    span = abs(r_end - r0)
    nsteps = int(round(span / step))
    if nsteps == 0 and span > 0:
        nsteps = 1
    rs = [r0]
    ys = [y0]
    y = y0
    for i in range(1, nsteps + 1):
        r_next = r0 + direction * span * i / nsteps
        dt = r_next - rs[-1]
        out = _try_step(y, dt, n, R_N, rho, tol)
        if out is None:
            lo, hi = 0.0, abs(dt)
            while hi - lo > tol.critical_bisection:
                mid = 0.5 * (lo + hi)
                if _try_step(y, direction * mid, n, R_N, rho, tol) is None:
                    hi = mid
                else:
                    lo = mid
            return rs, ys, Termination("critical_point", rs[-1] + direction * hi)
        if _overflowed(out):
            return rs, ys, Termination("overflow", r_next)
        y = out
        rs.append(r_next)
        ys.append(y)
    return rs, ys, None


def reconstruct_profile(n: int, R_N: float, rho: float, r0: float, phi0: float, phi_prime0: float,
                        r_max: float, step: float = DEFAULT_STEP, r_min: float | None = None,
                        tol: Tolerances = DEFAULT_TOLERANCES) -> ProfileSolution:
    """Integrate the profile ODE from ``r0`` to ``r_max`` (and back to ``r_min`` if given).

    ``h`` is normalised by ``h(r0) = 0``.  Integration stops early, recording a
    :class:`Termination`, when ``phi`` reaches zero or the state overflows.
    """
    if n < 2:
        raise InvalidInput("profile ODE needs n >= 2")
    if not phi0 > 0:
        raise InvalidInput("phi0 must be positive")
    if not step > 0:
        raise InvalidInput("step must be positive")
    if n == 2 and R_N != 0.0:
        raise InvalidInput("a one-dimensional slice has zero scalar curvature")
    y0 = (0.0, float(phi0), float(phi_prime0))
    rs, ys, term = _integrate(n, R_N, rho, r0, y0, r_max, step, tol)
    terms = [term] if term else []
    if r_min is not None and r_min < r0:
        rb, yb, term_b = _integrate(n, R_N, rho, r0, y0, r_min, step, tol)
        rs = rb[:0:-1] + rs
        ys = yb[:0:-1] + ys
        if term_b:
            terms.append(term_b)
    if len(rs) < 2:
        raise InvalidInput("integration stopped before completing a single step")
    arr = np.array(ys)
    phi, dphi = arr[:, 1], arr[:, 2]
    d2phi = np.array([_second_derivative(a, b, n, R_N, rho) for a, b in zip(phi, dphi)])
    r_arr = np.array(rs)
    # h from the interpolant of phi rather than the integrated component, so
    # that nodal h and the spline pieces agree to rounding
    h = np.concatenate([[0.0], np.cumsum(_quintic_integrals(r_arr, phi, dphi, d2phi))])
    h -= h[rs.index(r0)]
    return ProfileSolution(r_arr, phi, dphi, d2phi, h, n, float(R_N), float(rho),
                           float(r0), float(phi0), float(phi_prime0), float(step), terms)


def profile_splines(sol: ProfileSolution, coordinate: int = 0) -> tuple[Spline, Spline]:
    """Quintic Hermite interpolants of ``phi`` and ``h`` in the given coordinate.

    Both use exact nodal derivatives, so ``h' = phi`` holds at every node.
    """
    knots = tuple(sol.r_grid.tolist())
    arg = Coord(coordinate)
    phi = Spline(arg, knots, tuple(sol.phi.tolist()), tuple(sol.phi_prime.tolist()),
                 tuple(sol.phi_second.tolist()))
    h = Spline(arg, knots, tuple(sol.h.tolist()), tuple(sol.phi.tolist()),
               tuple(sol.phi_prime.tolist()), tuple(_h_increments(sol).tolist()))
    return phi, h


def _quintic_integrals(r: np.ndarray, p: np.ndarray, dp: np.ndarray, ddp: np.ndarray) -> np.ndarray:
    """Exact integral of the quintic Hermite interpolant over each interval."""
    w = np.diff(r)
    return (w * (p[:-1] + p[1:]) / 2 + w**2 * (dp[:-1] - dp[1:]) / 10
            + w**3 * (ddp[:-1] + ddp[1:]) / 120)


def _h_increments(sol: ProfileSolution) -> np.ndarray:
    return _quintic_integrals(sol.r_grid, sol.phi, sol.phi_prime, sol.phi_second)


def _check_slice(sol: ProfileSolution, slice_metric: MetricField, tol: Tolerances) -> None:
    if slice_metric.dim != sol.n - 1:
        raise InvalidInput(f"slice must have dimension {sol.n - 1}, got {slice_metric.dim}")
    probe = WarpedSpec(MetricField.diagonal([1.0], [(0.0, 1.0)]), slice_metric, Coord(0), trivial_product=True)
    fc = fiber_constancy(probe, tol=tol)
    if not fc.within(tol) or abs(fc.mean - sol.R_N) > tol.fiber_constancy * max(1.0, abs(sol.R_N)):
        raise ConstancyError(
            f"slice scalar curvature {fc.mean:.6g} (spread {fc.deviation:.2e}) does not match R_N = {sol.R_N}"
        )


def profile_warped_spec(sol: ProfileSolution, slice_metric: MetricField,
                        tol: Tolerances = DEFAULT_TOLERANCES) -> tuple[WarpedSpec, Spline]:
    """The rebuilt soliton as ``(r-line) x_phi slice`` plus the interpolated potential."""
    _check_slice(sol, slice_metric, tol)
    phi, h = profile_splines(sol)
    lo, hi = sol.window
    base = MetricField.diagonal([1.0], [(lo, hi)])
    return WarpedSpec(base, slice_metric, phi, sol.rho), h


def build_metric_from_profile(sol: ProfileSolution, slice_metric: MetricField,
                              tol: Tolerances = DEFAULT_TOLERANCES) -> tuple[MetricField, Spline]:
    """``dr^2 + phi(r)^2 g_slice`` and the interpolated potential ``h(r)``."""
    spec, h = profile_warped_spec(sol, slice_metric, tol)
    return spec.metric, h


def default_roundtrip_grid(sol: ProfileSolution, slice_metric: MetricField, radial: int = 41,
                           slice_per_axis: int = 2, tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Product grid avoiding the chart ends and a neighbourhood of detected zeros of phi."""
    lo, hi = sol.window
    pad = tol.boundary_margin
    for c in sol.critical_points():
        if c <= lo + sol.step:
            lo = max(lo, c + tol.critical_exclusion)
        if c >= hi - sol.step:
            hi = min(hi, c - tol.critical_exclusion)
    # shift by a fraction of a step so samples fall between integration nodes
    rs = np.clip(np.linspace(lo + pad, hi - pad, radial) + 0.37 * sol.step, lo + pad, hi - pad)
    slice_pts = uniform_grid(slice_metric.window(), slice_per_axis, tol.boundary_margin)
    return product_points(rs[:, None], slice_pts)


def roundtrip_verify(sol: ProfileSolution, slice_metric: MetricField, grid=None,
                     tol: Tolerances = DEFAULT_TOLERANCES) -> ResidualReport:
    metric, h = build_metric_from_profile(sol, slice_metric, tol)
    pts = default_roundtrip_grid(sol, slice_metric, tol=tol) if grid is None else grid
    return residual(SolitonInstance(metric, h, sol.rho), pts, tol)


@dataclass(frozen=True)
class Census:
    count: int
    locations: tuple[float, ...]
    window: tuple[float, float]

    @property
    def structure(self) -> str:
        return {0: "line", 1: "half-line", 2: "compact"}[self.count]


def critical_point_census(sol: ProfileSolution, window: tuple[float, float],
                          step: float | None = None,
                          tol: Tolerances = DEFAULT_TOLERANCES) -> Census:
    """Continue the profile both ways across ``window`` and count zeros of ``phi``."""
    lo, hi = window
    if not lo < sol.r0 < hi:
        raise InvalidInput("census window must contain r0")
    full = reconstruct_profile(sol.n, sol.R_N, sol.rho, sol.r0, sol.phi0, sol.phi_prime0,
                               r_max=hi, step=step or sol.step, r_min=lo, tol=tol)
    over = [t for t in full.terminations if t.reason == "overflow"]
    if over:
        raise OverflowError(f"profile overflowed at r = {over[0].r:.6g}")
    locs = tuple(full.critical_points())
    return Census(len(locs), locs, (float(lo), float(hi)))


def sample_profile(sol: ProfileSolution, rs: Iterable[float]) -> np.ndarray:
    """Interpolated ``phi`` at the requested radii."""
    phi, _ = profile_splines(sol)
    return np.array([phi.evaluate(float(r))[0] for r in rs])
