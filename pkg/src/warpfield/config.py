"""Numerical tolerances used across the engine, kept in one place."""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    # central-difference step for grad R
    fd_step: float = 1e-5
    # SPD test: smallest Cholesky pivot must exceed this fraction of the largest
    spd_pivot_ratio: float = 1e-12
    # width of the strip excluded next to chart boundaries when building grids
    boundary_margin: float = 1e-3
    soliton_residual: float = 1e-6
    # relative to max(1, |mean R_F|)
    fiber_constancy: float = 1e-6
    # |grad h| below this everywhere means h is treated as constant
    triviality: float = 1e-10
    nonconstant_warping: float = 1e-10
    direction_floor: float = 1e-8
    # profile integration stops once phi drops below this
    critical_phi: float = 1e-10
    critical_bisection: float = 1e-8
    critical_exclusion: float = 1e-2

    def with_(self, **changes) -> "Tolerances":
        return replace(self, **changes)


DEFAULT_TOLERANCES = Tolerances()
