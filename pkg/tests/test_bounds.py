import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from warpfield import catalog
from warpfield.bounds import (BoundsConfig, bound_report, directional_sample, empirical_scalar_inf,
                              lower_bound_from_A, potential_growth_check, ricci_hessian_extrema,
                              ricci_hessian_infimum, two_sided_bounds)
from warpfield.charts import euclidean, hyperbolic_halfspace
from warpfield.errors import DimensionError, NoValidPoints
from warpfield.expr import Const, Coord
from warpfield.grids import uniform_grid
from warpfield.riemann import MetricField, PointGeometry
from warpfield.warped import WarpedSpec


def config(entry, C=1.0, per_axis=5):
    return BoundsConfig(C, uniform_grid(entry.spec.base.window(), per_axis))


def test_config_validation():
    with pytest.raises(ValueError):
        BoundsConfig(0.0, np.zeros((1, 1)))
    with pytest.raises(ValueError):
        BoundsConfig(1.0, np.zeros((0, 1)))


def test_A_vanishes_on_flat_base():
    e = catalog.get("exm7")
    a = ricci_hessian_infimum(e.spec, e.potential, config(e))
    assert a.A == 0.0 and a.skipped == 0


def test_A_needs_two_dimensional_base():
    e = catalog.get("exm4")
    with pytest.raises(DimensionError):
        ricci_hessian_infimum(e.spec, e.potential, config(e))


def test_A_on_hyperbolic_base():
    # Ric_B = -2 g on hyperbolic 3-space.  For h = x0 the direction u is along
    # e0 and Hess h(u, u) is proportional to -Gamma^0_00, which vanishes in the
    # half-space chart, so A = (5/2)(-2) = -5 exactly
    spec = WarpedSpec(hyperbolic_halfspace(3), euclidean(3), 1 / Coord(2))
    h = Coord(0)
    grid = uniform_grid(spec.base.window(), 3)
    s = directional_sample(spec.base, h, grid, 1e-8)
    np.testing.assert_allclose(s.ric_uu, -2.0, atol=1e-12)
    np.testing.assert_allclose(s.hess_uu, 0.0, atol=1e-12)
    assert ricci_hessian_infimum(spec, h, BoundsConfig(1.0, grid)).A == pytest.approx(-5.0, abs=1e-12)


def test_A_raises_without_directions():
    e = catalog.get("exm3")
    base = MetricField.diagonal([1.0, 1.0], [(-1, 1), (-1, 1)])
    spec = WarpedSpec(base, e.spec.fiber, 2 + Coord(0))
    with pytest.raises(NoValidPoints):
        ricci_hessian_infimum(spec, Const(1.0), BoundsConfig(1.0, uniform_grid(base.window(), 3)))


@pytest.mark.parametrize("A, C, n, m, rho, expected", [
    (0.0, 1.0, 2, 2, 0.0, 0.0),
    (0.0, 1.0, 2, 2, -12.0, -12.0),
    (-5.0, 1.0, 3, 3, 0.0, -25.0),
    (5.0, 1.0, 3, 3, 0.0, -25.0),
    (-1.0, 2.0, 2, 1, -1.0, -5.0),
])
def test_lower_bound_examples(A, C, n, m, rho, expected):
    assert lower_bound_from_A(A, C, n, m, rho) == expected


@settings(max_examples=100, deadline=None)
@given(st.floats(-10, 10), st.floats(0.01, 10), st.floats(0.01, 10), st.integers(2, 6), st.integers(1, 6),
       st.floats(-10, 10))
def test_lower_bound_monotone_in_C_and_even_in_A(A, C1, C2, n, m, rho):
    lo, hi = sorted((C1, C2))
    assert lower_bound_from_A(A, hi, n, m, rho) <= lower_bound_from_A(A, lo, n, m, rho)
    assert lower_bound_from_A(A, lo, n, m, rho) == lower_bound_from_A(-A, lo, n, m, rho)


def test_empirical_scalar_inf_examples():
    e = catalog.get("exm7")
    pts = np.array([e.spec.lift(p) for p in uniform_grid(e.spec.base.window(), 4)])
    assert empirical_scalar_inf(e.metric, pts).value == pytest.approx(-12.0, abs=1e-9)

    cig = catalog.get("cigar")
    grid = uniform_grid(((0.1, 6.0), (0.3, 6.0)), (60, 2), margin=0.0)
    inf = empirical_scalar_inf(cig.metric, grid)
    assert inf.value == pytest.approx(4 / math.cosh(6.0) ** 2, rel=1e-6)
    assert inf.argmin[0] == pytest.approx(6.0)

    # R = -3/(2s) on the conformal example, minimal at the smallest s
    cs = catalog.get("exm6")
    pts = np.array([cs.spec.lift(p) for p in uniform_grid(((1 / 3, 100 / 3),) * 3, 4, margin=0.0)])
    inf = empirical_scalar_inf(cs.metric, pts)
    assert inf.value == pytest.approx(-1.5, abs=1e-9)
    assert sum(inf.argmin[:3]) == pytest.approx(1.0)


def test_bound_report_exm7_is_sharp():
    e = catalog.get("exm7")
    rep = bound_report(e.spec, e.potential, e.rho, config(e))
    assert rep.A == 0.0
    assert rep.bound == -12.0
    assert rep.inf_R == pytest.approx(-12.0, abs=1e-9)
    assert rep.satisfied
    assert rep.margin == pytest.approx(0.0, abs=1e-9)
    assert rep.critical_C == -math.inf
    assert rep.to_json()["critical_C"] == "-inf"
    assert rep.notes == []


def test_bound_report_flags_incomplete_base():
    e = catalog.get("exm6")
    rep = bound_report(e.spec, e.potential, e.rho, config(e))
    assert "hypothesis violated: complete base = false" in rep.notes
    assert rep.to_json()["hypotheses"] == {"complete_base": False}
    assert rep.A is not None and rep.A < 0
    # the critical C reproduces the sampled infimum exactly
    k = e.spec.n + e.spec.m - 1
    assert -k * rep.critical_C * abs(rep.A) == pytest.approx(rep.inf_R, rel=1e-12)


def test_bound_report_degenerates_for_trivial_soliton():
    e = catalog.get("exm3")
    rep = bound_report(e.spec, e.potential, e.rho, config(e))
    assert rep.degenerate
    assert rep.satisfied is None
    assert any(n.startswith("degenerate") for n in rep.notes)
    assert rep.inf_R == pytest.approx(6.0, abs=1e-9)


@pytest.mark.parametrize("entry_id", ["cosh-hyperbolic-2", "cosh-hyperbolic-3"])
def test_bound_holds_with_catalog_C_when_hypotheses_hold(entry_id):
    e = catalog.get(entry_id)
    assert e.flags.complete_base and e.spec.n >= 2
    rep = bound_report(e.spec, e.potential, e.rho, config(e, e.C))
    assert rep.satisfied


def test_extrema_examples():
    e = catalog.get("exm7")
    c = ricci_hessian_extrema(e.spec, e.potential, config(e))
    assert (c.A1, c.A2) == (0.0, 0.0)
    pe = catalog.punctured_euclidean(3, -1.0)
    c = ricci_hessian_extrema(pe.spec, pe.potential, config(pe))
    assert c.A1 == 0.0 and c.A2 == pytest.approx(1.0, abs=1e-14)
    cig = catalog.get("cigar")
    grid = uniform_grid(((0.0, 5.0),), 201, margin=0.0)[1:]
    c = ricci_hessian_extrema(cig.spec, cig.potential, BoundsConfig(1.0, grid))
    assert c.A1 == 0.0
    assert c.A2 == pytest.approx(4.0, abs=1e-2)
    assert c.A2 <= 4.0


@pytest.mark.parametrize("A1, A2, C, n, m, rho, expected", [
    (0.0, 0.0, 1.0, 2, 2, 0.0, (0.0, 0.0)),
    (0.0, 1.0, 2.0, 1, 2, -1.0, (-2.0, 0.0)),
    (0.0, 4.0, 1.0, 1, 1, 0.0, (-2.0, 4.0)),
    (-1.0, 2.0, 1.0, 2, 2, 1.0, (-10.0, 3.0)),
])
def test_two_sided_bound_examples(A1, A2, C, n, m, rho, expected):
    assert two_sided_bounds(A1, A2, C, n, m, rho) == expected


def test_two_sided_bound_dimension_guard():
    with pytest.raises(DimensionError):
        two_sided_bounds(-1.0, 0.0, 1.0, 1, 2, 0.0)


def test_cigar_curvature_within_two_sided_bounds():
    cig = catalog.get("cigar")
    lower, upper = two_sided_bounds(0.0, 4.0, 1.0, 1, 1, 0.0)
    grid = uniform_grid(((0.01, 5.0), (0.3, 6.0)), (100, 2), margin=0.0)
    scalars = [PointGeometry(cig.metric, p).scalar for p in grid]
    assert lower <= 0 < min(scalars)
    assert max(scalars) <= upper


@pytest.mark.parametrize("entry_id", [i for i in catalog.list_ids() if not catalog.get(i).flags.trivial])
def test_upper_bound_holds_on_every_nontrivial_soliton(entry_id):
    e = catalog.get(entry_id)
    cfg = config(e)
    c = ricci_hessian_extrema(e.spec, e.potential, cfg)
    sup_R = max(PointGeometry(e.metric, e.spec.lift(p)).scalar for p in cfg.grid)
    assert sup_R <= c.A2 + e.rho + 1e-9


@pytest.mark.parametrize("entry_id", ["exm6", "exm7", "cigar", "punctured-euclidean-3", "cone-product-2"])
def test_grid_refinement_stability(entry_id):
    e = catalog.get(entry_id)
    coarse, fine = config(e, per_axis=5), config(e, per_axis=9)
    c1 = ricci_hessian_extrema(e.spec, e.potential, coarse)
    c2 = ricci_hessian_extrema(e.spec, e.potential, fine)
    for a, b in ((c1.A1, c2.A1), (c1.A2, c2.A2)):
        assert abs(a - b) <= 0.05 * max(abs(a), abs(b), 1e-12) or abs(a - b) <= 1e-12
    if e.spec.n >= 2:
        a1 = ricci_hessian_infimum(e.spec, e.potential, coarse).A
        a2 = ricci_hessian_infimum(e.spec, e.potential, fine).A
        assert abs(a1 - a2) <= 0.05 * max(abs(a1), abs(a2)) or abs(a1 - a2) <= 1e-12


# ---- growth of the potential along a ray ------------------------------------

def test_growth_punctured_euclidean_expanding():
    e = catalog.punctured_euclidean(3, -1.0)
    g = potential_growth_check(e.spec, e.potential, -1.0, config(e), [0.5], 0, np.linspace(0, 4.5, 46))
    assert g.satisfied
    assert g.variant == "split"
    assert g.min_second == pytest.approx(1.0)


@pytest.mark.parametrize("entry_id", ["punctured-euclidean-2", "punctured-euclidean-3",
                                      "punctured-euclidean-4", "cigar"])
def test_growth_with_catalog_C(entry_id):
    e = catalog.get(entry_id)
    g = potential_growth_check(e.spec, e.potential, e.rho, config(e, e.C), [0.5], 0, np.linspace(0, 4.4, 45))
    assert g.satisfied
    assert g.critical_C <= e.C


def test_growth_reports_critical_C():
    e = catalog.get("punctured-euclidean-3")
    g = potential_growth_check(e.spec, e.potential, e.rho, config(e, 1.0), [0.5], 0, np.linspace(0, 4.4, 45))
    assert not g.satisfied
    assert g.critical_C == pytest.approx(2.0)
    assert g.constants["A2"] == pytest.approx(-1.0)


def test_growth_trivial_potential():
    e = catalog.get("exm3")
    g = potential_growth_check(e.spec, Const(3.0), e.rho, config(e), [0.2], 0, np.linspace(0, 1.0, 11))
    assert g.satisfied
    assert (g.C1, g.C2) == (0.0, 3.0)


def test_growth_cigar_positive_second_derivative():
    cig = catalog.get("cigar")
    g = potential_growth_check(cig.spec, cig.potential, 0.0, config(cig), [0.1], 0, np.linspace(0, 4.8, 49))
    assert g.satisfied and g.min_second > 0


def test_growth_combined_variant_on_complete_base():
    e = catalog.get("exm7")
    g = potential_growth_check(e.spec, e.potential, e.rho, config(e), [-0.9, 0.0], 0, np.linspace(0, 1.8, 19))
    assert g.variant == "combined" and g.constants == {"A": 0.0}
    assert g.satisfied


def test_csv_rows_shape():
    e = catalog.get("exm7")
    s = directional_sample(e.spec.base, e.potential, uniform_grid(e.spec.base.window(), 2), 1e-8)
    assert [len(row) for row in s.to_csv_rows()] == [4] * 4
