"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 input error.

Usage:
    warpfield verify --example cigar --potential-index 1
    warpfield curvature spec.json --grid 10 --out r.csv
    warpfield reconstruct --n 3 --RN 2 --rho 0 --phi0 1 --dphi0 0 --r0 1 --rmax 4
    warpfield bounds --example exm7 --C 1
    warpfield export-catalog out/
"""

from __future__ import annotations

import functools
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Sequence, TypeVar

import click
import numpy as np

from . import catalog, specfile
from .bounds import (BoundsConfig, bound_report, directional_sample, ricci_hessian_extrema,
                     two_sided_bounds)
from .charts import space_form
from .errors import NoValidPoints, WarpfieldError
from .grids import uniform_grid
from .output import csv_text, dumps
from .riemann import PointGeometry
from .soliton import (SolitonInstance, fit_rho, gradient_alignment_check, gradient_identity_check,
                      residual, trace_identity_check)
from .tashiro import InvalidInput, reconstruct_profile, roundtrip_verify
from .warped import WarpedSpec, fiber_constancy, warped_scalar_identity_check

T = TypeVar("T")
R = TypeVar("R")

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def thread_count() -> int:
    raw = os.environ.get("WARPFIELD_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise InputError(f"WARPFIELD_THREADS must be an integer, got {raw!r}") from None


def ordered_map(fn: Callable[[T], R], items: Sequence[T]) -> list[R]:
    """Map over grid points with at most ``WARPFIELD_THREADS`` workers, keeping input order."""
    n = thread_count()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def guarded(fn):
    """Turn library and input errors into a diagnostic and exit code 2."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (WarpfieldError, InputError, InvalidInput, ValueError, OSError, OverflowError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_INPUT)

    return wrapper


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)


def _load(spec_file: str | None, example: str | None, potential_index: int | None) -> specfile.ManifoldSpec:
    if (spec_file is None) == (example is None):
        raise InputError("give either a spec file or --example")
    spec = catalog.get(example).manifold_spec() if example else specfile.load(spec_file)
    if potential_index is not None:
        if not 0 <= potential_index < len(spec.potentials):
            raise InputError(f"--potential-index {potential_index} out of range "
                             f"({len(spec.potentials)} candidate(s))")
        spec = specfile.ManifoldSpec(spec.geometry, spec.coordinates, spec.potentials, potential_index,
                                     spec.rho, spec.flags, spec.id, spec.notes)
    return spec


def _source(spec_file: str | None, example: str | None) -> str:
    return f"example:{example}" if example else str(spec_file)


def _check(value: float, tol: float) -> dict[str, Any]:
    return {"value": value, "tolerance": tol, "ok": bool(value <= tol)}


def _read_points(path: str, dim: int) -> np.ndarray:
    pts = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if pts.shape[1] != dim:
        raise InputError(f"points file has {pts.shape[1]} columns, expected {dim}")
    return pts


@click.group()
@click.version_option(package_name="artifact")
def main() -> None:
    """Warped-product soliton geometry: verification, curvature, reconstruction, bounds."""


spec_argument = click.argument("spec_file", required=False, type=click.Path(exists=True, dir_okay=False))
example_option = click.option("--example", help="Catalog id or alias (exm1, ..., exm7).")


@main.command()
@spec_argument
@example_option
@click.option("--potential-index", type=int, default=None, help="Candidate potential to verify.")
@click.option("--grid", "per_axis", type=click.IntRange(1), default=3, show_default=True,
              help="Grid points per coordinate axis.")
@click.option("--tol", type=float, default=1e-6, show_default=True, help="Soliton residual tolerance.")
@click.option("--out", type=click.Path(dir_okay=False), help="Write the JSON report here.")
@click.option("--csv", "csv_out", type=click.Path(dir_okay=False), help="Per-point residual CSV.")
@click.option("--seed", type=int, default=None, help="Jitter the grid with this seed.")
@guarded
def verify(spec_file, example, potential_index, per_axis, tol, out, csv_out, seed):
    """Check Hess h = (R - rho) g and the derived identities on a grid."""
    spec = _load(spec_file, example, potential_index)
    if spec.potential is None:
        raise InputError("the spec has no potential")
    metric = spec.metric
    grid = uniform_grid(metric.window(), per_axis, seed=seed)
    rho_fit = None
    rho = spec.rho
    if rho is None:
        rho_fit = fit_rho(metric, spec.potential, grid)
        rho = rho_fit.rho
    inst = SolitonInstance(metric, spec.potential, rho)
    report = residual(inst, grid)
    # identities that involve derivatives of R carry finite-difference error
    checks = {
        "trace_identity": _check(trace_identity_check(inst, grid), tol),
        "gradient_identity": _check(gradient_identity_check(inst, grid), 100 * tol),
        "gradient_alignment": _check(gradient_alignment_check(inst, grid), 100 * tol),
    }
    if isinstance(spec.geometry, WarpedSpec):
        fc = fiber_constancy(spec.geometry)
        checks["fiber_constancy"] = _check(fc.deviation / max(1.0, abs(fc.mean)), tol)
        if not report.triviality:
            dev = warped_scalar_identity_check(spec.geometry, spec.potential, grid, rho)
            checks["warped_scalar_identity"] = _check(dev, tol)
    passed = report.max_residual <= tol and all(c["ok"] for c in checks.values())
    doc = {
        "command": "verify",
        "source": _source(spec_file, example),
        "potential_index": spec.potential_index,
        "potential": str(spec.potential),
        "rho": rho,
        "rho_fitted": rho_fit is not None,
        "grid": {"per_axis": per_axis, "seed": seed, "points": len(grid)},
        "max_residual": report.max_residual,
        "worst_point": report.worst_point,
        "tolerance": tol,
        "triviality": report.triviality,
        "checks": checks,
        "passed": passed,
    }
    _emit(dumps(doc), out)
    if csv_out:
        Path(csv_out).write_text(report.to_csv())
    sys.exit(EXIT_OK if passed else EXIT_FAIL)


@main.command()
@spec_argument
@example_option
@click.option("--grid", "per_axis", type=click.IntRange(1), default=5, show_default=True)
@click.option("--points", "points_file", type=click.Path(exists=True, dir_okay=False),
              help="CSV of points (header row, one column per coordinate).")
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(dir_okay=False), help="CSV output (default stdout).")
@click.option("--samples", type=click.Path(dir_okay=False),
              help="Also write full curvature samples (Christoffel, Riemann, Ricci) as JSON.")
@guarded
def curvature(spec_file, example, per_axis, points_file, seed, out, samples):
    """Scalar curvature R at each grid point, as CSV."""
    spec = _load(spec_file, example, None)
    metric = spec.metric
    pts = (_read_points(points_file, metric.dim) if points_file
           else uniform_grid(metric.window(), per_axis, seed=seed))
    geos = ordered_map(lambda p: PointGeometry(metric, p), list(pts))
    scalars = ordered_map(lambda g: g.scalar, geos)
    _emit(csv_text([*spec.coordinates, "R"], ([*p, r] for p, r in zip(pts, scalars))), out)
    if samples:
        Path(samples).write_text(dumps({"samples": [g.sample().to_json() for g in geos]}))


@main.command()
@click.option("--n", "n", type=int, required=True, help="Total dimension of the rebuilt metric.")
@click.option("--RN", "R_N", type=float, required=True, help="Scalar curvature of the slice.")
@click.option("--rho", type=float, required=True)
@click.option("--phi0", type=float, required=True)
@click.option("--dphi0", type=float, required=True)
@click.option("--r0", type=float, default=0.0, show_default=True)
@click.option("--rmax", type=float, required=True)
@click.option("--rmin", type=float, default=None)
@click.option("--step", type=float, default=1e-3, show_default=True)
@click.option("--slice", "slice_file", type=click.Path(exists=True, dir_okay=False),
              help="Metric spec of the slice (default: space form with scalar curvature RN).")
@click.option("--tol", type=float, default=1e-5, show_default=True, help="Round-trip residual tolerance.")
@click.option("--out", type=click.Path(dir_okay=False), help="Profile CSV (default stdout).")
@click.option("--report", type=click.Path(dir_okay=False), help="Round-trip JSON report.")
@guarded
def reconstruct(n, R_N, rho, phi0, dphi0, r0, rmax, rmin, step, slice_file, tol, out, report):
    """Integrate the profile ODE and verify the rebuilt soliton."""
    sol = reconstruct_profile(n, R_N, rho, r0, phi0, dphi0, rmax, step, rmin)
    slice_metric = specfile.load(slice_file).metric if slice_file else space_form(n - 1, R_N)
    rt = roundtrip_verify(sol, slice_metric)
    passed = rt.max_residual <= tol
    doc = {
        "command": "reconstruct",
        "n": n, "R_N": R_N, "rho": rho, "r0": r0, "phi0": phi0, "phi_prime0": dphi0, "step": step,
        "window": list(sol.window),
        "terminations": [{"reason": t.reason, "r": t.r} for t in sol.terminations],
        "roundtrip": {"max_residual": rt.max_residual, "worst_point": rt.worst_point,
                      "points": len(rt.points), "tolerance": tol},
        "passed": passed,
    }
    _emit(sol.to_csv(), out)
    if report:
        Path(report).write_text(dumps(doc))
    elif out:
        click.echo(dumps(doc), nl=False)
    sys.exit(EXIT_OK if passed else EXIT_FAIL)


@main.command()
@spec_argument
@example_option
@click.option("--C", "C", type=float, default=None, help="Bound constant (default: catalog value or 1).")
@click.option("--grid", "per_axis", type=click.IntRange(1), default=5, show_default=True,
              help="Base grid points per axis.")
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(dir_okay=False), help="JSON report (default stdout).")
@click.option("--csv", "csv_out", type=click.Path(dir_okay=False),
              help="Per-point R, Ric(u,u), Hess h(u,u) on the base grid.")
@guarded
def bounds(spec_file, example, C, per_axis, seed, out, csv_out):
    """Scalar-curvature lower/upper bound report for a warped soliton."""
    spec = _load(spec_file, example, None)
    if not isinstance(spec.geometry, WarpedSpec):
        raise InputError("bounds need a warped spec")
    if spec.potential is None or spec.rho is None:
        raise InputError("bounds need a potential and rho")
    if C is None:
        C = catalog.get(example).C if example else 1.0
    w = spec.geometry
    h, rho = spec.potential, spec.rho
    base_grid = uniform_grid(w.base.window(), per_axis, seed=seed)
    config = BoundsConfig(C, base_grid)
    rep = bound_report(w, h, rho, config, complete_base=spec.flags.get("complete_base"))
    doc = {"command": "bounds", "source": _source(spec_file, example),
           "grid": {"per_axis": per_axis, "seed": seed, "points": len(base_grid)}}
    doc.update(rep.to_json())
    scalars = [PointGeometry(w.metric, w.lift(p)).scalar for p in base_grid]
    try:
        c6 = ricci_hessian_extrema(w, h, config)
        lower, upper = two_sided_bounds(c6.A1, c6.A2, C, w.n, w.m, rho)
        doc["upper_bound"] = {"A1": c6.A1, "A2": c6.A2, "lower": lower, "upper": upper,
                              "sup_R": max(scalars), "upper_holds": bool(max(scalars) <= upper + 1e-9)}
    except NoValidPoints:
        doc["upper_bound"] = None
    _emit(dumps(doc), out)
    if csv_out:
        rows = []
        try:
            s = directional_sample(w.base, h, base_grid, config.direction_floor)
            lookup = {tuple(p): r for p, r in zip(base_grid, scalars)}
            rows = [[*p, lookup[tuple(p)], a, b] for p, a, b in zip(s.points, s.ric_uu, s.hess_uu)]
        except NoValidPoints:
            pass
        names = list(spec.coordinates[: w.n])
        Path(csv_out).write_text(csv_text([*names, "R", "ric_uu", "hess_uu"], rows))
    sys.exit(EXIT_FAIL if rep.satisfied is False else EXIT_OK)


@main.command("export-catalog")
@click.argument("directory", type=click.Path(file_okay=False))
@guarded
def export_catalog(directory):
    """Write every catalog entry as a manifold-spec JSON file."""
    target = Path(directory)
    target.mkdir(parents=True, exist_ok=True)
    for entry_id in catalog.list_ids():
        (target / f"{entry_id}.json").write_text(specfile.dumps(catalog.get(entry_id).manifold_spec()))
        click.echo(entry_id)


if __name__ == "__main__":
    main()
