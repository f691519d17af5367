"""Command-line harness: lattice, forms, magic, lp and reproduce commands.

Reports are deterministic JSON (sorted keys) by default; the sweep command
writes delimited curve data and renders the companion figure next to it.
Exit codes: 0 success, 1 check failure, 2 usage/configuration error.
"""

from __future__ import annotations

import csv
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields

import click
import mpmath as mp

from .errors import ConfigError, SphereLPError

_CACHE_ENV = "SPHERELP_CACHE_DIR"


@dataclass
class JobConfig:
    command: str = "lp"
    precision: int = 128
    series_order: int = 20
    cache_dir: str | None = None
    output: str | None = None
    format: str = "json"

    _COMMANDS = ("lattice", "forms", "magic", "lp", "reproduce")

    @classmethod
    def from_options(cls, command, **kwargs):
        known = {f.name for f in fields(cls)}
        unknown = set(kwargs) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(command=command, **kwargs)
        if cfg.command not in cls._COMMANDS:
            raise ConfigError(f"unknown command {cfg.command!r}")
        if cfg.precision < 64:
            raise ConfigError("precision must be at least 64 bits")
        if cfg.series_order < 8:
            raise ConfigError("series_order must be at least 8")
        if cfg.format not in ("json", "csv"):
            raise ConfigError(f"unsupported format {cfg.format!r}")
        if cfg.cache_dir is None:
            cfg.cache_dir = os.environ.get(_CACHE_ENV)
        return cfg


def _emit(cfg, payload, check_failed=False):
    """Write the report and translate check failures into exit code 1."""
    text = json.dumps(payload, indent=2, sort_keys=True, default=str)
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text + "\n")
    else:
        click.echo(text)
    if check_failed:
        sys.exit(1)


def _config(ctx, command):
    opts = ctx.obj or {}
    try:
        return JobConfig.from_options(command, **opts)
    except ConfigError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(2)


@click.group()
@click.option("--precision", type=int, default=128, show_default=True,
              help="Working precision in bits.")
@click.option("--series-order", type=int, default=20, show_default=True,
              help="q-expansion truncation order.")
@click.option("--cache-dir", type=click.Path(), default=None,
              help=f"Series cache directory (or ${_CACHE_ENV}).")
@click.option("--format", "format_", type=click.Choice(["json", "csv"]),
              default="json", show_default=True)
@click.option("--out", type=click.Path(), default=None,
              help="Write the report to a file instead of stdout.")
@click.pass_context
def main(ctx, precision, series_order, cache_dir, format_, out):
    """Sphere packing bounds: exact lattices, modular forms, LP certificates."""
    ctx.obj = {"precision": precision, "series_order": series_order,
               "cache_dir": cache_dir, "format": format_, "output": out}


# -- lattice ----------------------------------------------------------------

@main.group()
def lattice():
    """Exact lattice invariants."""


@lattice.command("info")
@click.argument("name", type=click.Choice(["e8", "z1", "z2", "z3", "z4"]))
@click.pass_context
def lattice_info(ctx, name):
    """Invariants of a named lattice: covolume, minimum, kissing, density."""
    from . import lattice as lat

    cfg = _config(ctx, "lattice")
    if name == "e8":
        gram = lat.e8_gram()
    else:
        gram = lat.identity_gram(int(name[1:]))
    basis = lat.basis_from_gram(gram, precision=cfg.precision)
    counts = lat.enumerate_vectors(basis, 4)
    min_sq = counts.minimal_norm()
    covol = float(lat.covolume(basis, precision=cfg.precision))
    density = lat.packing_density(gram.n, math.sqrt(float(min_sq)), covol,
                                  precision=cfg.precision)
    payload = {
        "name": name,
        "n": gram.n,
        "determinant": str(gram.determinant()),
        "covolume": covol,
        "min_squared_length": float(min_sq),
        "kissing_number": counts.counts.get(min_sq, 0),
        "density": density.density,
    }
    _emit(cfg, payload)


@lattice.command("poisson")
@click.argument("name", type=click.Choice(["e8", "z1", "z2", "z3", "z4"]))
@click.option("--translate", type=float, default=None,
              help="Shift amount applied to every coordinate.")
@click.pass_context
def lattice_poisson(ctx, name, translate):
    """Poisson-summation residual for the Gaussian on a named lattice."""
    from . import lattice as lat

    cfg = _config(ctx, "lattice")
    gram = lat.e8_gram() if name == "e8" else lat.identity_gram(int(name[1:]))
    basis = lat.basis_from_gram(gram, precision=cfg.precision)
    shift = [translate] * gram.n if translate is not None else None
    residual = lat.poisson_verify(basis, translation=shift,
                                  precision=cfg.precision)
    ok = abs(residual) < 1e-10
    _emit(cfg, {"name": name, "residual": float(abs(residual)), "pass": ok},
          check_failed=not ok)


# -- forms ------------------------------------------------------------------

@main.group()
def forms():
    """Modular and quasimodular form expansions."""


@forms.command("print")
@click.argument("name")
@click.pass_context
def forms_print(ctx, name):
    """Print the q-expansion of a named series (E2, E4, E6, psi, ...)."""
    from .forms import named_series, SeriesCache

    cfg = _config(ctx, "forms")
    for candidate in (name, name.upper(), name.lower()):
        try:
            if cfg.cache_dir:
                series = SeriesCache(cfg.cache_dir).get(candidate,
                                                        cfg.series_order)
            else:
                series = named_series(candidate, cfg.series_order)
            name = candidate
            break
        except KeyError:
            continue
    else:
        click.echo(f"unknown series {name!r}", err=True)
        sys.exit(2)
    payload = {"name": name, "order": cfg.series_order,
               "coefficients": [str(series.coeff(m))
                                for m in range(cfg.series_order + 1)]}
    _emit(cfg, payload)


@forms.command("verify")
@click.pass_context
def forms_verify(ctx):
    """Run the modular identity cross-checks."""
    from .forms import verify_identities

    cfg = _config(ctx, "forms")
    report = verify_identities(order=cfg.series_order,
                               precision=cfg.precision)
    _emit(cfg, report, check_failed=not report["passed"])


# -- magic ------------------------------------------------------------------

def _magic(cfg):
    from .magic import MagicFunction

    return MagicFunction(order=max(cfg.series_order, 64),
                         precision=max(cfg.precision, 200))


@main.group()
def magic():
    """The dimension-8 magic function."""


@magic.command("eval")
@click.argument("radius", type=float)
@click.option("--hat", is_flag=True, help="Evaluate the Fourier transform.")
@click.pass_context
def magic_eval(ctx, radius, hat):
    """Evaluate the magic function (or its transform) at a radius."""
    cfg = _config(ctx, "magic")
    value = _magic(cfg).eval(radius, hat=hat)
    _emit(cfg, {"radius": radius, "hat": hat,
                "value": mp.nstr(value.value, 30),
                "err_estimate": value.err_estimate})


@magic.command("roots")
@click.option("--k-max", type=int, default=6, show_default=True)
@click.pass_context
def magic_roots(ctx, k_max):
    """Check the forced roots at sqrt(2k)."""
    cfg = _config(ctx, "magic")
    report = _magic(cfg).verify_roots(k_max=k_max)
    _emit(cfg, report, check_failed=not report["passed"])


@magic.command("taylor")
@click.pass_context
def magic_taylor(ctx):
    """Second Taylor coefficients at the origin."""
    cfg = _config(ctx, "magic")
    report = _magic(cfg).taylor_at_zero()
    payload = {name: {"value": str(d["value"]),
                      "quadratic": str(d["quadratic"])}
               for name, d in report.items()}
    _emit(cfg, payload)


@magic.command("signs")
@click.option("--grid-points", type=int, default=200, show_default=True)
@click.pass_context
def magic_signs(ctx, grid_points):
    """Sign conditions for f, fhat and the two eigencomponents."""
    cfg = _config(ctx, "magic")
    report = _magic(cfg).sign_report(grid_points=grid_points)
    _emit(cfg, report, check_failed=not report["passed"])


@magic.command("certify")
@click.pass_context
def magic_certify(ctx):
    """Full sharpness certificate for dimension 8."""
    from .magic import sphere_packing_certificate

    cfg = _config(ctx, "magic")
    report = sphere_packing_certificate(precision=max(cfg.precision, 200))
    _emit(cfg, report, check_failed=not report["sharp"])


# -- lp ---------------------------------------------------------------------

@main.group()
def lp():
    """Linear-programming density bounds."""


@lp.command("bound")
@click.option("--dim", type=int, required=True)
@click.option("--degree", type=int, default=None)
@click.option("--tol", type=float, default=2e-4, show_default=True,
              help="Relative bisection tolerance on the radius.")
@click.pass_context
def lp_bound(ctx, dim, degree, tol):
    """Optimize the certified bound for one dimension."""
    from .lpbounds import optimize_r
    from .reference import lp_bound_reference, compare_to_reference

    cfg = _config(ctx, "lp")
    try:
        cert = optimize_r(dim, degree=degree, rel_tol=tol)
    except SphereLPError as exc:
        click.echo(f"bound computation failed: {exc}", err=True)
        sys.exit(1)
    comparison = compare_to_reference(dim, cert.bound)
    payload = {
        "n": dim,
        "degree": cert.degree,
        "r_star": cert.r,
        "r_star_squared": cert.r ** 2,
        "bound": cert.bound,
        "published_reference": lp_bound_reference(dim),
        "margins": {"lp": cert.margin,
                    "fine_f": cert.fine_margin_f,
                    "fine_hat": cert.fine_margin_hat},
        "comparison": comparison,
    }
    _emit(cfg, payload, check_failed=not comparison["sandwiched"])


def _parse_dims(spec):
    dims = set()
    for part in spec.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            dims.update(range(int(lo), int(hi) + 1))
        elif part:
            dims.add(int(part))
    if not dims or min(dims) < 1:
        raise ConfigError(f"bad dimension specification {spec!r}")
    return sorted(dims)


def _sweep_job(args):
    n, degree, tol = args
    from .lpbounds import optimize_r

    cert = optimize_r(n, degree=degree, rel_tol=tol)
    return n, cert.bound, cert.r, cert.degree


@lp.command("sweep")
@click.option("--dims", default="1..24", show_default=True,
              help="Dimensions, e.g. 1..24 or 1,2,8.")
@click.option("--out", "out_path", type=click.Path(), default="bounds.csv",
              show_default=True)
@click.option("--tol", type=float, default=2e-4, show_default=True)
@click.option("--jobs", type=int, default=None,
              help="Worker processes (default: CPU count).")
@click.pass_context
def lp_sweep(ctx, dims, out_path, tol, jobs):
    """Bound curve over a range of dimensions: CSV plus rendered figure."""
    from .plotting import render_sweep_figure
    from .reference import record_density, compare_to_reference

    cfg = _config(ctx, "lp")
    try:
        dim_list = _parse_dims(dims)
    except ConfigError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(2)
    work = [(n, None, tol) for n in dim_list]
    workers = jobs or min(len(work), os.cpu_count() or 1)
    rows = []
    failures = []
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for n, bound, r, degree in pool.map(_sweep_job, work):
            rec = record_density(n)
            rows.append({
                "dimension": n,
                "bound": bound,
                "record": rec,
                "log_bound": math.log10(bound),
                "log_record": math.log10(rec),
                "r_star": r,
                "degree": degree,
            })
            if not compare_to_reference(n, bound)["sandwiched"]:
                failures.append(n)
    rows.sort(key=lambda row: row["dimension"])
    fieldnames = ["dimension", "bound", "record", "log_bound", "log_record",
                  "r_star", "degree"]
    with open(out_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)
    figure_path = os.path.splitext(out_path)[0] + ".png"
    render_sweep_figure(rows, figure_path)
    payload = {"dimensions": dim_list, "csv": out_path, "figure": figure_path,
               "failures": failures}
    _emit(cfg, payload, check_failed=bool(failures))


# -- reproduce --------------------------------------------------------------

@main.command()
@click.option("--quick", is_flag=True,
              help="Small-scale pipeline: E8 suite, identities, magic roots "
                   "k<=3, LP bounds for n in {1, 2, 8}.")
@click.pass_context
def reproduce(ctx, quick):
    """End-to-end pipeline reproducing the headline numbers."""
    from . import lattice as lat
    from .forms import verify_identities
    from .lpbounds import optimize_r
    from .reference import compare_to_reference

    cfg = _config(ctx, "reproduce")
    checks = []

    basis = lat.basis_from_gram(lat.e8_gram(), precision=cfg.precision)
    counts = lat.enumerate_vectors(basis, 8 if quick else 20)
    checks.append({
        "name": "e8_invariants",
        "pass": (str(lat.e8_gram().determinant()) == "1"
                 and counts.minimal_norm() == 2
                 and counts.counts.get(2, 0) == 240),
    })

    identities = verify_identities(order=cfg.series_order,
                                   precision=cfg.precision)
    checks.append({"name": "modular_identities", "pass": identities["passed"]})

    magic_fn = _magic(cfg)
    roots = magic_fn.verify_roots(k_max=3 if quick else 6)
    checks.append({"name": "magic_roots", "pass": roots["passed"]})

    lp_dims = (1, 2, 8) if quick else tuple(range(1, 25))
    lp_results = {}
    lp_ok = True
    for n in lp_dims:
        cert = optimize_r(n)
        comparison = compare_to_reference(n, cert.bound)
        lp_results[str(n)] = {"bound": cert.bound, **comparison}
        lp_ok = lp_ok and comparison["sandwiched"]
    checks.append({"name": "lp_bounds", "pass": lp_ok, "detail": lp_results})

    passed = all(c["pass"] for c in checks)
    _emit(cfg, {"quick": quick, "checks": checks, "passed": passed},
          check_failed=not passed)


if __name__ == "__main__":
    main()
