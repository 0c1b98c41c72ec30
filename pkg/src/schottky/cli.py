"""Command-line interface.

One verb per library capability: validate, delta, pressure, zeta, zeta-grid,
scan, count-n, count-m, cover-report, factor-check, experiment.  Exit codes:
0 success, 1 mathematical failure (uncertified or unresolved results), 2
configuration error.  The SCHOTTKY_THREADS environment variable caps the
worker threads used for grid scans.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import click
import numpy as np

from .analysis import cover_invariants, factorization_check, l0_congruence_check
from .covers import (CosetAction, cyclic_action, load_action,
                     product_cyclic_action)
from .errors import SchottkyError
from .experiments import EXPERIMENT_KINDS, ExperimentConfig, run_experiment
from .refine import refine, level0_cover
from .scheme import (cylinder_scheme, integral_generators, integral_scheme,
                     load_scheme, pants_scheme, validate_scheme)
from .thermo import hausdorff_dimension, pressure_grid
from .transfer import TransferAssembler
from .zeros import Rect, count_M, count_N, locate_zeros, winding_count
from .covers import induced_permutation_rep


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("SCHOTTKY_THREADS", "1")))
    except ValueError:
        return 1


def _load_scheme_arg(spec: str):
    """SPEC = cylinder:ELL | pants:L1,L2,SEP | integral | path.json."""
    try:
        if spec.startswith("cylinder:"):
            return cylinder_scheme(float(spec.split(":", 1)[1])), None
        if spec.startswith("pants:"):
            a, b, c = (float(x) for x in spec.split(":", 1)[1].split(","))
            return pants_scheme(a, b, c), None
        if spec == "integral":
            return integral_scheme()
        if os.path.exists(spec):
            return load_scheme(spec), None
    except SchottkyError:
        raise
    except (ValueError, OSError) as exc:
        raise click.UsageError(f"bad scheme spec {spec!r}: {exc}") from exc
    raise click.UsageError(f"bad scheme spec {spec!r}")


def _load_cover_arg(scheme, cover: str | None, congruence: str | None,
                    regular: str | None) -> CosetAction | None:
    given = [x for x in (cover, congruence, regular) if x]
    if len(given) > 1:
        raise click.UsageError("give at most one of --cover/--congruence/--regular")
    try:
        if cover:
            return load_action(cover)
        if congruence:
            q, kind = (int(x) for x in congruence.split(","))
            gens = integral_generators(scheme)
            from .covers import congruence_action
            return congruence_action(gens, q, kind)
        if regular:
            return _parse_regular(scheme.m, regular)
    except SchottkyError:
        raise
    except (ValueError, OSError) as exc:
        raise click.UsageError(f"bad cover option: {exc}") from exc
    return None


def _parse_regular(m: int, spec: str) -> CosetAction:
    """'cyclic:K[:e1,..,em]' or 'product:K1,K2[:e11,e12;e21,e22]'."""
    parts = spec.split(":")
    if parts[0] == "cyclic":
        k = int(parts[1])
        exps = [int(x) for x in parts[2].split(",")] if len(parts) > 2 else None
        return cyclic_action(m, k, exps)
    if parts[0] == "product":
        orders = tuple(int(x) for x in parts[1].split(","))
        if len(parts) > 2:
            images = [tuple(int(x) for x in img.split(","))
                      for img in parts[2].split(";")]
        else:
            images = [tuple(1 if i == j else 0 for i in range(len(orders)))
                      for j in range(m)]
        return product_cyclic_action(m, orders, images)
    raise click.UsageError(f"bad regular cover spec {spec!r}")


def _scheme_option(fn):
    return click.option("--scheme", "scheme_spec", required=True,
                        help="cylinder:ELL | pants:L1,L2,SEP | integral | FILE")(fn)


def _cover_options(fn):
    fn = click.option("--cover", default=None, help="cover JSON file")(fn)
    fn = click.option("--congruence", default=None, metavar="Q,KIND")(fn)
    fn = click.option("--regular", default=None,
                      help="cyclic:K[:e1,..] | product:K1,K2[:imgs]")(fn)
    return fn


@click.group()
def main():
    """Resonances of Schottky surfaces via transfer-operator determinants."""


@main.command()
@_scheme_option
def validate(scheme_spec):
    """Validate a scheme and print the report as JSON."""
    scheme, _ = _load_scheme_arg(scheme_spec)
    rep = validate_scheme(scheme)
    click.echo(json.dumps(dataclasses.asdict(rep), indent=2))
    if not rep.ok:
        sys.exit(1)


@main.command()
@_scheme_option
@click.option("--Q", "q_order", default=24, show_default=True)
def delta(scheme_spec, q_order):
    """Hausdorff dimension of the limit set, with cross-checks."""
    scheme, _ = _load_scheme_arg(scheme_spec)
    rep = hausdorff_dimension(scheme, Q=q_order)
    click.echo(json.dumps(dataclasses.asdict(rep), indent=2))
    if not rep.agreement:
        sys.exit(1)


@main.command("pressure")
@_scheme_option
@click.option("--grid", required=True, metavar="A:B:N",
              help="N sigma values from A to B")
@click.option("--Q", "q_order", default=24, show_default=True)
def pressure_cmd(scheme_spec, grid, q_order):
    """CSV of (sigma, pressure) on a sigma grid."""
    scheme, _ = _load_scheme_arg(scheme_spec)
    try:
        a, b, n = grid.split(":")
        sigmas = np.linspace(float(a), float(b), int(n))
    except ValueError as exc:
        raise click.UsageError(f"bad grid spec {grid!r}") from exc
    click.echo("sigma,pressure")
    for s, p in pressure_grid(scheme, sigmas, Q=q_order):
        click.echo(f"{s:.17g},{p:.17g}")


@main.command()
@_scheme_option
@_cover_options
@click.option("--s", "s_value", required=True, metavar="RE,IM")
@click.option("--Q", "q_order", default=40, show_default=True)
@click.option("--level", default=0, show_default=True)
def zeta(scheme_spec, cover, congruence, regular, s_value, q_order, level):
    """Value of the (twisted) zeta function det(I - L_s)."""
    scheme, _ = _load_scheme_arg(scheme_spec)
    action = _load_cover_arg(scheme, cover, congruence, regular)
    try:
        re, im = (float(x) for x in s_value.split(","))
    except ValueError as exc:
        raise click.UsageError(f"bad --s value {s_value!r}") from exc
    rep = None if action is None else induced_permutation_rep(action)
    cov = level0_cover(scheme) if level == 0 else refine(scheme, level)
    asm = TransferAssembler(scheme, cov, rep, q_order)
    val = asm.det(complex(re, im))
    click.echo(f"{val.real:.17g} {val.imag:+.17g}i")


@main.command("zeta-grid")
@_scheme_option
@_cover_options
@click.option("--rect", required=True, metavar="X0,X1,Y0,Y1")
@click.option("--nx", default=20, show_default=True)
@click.option("--ny", default=20, show_default=True)
@click.option("--Q", "q_order", default=40, show_default=True)
@click.option("--level", default=0, show_default=True)
def zeta_grid(scheme_spec, cover, congruence, regular, rect, nx, ny, q_order, level):
    """CSV of determinant values on a rectangular grid."""
    scheme, _ = _load_scheme_arg(scheme_spec)
    action = _load_cover_arg(scheme, cover, congruence, regular)
    try:
        x0, x1, y0, y1 = (float(x) for x in rect.split(","))
    except ValueError as exc:
        raise click.UsageError(f"bad --rect value {rect!r}") from exc
    rep = None if action is None else induced_permutation_rep(action)
    cov = level0_cover(scheme) if level == 0 else refine(scheme, level)
    asm = TransferAssembler(scheme, cov, rep, q_order)
    points = [complex(x, y) for x in np.linspace(x0, x1, nx)
              for y in np.linspace(y0, y1, ny)]

    def one(s):
        val = asm.det(s)
        return (s.real, s.imag, val.real, val.imag, abs(val))

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        rows = list(pool.map(one, points))
    rows.sort(key=lambda r: (r[0], r[1]))
    click.echo("re_s,im_s,re_det,im_det,abs_det")
    for row in rows:
        click.echo(",".join(f"{x:.17g}" for x in row))


@main.command()
@_scheme_option
@_cover_options
@click.option("--rect", required=True, metavar="X0,X1,Y0,Y1")
@click.option("--tol", default=1e-9, show_default=True)
@click.option("--Q", "q_order", default=40, show_default=True)
@click.option("--level", default=0, show_default=True)
def scan(scheme_spec, cover, congruence, regular, rect, tol, q_order, level):
    """Locate zeros in a rectangle; CSV of (re, im, multiplicity)."""
    scheme, _ = _load_scheme_arg(scheme_spec)
    action = _load_cover_arg(scheme, cover, congruence, regular)
    try:
        x0, x1, y0, y1 = (float(x) for x in rect.split(","))
    except ValueError as exc:
        raise click.UsageError(f"bad --rect value {rect!r}") from exc
    report = locate_zeros(Rect(x0, x1, y0, y1), scheme, action, tol=tol,
                          Q=q_order, level=level)
    click.echo("re,im,multiplicity")
    for z, mult in report.zeros:
        click.echo(f"{z.real:.17g},{z.imag:.17g},{mult}")
    if report.unresolved:
        click.echo(f"unresolved clusters: {len(report.unresolved)}", err=True)
        sys.exit(1)


@main.command("count-n")
@_scheme_option
@_cover_options
@click.option("--r", "radius", required=True, type=float)
@click.option("--Q", "q_order", default=56, show_default=True)
@click.option("--level", default=None, type=int)
@click.option("--tile", default=4.0, show_default=True)
def count_n_cmd(scheme_spec, cover, congruence, regular, radius, q_order, level, tile):
    """Count zeros with |s| <= r (with multiplicity)."""
    scheme, _ = _load_scheme_arg(scheme_spec)
    action = _load_cover_arg(scheme, cover, congruence, regular)
    n = count_N(scheme, action, radius, Q=q_order, level=level, tile=tile)
    click.echo(str(n))
    click.echo(json.dumps({"r": radius, "count": n, "Q": q_order,
                           "level": level, "tile": tile}), err=True)


@main.command("count-m")
@_scheme_option
@_cover_options
@click.option("--sigma", required=True, type=float)
@click.option("--t", "t_value", required=True, type=float)
@click.option("--Q", "q_order", default=40, show_default=True)
def count_m_cmd(scheme_spec, cover, congruence, regular, sigma, t_value, q_order):
    """Count zeros with Re s >= sigma, |Im s - T| <= 1."""
    scheme, _ = _load_scheme_arg(scheme_spec)
    action = _load_cover_arg(scheme, cover, congruence, regular)
    delta_val = hausdorff_dimension(scheme).delta
    m = count_M(scheme, action, sigma, t_value, delta=delta_val, Q=q_order)
    click.echo(str(m))
    click.echo(json.dumps({"sigma": sigma, "t": t_value, "delta": delta_val,
                           "count": m, "Q": q_order}), err=True)


@main.command("cover-report")
@_scheme_option
@_cover_options
@click.option("--max-word-len", default=8, show_default=True)
def cover_report(scheme_spec, cover, congruence, regular, max_word_len):
    """CoverInvariants of a cover as JSON."""
    scheme, _ = _load_scheme_arg(scheme_spec)
    action = _load_cover_arg(scheme, cover, congruence, regular)
    if action is None:
        raise click.UsageError("cover-report needs a cover")
    inv = cover_invariants(scheme, action, max_len=max_word_len)
    data = dataclasses.asdict(inv)
    if data["girth"] == math.inf:
        data["girth"] = "inf"
    click.echo(json.dumps(data, indent=2))
    if not inv.ell0_certified:
        sys.exit(1)


@main.command("factor-check")
@_scheme_option
@click.option("--regular", "regular_spec", required=True)
@click.option("--samples", default=20, show_default=True)
@click.option("--Q", "q_order", default=30, show_default=True)
def factor_check(scheme_spec, regular_spec, samples, q_order):
    """Max relative error of the abelian-cover determinant factorization."""
    scheme, _ = _load_scheme_arg(scheme_spec)
    action = _parse_regular(scheme.m, regular_spec)
    rng = np.random.default_rng(11)
    delta_val = hausdorff_dimension(scheme).delta
    ss = [complex(delta_val + 0.3 + rng.random(), 3.0 * rng.random() - 1.5)
          for _ in range(samples)]
    err = factorization_check(scheme, action, ss, Q=q_order)
    click.echo(f"{err:.17g}")
    if not err < 1e-6:
        sys.exit(1)


@main.command()
@click.option("--kind", type=click.Choice(EXPERIMENT_KINDS), required=True)
@click.option("--config", "config_path", default=None,
              help="JSON file with ExperimentConfig fields")
@click.option("--out", "outdir", default="experiments", show_default=True)
def experiment(kind, config_path, outdir):
    """Run a scripted experiment; emits CSV plus a JSON sidecar."""
    if config_path:
        try:
            with open(config_path) as fh:
                config = ExperimentConfig.from_json(fh.read())
        except (OSError, ValueError, TypeError) as exc:
            raise click.UsageError(f"bad config: {exc}") from exc
    else:
        config = ExperimentConfig()
    result = run_experiment(config, kind, outdir)
    click.echo(json.dumps(result))
    if result["failure"]:
        sys.exit(1)


def entry() -> None:
    try:
        main(standalone_mode=False)
    except click.UsageError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    except click.ClickException as exc:
        exc.show()
        sys.exit(exc.exit_code)
    except click.exceptions.Abort:
        sys.exit(2)
    except SchottkyError as exc:
        click.echo(f"math failure: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    entry()
