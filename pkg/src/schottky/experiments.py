"""Scripted experiments emitting CSV tables with JSON config sidecars.

Every row of an emitted table is recomputable from the sidecar by re-running
the single corresponding library call; floats are printed with 17 significant
digits so identical configurations yield bitwise-identical CSV bodies.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .analysis import factorization_check, l0_congruence_check
from .covers import CosetAction, cyclic_action, induced_permutation_rep
from .refine import refine, level0_cover
from .scheme import SchottkyScheme, integral_scheme
from .thermo import hausdorff_dimension
from .transfer import TransferAssembler
from .zeros import count_M, count_N

EXPERIMENT_KINDS = ("weyl_scaling", "box_counts", "growth_bound",
                    "factorization", "congruence_l0")


@dataclass(frozen=True)
class ExperimentConfig:
    """Knobs for one experiment run; round-trips losslessly through JSON."""

    scheme_spec: str = "cylinder:0.5"
    degrees: tuple[int, ...] = (1, 2, 3)
    r: float = 40.0
    sigmas: tuple[float, ...] = (-0.5, 0.0, 0.25)
    t_values: tuple[float, ...] = (0.0, 5.0)
    qs: tuple[int, ...] = (2, 3, 5)
    Q: int = 40
    count_Q: int = 56
    count_level: int = 6
    level: int = 0
    tile: float = 4.0
    grid_extent: float = 20.0
    grid_points: int = 9
    samples: int = 20
    max_word_len: int = 6
    tolerance: float = 1e-8

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        data = json.loads(text)
        for key in ("degrees", "sigmas", "t_values", "qs"):
            if key in data:
                data[key] = tuple(data[key])
        return cls(**data)


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _write_table(path: str, header: list[str], rows: list[tuple]) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def _sidecar(path: str, config: ExperimentConfig, kind: str,
             extras: dict | None = None) -> None:
    data = {"kind": kind, "version": __version__,
            "config": json.loads(config.to_json())}
    if extras:
        data.update(extras)
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)


def _scheme_from_spec(spec: str):
    """'cylinder:ELL' | 'pants:L1,L2,SEP' | 'integral' | path to JSON."""
    from .scheme import cylinder_scheme, load_scheme, pants_scheme
    if spec.startswith("cylinder:"):
        return cylinder_scheme(float(spec.split(":", 1)[1])), None
    if spec.startswith("pants:"):
        a, b, c = (float(x) for x in spec.split(":", 1)[1].split(","))
        return pants_scheme(a, b, c), None
    if spec == "integral":
        scheme, gens = integral_scheme()
        return scheme, gens
    return load_scheme(spec), None


def run_experiment(config: ExperimentConfig, kind: str, outdir: str) -> dict:
    """Run one experiment kind; returns paths of the emitted files.

    On failure the partial table is flushed alongside a failure marker in
    the sidecar.
    """
    if kind not in EXPERIMENT_KINDS:
        raise ValueError(f"unknown experiment kind {kind!r}")
    os.makedirs(outdir, exist_ok=True)
    csv_path = os.path.join(outdir, f"{kind}.csv")
    json_path = os.path.join(outdir, f"{kind}.json")
    runner = {
        "weyl_scaling": _run_weyl_scaling,
        "box_counts": _run_box_counts,
        "growth_bound": _run_growth_bound,
        "factorization": _run_factorization,
        "congruence_l0": _run_congruence_l0,
    }[kind]
    scheme, int_gens = _scheme_from_spec(config.scheme_spec)
    header, rows, extras, failure = runner(config, scheme, int_gens)
    _write_table(csv_path, header, rows)
    _sidecar(json_path, config, kind,
             {**extras, **({"failure": failure} if failure else {})})
    return {"csv": csv_path, "json": json_path, "failure": failure}


def _cover_for_degree(scheme: SchottkyScheme, k: int) -> CosetAction | None:
    return None if k == 1 else cyclic_action(scheme.m, k)


def _run_weyl_scaling(config, scheme, _gens):
    header = ["degree", "r", "count", "count_over_degree_r2"]
    rows, failure = [], None
    try:
        for k in config.degrees:
            cover = _cover_for_degree(scheme, k)
            n = count_N(scheme, cover, config.r, Q=config.count_Q,
                        level=config.count_level, tile=config.tile)
            rows.append((k, config.r, n, n / (k * config.r ** 2)))
    except Exception as exc:  # noqa: BLE001 - partial results are flushed
        failure = repr(exc)
    return header, rows, {}, failure


def _run_box_counts(config, scheme, _gens):
    header = ["sigma", "t", "degree", "count", "ell0_cover"]
    rows, failure = [], None
    try:
        delta = hausdorff_dimension(scheme).delta
        from .analysis import l0_cover
        for k in config.degrees:
            cover = _cover_for_degree(scheme, k)
            if cover is None:
                from .scheme import shortest_geodesic
                ell0 = shortest_geodesic(scheme, config.max_word_len).length
            else:
                ell0 = l0_cover(scheme, cover, config.max_word_len).length
            for sigma in config.sigmas:
                for t in config.t_values:
                    mm = count_M(scheme, cover, sigma, t, delta=delta, Q=config.Q)
                    rows.append((sigma, t, k, mm, ell0))
    except Exception as exc:  # noqa: BLE001
        failure = repr(exc)
    return header, rows, {"delta": None if failure else delta}, failure


def _run_growth_bound(config, scheme, _gens):
    """log|det| / (degree <s>^2) over an offset grid avoiding the axes."""
    header = ["degree", "re_s", "im_s", "log_abs_det", "normalised"]
    rows, failure = [], None
    try:
        grid = np.linspace(-config.grid_extent, config.grid_extent,
                           config.grid_points) + 0.137
        for k in config.degrees:
            cover = _cover_for_degree(scheme, k)
            rep = None if cover is None else induced_permutation_rep(cover)
            asm = TransferAssembler(scheme, level0_cover(scheme), rep, config.Q)
            for re in grid:
                for im in grid[grid >= 0]:
                    _, logabs = asm.logdet(complex(re, im))
                    s2 = 1.0 + re * re + im * im
                    rows.append((k, float(re), float(im), logabs,
                                 logabs / (k * s2)))
    except Exception as exc:  # noqa: BLE001
        failure = repr(exc)
    return header, rows, {}, failure


def _run_factorization(config, scheme, _gens):
    header = ["degree", "samples", "max_rel_error"]
    rows, failure = [], None
    try:
        rng = np.random.default_rng(7)
        delta = hausdorff_dimension(scheme).delta
        ss = [complex(delta + 0.3 + 1.2 * rng.random(), 4.0 * rng.random() - 2.0)
              for _ in range(config.samples)]
        for k in config.degrees:
            if k == 1:
                rows.append((1, config.samples, 0.0))
                continue
            err = factorization_check(scheme, cyclic_action(scheme.m, k), ss,
                                      Q=config.Q)
            rows.append((k, config.samples, err))
    except Exception as exc:  # noqa: BLE001
        failure = repr(exc)
    return header, rows, {}, failure


def _run_congruence_l0(config, scheme, int_gens):
    header = ["q", "degree", "ell0", "certified", "lower_bound", "satisfied"]
    rows, failure = [], None
    try:
        if int_gens is None:
            scheme, int_gens = integral_scheme()
        for q in config.qs:
            rep = l0_congruence_check(scheme, int_gens, q,
                                      max_len=config.max_word_len)
            rows.append((rep.q, rep.degree, rep.ell0, int(rep.certified),
                         rep.lower_bound, int(rep.satisfied)))
    except Exception as exc:  # noqa: BLE001
        failure = repr(exc)
    return header, rows, {}, failure
