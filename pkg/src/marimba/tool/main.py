# main.py
#
# The `marimba` command line tool.
#
# Date: 2026-09-23

from typing import Optional, Any, TextIO
import concurrent.futures
import csv
import json
import logging
import math
import sys

import click
import numpy as np

from ..common import VERSION, worker_count
from ..errors import MarimbaError, OutOfRange
from ..surface import MarimbaSpec, read_spec, write_spec, dumps_spec, build_surface
from ..flow import (TraceConfig, CrossingLog, trace, trace_many, sample_liouville,
                    sample_cross_section, read_log, dump_log, write_log, format_time)
from ..melody import (melody_from_log, default_battery, motif_frequency,
                      note_frequency, length_from_frequency,
                      expected_note_frequency, isomelody_report)
from ..spectra import (gap_cdf, peel_orthospectrum, classify_separating,
                       single_note_sides, export_cdf_csv, export_estimate_json)
from ..arcs import find_orthoarcs, orthospectrum_oracle, oracle_coverage
from ..constructions import (SymmetricFamilyParams, symmetric_family_marimba,
                             half_twist_partner, CoverCocycle, cyclic_cover)
from ..teich import TwistFamily, twist_variety_residual
from ..midi import NoteMap, export_midi

__all__ = [
    "cli",
    "tool_main",
]

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


class MarimbaGroup(click.Group):
    """Command group reporting toolkit errors with their exit codes."""

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except MarimbaError as error:
            options = ctx.obj or {}
            if options.get("json_errors"):
                record = {"error": type(error).__name__,
                          "message": str(error),
                          "details": error.details()}
                click.echo(json.dumps(record, default=str), err=True)
            else:
                click.echo(f"Error: {error}", err=True)
            ctx.exit(error.exit_code)


@click.group(cls=MarimbaGroup)
@click.option("-v", "--verbose", count=True, help="Log more (repeatable)")
@click.option("--quiet", is_flag=True, help="Log errors only")
@click.option("--json-errors", is_flag=True, help="Report errors as JSON")
@click.version_option(VERSION, prog_name="marimba")
@click.pass_context
def cli(ctx: click.Context, verbose: int, quiet: bool, json_errors: bool):
    ctx.ensure_object(dict)
    ctx.obj["json_errors"] = json_errors
    if quiet:
        level = logging.ERROR
    else:
        level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(verbose, 2)]
    logging.basicConfig(level=level, stream=sys.stderr, format=LOG_FORMAT, force=True)


def _provenance(log: CrossingLog) -> dict[str, Any]:
    return {"spec_hash": log.spec_hash, "seed": log.seed, "version": VERSION}


def _write_json(record: Any, output: TextIO):
    json.dump(record, output, indent=2)
    output.write("\n")


# Surfaces
# ----------------------------------------------------------------------

@cli.command()
@click.argument("spec_path", metavar="SPEC")
def build(spec_path: str):
    """Validate a spec and print a summary of its surface."""
    spec = read_spec(spec_path)
    surface = build_surface(spec)
    labels = {label: surface.label_length(label) for label in surface.labels}
    _write_json({"spec_hash": surface.spec_hash,
                 "cells": len(surface.cells),
                 "chi": surface.chi,
                 "genus": (2 - surface.chi) // 2,
                 "area": surface.area(),
                 "sheets": surface.sheets,
                 "labels": labels,
                 "version": VERSION}, sys.stdout)


# Tracing
# ----------------------------------------------------------------------

def _start(surface, kind: str, seed: int):
    match kind:
        case "liouville":
            return sample_liouville(surface, seed)
        case "cross-section":
            return sample_cross_section(surface, seed)
        case _:
            raise OutOfRange(f"Unknown start kind '{kind}'", kind)


def _batch_path(path: str, index: int) -> str:
    stem, dot, suffix = path.rpartition(".")
    if not dot or "/" in suffix:
        return f"{path}.{index}"
    return f"{stem}.{index}.{suffix}"


@cli.command("trace")
@click.argument("spec_path", metavar="SPEC")
@click.option("--seed", type=int, required=True, help="Random seed of the start vector")
@click.option("--length", "length", type=float, default=None, help="Traced hyperbolic length")
@click.option("--crossings", type=int, default=None, help="Stop after this many crossings")
@click.option("--start", "start_kind", type=click.Choice(["liouville", "cross-section"]),
              default="liouville", show_default=True)
@click.option("--count", type=int, default=1, show_default=True,
              help="Number of independent traces (seeds seed, seed+1, ...)")
@click.option("--workers", type=int, default=None, help="Worker processes")
@click.option("-o", "--output", default=None, help="Log file, standard output if omitted")
def trace_command(spec_path: str, seed: int, length: Optional[float],
                  crossings: Optional[int], start_kind: str, count: int,
                  workers: Optional[int], output: Optional[str]):
    """Trace random geodesics and write their crossing logs."""
    spec = read_spec(spec_path)
    surface = build_surface(spec)
    cfg = TraceConfig(max_length=math.inf if length is None else length,
                      max_crossings=crossings)
    if count < 1:
        raise OutOfRange(f"Trace count must be positive, got {count}", count)

    seeds = [seed + i for i in range(count)]
    starts = [_start(surface, start_kind, s) for s in seeds]
    if count == 1:
        logs = [trace(surface, starts[0], cfg, seeds[0])]
    else:
        if output is None:
            raise OutOfRange("Several traces need an output file name")
        logs = trace_many(surface, starts, cfg, workers=workers, seeds=seeds)

    for index, log in enumerate(logs):
        if output is None:
            dump_log(log, sys.stdout)
        elif count == 1:
            write_log(log, output)
        else:
            write_log(log, _batch_path(output, index))


@cli.command()
@click.argument("log_path", metavar="LOG")
@click.option("--limit", type=int, default=None, help="Print at most this many notes")
def melody(log_path: str, limit: Optional[int]):
    """Print the melody of a crossing log as note and time columns."""
    m = melody_from_log(read_log(log_path))
    for i, (label, time) in enumerate(m.notes):
        if limit is not None and i >= limit:
            break
        click.echo(f"{label}\t{format_time(time)!r}")


@cli.command()
@click.argument("log_path", metavar="LOG")
@click.option("--map", "note_map", default=None,
              help="Note keys as label=key pairs, for example C=60,D=62")
@click.option("--time-scale", type=float, default=1.0, show_default=True,
              help="Seconds per unit of length")
@click.option("--velocity", type=int, default=100, show_default=True)
@click.option("--duration", type=float, default=0.1, show_default=True,
              help="Note duration in seconds")
@click.option("-o", "--output", required=True, help="MIDI file")
def midi(log_path: str, note_map: Optional[str], time_scale: float,
         velocity: int, duration: float, output: str):
    """Export the melody of a crossing log as a Standard MIDI File."""
    log = read_log(log_path)
    m = melody_from_log(log)
    options = {"time_scale": time_scale, "velocity": velocity, "duration": duration}
    if note_map is None:
        mapping = NoteMap.from_labels(m.label_set, **options)
    else:
        mapping = NoteMap.parse(note_map, **options)
    name = f"marimba {log.spec_hash[:12]} seed {log.seed}" if log.spec_hash else None
    data = export_midi(m, mapping, name=name)
    with open(output, "wb") as file:
        file.write(data)


# Statistics
# ----------------------------------------------------------------------

@cli.command()
@click.argument("log_path", metavar="LOG")
def freq(log_path: str):
    """Motif frequencies of the default motif battery as JSON."""
    log = read_log(log_path)
    m = melody_from_log(log)
    motifs = []
    for motif in default_battery(m):
        estimate = motif_frequency(m, motif)
        motifs.append({"motif": motif.as_dict(), **estimate.as_dict()})
    _write_json({**_provenance(log), "horizon": m.horizon, "motifs": motifs},
                sys.stdout)


@cli.command()
@click.argument("log_path", metavar="LOG")
@click.option("--chi", type=int, required=True, help="Euler characteristic")
def lengths(log_path: str, chi: int):
    """Curve lengths recovered from the note frequencies."""
    log = read_log(log_path)
    m = melody_from_log(log)
    result: dict[str, Any] = {}
    for label in m.label_set:
        frequency = note_frequency(m, label)
        estimate = length_from_frequency(frequency, chi)
        result[label] = {**estimate.as_dict(), "frequency": frequency.value}
    _write_json({**_provenance(log), "chi": chi, "lengths": result}, sys.stdout)


def _gamma_length(l_gamma: Optional[float], spec_path: Optional[str]) -> float:
    if l_gamma is not None:
        return l_gamma
    if spec_path is not None:
        return read_spec(spec_path).gamma_length
    raise OutOfRange("Give the multicurve length with --l-gamma or --spec")


@cli.command()
@click.argument("log_path", metavar="LOG")
@click.option("--k", "k", type=int, default=1, show_default=True, help="Arc step count")
@click.option("--entries", type=int, default=5, show_default=True)
@click.option("--l-gamma", type=float, default=None, help="Total length of the multicurve")
@click.option("--spec", "spec_path", default=None, help="Spec to read the multicurve length from")
@click.option("--cdf", "cdf_path", default=None, help="Write the gap distribution as CSV")
def spectrum(log_path: str, k: int, entries: int, l_gamma: Optional[float],
             spec_path: Optional[str], cdf_path: Optional[str]):
    """Estimate the shortest k-step orthogeodesic lengths by peeling."""
    log = read_log(log_path)
    m = melody_from_log(log)
    total = _gamma_length(l_gamma, spec_path)
    cdf = gap_cdf(m, k)
    if cdf_path is not None:
        with open(cdf_path, "w", encoding="utf-8", newline="") as file:
            export_cdf_csv(cdf, file)
    estimate = peel_orthospectrum(cdf, total, k, max_entries=entries)
    export_estimate_json(estimate, sys.stdout, extra=_provenance(log))


@cli.command()
@click.argument("log_path", metavar="LOG")
@click.option("--threshold", type=float, default=0.01, show_default=True)
def classify(log_path: str, threshold: float):
    """Decide whether the curve of a single-note melody separates."""
    log = read_log(log_path)
    report = classify_separating(melody_from_log(log), threshold)
    _write_json({**_provenance(log), **report.as_dict()}, sys.stdout)


@cli.command()
@click.argument("log_path", metavar="LOG")
@click.option("--chi", type=int, required=True, help="Euler characteristic")
@click.option("--l-gamma", type=float, default=None,
              help="Curve length, enables per-side spectra")
@click.option("--entries", type=int, default=3, show_default=True)
def sides(log_path: str, chi: int, l_gamma: Optional[float], entries: int):
    """Areas and spectra of the two sides of a separating single note."""
    log = read_log(log_path)
    report = single_note_sides(melody_from_log(log), chi, l_gamma=l_gamma,
                               max_entries=entries)
    _write_json({**_provenance(log), **report.as_dict()}, sys.stdout)


# Constructions
# ----------------------------------------------------------------------

@cli.group()
def construct():
    """Build isomelodic specs."""


def _emit_spec(spec: MarimbaSpec, output: Optional[str]):
    if output is None:
        click.echo(dumps_spec(spec), nl=False)
    else:
        write_spec(spec, output)


@construct.command("symmetric")
@click.option("--l-alpha", type=float, required=True)
@click.option("--l-beta", type=float, required=True)
@click.option("--twist-alpha", type=float, default=0.0, show_default=True)
@click.option("--twist-beta", type=float, default=0.0, show_default=True)
@click.option("-o", "--output", default=None)
def construct_symmetric(l_alpha: float, l_beta: float, twist_alpha: float,
                        twist_beta: float, output: Optional[str]):
    """Member of the symmetric genus 2 family."""
    params = SymmetricFamilyParams(l_alpha, l_beta, twist_alpha, twist_beta)
    _emit_spec(symmetric_family_marimba(params), output)


@construct.command("half-twist")
@click.argument("spec_path", metavar="SPEC")
@click.option("-o", "--output", default=None)
def construct_half_twist(spec_path: str, output: Optional[str]):
    """Half-twist partner of a symmetric family spec."""
    _emit_spec(half_twist_partner(read_spec(spec_path)), output)


@construct.command("cover")
@click.argument("spec_path", metavar="SPEC")
@click.option("--n", "n", type=int, required=True, help="Number of sheets")
@click.option("--weights", default="", help="Gluing weights as id=weight pairs")
@click.option("-o", "--output", default=None)
def construct_cover(spec_path: str, n: int, weights: str, output: Optional[str]):
    """Cyclic cover of a spec."""
    cocycle = CoverCocycle.parse(n, weights)
    _emit_spec(cyclic_cover(read_spec(spec_path), cocycle), output)


# Comparison and oracles
# ----------------------------------------------------------------------

def _trace_spec(spec: MarimbaSpec, seed: int, cfg: TraceConfig) -> CrossingLog:
    surface = build_surface(spec)
    return trace(surface, sample_liouville(surface, seed), cfg, seed)


@cli.command()
@click.argument("first_path", metavar="A")
@click.argument("second_path", metavar="B")
@click.option("--seed", type=int, required=True, help="Seed of A; B uses seed + 1")
@click.option("--length", "length", type=float, required=True, help="Traced length")
@click.option("--alpha", type=float, default=0.01, show_default=True,
              help="Significance level")
@click.option("--json", "as_json", is_flag=True, help="Print the report as JSON")
def compare(first_path: str, second_path: str, seed: int, length: float,
            alpha: float, as_json: bool):
    """Compare the motif frequencies of two marimbas."""
    specs = [read_spec(first_path), read_spec(second_path)]
    cfg = TraceConfig(max_length=length)
    seeds = [seed, seed + 1]
    if worker_count() > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=2) as executor:
            logs = list(executor.map(_trace_spec, specs, seeds, [cfg, cfg]))
    else:
        logs = [_trace_spec(spec, s, cfg) for spec, s in zip(specs, seeds)]

    report = isomelody_report(melody_from_log(logs[0]), melody_from_log(logs[1]),
                              alpha=alpha)
    if as_json:
        _write_json({"first": _provenance(logs[0]), "second": _provenance(logs[1]),
                     **report.as_dict()}, sys.stdout)
    else:
        click.echo(report.table())


@cli.command()
@click.argument("spec_path", metavar="SPEC")
@click.option("--k", "k", type=int, default=1, show_default=True)
@click.option("--lmax", type=float, required=True, help="Length bound")
@click.option("--arcs", "with_arcs", is_flag=True, help="Include every arc with its word")
def oracle(spec_path: str, k: int, lmax: float, with_arcs: bool):
    """Orthospectrum up to a length bound by arc enumeration."""
    spec = read_spec(spec_path)
    surface = build_surface(spec)
    arcs = find_orthoarcs(surface, k, lmax)
    spectrum = orthospectrum_oracle(surface, k, lmax)
    record: dict[str, Any] = {
        "spec_hash": surface.spec_hash,
        "version": VERSION,
        "k": k,
        "lmax": lmax,
        "spectrum": [{"length": length, "multiplicity": count}
                     for length, count in spectrum],
    }
    if k == 1:
        record["coverage"] = oracle_coverage(spectrum, surface.gamma_length)
    if with_arcs:
        record["arcs"] = [arc.as_dict() for arc in arcs]
    _write_json(record, sys.stdout)


@cli.command("twist-check")
@click.argument("spec_path", metavar="SPEC")
@click.option("--cuff", required=True, help="Gluing id of the twisted curve")
@click.option("--r", "r", type=int, default=3, show_default=True, help="Number of arcs")
@click.option("--samples", type=int, default=20, show_default=True)
@click.option("--theta-max", type=float, default=1.0, show_default=True)
@click.option("--perturb", type=float, default=0.0, show_default=True,
              help="Relative perturbation of the last cosh-length")
def twist_check(spec_path: str, cuff: str, r: int, samples: int, theta_max: float,
                perturb: float):
    """Twist-variety residuals along a twist deformation, as CSV."""
    family = TwistFamily.from_spec(read_spec(spec_path), cuff, r)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["theta"]
                    + [f"length_{i}" for i in range(family.r)]
                    + [f"residual_{i}" for i in range(1, family.r)]
                    + ["max_abs_residual"])
    for theta in np.linspace(-theta_max, theta_max, samples).tolist():
        x = family.cosh_lengths(theta)
        x[-1] *= 1.0 + perturb
        residual = twist_variety_residual(family, x)
        writer.writerow([repr(theta)]
                        + [repr(math.acosh(value)) for value in x.tolist()]
                        + [repr(value) for value in residual.tolist()]
                        + [repr(float(np.max(np.abs(residual))))])


def tool_main():
    cli()
