# logio.py
#
# Crossing logs as JSON Lines.
#
# The first line is a header object, every further line is one crossing:
#
#     {"type": "header", "version": ..., "spec_hash": ..., "seed": ...,
#      "config": {...}, "start": {...}, "length": ..., "labels": [...],
#      "diagnostics": {...}}
#     {"i": 0, "note": "C", "cuff": "g0", "t": 1.23456789012345,
#      "x": ..., "theta": ...}
#
# Date: 2026-09-18

from typing import Any, TextIO, Iterator
import json

from ..common import VERSION
from ..errors import OutOfRange
from .state import (CrossingLog, CrossingEntry, TraceConfig, TraceDiagnostics,
                    state_from_dict)

__all__ = [
    "LOG_FORMAT",
    "format_time",
    "header_record",
    "entry_record",
    "write_log",
    "dump_log",
    "read_log",
    "load_log",
]

LOG_FORMAT = "marimba-log/1"


def format_time(t: float) -> float:
    """Time rounded to 15 significant digits, as stored in the log."""
    return float(f"{t:.15g}")


def header_record(log: CrossingLog) -> dict[str, Any]:
    return {
        "type": "header",
        "format": LOG_FORMAT,
        "version": VERSION,
        "spec_hash": log.spec_hash,
        "seed": log.seed,
        "config": log.config.as_dict(),
        "start": log.start.as_dict(),
        "length": log.length,
        "labels": list(log.labels),
        "diagnostics": log.diagnostics.as_dict(),
    }


def entry_record(index: int, entry: CrossingEntry) -> dict[str, Any]:
    return {
        "i": index,
        "note": entry.label,
        "cuff": entry.cuff,
        "t": format_time(entry.time),
        "x": entry.x,
        "theta": entry.theta,
    }


def dump_log(log: CrossingLog, file: TextIO):
    file.write(json.dumps(header_record(log)))
    file.write("\n")
    for index, entry in enumerate(log.entries):
        file.write(json.dumps(entry_record(index, entry)))
        file.write("\n")


def write_log(log: CrossingLog, path: str):
    """Write a crossing log to a JSON Lines file."""
    with open(path, "w", encoding="utf-8") as file:
        dump_log(log, file)


def _records(file: TextIO) -> Iterator[tuple[int, dict[str, Any]]]:
    for number, line in enumerate(file, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as error:
            raise OutOfRange(f"Line {number} is not valid JSON: {error.msg}", number)
        if not isinstance(record, dict):
            raise OutOfRange(f"Line {number} is not a JSON object", number)
        yield (number, record)


def load_log(file: TextIO) -> CrossingLog:
    """Read a crossing log written by `dump_log`."""
    records = _records(file)
    try:
        number, header = next(records)
    except StopIteration:
        raise OutOfRange("Crossing log is empty")
    if header.get("type") != "header":
        raise OutOfRange(f"Line {number} is not a crossing log header", number)

    entries: list[CrossingEntry] = []
    for number, record in records:
        try:
            entries.append(CrossingEntry(time=float(record["t"]),
                                         cuff=str(record["cuff"]),
                                         label=str(record["note"]),
                                         x=float(record["x"]),
                                         theta=float(record["theta"])))
        except KeyError as error:
            raise OutOfRange(f"Line {number} is missing '{error.args[0]}'", number)

    diagnostics = header.get("diagnostics") or {}
    min_sin = diagnostics.get("min_sin_theta")
    return CrossingLog(
        start=state_from_dict(header["start"]),
        entries=entries,
        length=float(header["length"]),
        labels=list(header.get("labels", [])),
        config=TraceConfig.from_dict(header.get("config", {})),
        diagnostics=TraceDiagnostics(
            steps=int(diagnostics.get("steps", 0)),
            renormalizations=int(diagnostics.get("renormalizations", 0)),
            min_sin_theta=float("inf") if min_sin is None else float(min_sin)),
        spec_hash=header.get("spec_hash"),
        seed=header.get("seed"))


def read_log(path: str) -> CrossingLog:
    with open(path, encoding="utf-8") as file:
        return load_log(file)
