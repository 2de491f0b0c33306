"""
Configuration files, report documents and flat tables.

All structured files are JSON; tables are comma-separated with a header.
Field names are listed in ``docs/format.md``.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Sequence

from ._version import __version__
from .data import DataError, Schema, fit_population, load_dataset
from .dgp import DgpSpec, dgp_population, variant_spec
from .distributions import Population

__all__ = [
    "REPORT_FORMAT",
    "load_config",
    "population_from_source",
    "make_report",
    "write_report",
    "read_report_population",
    "write_table",
]

REPORT_FORMAT = "cdepbounds-report/1"
_SOURCE_KEYS = ("dgp", "data", "population")


def load_config(path) -> dict:
    """Read a JSON configuration file; raise :class:`DataError` if it is
    missing or malformed."""
    path = Path(path)
    try:
        cfg = json.loads(path.read_text())
    except FileNotFoundError:
        raise DataError(f"{path}: no such file") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(cfg, dict):
        raise DataError(f"{path}: top level must be an object")
    return cfg


def population_from_source(source: dict, base_dir=".") -> tuple[Population, dict]:
    """Build the population named by a ``source`` block.

    Exactly one of ``dgp`` (variant name or field overrides), ``data`` (a
    table plus schema) or ``population`` (a previous report) must be given.
    Returns the population and a description for the report.
    """
    given = [k for k in _SOURCE_KEYS if source.get(k) is not None]
    if len(given) != 1:
        raise DataError(f"source needs exactly one of {', '.join(_SOURCE_KEYS)}; got {given or 'none'}")
    key = given[0]
    value = source[key]
    base = Path(base_dir)
    if key == "dgp":
        if isinstance(value, str):
            try:
                spec = variant_spec(value)
            except KeyError as exc:
                raise DataError(str(exc.args[0])) from None
        elif isinstance(value, dict):
            try:
                spec = DgpSpec.from_dict(value)
            except (TypeError, ValueError) as exc:
                raise DataError(f"bad dgp block: {exc}") from None
        else:
            raise DataError("dgp must be a variant name or an object of fields")
        return dgp_population(spec), {"dgp": spec.to_dict(), "name": value if isinstance(value, str) else None}
    if key == "data":
        if isinstance(value, str):
            value = {"path": value}
        schema = Schema(value.get("outcome", "y"), value.get("treatment", "x"),
                        tuple(value.get("covariates", ())), value.get("delimiter", ","))
        ds = load_dataset(base / value["path"], schema)
        pop = fit_population(ds, int(value.get("min_arm_count", 5)), value.get("binary"))
        return pop, {"data": str(value["path"]), "rows": len(ds), "covariates": list(schema.covariates)}
    return read_report_population(base / value), {"population": str(value)}


def make_report(command: str, source: dict, population: Population, results, **extra) -> dict:
    """Assemble a report document."""
    out = {
        "format": REPORT_FORMAT,
        "version": __version__,
        "command": command,
        "source": source,
        "population": population.to_dict(),
        "results": results,
    }
    out.update(extra)
    return out


def write_report(report: dict, path) -> None:
    Path(path).write_text(json.dumps(report, indent=2, allow_nan=True) + "\n")


def read_report_population(path) -> Population:
    """Population stored in a report written by :func:`write_report`."""
    doc = load_config(path)
    if "population" not in doc:
        raise DataError(f"{path}: no population block")
    try:
        return Population.from_dict(doc["population"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: bad population block: {exc}") from None


def write_table(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """Comma-separated table; floats written with ``repr`` so they
    round-trip."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])
