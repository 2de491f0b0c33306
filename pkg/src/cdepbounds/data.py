"""
Reading outcome/treatment/covariate tables and fitting a cell-based
population to them.
"""
from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .distributions import CovariateCell, Population, fit_empirical

__all__ = ["DataError", "Schema", "Dataset", "load_dataset", "fit_population", "CELL_SEP"]

CELL_SEP = "|"


class DataError(ValueError):
    """Input data fails to parse or validate."""


@dataclass(frozen=True)
class Schema:
    """Column names for the outcome, the treatment and the covariates."""

    outcome: str = "y"
    treatment: str = "x"
    covariates: tuple = ()
    delimiter: str = ","

    def __post_init__(self):
        object.__setattr__(self, "covariates", tuple(self.covariates))


@dataclass(frozen=True)
class Dataset:
    """Validated rows; covariates are kept as string labels."""

    outcome: np.ndarray
    treatment: np.ndarray
    covariates: tuple
    covariate_names: tuple = field(default=())

    def __len__(self) -> int:
        return int(self.outcome.size)

    def cell_keys(self) -> list[str]:
        """Cell label of every row: covariate values joined by ``|``."""
        if not self.covariate_names:
            return ["all"] * len(self)
        return [CELL_SEP.join(row) for row in self.covariates]

    @property
    def arms(self) -> tuple[int, ...]:
        return tuple(sorted(set(int(t) for t in self.treatment)))


def load_dataset(path, schema: Schema = Schema()) -> Dataset:
    """Read a delimited text file with a header row.

    Raises
    ------
    DataError
        On a missing file or column, an empty table, an unparsable or
        non-finite outcome, or a treatment value other than 0 or 1.  The
        message names the offending line.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{path}: no such file")
    with path.open(newline="") as fh:
        reader = csv.reader(fh, delimiter=schema.delimiter)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: file is empty") from None
        cols = {}
        for name in (schema.outcome, schema.treatment, *schema.covariates):
            if name not in header:
                raise DataError(f"{path}: column {name!r} not in header {header}")
            cols[name] = header.index(name)
        ys, xs, ws = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not v.strip() for v in row):
                continue
            if len(row) != len(header):
                raise DataError(f"{path}, line {lineno}: expected {len(header)} fields, got {len(row)}")
            raw_y = row[cols[schema.outcome]].strip()
            try:
                y = float(raw_y)
            except ValueError:
                raise DataError(f"{path}, line {lineno}: outcome {raw_y!r} is not a number") from None
            if not math.isfinite(y):
                raise DataError(f"{path}, line {lineno}: outcome {raw_y!r} is not finite")
            raw_x = row[cols[schema.treatment]].strip()
            if raw_x not in ("0", "1", "0.0", "1.0"):
                raise DataError(f"{path}, line {lineno}: treatment {raw_x!r} is not 0 or 1")
            ys.append(y)
            xs.append(int(float(raw_x)))
            ws.append(tuple(row[cols[c]].strip() for c in schema.covariates))
    if not ys:
        raise DataError(f"{path}: no data rows")
    return Dataset(np.array(ys), np.array(xs, dtype=int), tuple(ws), schema.covariates)


def fit_population(data: Dataset, min_arm_count: int = 5, binary: bool | None = None) -> Population:
    """Plug-in population: cell frequencies, arm frequencies per cell and
    fitted arm distributions.

    Parameters
    ----------
    min_arm_count : int
        Every cell needs at least this many rows in each arm.
    binary : bool, optional
        Treat outcomes as 0/1 and store success probabilities instead of
        distributions.  Defaults to True exactly when all outcomes are 0 or 1.

    Raises
    ------
    DataError
        Listing the cells that fail overlap, or a cell-arm whose outcomes
        cannot be fitted.
    """
    if len(data) == 0:
        raise DataError("dataset is empty")
    y = data.outcome
    is01 = bool(np.all((y == 0.0) | (y == 1.0)))
    if binary is None:
        binary = is01
    if binary and not is01:
        raise DataError("binary fit requested but outcomes are not all 0 or 1")
    groups: dict[str, list[int]] = defaultdict(list)
    for i, key in enumerate(data.cell_keys()):
        groups[key].append(i)
    n = len(data)
    short = []
    for key, idx in groups.items():
        t = data.treatment[idx]
        n1 = int(t.sum())
        if min(n1, len(idx) - n1) < min_arm_count:
            short.append(f"{key} (treated {n1}, untreated {len(idx) - n1})")
    if short:
        raise DataError(f"overlap fails, fewer than {min_arm_count} rows in an arm for cells: "
                        + "; ".join(short))
    cells = []
    for key in sorted(groups):
        idx = np.array(groups[key])
        t = data.treatment[idx]
        arm_y = {x: y[idx][t == x] for x in (0, 1)}
        kw = {}
        for x in (0, 1):
            if binary:
                s = float(arm_y[x].mean())
                if not (0.0 < s < 1.0):
                    raise DataError(f"cell {key}, arm {x}: all outcomes equal {int(s)}")
                kw[f"success{x}"] = s
            else:
                try:
                    kw[f"dist{x}"] = fit_empirical(arm_y[x])
                except ValueError as exc:
                    raise DataError(f"cell {key}, arm {x}: {exc}") from None
        cells.append(CovariateCell(key, idx.size / n, float(t.mean()), **kw))
    return Population(tuple(cells))


def write_dataset(path, outcome: Sequence[float], treatment: Sequence[int],
                  covariates: Sequence[Sequence] = (), names: Sequence[str] = ()) -> None:
    """Write rows in the format :func:`load_dataset` reads."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["y", "x", *names])
        for i, (yv, xv) in enumerate(zip(outcome, treatment)):
            w.writerow([repr(float(yv)), int(xv), *(covariates[i] if names else ())])
