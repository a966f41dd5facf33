"""CSV and JSON formats for boundaries, samples, reports and tables.

Floats are written with 17 significant digits, enough to round-trip a
double exactly.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import ParameterError
from .geometry import StarBoundary
from .shape import ShapeEstimate

__all__ = [
    "DataFormatError",
    "fmt",
    "boundary_to_json",
    "boundary_from_json",
    "write_boundary_csv",
    "read_boundary_csv",
    "write_boundary_json",
    "read_boundary_json",
    "write_estimate",
    "write_points_csv",
    "write_points_json",
    "read_points",
    "write_table_csv",
    "read_table_csv",
    "write_json",
]


class DataFormatError(ParameterError):
    """An input file is malformed; the message names the location."""


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _dump(obj, path: Path):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_json(obj, path) -> Path:
    path = Path(path)
    _dump(obj, path)
    return path


def boundary_to_json(b: StarBoundary) -> dict:
    return {
        "dimension": b.dimension,
        "directions": [[float(v) for v in row] for row in b.directions],
        "radii": [float(r) for r in b.radii],
    }


def boundary_from_json(doc: dict) -> StarBoundary:
    try:
        d = np.asarray(doc["directions"], dtype=float)
        r = np.asarray(doc["radii"], dtype=float)
        p = int(doc["dimension"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DataFormatError(f"bad boundary document: {exc}") from None
    if d.ndim != 2 or d.shape[1] != p:
        raise DataFormatError(f"directions do not match dimension {p}")
    return StarBoundary(d, r)


def write_boundary_csv(b: StarBoundary, path) -> Path:
    path = Path(path)
    p = b.dimension
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"u{j + 1}" for j in range(p)] + ["radius"])
        for u, r in zip(b.directions, b.radii):
            w.writerow([fmt(v) for v in u] + [fmt(r)])
    return path


def read_boundary_csv(path) -> StarBoundary:
    rows = _read_csv_numeric(Path(path))
    header, data = rows
    if not header or header[-1] != "radius" or header[:-1] != [f"u{j + 1}" for j in range(len(header) - 1)]:
        raise DataFormatError(f"{path}: expected header u1,...,up,radius")
    return StarBoundary(data[:, :-1], data[:, -1])


def write_boundary_json(b: StarBoundary, path, metadata: dict | None = None) -> Path:
    doc = boundary_to_json(b)
    if metadata is not None:
        doc["metadata"] = metadata
    return write_json(doc, path)


def read_boundary_json(path) -> StarBoundary:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return boundary_from_json(doc)


def write_estimate(est: ShapeEstimate, stem, formats=("csv", "json"), extra: dict | None = None) -> list:
    """Write a shape estimate as ``<stem>.csv`` / ``<stem>.json``.

    The CSV carries the bare boundary; the JSON adds a metadata block.
    """
    stem = Path(stem)
    meta = dict(est.metadata)
    if extra:
        meta.update(extra)
    out = []
    if "csv" in formats:
        out.append(write_boundary_csv(est.boundary, stem.with_suffix(".csv")))
    if "json" in formats:
        out.append(write_boundary_json(est.boundary, stem.with_suffix(".json"), meta))
    return out


def write_points_csv(x, path) -> Path:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{j + 1}" for j in range(x.shape[1])])
        for row in x:
            w.writerow([fmt(v) for v in row])
    return path


def write_points_json(x, path) -> Path:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    return write_json({"dimension": int(x.shape[1]), "points": x.tolist()}, path)


def _read_csv_numeric(path: Path):
    try:
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
    except UnicodeDecodeError as exc:
        raise DataFormatError(f"{path}: not a text file ({exc.reason})") from None
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise DataFormatError(f"{path}: empty file")
    header = [c.strip() for c in rows[0]]
    data = np.empty((len(rows) - 1, len(header)))
    for i, row in enumerate(rows[1:]):
        if len(row) != len(header):
            raise DataFormatError(f"{path}: line {i + 2}: expected {len(header)} fields, got {len(row)}")
        for j, cell in enumerate(row):
            try:
                data[i, j] = float(cell)
            except ValueError:
                raise DataFormatError(f"{path}: line {i + 2}, column {j + 1}: not a number: {cell!r}") from None
    if not np.all(np.isfinite(data)):
        i = int(np.flatnonzero(~np.all(np.isfinite(data), axis=1))[0])
        raise DataFormatError(f"{path}: line {i + 2}: non-finite value")
    return header, data


def read_points(path) -> np.ndarray:
    """Read sample points from ``x1,...,xp`` CSV or ``{dimension, points}`` JSON.

    Zero rows are rejected with their (1-based) data-row number.
    """
    path = Path(path)
    if path.suffix.lower() == ".json":
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        try:
            x = np.asarray(doc["points"], dtype=float)
            p = int(doc["dimension"])
        except (KeyError, TypeError, ValueError) as exc:
            raise DataFormatError(f"{path}: bad points document: {exc}") from None
        if x.ndim != 2 or x.shape[1] != p:
            raise DataFormatError(f"{path}: points do not match dimension {p}")
    else:
        header, x = _read_csv_numeric(path)
        if header != [f"x{j + 1}" for j in range(len(header))]:
            raise DataFormatError(f"{path}: expected header x1,...,xp")
    if x.shape[0] == 0:
        raise DataFormatError(f"{path}: no data rows")
    if x.shape[1] < 2:
        raise DataFormatError(f"{path}: points must have dimension >= 2")
    zero = np.flatnonzero(np.all(x == 0.0, axis=1))
    if zero.size:
        raise ParameterError(f"{path}: zero vector at data row {int(zero[0]) + 1}")
    return x


def write_table_csv(table, path, include_runtime: bool = False) -> Path:
    """Convergence table with header ``n,seed,eta,...,runtime_ms``.

    ``runtime_ms`` is left empty unless ``include_runtime`` is set, so
    that repeated runs of one configuration give byte-identical files.
    """
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(table.HEADER)
        for r in table.rows:
            w.writerow([r.n, r.seed, fmt(r.eta), fmt(r.hausdorff_boundary), fmt(r.hausdorff_body),
                        fmt(r.d_n), fmt(r.runtime_ms) if include_runtime else ""])
    return path


def read_table_csv(path) -> list:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))
