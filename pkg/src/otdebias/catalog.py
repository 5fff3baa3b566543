"""CSV catalog ingestion and serialisation."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .core import DataError

Z_RANGE = (0.0, 2.0)
COLUMNS = ("id", "z_true", "z_pred", "g_r", "class_true", "class_pred")
MANDATORY = ("id", "z_true")


class SchemaError(DataError):
    pass


@dataclass(frozen=True)
class CatalogRow:
    id: str
    z_true: float
    z_pred: float | None = None
    g_r: float | None = None
    class_true: int | None = None
    class_pred: int | None = None


@dataclass
class ParsedCatalog:
    rows: list
    errors: list = field(default_factory=list)  # (line, message)
    filtered: list = field(default_factory=list)  # (line, id, reason)
    columns: tuple = ()

    def report(self):
        return {
            "n_rows": len(self.rows),
            "n_errors": len(self.errors),
            "n_filtered": len(self.filtered),
            "errors": [{"line": ln, "reason": msg} for ln, msg in self.errors],
            "filtered": [{"line": ln, "id": i, "reason": r} for ln, i, r in self.filtered],
        }


_CASTS = {"z_true": float, "z_pred": float, "g_r": float, "class_true": int, "class_pred": int}


def _convert(name, text):
    text = text.strip()
    if name == "id":
        if not text:
            raise ValueError("empty id")
        return text
    if text == "":
        if name in MANDATORY:
            raise ValueError(f"missing {name}")
        return None
    value = _CASTS[name](text)
    if isinstance(value, float) and value != value:
        raise ValueError(f"{name} is NaN")
    return value


def parse_catalog(path, schema=None, strict=False, z_range=Z_RANGE):
    """Read a header-first UTF-8 CSV into :class:`CatalogRow` objects.

    ``schema`` maps field names to column headers when they differ. Malformed
    rows are collected with their 1-based line numbers (or raise at once when
    ``strict``); rows with a redshift outside ``z_range`` go to ``filtered``.
    """
    schema = dict(schema or {})
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read catalog {path}: {exc}") from exc
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise SchemaError(f"{path}: empty file, header row required") from None
    colmap = {}
    for name in COLUMNS:
        col = schema.get(name, name)
        if col in header:
            colmap[name] = header.index(col)
    missing = [m for m in MANDATORY if m not in colmap]
    if missing:
        raise SchemaError(f"{path}: missing mandatory column(s) {', '.join(missing)}")
    out = ParsedCatalog([], columns=tuple(colmap))
    lo, hi = z_range
    for line_no, rec in enumerate(reader, start=2):
        if not rec or all(not c.strip() for c in rec):
            continue
        try:
            if len(rec) != len(header):
                raise ValueError(f"expected {len(header)} fields, got {len(rec)}")
            vals = {name: _convert(name, rec[idx]) for name, idx in colmap.items()}
        except ValueError as exc:
            if strict:
                raise DataError(f"{path}:{line_no}: {exc}") from None
            out.errors.append((line_no, str(exc)))
            continue
        row = CatalogRow(**vals)
        zs = [row.z_true] + ([row.z_pred] if row.z_pred is not None else [])
        if any(not lo <= z <= hi for z in zs):
            out.filtered.append((line_no, row.id, "out-of-range"))
            continue
        out.rows.append(row)
    return out


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def catalog_to_csv(rows, columns=None):
    """Serialise rows to CSV text; ``columns`` defaults to the populated fields."""
    if columns is None:
        columns = [f.name for f in fields(CatalogRow)
                   if f.name in MANDATORY or any(getattr(r, f.name) is not None for r in rows)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(getattr(r, c)) for c in columns])
    return buf.getvalue()


def write_catalog(rows, path, columns=None):
    Path(path).write_text(catalog_to_csv(rows, columns), encoding="utf-8")


def read_values(path, column=None):
    """Single numeric column from a CSV (first numeric column when unnamed)."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        if column is None:
            for cand in ("z_pred", "z", "z_true", "value"):
                if cand in header:
                    column = cand
                    break
            else:
                column = header[0]
        if column not in header:
            raise SchemaError(f"{path}: no column {column!r}")
        idx = header.index(column)
        vals = []
        for line_no, rec in enumerate(reader, start=2):
            if not rec:
                continue
            try:
                vals.append(float(rec[idx]))
            except (ValueError, IndexError):
                raise DataError(f"{path}:{line_no}: bad value in column {column!r}") from None
    return vals


def histogram_to_csv(hist):
    """Plot-ready ``lo,hi,mass`` rows for a histogram."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["lo", "hi", "mass"])
    for lo, hi, m in zip(hist.edges[:-1], hist.edges[1:], hist.mass):
        w.writerow([repr(float(lo)), repr(float(hi)), repr(float(m))])
    return buf.getvalue()


def read_histogram(path):
    """Inverse of :func:`histogram_to_csv`."""
    from .transport import Histogram

    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        if header[:3] != ["lo", "hi", "mass"]:
            raise SchemaError(f"{path}: histogram CSV needs columns lo,hi,mass")
        lo, hi, mass = [], [], []
        for line_no, rec in enumerate(reader, start=2):
            if not rec:
                continue
            try:
                a, b, m = (float(x) for x in rec[:3])
            except ValueError:
                raise DataError(f"{path}:{line_no}: non-numeric histogram entry") from None
            lo.append(a)
            hi.append(b)
            mass.append(m)
    if not mass:
        raise DataError(f"{path}: histogram has no bins")
    return Histogram(np.array(lo + [hi[-1]]), np.array(mass))
