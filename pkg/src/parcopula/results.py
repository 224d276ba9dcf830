"""CSV formats for input data and study outputs.

Output files start with a schema comment line, ``# parcopula:<kind> v<N>``,
which readers check before parsing.
"""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path

import numpy as np

from parcopula.pseudo_obs import DataError

SCHEMA_VERSION = 1

SUMMARY_COLUMNS = [
    "family", "theta_true", "N", "M", "S", "theta_full_sim", "theta_combined_sim",
    "bias", "mse", "rel_l1", "rel_l2", "rel_l1_node_change", "rel_l2_node_change", "seed",
]
TIMING_COLUMNS = [
    "family", "theta_true", "N", "M", "S", "mean_subset_s", "mean_full_s",
    "mean_subset_fit_s", "mean_full_fit_s",
]
REPLICATE_COLUMNS = [
    "family", "N", "M", "s", "theta_full", "theta_combined", "sigma2_full", "blocks_used",
    "full_s", "full_fit_s", "mean_subset_s", "mean_subset_fit_s",
]


class SchemaError(ValueError):
    """Results file is missing, malformed or of another schema version."""


def fmt(x) -> str:
    """Shortest round-tripping text for numbers; plain ``str`` otherwise."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def schema_line(kind: str) -> str:
    return f"# parcopula:{kind} v{SCHEMA_VERSION}"


def write_table(path, kind: str, columns, rows) -> None:
    """Write ``rows`` (dicts) under a schema comment; LF line endings."""
    buf = io.StringIO()
    buf.write(schema_line(kind) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(row[c]) for c in columns])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def read_table(path, kind: str, columns=None) -> list:
    """Read a table written by :func:`write_table`; values stay strings."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"{path}: cannot read ({exc.strerror})") from None
    lines = text.splitlines()
    if not lines or lines[0].strip() != schema_line(kind):
        found = lines[0].strip() if lines else "<empty file>"
        raise SchemaError(f"{path}: expected schema '{schema_line(kind)}', found '{found}'")
    reader = csv.DictReader(lines[1:])
    if columns is not None:
        missing = [c for c in columns if c not in (reader.fieldnames or [])]
        if missing:
            raise SchemaError(f"{path}: missing columns {missing}")
    rows = list(reader)
    for i, row in enumerate(rows, start=3):
        if None in row or any(v is None for v in row.values()):
            raise SchemaError(f"{path}: malformed row at line {i}")
    return rows


def read_data_csv(path) -> np.ndarray:
    """Read a two-column numeric CSV with an optional header row.

    Blank lines and lines starting with ``#`` are skipped. The first row is
    taken as a header when any of its cells is not a number.
    """
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None
    values = []
    with fh:
        first = True
        for lineno, row in enumerate(csv.reader(fh), start=1):
            cells = [c.strip() for c in row]
            if not cells or all(c == "" for c in cells) or cells[0].startswith("#"):
                continue
            if len(cells) != 2:
                raise DataError(f"expected 2 numeric columns, found {len(cells)} at line {lineno}")
            try:
                pair = (float(cells[0]), float(cells[1]))
            except ValueError:
                if first:
                    first = False
                    continue
                bad = next(c for c in cells if not _is_number(c))
                raise DataError(f"non-numeric value {bad!r} at line {lineno}") from None
            first = False
            if not (math.isfinite(pair[0]) and math.isfinite(pair[1])):
                raise DataError(f"non-finite value at line {lineno}")
            values.append(pair)
    if not values:
        raise DataError(f"no data rows in {path}")
    return np.array(values, dtype=float)


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def write_data_csv(path, X, header=("x1", "x2")) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(header)
    for a, b in np.asarray(X, dtype=float):
        w.writerow([repr(float(a)), repr(float(b))])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


# --------------------------------------------------------------------------
# study reports <-> rows


def summary_row(rep) -> dict:
    c = rep.config
    return {
        "family": c.family.value, "theta_true": c.theta_true, "N": c.N, "M": c.M, "S": c.S,
        "theta_full_sim": rep.theta_full_sim, "theta_combined_sim": rep.theta_combined_sim,
        "bias": rep.bias_hat, "mse": rep.mse_hat, "rel_l1": rep.rel_l1, "rel_l2": rep.rel_l2,
        "rel_l1_node_change": rep.rel_l1_change, "rel_l2_node_change": rep.rel_l2_change,
        "seed": c.base_seed,
    }


def timing_row(rep) -> dict:
    c = rep.config
    return {
        "family": c.family.value, "theta_true": c.theta_true, "N": c.N, "M": c.M, "S": c.S,
        "mean_subset_s": rep.mean_subset_seconds, "mean_full_s": rep.mean_full_seconds,
        "mean_subset_fit_s": float(np.mean([r.mean_subset_fit_seconds for r in rep.replicates])),
        "mean_full_fit_s": float(np.mean([r.full_fit_seconds for r in rep.replicates])),
    }


def replicate_rows(rep) -> list:
    c = rep.config
    return [
        {
            "family": c.family.value, "N": c.N, "M": c.M, "s": r.s,
            "theta_full": r.theta_full, "theta_combined": r.theta_combined,
            "sigma2_full": r.sigma2_full, "blocks_used": r.blocks_used,
            "full_s": r.full_seconds, "full_fit_s": r.full_fit_seconds,
            "mean_subset_s": r.mean_subset_seconds,
            "mean_subset_fit_s": r.mean_subset_fit_seconds,
        }
        for r in rep.replicates
    ]
