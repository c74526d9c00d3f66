"""File formats: step functions, sampled kernels, reports.

Step functions are CSV with header ``knot,value``.  A sampled kernel is a CSV
matrix whose first row holds the y-cell measures (after an empty corner cell)
and whose first column holds the x-cell measures.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import LGTError
from .rearrangement import SampledKernel, StepFunction

STEP_HEADER = ["knot", "value"]
CONDITION_HEADER = ["name", "sup", "argmax_t", "slope_lo", "slope_hi"]
ESTIMATE_HEADER = ["scale", "max_ratio"]
NORM_HEADER = ["p", "weight", "norm"]
CHAIN_HEADER = ["kernel", "p", "q", "samples", "violations", "max_a_over_b", "max_b_over_m",
                "m_over_c_min", "m_over_c_max", "c_over_d_min", "c_over_d_max"]


class DataFormatError(LGTError):
    pass


def _float(text, where):
    try:
        return float(text)
    except ValueError:
        raise DataFormatError(f"{where}: not a number: {text!r}") from None


def read_step_function(path) -> StepFunction:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or [h.strip() for h in rows[0]] != STEP_HEADER:
        raise DataFormatError(f"{path}: header must be 'knot,value'")
    body = [r for r in rows[1:] if any(c.strip() for c in r)]
    for i, r in enumerate(body, start=2):
        if len(r) != 2:
            raise DataFormatError(f"{path}:{i}: expected two columns")
    knots = np.array([_float(r[0], path) for r in body])
    values = np.array([_float(r[1], path) for r in body])
    if np.any(values < 0):
        raise DataFormatError(f"{path}: values must be nonnegative")
    try:
        return StepFunction(knots, values)
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from None


def format_step_function(f: StepFunction) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(STEP_HEADER)
    for k, v in zip(f.knots, f.values):
        w.writerow([repr(float(k)), repr(float(v))])
    return buf.getvalue()


def read_sampled_kernel(path) -> SampledKernel:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if any(c.strip() for c in r)]
    if len(rows) < 2 or len(rows[0]) < 2:
        raise DataFormatError(f"{path}: kernel needs a header row and at least one data row")
    y = np.array([_float(c, path) for c in rows[0][1:]])
    x, vals = [], []
    for i, r in enumerate(rows[1:], start=2):
        if len(r) != len(y) + 1:
            raise DataFormatError(f"{path}:{i}: expected {len(y) + 1} columns")
        x.append(_float(r[0], path))
        vals.append([_float(c, path) for c in r[1:]])
    try:
        return SampledKernel(np.array(x), y, np.array(vals))
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from None


def format_sampled_kernel(K: SampledKernel) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([""] + [repr(float(v)) for v in K.y_measures])
    for xm, row in zip(K.x_measures, K.values):
        w.writerow([repr(float(xm))] + [repr(float(v)) for v in row])
    return buf.getvalue()


def format_table(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def format_json(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_text(text: str, path=None, stream=None) -> None:
    """Write ``text`` to ``path`` atomically (temp file + rename), else to ``stream``."""
    if path is None:
        stream.write(text)
        return
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
