"""File formats: headerless CSV matrices, 0/1 masks and JSON model files.

Reals are written with 17 significant digits so doubles round-trip exactly.
Labels in files are 1-based.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .core import BiclusterAssignment, BlockValueMatrix, ModelSpec


def fmt_real(v):
    if v is None:
        return ""
    v = float(v)
    if math.isnan(v):
        return "nan"
    return format(v, ".17g")


def matrix_to_csv(a):
    a = np.atleast_2d(np.asarray(a, dtype=float))
    return "".join(",".join(fmt_real(v) for v in row) + "\n" for row in a)


def mask_to_csv(mask):
    mask = np.atleast_2d(np.asarray(mask, dtype=bool))
    return "".join(",".join("1" if v else "0" for v in row) + "\n" for row in mask)


def read_matrix(path):
    rows = [row for row in csv.reader(Path(path).read_text().splitlines()) if row]
    if not rows:
        raise ValueError(f"{path}: empty matrix file")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValueError(f"{path}: ragged rows")
    try:
        return np.array([[float(v) for v in r] for r in rows])
    except ValueError as err:
        raise ValueError(f"{path}: {err}") from None


def read_mask(path):
    a = read_matrix(path)
    if not np.all((a == 0) | (a == 1)):
        raise ValueError(f"{path}: mask entries must be 0 or 1")
    return a.astype(bool)


def model_to_dict(spec: ModelSpec, assignment: BiclusterAssignment, q: BlockValueMatrix):
    d = {
        "kind": spec.kind,
        "n1": spec.n1,
        "n2": spec.n2,
        "k1": spec.k1,
        "k2": spec.k2,
        "M": spec.M,
        "z1": (assignment.z1 + 1).tolist(),
        "z2": (assignment.z2 + 1).tolist(),
        "q": np.asarray(q.q).tolist(),
    }
    if spec.kind == "sbm":
        d["rho"] = spec.rho
    return d


def model_from_dict(d):
    """Inverse of :func:`model_to_dict`; returns ``(spec, assignment, q)``."""
    spec = ModelSpec(d["kind"], d["n1"], d["n2"], d["k1"], d["k2"], float(d["M"]), d.get("rho"))
    assignment = BiclusterAssignment(np.array(d["z1"]) - 1, np.array(d["z2"]) - 1, spec.k1, spec.k2)
    return spec, assignment, BlockValueMatrix(np.array(d["q"], dtype=float), spec.M)


def dumps_json(obj):
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def records_to_csv(columns, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt_real(v) if isinstance(v, float) or v is None else v for v in row])
    return buf.getvalue()


def write_atomic(files):
    """Write ``{path: text}`` so that either every file appears or none does.

    Everything goes to temporary files first; they are renamed into place
    only after all writes succeeded.
    """
    staged = []
    try:
        for path, text in files.items():
            path = Path(path)
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
            staged.append((tmp, path))
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
        for tmp, path in staged:
            os.replace(tmp, path)
    except BaseException:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)
        raise
