"""Matrix serialization: the shared JSON and CSV wire formats.

JSON: ``{"d": n, "re": [[...]], "im": [[...]]}`` with row-major d x d lists.
CSV: d*d data rows ``i,j,re,im`` with 0-based indices, no header.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .errors import SchemaError
from .linalg import as_cmatrix


def matrix_to_json_dict(m) -> dict:
    a = as_cmatrix(m)
    return {
        "d": int(a.shape[0]),
        "re": a.real.tolist(),
        "im": a.imag.tolist(),
    }


def matrix_from_json_dict(obj) -> np.ndarray:
    try:
        d = int(obj["d"])
        re = np.asarray(obj["re"], dtype=np.float64)
        im = np.asarray(obj["im"], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed matrix JSON: {exc}") from exc
    if re.shape != (d, d) or im.shape != (d, d):
        raise SchemaError(f"matrix JSON shape mismatch: d={d}, re {re.shape}, im {im.shape}")
    return as_cmatrix(re + 1j * im)


def matrix_to_csv_text(m) -> str:
    a = as_cmatrix(m)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    d = a.shape[0]
    for i in range(d):
        for j in range(d):
            writer.writerow([i, j, repr(float(a[i, j].real)), repr(float(a[i, j].imag))])
    return buf.getvalue()


def matrix_from_csv_text(text: str) -> np.ndarray:
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    if not rows:
        raise SchemaError("empty matrix CSV")
    entries = {}
    for r in rows:
        if len(r) != 4:
            raise SchemaError(f"matrix CSV row must be i,j,re,im: {r}")
        i, j = int(r[0]), int(r[1])
        entries[(i, j)] = complex(float(r[2]), float(r[3]))
    d = 1 + max(max(i, j) for i, j in entries)
    if len(entries) != d * d:
        raise SchemaError(f"matrix CSV must carry {d * d} entries for d={d}, got {len(entries)}")
    a = np.zeros((d, d), dtype=np.complex128)
    for (i, j), v in entries.items():
        a[i, j] = v
    return as_cmatrix(a)


def save_matrix(m, path) -> None:
    p = Path(path)
    if p.suffix == ".csv":
        p.write_text(matrix_to_csv_text(m), encoding="utf-8")
    else:
        p.write_text(json.dumps(matrix_to_json_dict(m)), encoding="utf-8")


def load_matrix(path) -> np.ndarray:
    p = Path(path)
    text = p.read_text(encoding="utf-8")
    if p.suffix == ".csv":
        return matrix_from_csv_text(text)
    return matrix_from_json_dict(json.loads(text))
