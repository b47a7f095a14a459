"""File I/O: CSV matrices, JSON documents, model persistence.

Every writer goes through a temporary file in the destination directory
followed by ``os.replace``, so readers never observe a partial file.
"""

import csv
import hashlib
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .core import MompcaModel
from .errors import ParseError


def atomic_write_bytes(path, data):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text):
    atomic_write_bytes(path, text.encode("utf-8"))


def dumps_json(obj):
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, obj):
    atomic_write_text(path, dumps_json(obj))


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _is_number(cell):
    try:
        float(cell)
    except ValueError:
        return False
    return True


def read_csv_matrix(path):
    """Read a numeric CSV (one observation per row) into an ``(N, p)`` array.

    A first row containing any non-numeric cell is treated as a header and
    skipped.  Returns ``(X, header)`` with ``header`` ``None`` when absent.
    """
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    if not rows:
        raise ParseError(f"{path}: no data rows", row=1, col=None)
    header = None
    start = 0
    if not all(_is_number(c) for c in rows[0]):
        header = [c.strip() for c in rows[0]]
        start = 1
    width = len(rows[start]) if start < len(rows) else 0
    if width == 0:
        raise ParseError(f"{path}: no data rows", row=start + 1, col=None)
    X = np.empty((len(rows) - start, width))
    for i, row in enumerate(rows[start:]):
        line = start + i + 1
        if len(row) != width:
            raise ParseError(f"{path}: row {line} has {len(row)} fields, expected {width}", row=line, col=None)
        for j, cell in enumerate(row):
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(f"{path}: row {line}, column {j + 1}: {cell!r} is not a number",
                                 row=line, col=j + 1) from None
            if not math.isfinite(v):
                raise ParseError(f"{path}: row {line}, column {j + 1}: non-finite value {cell!r}",
                                 row=line, col=j + 1)
            X[i, j] = v
    return X, header


def csv_text(rows, header=None):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if header is not None:
        writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def write_csv(path, rows, header=None):
    atomic_write_text(path, csv_text(rows, header))


def save_model(model, path):
    write_json(path, model.to_dict())


def load_model(path):
    with open(path) as fh:
        doc = json.load(fh)
    return MompcaModel.from_dict(doc)
