"""CSV / LIBSVM readers and writers, atomic file output."""

import csv
import hashlib
import os
import tempfile
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .errors import MalformedLineError, NonNumericCellError, ParseError, TeachsetError


@dataclass(frozen=True)
class RawTable:
    rows: np.ndarray                 # (n, d) float features
    labels: Optional[np.ndarray]     # (n,) int or None
    header: Optional[List[str]] = None
    label_column: Optional[int] = None

    def __eq__(self, other):
        if not isinstance(other, RawTable):
            return NotImplemented
        same_labels = (self.labels is None and other.labels is None) or (
            self.labels is not None and other.labels is not None
            and np.array_equal(self.labels, other.labels))
        return (np.array_equal(self.rows, other.rows) and same_labels
                and self.header == other.header
                and self.label_column == other.label_column)


def _read_text(path):
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            return fh.read()
    except OSError as exc:
        raise TeachsetError(f"IoError: cannot read {path}: {exc.strerror}") from exc


def _is_number(cell):
    try:
        float(cell)
    except ValueError:
        return False
    return True


def _integral_labels(values, col, first_row):
    labels = np.empty(len(values), dtype=np.int64)
    for i, v in enumerate(values):
        if not float(v).is_integer():
            raise ParseError(f"label {v!r} is not integral", row=first_row + i, col=col + 1)
        labels[i] = int(v)
    return labels


def parse_csv(path, delimiter=",", header="auto", label_column=None):
    """Read a numeric CSV file.

    ``header`` is ``"auto"`` (first row is a header when any of its cells is
    non-numeric), ``True`` or ``False``. ``label_column`` is a 0-based column
    index or a header name; that column becomes integer labels.
    """
    text = _read_text(path)
    records = [r for r in csv.reader(text.splitlines(), delimiter=delimiter)
               if r and any(c.strip() for c in r)]
    if not records:
        raise ParseError("file has no data rows", row=1)
    names = None
    first = 1
    if header is True or (header == "auto"
                          and not all(_is_number(c) for c in records[0])):
        names = [c.strip() for c in records[0]]
        records = records[1:]
        first = 2
    if not records:
        raise ParseError("file has no data rows", row=first)
    width = len(records[0])
    values = np.empty((len(records), width), dtype=float)
    for i, rec in enumerate(records):
        if len(rec) != width:
            raise ParseError(f"expected {width} cells, found {len(rec)}", row=first + i)
        for j, cell in enumerate(rec):
            try:
                values[i, j] = float(cell)
            except ValueError:
                raise NonNumericCellError(
                    f"non-numeric cell {cell.strip()!r}", row=first + i, col=j + 1) from None
    if isinstance(label_column, str):
        if names is None or label_column not in names:
            raise ParseError(f"no column named {label_column!r}")
        label_column = names.index(label_column)
    labels = None
    if label_column is not None:
        if not -width <= label_column < width:
            raise ParseError(f"label column {label_column} outside {width} columns")
        label_column %= width
        labels = _integral_labels(values[:, label_column], label_column, first)
        values = np.delete(values, label_column, axis=1)
    return RawTable(values, labels, names, label_column)


def parse_libsvm(path):
    """Read ``label idx:val ...`` lines; 1-based feature indices are densified."""
    text = _read_text(path)
    labels = []
    entries = []
    width = 0
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            lab = float(tokens[0])
        except ValueError:
            raise MalformedLineError(f"bad label {tokens[0]!r}", line_no) from None
        if not lab.is_integer():
            raise MalformedLineError(f"label {tokens[0]!r} is not integral", line_no)
        feats = {}
        for tok in tokens[1:]:
            idx, sep, val = tok.partition(":")
            if not sep or idx == "qid":
                if idx == "qid":
                    continue
                raise MalformedLineError(f"bad feature token {tok!r}", line_no)
            try:
                i = int(idx)
                v = float(val)
            except ValueError:
                raise MalformedLineError(f"bad feature token {tok!r}", line_no) from None
            if i < 1:
                raise MalformedLineError(f"feature index {i} (indices are 1-based)", line_no)
            feats[i] = v
            width = max(width, i)
        labels.append(int(lab))
        entries.append(feats)
    if not entries:
        raise MalformedLineError("file has no data lines", 1)
    rows = np.zeros((len(entries), width))
    for r, feats in enumerate(entries):
        for i, v in feats.items():
            rows[r, i - 1] = v
    return RawTable(rows, np.array(labels, dtype=np.int64))


def read_table(path, fmt="csv", **options):
    if fmt == "csv":
        return parse_csv(path, **options)
    if fmt == "libsvm":
        return parse_libsvm(path)
    raise TeachsetError(f"unknown format {fmt!r}")


def format_csv(table, delimiter=","):
    """Serialize a table so that ``parse_csv`` reads back the same table."""
    out = []
    n, d = table.rows.shape
    if table.header is not None:
        out.append(delimiter.join(table.header))
    for i in range(n):
        cells = [repr(float(x)) for x in table.rows[i]]
        if table.labels is not None:
            pos = table.label_column if table.label_column is not None else d
            cells.insert(pos, str(int(table.labels[i])))
        out.append(delimiter.join(cells))
    return "\n".join(out) + "\n"


def format_libsvm(table):
    lines = []
    labels = table.labels if table.labels is not None else np.zeros(len(table.rows), int)
    for lab, row in zip(labels, table.rows):
        feats = " ".join(f"{j + 1}:{float(v)!r}" for j, v in enumerate(row) if v != 0)
        lines.append(f"{int(lab)} {feats}".rstrip())
    return "\n".join(lines) + "\n"


def file_digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return "sha256:" + h.hexdigest()


def write_atomic(path, data):
    """Write ``data`` (str or bytes) to ``path`` via a temp file and rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        kwargs = {} if mode == "wb" else {"encoding": "utf-8", "newline": "\n"}
        with os.fdopen(fd, mode, **kwargs) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
