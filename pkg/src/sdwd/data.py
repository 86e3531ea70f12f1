"""Datasets, standardization, and file ingestion (CSV and sparse text)."""
import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix ``x`` (n by p) with labels ``y`` in {-1, +1}.

    ``label_names`` records the original (negative, positive) label strings
    when the data came from a file.
    """
    x: np.ndarray
    y: np.ndarray
    feature_names: tuple | None = None
    label_names: tuple | None = None
    standardized: bool = False

    def __post_init__(self):
        x = np.ascontiguousarray(self.x, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64).ravel()
        if x.ndim != 2:
            raise DataError("x must be a 2-d array")
        if x.shape[0] != y.shape[0]:
            raise DataError(f"x has {x.shape[0]} rows but y has {y.shape[0]} entries")
        if not np.all(np.isfinite(x)):
            raise DataError("x contains non-finite values")
        if not np.all((y == 1.0) | (y == -1.0)):
            raise DataError("labels must be -1 or +1")
        if self.feature_names is not None and len(self.feature_names) != x.shape[1]:
            raise DataError("feature_names length does not match column count")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def p(self):
        return self.x.shape[1]

    def check_fittable(self):
        if self.n < 2:
            raise DataError("need at least 2 observations")
        if not (np.any(self.y > 0) and np.any(self.y < 0)):
            raise DataError("both classes must be present")

    def subset(self, rows):
        rows = np.asarray(rows)
        return Dataset(self.x[rows], self.y[rows], self.feature_names,
                       self.label_names, self.standardized)


@dataclass(frozen=True, eq=False)
class Standardizer:
    """Per-feature centering and scaling learned on training data.

    ``scales`` uses the divisor n, so a transformed training column has
    mean 0 and (1/n) * sum(x**2) == 1.  Constant columns are listed in
    ``dropped`` and removed by :meth:`transform`.
    """
    means: np.ndarray
    scales: np.ndarray
    dropped: frozenset = field(default_factory=frozenset)

    @property
    def p_in(self):
        return self.means.shape[0]

    @property
    def kept(self):
        return np.array([j for j in range(self.p_in) if j not in self.dropped], dtype=np.intp)

    def transform(self, raw):
        raw = np.asarray(raw, dtype=np.float64)
        one_row = raw.ndim == 1
        mat = np.atleast_2d(raw)
        if mat.shape[1] != self.p_in:
            raise DataError(f"expected {self.p_in} features, got {mat.shape[1]}")
        kept = self.kept
        out = (mat[:, kept] - self.means[kept]) / self.scales[kept]
        return out[0] if one_row else out


def standardize(raw):
    """Center and scale every column of ``raw.x``; drop constant columns."""
    x = raw.x
    n, p = x.shape
    if n < 2:
        raise DataError("need at least 2 rows to standardize")
    means = x.mean(axis=0)
    centered = x - means
    scales = np.sqrt((centered ** 2).mean(axis=0))
    const = scales <= 1e-10 * (1.0 + np.abs(means))
    dropped = frozenset(int(j) for j in np.flatnonzero(const))
    if len(dropped) == p:
        raise DataError("all feature columns are constant")
    if dropped:
        warnings.warn(f"dropping {len(dropped)} constant column(s): {sorted(dropped)[:10]}",
                      stacklevel=2)
    scales = np.where(const, 1.0, scales)
    kept = np.flatnonzero(~const)
    z = centered[:, kept] / scales[kept]
    names = None
    if raw.feature_names is not None:
        names = tuple(raw.feature_names[j] for j in kept)
    std = Standardizer(means=means, scales=scales, dropped=dropped)
    return Dataset(z, raw.y, names, raw.label_names, standardized=True), std


def apply_standardizer(s, raw_row):
    return s.transform(raw_row)


def encode_labels(labels):
    """Map two distinct label strings to -1/+1; the lexicographically smaller is -1."""
    distinct = sorted(set(labels))
    if len(distinct) != 2:
        raise DataError(f"expected exactly 2 distinct labels, found {len(distinct)}")
    neg, pos = distinct
    y = np.array([1.0 if lab == pos else -1.0 for lab in labels])
    return y, (neg, pos)


def _resolve_column(label_column, header, ncol):
    if isinstance(label_column, str):
        if label_column == "last":
            return ncol - 1
        if label_column.lstrip("-").isdigit():
            label_column = int(label_column)
        elif header is not None and label_column in header:
            return header.index(label_column)
        else:
            raise DataError(f"unknown label column {label_column!r}")
    idx = label_column + ncol if label_column < 0 else label_column
    if not 0 <= idx < ncol:
        raise DataError(f"label column {label_column} out of range for {ncol} columns")
    return idx


def read_csv(path, label_column=-1, has_header=True):
    """Read a comma-separated file with one label column.

    ``label_column`` is an integer index (negative counts from the end),
    a header name, or ``"last"``.
    """
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    header = None
    if has_header:
        if not rows:
            raise DataError(f"{path}: empty file")
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
    if not rows:
        raise DataError(f"{path}: no data rows")
    ncol = len(header) if header is not None else len(rows[0])
    lab = _resolve_column(label_column, header, ncol)
    labels, feats = [], []
    for lineno, r in enumerate(rows, start=2 if has_header else 1):
        if len(r) != ncol:
            raise DataError(f"{path}:{lineno}: expected {ncol} fields, got {len(r)}")
        labels.append(r[lab].strip())
        try:
            feats.append([float(c) for k, c in enumerate(r) if k != lab])
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: non-numeric feature ({exc})") from None
    y, label_names = encode_labels(labels)
    names = None
    if header is not None:
        names = tuple(h for k, h in enumerate(header) if k != lab)
    x = np.array(feats, dtype=np.float64).reshape(len(rows), ncol - 1)
    return Dataset(x, y, names, label_names)


def read_features_csv(path, has_header=True):
    """Read an unlabeled feature matrix (used for prediction input)."""
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if has_header:
        rows = rows[1:]
    if not rows:
        raise DataError(f"{path}: no data rows")
    ncol = len(rows[0])
    out = []
    for lineno, r in enumerate(rows, start=2 if has_header else 1):
        if len(r) != ncol:
            raise DataError(f"{path}:{lineno}: ragged row")
        try:
            out.append([float(c) for c in r])
        except ValueError:
            raise DataError(f"{path}:{lineno}: non-numeric value") from None
    return np.array(out, dtype=np.float64)


def write_csv(data, path):
    """Write features then a trailing label column, with a header row."""
    names = data.feature_names or tuple(f"x{j + 1}" for j in range(data.p))
    if data.label_names is not None:
        neg, pos = data.label_names
    else:
        neg, pos = "-1", "1"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(names) + ["label"])
        for row, lab in zip(data.x, data.y):
            w.writerow([repr(float(v)) for v in row] + [pos if lab > 0 else neg])


def read_sparse(path, n_features=None):
    """Read ``label idx:val ...`` lines with 1-based increasing indices."""
    labels, entries = [], []
    max_idx = 0
    try:
        fh = open(path)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            labels.append(tokens[0])
            row, last = [], 0
            for tok in tokens[1:]:
                idx, sep, val = tok.partition(":")
                try:
                    j, v = int(idx), float(val)
                except ValueError:
                    raise DataError(f"{path}:{lineno}: malformed token {tok!r}") from None
                if not sep or j < 1:
                    raise DataError(f"{path}:{lineno}: malformed token {tok!r}")
                if j <= last:
                    raise DataError(f"{path}:{lineno}: indices must be strictly increasing")
                last = j
                row.append((j - 1, v))
            max_idx = max(max_idx, last)
            entries.append(row)
    if not labels:
        raise DataError(f"{path}: no records")
    p = max_idx if n_features is None else n_features
    if max_idx > p:
        raise DataError(f"{path}: feature index {max_idx} exceeds n_features={p}")
    x = np.zeros((len(labels), p))
    for i, row in enumerate(entries):
        for j, v in row:
            x[i, j] = v
    y, label_names = _sparse_labels(labels)
    return Dataset(x, y, None, label_names)


def _sparse_labels(labels):
    # numeric labels such as "+1"/"-1" and "1"/"-1" must compare numerically
    try:
        vals = [float(s) for s in labels]
    except ValueError:
        return encode_labels(labels)
    distinct = sorted(set(vals))
    if len(distinct) != 2:
        raise DataError(f"expected exactly 2 distinct labels, found {len(distinct)}")
    y = np.where(np.array(vals) == distinct[1], 1.0, -1.0)
    return y, tuple(_fmt_label(v) for v in distinct)


def _fmt_label(v):
    return str(int(v)) if float(v).is_integer() else repr(v)
