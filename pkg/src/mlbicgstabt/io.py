"""Matrix Market ingestion, right-hand sides and report files.

Report schemas
--------------
CSV: header ``k,relative_residual`` plus ``true_error`` when a per-iteration
true-error history was recorded; one row per k starting at k = 0. Floats
are written with ``repr`` so values round-trip exactly.

JSON: the full :meth:`ConvergenceReport.to_dict` payload (flag, counters,
setup counters, residual and omega histories; omegas as ``[re, im]``).
"""

import csv
import gzip
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .linalg import CSRMatrix, as_vector, matvec
from .solvers import ConvergenceReport

FORMATS = ("coordinate", "array")
FIELDS = ("real", "double", "complex", "integer", "pattern")
SYMMETRIES = ("general", "symmetric", "skew-symmetric", "hermitian")


class MatrixMarketError(ValueError):
    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = f"{path}:" if path else ""
        where += f"{line}: " if line is not None else (" " if path else "")
        super().__init__(f"{where}{message}")


class MalformedHeader(MatrixMarketError):
    pass


class UnsupportedField(MatrixMarketError):
    pass


class IndexOutOfRange(MatrixMarketError):
    pass


class MalformedEntry(MatrixMarketError):
    pass


@dataclass
class ProblemInstance:
    A: CSRMatrix
    b: np.ndarray
    name: str
    source: str

    def __post_init__(self):
        if self.A.shape[0] != self.A.shape[1]:
            raise ValueError(f"{self.name}: matrix is not square {self.A.shape}")
        if self.b.shape[0] != self.A.shape[0]:
            raise ValueError(f"{self.name}: rhs length {self.b.shape[0]} != {self.A.shape[0]}")


def _open(path):
    path = Path(path)
    if path.suffix == ".gz":
        return gzip.open(path, "rt")
    return open(path)


def _parse(path):
    """Return (header dict, shape, rows, cols, values, stored count), 0-based."""
    with _open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise MalformedHeader("empty file", 1, path)
    head = lines[0].split()
    if len(head) != 5 or head[0].lower() != "%%matrixmarket":
        raise MalformedHeader("expected '%%MatrixMarket matrix <format> <field> <symmetry>'",
                              1, path)
    obj, fmt, fld, sym = (h.lower() for h in head[1:])
    if obj != "matrix":
        raise UnsupportedField(f"unsupported object {obj!r}", 1, path)
    if fmt not in FORMATS:
        raise UnsupportedField(f"unsupported format {fmt!r}", 1, path)
    if fld not in FIELDS:
        raise UnsupportedField(f"unsupported field {fld!r}", 1, path)
    if sym not in SYMMETRIES:
        raise UnsupportedField(f"unsupported symmetry {sym!r}", 1, path)
    if fmt == "array" and fld == "pattern":
        raise UnsupportedField("pattern field is not allowed with array format", 1, path)
    if fld != "complex" and sym == "hermitian":
        raise UnsupportedField("hermitian symmetry requires the complex field", 1, path)

    body = ((no, ln) for no, ln in enumerate(lines[1:], start=2)
            if ln.strip() and not ln.lstrip().startswith("%"))
    try:
        size_no, size_line = next(body)
    except StopIteration:
        raise MalformedHeader("missing size line", len(lines), path) from None
    try:
        dims = [int(t) for t in size_line.split()]
    except ValueError:
        raise MalformedHeader(f"bad size line {size_line!r}", size_no, path) from None
    want = 3 if fmt == "coordinate" else 2
    if len(dims) != want or min(dims) < 0 or dims[0] < 1 or dims[1] < 1:
        raise MalformedHeader(f"bad size line {size_line!r}", size_no, path)
    nrows, ncols = dims[0], dims[1]
    if sym != "general" and nrows != ncols:
        raise MalformedHeader(f"{sym} matrix must be square", size_no, path)

    nvals = {"pattern": 0, "complex": 2}.get(fld, 1)
    conv = int if fld == "integer" else float
    if fmt == "coordinate":
        nnz = dims[2]
        rows = np.empty(nnz, dtype=np.int64)
        cols = np.empty(nnz, dtype=np.int64)
        vals = np.ones(nnz, dtype=np.complex128)
        count = 0
        for no, ln in body:
            if count >= nnz:
                raise MalformedEntry(f"more than the declared {nnz} entries", no, path)
            tok = ln.split()
            if len(tok) != 2 + nvals:
                raise MalformedEntry(f"expected {2 + nvals} fields, got {len(tok)}", no, path)
            try:
                i, jj = int(tok[0]), int(tok[1])
                if nvals == 1:
                    vals[count] = conv(tok[2])
                elif nvals == 2:
                    vals[count] = complex(float(tok[2]), float(tok[3]))
            except ValueError:
                raise MalformedEntry(f"cannot parse entry {ln.strip()!r}", no, path) from None
            if not (1 <= i <= nrows and 1 <= jj <= ncols):
                raise IndexOutOfRange(f"index ({i}, {jj}) outside {nrows}x{ncols}", no, path)
            if sym == "skew-symmetric" and i == jj:
                raise MalformedEntry("skew-symmetric matrix with a diagonal entry", no, path)
            if sym != "general" and i < jj:
                raise IndexOutOfRange(f"entry ({i}, {jj}) above the diagonal of a {sym} file",
                                      no, path)
            rows[count], cols[count] = i - 1, jj - 1
            count += 1
        if count != nnz:
            raise MalformedEntry(f"declared {nnz} entries, found {count}", len(lines), path)
    else:
        if sym == "general":
            pos = [(i, j) for j in range(ncols) for i in range(nrows)]
        elif sym == "skew-symmetric":
            pos = [(i, j) for j in range(ncols) for i in range(j + 1, nrows)]
        else:
            pos = [(i, j) for j in range(ncols) for i in range(j, nrows)]
        vals = np.empty(len(pos), dtype=np.complex128)
        count = 0
        for no, ln in body:
            tok = ln.split()
            if count >= len(pos):
                raise MalformedEntry(f"more than the expected {len(pos)} values", no, path)
            if len(tok) != nvals:
                raise MalformedEntry(f"expected {nvals} fields, got {len(tok)}", no, path)
            try:
                vals[count] = conv(tok[0]) if nvals == 1 else complex(float(tok[0]),
                                                                      float(tok[1]))
            except ValueError:
                raise MalformedEntry(f"cannot parse value {ln.strip()!r}", no, path) from None
            count += 1
        if count != len(pos):
            raise MalformedEntry(f"expected {len(pos)} values, found {count}", len(lines), path)
        rows = np.array([p[0] for p in pos], dtype=np.int64)
        cols = np.array([p[1] for p in pos], dtype=np.int64)

    stored = rows.shape[0]
    if sym != "general":
        off = rows != cols
        mirror = vals[off]
        if sym == "skew-symmetric":
            mirror = -mirror
        elif sym == "hermitian":
            mirror = np.conj(mirror)
        rows, cols = np.concatenate([rows, cols[off]]), np.concatenate([cols, rows[off]])
        vals = np.concatenate([vals, mirror])
    header = {"format": fmt, "field": fld, "symmetry": sym}
    return header, (nrows, ncols), rows, cols, vals, stored


def read_matrix_market(path, return_info=False):
    """Load a .mtx (or .mtx.gz) file as CSR.

    Symmetric, skew-symmetric and hermitian storage is expanded, duplicate
    coordinates are summed and explicit zeros are kept. Pattern entries get
    the value 1. With ``return_info`` a dict with the stored and expanded
    entry counts is returned as well.
    """
    header, shape, rows, cols, vals, stored = _parse(path)
    A = CSRMatrix.from_coo(rows, cols, vals, shape)
    if return_info:
        info = dict(header, stored_entries=stored, nnz=A.nnz, shape=shape)
        return A, info
    return A


def read_dense(path):
    """Load a Matrix Market file as a dense complex array (N x m)."""
    header, shape, rows, cols, vals, _ = _parse(path)
    out = np.zeros(shape, dtype=np.complex128)
    np.add.at(out, (rows, cols), vals)
    return out


def _fmt(v, field):
    if field == "complex":
        return f"{float(v.real)!r} {float(v.imag)!r}"
    return repr(float(v.real))


def write_matrix_market(path, A, comment=None):
    """Write CSR ``A`` in coordinate general form (real field when possible)."""
    rows, cols, vals = A.to_coo()
    field = "complex" if np.any(vals.imag != 0) else "real"
    with open(path, "w") as fh:
        fh.write(f"%%MatrixMarket matrix coordinate {field} general\n")
        if comment:
            fh.write(f"% {comment}\n")
        fh.write(f"{A.shape[0]} {A.shape[1]} {A.nnz}\n")
        for i, j, v in zip(rows, cols, vals):
            fh.write(f"{i + 1} {j + 1} {_fmt(v, field)}\n")


def write_dense(path, X):
    """Write a vector or N x m block in array general form, column-major."""
    X = np.asarray(X, dtype=np.complex128)
    if X.ndim == 1:
        X = X[:, None]
    field = "complex" if np.any(X.imag != 0) else "real"
    with open(path, "w") as fh:
        fh.write(f"%%MatrixMarket matrix array {field} general\n")
        fh.write(f"{X.shape[0]} {X.shape[1]}\n")
        for v in X.T.ravel():
            fh.write(_fmt(v, field) + "\n")


def default_rhs(A):
    """b = A e with e the vector of ones."""
    return matvec(A, np.ones(A.shape[1]))


def load_rhs(spec, A, column=1):
    """``spec`` is 'ones' (b = A e) or a Matrix Market path; ``column`` is 1-based."""
    if spec is None or str(spec).lower() == "ones":
        return default_rhs(A)
    B = read_dense(spec)
    if not 1 <= column <= B.shape[1]:
        raise ValueError(f"rhs column {column} out of range 1..{B.shape[1]}")
    return as_vector(B[:, column - 1], A.shape[0])


def load_problem(matrix, rhs="ones", rhs_col=1):
    A = read_matrix_market(matrix)
    name = Path(matrix).name
    for suffix in (".gz", ".mtx"):
        name = name.removesuffix(suffix)
    return ProblemInstance(A, load_rhs(rhs, A, rhs_col), name, str(matrix))


def report_rows(report):
    te = report.true_error_history
    header = ["k", "relative_residual"] + (["true_error"] if te is not None else [])
    rows = []
    for k, res in enumerate(report.residual_history):
        row = [k, repr(float(res))]
        if te is not None:
            row.append(repr(float(te[k])))
        rows.append(row)
    return header, rows


def write_report(report, fmt, path):
    fmt = fmt.lower()
    if fmt == "json":
        with open(path, "w") as fh:
            json.dump(report.to_dict(), fh, indent=2)
            fh.write("\n")
    elif fmt == "csv":
        header, rows = report_rows(report)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    else:
        raise ValueError(f"unknown report format {fmt!r}; use csv or json")


def read_report(path, fmt=None):
    """JSON gives a ConvergenceReport; CSV gives a dict of float columns."""
    fmt = (fmt or Path(path).suffix.lstrip(".")).lower()
    if fmt == "json":
        with open(path) as fh:
            return ConvergenceReport.from_dict(json.load(fh))
    if fmt == "csv":
        with open(path, newline="") as fh:
            rd = csv.reader(fh)
            header = next(rd)
            cols = {h: [] for h in header}
            for row in rd:
                for h, v in zip(header, row):
                    cols[h].append(int(v) if h == "k" else float(v))
        return cols
    raise ValueError(f"unknown report format {fmt!r}")
