"""Complex CSR matrices and the instrumented BLAS-1/2 kernels the solvers use.

All vectors are 1-D ``complex128`` numpy arrays; real data is embedded.
Every kernel takes an optional :class:`OpCounters` and bumps the matching
field, which is how the per-iteration cost model is measured.
"""

from dataclasses import asdict, dataclass

import numpy as np

from . import kernels


@dataclass
class OpCounters:
    """Operation tallies for one solve.

    ``scalings`` counts the ``alpha * v`` updates that are not saxpys; the
    norms used for convergence checks are not counted as dot products.
    """

    matvec_A: int = 0
    matvec_AH: int = 0
    precond_solves: int = 0
    dot_products: int = 0
    saxpys: int = 0
    scalings: int = 0

    def copy(self):
        return OpCounters(**asdict(self))

    def as_dict(self):
        return asdict(self)

    def __sub__(self, other):
        return OpCounters(**{k: v - getattr(other, k) for k, v in asdict(self).items()})


class CSRMatrix:
    """Compressed sparse row matrix over complex doubles.

    Stored entries are kept as given, including explicit zeros, so ``nnz``
    is the stored-entry count.
    """

    def __init__(self, indptr, indices, data, shape):
        nrows, ncols = (int(s) for s in shape)
        if nrows < 1 or ncols < 1:
            raise ValueError(f"invalid shape {shape}")
        self.indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        self.indices = np.ascontiguousarray(indices, dtype=np.int64)
        self.data = np.ascontiguousarray(data, dtype=np.complex128)
        self.shape = (nrows, ncols)
        if self.indptr.shape != (nrows + 1,) or self.indptr[0] != 0:
            raise ValueError("row pointer array has wrong length or start")
        if np.any(np.diff(self.indptr) < 0):
            raise ValueError("row pointers must be non-decreasing")
        if self.indptr[-1] != self.indices.shape[0] or self.indices.shape != self.data.shape:
            raise ValueError("nnz does not match the last row pointer")
        if self.indices.size and (self.indices.min() < 0 or self.indices.max() >= ncols):
            raise ValueError("column index out of range")

    @property
    def nnz(self):
        return int(self.indptr[-1])

    @property
    def dtype(self):
        return self.data.dtype

    def __repr__(self):
        return f"CSRMatrix(shape={self.shape}, nnz={self.nnz})"

    @classmethod
    def from_coo(cls, rows, cols, vals, shape, sum_duplicates=True):
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.complex128)
        nrows, ncols = shape
        if rows.size and (rows.min() < 0 or rows.max() >= nrows):
            raise ValueError("row index out of range")
        if cols.size and (cols.min() < 0 or cols.max() >= ncols):
            raise ValueError("column index out of range")
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        if sum_duplicates and rows.size:
            first = np.ones(rows.size, dtype=bool)
            first[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
            starts = np.flatnonzero(first)
            vals = np.add.reduceat(vals, starts)
            rows, cols = rows[starts], cols[starts]
        indptr = np.zeros(nrows + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=nrows), out=indptr[1:])
        return cls(indptr, cols, vals, shape)

    @classmethod
    def from_dense(cls, a, keep_zeros=False):
        a = np.atleast_2d(np.asarray(a, dtype=np.complex128))
        rows, cols = np.nonzero(np.ones_like(a, dtype=bool) if keep_zeros else a)
        return cls.from_coo(rows, cols, a[rows, cols], a.shape)

    @classmethod
    def identity(cls, n):
        idx = np.arange(n)
        return cls(np.arange(n + 1), idx, np.ones(n), (n, n))

    @classmethod
    def diag(cls, d):
        d = np.asarray(d, dtype=np.complex128)
        idx = np.arange(d.size)
        return cls(np.arange(d.size + 1), idx, d, (d.size, d.size))

    def row_ids(self):
        return np.repeat(np.arange(self.shape[0]), np.diff(self.indptr))

    def to_coo(self):
        return self.row_ids(), self.indices.copy(), self.data.copy()

    def to_dense(self):
        out = np.zeros(self.shape, dtype=np.complex128)
        np.add.at(out, (self.row_ids(), self.indices), self.data)
        return out

    def to_csc(self):
        """Column pointers, row indices and values of the same matrix."""
        rows = self.row_ids()
        order = np.lexsort((rows, self.indices))
        col_ptr = np.zeros(self.shape[1] + 1, dtype=np.int64)
        np.cumsum(np.bincount(self.indices, minlength=self.shape[1]), out=col_ptr[1:])
        return col_ptr, rows[order], self.data[order]

    def diagonal(self):
        d = np.zeros(min(self.shape), dtype=np.complex128)
        rows = self.row_ids()
        on = rows == self.indices
        np.add.at(d, rows[on], self.data[on])
        return d

    def row_sums(self):
        return matvec(self, np.ones(self.shape[1]))

    def __matmul__(self, v):
        return matvec(self, v)


def as_vector(v, length=None):
    v = np.asarray(v, dtype=np.complex128)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    if length is not None and v.shape[0] != length:
        raise ValueError(f"dimension mismatch: expected length {length}, got {v.shape[0]}")
    return v


def matvec(A, v, counters=None):
    """A @ v; deterministic sequential summation within each row."""
    v = as_vector(v, A.shape[1])
    if counters is not None:
        counters.matvec_A += 1
    return kernels.csr_matvec(A.indptr, A.indices, A.data, v)


def matvec_adjoint(A, v, counters=None):
    """A^H @ v without forming A^H."""
    v = as_vector(v, A.shape[0])
    if counters is not None:
        counters.matvec_AH += 1
    return kernels.csr_matvec_adjoint(A.indptr, A.indices, A.data, v, A.shape[1])


def dot_conj(u, v, counters=None):
    """sum(conj(u_i) * v_i)."""
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    if counters is not None:
        counters.dot_products += 1
    return complex(np.vdot(u, v))


def axpy(alpha, x, y, counters=None):
    """Return y + alpha*x as a new vector."""
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    if counters is not None:
        counters.saxpys += 1
    return y + alpha * x


def scale(alpha, x, counters=None):
    if counters is not None:
        counters.scalings += 1
    return alpha * x


def norm2(v):
    return float(np.linalg.norm(v))
