"""Preconditioners exposing M^{-1} v and M^{-H} v.

The ILU variant mirrors the three-output ``[L, U, P] = luinc(A, droptol)``
form: ``P A ~= L U`` with L unit lower triangular and P a row permutation.
"""

import numpy as np

from . import kernels
from .linalg import CSRMatrix, as_vector


class FactorizationBreakdown(ArithmeticError):
    """A zero pivot that (partial) pivoting could not avoid."""

    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"zero pivot at row/column {index}")


class Preconditioner:
    kind = "abstract"

    def __init__(self, n):
        self.n = n

    def solve(self, v):
        raise NotImplementedError

    def solve_adjoint(self, v):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n})"


class Identity(Preconditioner):
    kind = "none"

    def solve(self, v):
        return v.copy()

    solve_adjoint = solve


class Jacobi(Preconditioner):
    kind = "jacobi"

    def __init__(self, diag):
        diag = as_vector(diag)
        bad = np.flatnonzero(diag == 0)
        if bad.size:
            raise FactorizationBreakdown(int(bad[0]), f"zero diagonal entry in row {bad[0]}")
        super().__init__(diag.size)
        self.diag = diag

    @classmethod
    def from_matrix(cls, A):
        return cls(A.diagonal())

    def solve(self, v):
        return v / self.diag

    def solve_adjoint(self, v):
        return v / np.conj(self.diag)


class ILUT(Preconditioner):
    """Threshold incomplete LU factors with a row permutation.

    ``perm[i]`` is the row of A that became row i of ``P A``.
    """

    kind = "ilut"

    def __init__(self, L, U, perm, droptol=None, rule=None):
        super().__init__(L.shape[0])
        self.L = L
        self.U = U
        self.perm = np.asarray(perm, dtype=np.int64)
        self.droptol = droptol
        self.rule = rule
        if sorted(self.perm.tolist()) != list(range(self.n)):
            raise ValueError("perm is not a permutation")

    @property
    def P(self):
        return CSRMatrix(np.arange(self.n + 1), self.perm, np.ones(self.n), (self.n, self.n))

    def _check(self, bad, which):
        if bad >= 0:
            raise FactorizationBreakdown(int(bad), f"zero diagonal in {which} at row {bad}")

    def solve(self, v):
        L, U = self.L, self.U
        y, bad = kernels.csr_lower_solve(L.indptr, L.indices, L.data, v[self.perm])
        self._check(bad, "L")
        x, bad = kernels.csr_upper_solve(U.indptr, U.indices, U.data, y)
        self._check(bad, "U")
        return x

    def solve_adjoint(self, v):
        L, U = self.L, self.U
        z, bad = kernels.csr_upper_solve_adjoint(U.indptr, U.indices, U.data, np.asarray(v))
        self._check(bad, "U")
        y, bad = kernels.csr_lower_solve_adjoint(L.indptr, L.indices, L.data, z)
        self._check(bad, "L")
        x = np.empty_like(y)
        x[self.perm] = y
        return x

    def __repr__(self):
        return (f"ILUT(n={self.n}, droptol={self.droptol}, rule={self.rule}, "
                f"nnz_L={self.L.nnz}, nnz_U={self.U.nnz})")


DROP_RULES = ("row", "column")


def ilut_factorize(A, droptol=1e-3, pivot=True, rule="row"):
    """Left-looking threshold ILU of a square CSR matrix.

    While eliminating column j, an off-diagonal entry of U, or of L before
    scaling by the pivot, is discarded when its magnitude is below
    ``droptol * ||A[i, :]||_2`` for an entry in original row i
    (``rule="row"``, the default) or ``droptol * ||A[:, j]||_2``
    (``rule="column"``, the convention documented for Matlab's luinc).
    The pivot itself is always kept. With ``pivot=True`` the largest
    remaining entry of the column is chosen as pivot.
    """
    n, m = A.shape
    if n != m:
        raise ValueError(f"ILU needs a square matrix, got {A.shape}")
    if droptol < 0:
        raise ValueError("droptol must be non-negative")
    if rule not in DROP_RULES:
        raise ValueError(f"unknown drop rule {rule!r}; use row or column")
    col_ptr, row_idx, vals = A.to_csc()
    sq = np.abs(A.data) ** 2
    zero = np.zeros(n)
    if rule == "column":
        col_tol, row_tol = droptol * np.sqrt(np.bincount(A.indices, sq, minlength=n)), zero
    else:
        col_tol, row_tol = zero, droptol * np.sqrt(np.bincount(A.row_ids(), sq, minlength=n))
    lr, lc, lv, ur, uc, uv, perm, fail = kernels.ilu_threshold(
        n, col_ptr, row_idx, vals, col_tol, row_tol, bool(pivot))
    if fail >= 0:
        raise FactorizationBreakdown(int(fail), f"structurally zero pivot in column {fail}")
    pos = np.empty(n, dtype=np.int64)
    pos[perm] = np.arange(n)
    diag = np.arange(n)
    L = CSRMatrix.from_coo(np.concatenate([pos[lr], diag]), np.concatenate([lc, diag]),
                           np.concatenate([lv, np.ones(n)]), (n, n))
    U = CSRMatrix.from_coo(ur, uc, uv, (n, n))
    return ILUT(L, U, perm, droptol, rule)


def apply_inv(M, v, counters=None):
    """M^{-1} v."""
    v = as_vector(v, M.n)
    if counters is not None:
        counters.precond_solves += 1
    return M.solve(v)


def apply_inv_adjoint(M, v, counters=None):
    """M^{-H} v."""
    v = as_vector(v, M.n)
    if counters is not None:
        counters.precond_solves += 1
    return M.solve_adjoint(v)


def parse_precond(spec, A):
    """Build a preconditioner from a CLI string: none, jacobi or ilut:<droptol>[:row|:column]."""
    spec = (spec or "none").strip().lower()
    if spec in ("none", "identity"):
        return Identity(A.shape[0])
    if spec == "jacobi":
        return Jacobi.from_matrix(A)
    if spec == "ilut" or spec.startswith("ilut:"):
        parts = spec.split(":")[1:]
        rule = parts[1] if len(parts) > 1 else "row"
        if len(parts) > 2 or rule not in DROP_RULES:
            raise ValueError(f"bad ILUT spec {spec!r}; use ilut:<droptol>[:row|:column]")
        try:
            droptol = float(parts[0]) if parts and parts[0] else 1e-3
        except ValueError:
            raise ValueError(f"bad ILUT drop tolerance in {spec!r}") from None
        return ilut_factorize(A, droptol, rule=rule)
    raise ValueError(f"unknown preconditioner {spec!r}; "
                     "use none, jacobi or ilut:<droptol>[:row|:column]")
