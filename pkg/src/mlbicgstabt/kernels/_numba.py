"""numba-compiled CSR, triangular-solve and incomplete-LU kernels.

Every kernel here has a counterpart with the same signature in
``_numpy.py``; the two must agree to round-off.
"""

import numpy as np
from numba import njit

name = "numba"


@njit(cache=True)
def csr_matvec(indptr, indices, data, x):
    nrows = indptr.shape[0] - 1
    out = np.zeros(nrows, dtype=np.complex128)
    for i in range(nrows):
        acc = 0j
        for p in range(indptr[i], indptr[i + 1]):
            acc += data[p] * x[indices[p]]
        out[i] = acc
    return out


@njit(cache=True)
def csr_matvec_adjoint(indptr, indices, data, x, ncols):
    # scatter over rows: A^H is never formed
    nrows = indptr.shape[0] - 1
    out = np.zeros(ncols, dtype=np.complex128)
    for i in range(nrows):
        xi = x[i]
        if xi == 0:
            continue
        for p in range(indptr[i], indptr[i + 1]):
            out[indices[p]] += np.conj(data[p]) * xi
    return out


@njit(cache=True)
def csr_lower_solve(indptr, indices, data, b):
    """Solve L y = b, L lower triangular in CSR. Returns (y, bad_row)."""
    n = indptr.shape[0] - 1
    y = np.empty(n, dtype=np.complex128)
    for i in range(n):
        acc = b[i]
        d = 0j
        for p in range(indptr[i], indptr[i + 1]):
            j = indices[p]
            if j < i:
                acc -= data[p] * y[j]
            elif j == i:
                d += data[p]
        if d == 0:
            return y, i
        y[i] = acc / d
    return y, -1


@njit(cache=True)
def csr_upper_solve(indptr, indices, data, b):
    n = indptr.shape[0] - 1
    y = np.empty(n, dtype=np.complex128)
    for i in range(n - 1, -1, -1):
        acc = b[i]
        d = 0j
        for p in range(indptr[i], indptr[i + 1]):
            j = indices[p]
            if j > i:
                acc -= data[p] * y[j]
            elif j == i:
                d += data[p]
        if d == 0:
            return y, i
        y[i] = acc / d
    return y, -1


@njit(cache=True)
def _diagonal(indptr, indices, data):
    n = indptr.shape[0] - 1
    d = np.zeros(n, dtype=np.complex128)
    for i in range(n):
        for p in range(indptr[i], indptr[i + 1]):
            if indices[p] == i:
                d[i] += data[p]
    return d


@njit(cache=True)
def csr_lower_solve_adjoint(indptr, indices, data, b):
    """Solve L^H y = b with L lower triangular in CSR (backward, scatter form)."""
    n = indptr.shape[0] - 1
    d = _diagonal(indptr, indices, data)
    rhs = b.copy()
    y = np.empty(n, dtype=np.complex128)
    for i in range(n - 1, -1, -1):
        if d[i] == 0:
            return y, i
        yi = rhs[i] / np.conj(d[i])
        y[i] = yi
        for p in range(indptr[i], indptr[i + 1]):
            j = indices[p]
            if j < i:
                rhs[j] -= np.conj(data[p]) * yi
    return y, -1


@njit(cache=True)
def csr_upper_solve_adjoint(indptr, indices, data, b):
    """Solve U^H y = b with U upper triangular in CSR (forward, scatter form)."""
    n = indptr.shape[0] - 1
    d = _diagonal(indptr, indices, data)
    rhs = b.copy()
    y = np.empty(n, dtype=np.complex128)
    for i in range(n):
        if d[i] == 0:
            return y, i
        yi = rhs[i] / np.conj(d[i])
        y[i] = yi
        for p in range(indptr[i], indptr[i + 1]):
            j = indices[p]
            if j > i:
                rhs[j] -= np.conj(data[p]) * yi
    return y, -1


@njit(cache=True)
def _grow_int(a, size):
    out = np.empty(max(2 * a.shape[0], size), dtype=a.dtype)
    out[: a.shape[0]] = a
    return out


@njit(cache=True)
def _grow_complex(a, size):
    out = np.empty(max(2 * a.shape[0], size), dtype=a.dtype)
    out[: a.shape[0]] = a
    return out


@njit(cache=True)
def ilu_threshold(n, col_ptr, row_idx, vals, col_tol, row_tol, pivot):
    """Left-looking threshold ILU with optional partial (row) pivoting.

    Input is A in CSC form. An off-diagonal entry of column j that sits in
    original row i is dropped when its magnitude is below
    ``col_tol[j] + row_tol[i]`` (L entries are tested before scaling).
    Returns COO triplets of L (strict part, rows in original numbering),
    of U (rows in pivot order), the pivot order ``perm`` with ``perm[k]``
    the original row chosen at step k, and the failing column (-1 when
    the factorization succeeded).
    """
    cap = max(16, 2 * col_ptr[n])
    l_rows = np.empty(cap, dtype=np.int64)
    l_cols = np.empty(cap, dtype=np.int64)
    l_vals = np.empty(cap, dtype=np.complex128)
    u_rows = np.empty(cap, dtype=np.int64)
    u_cols = np.empty(cap, dtype=np.int64)
    u_vals = np.empty(cap, dtype=np.complex128)
    nl = 0
    nu = 0

    # L(:, k) stored contiguously: lstart[k]..lstart[k+1]
    lstart = np.zeros(n + 1, dtype=np.int64)
    perm = np.full(n, -1, dtype=np.int64)
    pos = np.full(n, -1, dtype=np.int64)

    work = np.zeros(n, dtype=np.complex128)
    touched = np.zeros(n, dtype=np.bool_)
    touched_list = np.empty(n, dtype=np.int64)

    for j in range(n):
        ntouched = 0
        for p in range(col_ptr[j], col_ptr[j + 1]):
            r = row_idx[p]
            work[r] += vals[p]
            if not touched[r]:
                touched[r] = True
                touched_list[ntouched] = r
                ntouched += 1
        tol = col_tol[j]

        for k in range(j):
            prow = perm[k]
            if not touched[prow]:
                continue
            ukj = work[prow]
            work[prow] = 0j
            if ukj == 0:
                continue
            if abs(ukj) < tol + row_tol[prow]:
                continue
            if nu >= u_rows.shape[0]:
                u_rows = _grow_int(u_rows, nu + 1)
                u_cols = _grow_int(u_cols, nu + 1)
                u_vals = _grow_complex(u_vals, nu + 1)
            u_rows[nu] = k
            u_cols[nu] = j
            u_vals[nu] = ukj
            nu += 1
            for q in range(lstart[k], lstart[k + 1]):
                r = l_rows[q]
                work[r] -= l_vals[q] * ukj
                if not touched[r]:
                    touched[r] = True
                    touched_list[ntouched] = r
                    ntouched += 1

        prow = -1
        if pivot:
            best = -1.0
            for t in range(ntouched):
                r = touched_list[t]
                if pos[r] == -1 and abs(work[r]) > best:
                    best = abs(work[r])
                    prow = r
        else:
            prow = j
        if prow == -1 or work[prow] == 0:
            return (l_rows[:nl], l_cols[:nl], l_vals[:nl], u_rows[:nu],
                    u_cols[:nu], u_vals[:nu], perm, j)
        piv = work[prow]
        perm[j] = prow
        pos[prow] = j
        if nu >= u_rows.shape[0]:
            u_rows = _grow_int(u_rows, nu + 1)
            u_cols = _grow_int(u_cols, nu + 1)
            u_vals = _grow_complex(u_vals, nu + 1)
        u_rows[nu] = j
        u_cols[nu] = j
        u_vals[nu] = piv
        nu += 1

        for t in range(ntouched):
            r = touched_list[t]
            v = work[r]
            if pos[r] == -1 and v != 0 and abs(v) >= tol + row_tol[r]:
                if nl >= l_rows.shape[0]:
                    l_rows = _grow_int(l_rows, nl + 1)
                    l_cols = _grow_int(l_cols, nl + 1)
                    l_vals = _grow_complex(l_vals, nl + 1)
                l_rows[nl] = r
                l_cols[nl] = j
                l_vals[nl] = v / piv
                nl += 1
            work[r] = 0j
            touched[r] = False
        lstart[j + 1] = nl

    return (l_rows[:nl], l_cols[:nl], l_vals[:nl], u_rows[:nu], u_cols[:nu],
            u_vals[:nu], perm, -1)
