"""Pure numpy fallback for the compiled kernels.

Vectorized where the data flow allows it (matvecs); the triangular solves
and the ILU are inherently sequential and run as Python loops over rows
or columns, which is slow but dependency-free.
"""

import heapq

import numpy as np

name = "numpy"


def _row_ids(indptr):
    return np.repeat(np.arange(indptr.shape[0] - 1), np.diff(indptr))


def _segment_sum(ids, weights, length):
    # bincount accumulates sequentially in index order
    re = np.bincount(ids, weights=weights.real, minlength=length)
    im = np.bincount(ids, weights=weights.imag, minlength=length)
    return re + 1j * im


def csr_matvec(indptr, indices, data, x):
    nrows = indptr.shape[0] - 1
    return _segment_sum(_row_ids(indptr), data * x[indices], nrows)


def csr_matvec_adjoint(indptr, indices, data, x, ncols):
    rows = _row_ids(indptr)
    return _segment_sum(indices, np.conj(data) * x[rows], ncols)


def csr_lower_solve(indptr, indices, data, b):
    n = indptr.shape[0] - 1
    y = np.empty(n, dtype=np.complex128)
    for i in range(n):
        cols = indices[indptr[i]:indptr[i + 1]]
        vals = data[indptr[i]:indptr[i + 1]]
        off = cols < i
        d = vals[cols == i].sum()
        if d == 0:
            return y, i
        y[i] = (b[i] - np.dot(vals[off], y[cols[off]])) / d
    return y, -1


def csr_upper_solve(indptr, indices, data, b):
    n = indptr.shape[0] - 1
    y = np.empty(n, dtype=np.complex128)
    for i in range(n - 1, -1, -1):
        cols = indices[indptr[i]:indptr[i + 1]]
        vals = data[indptr[i]:indptr[i + 1]]
        off = cols > i
        d = vals[cols == i].sum()
        if d == 0:
            return y, i
        y[i] = (b[i] - np.dot(vals[off], y[cols[off]])) / d
    return y, -1


def _adjoint_solve(indptr, indices, data, b, order, strict):
    n = indptr.shape[0] - 1
    rhs = np.array(b, dtype=np.complex128)
    y = np.empty(n, dtype=np.complex128)
    for i in order:
        cols = indices[indptr[i]:indptr[i + 1]]
        vals = data[indptr[i]:indptr[i + 1]]
        d = vals[cols == i].sum()
        if d == 0:
            return y, i
        y[i] = rhs[i] / np.conj(d)
        off = strict(cols, i)
        np.subtract.at(rhs, cols[off], np.conj(vals[off]) * y[i])
    return y, -1


def csr_lower_solve_adjoint(indptr, indices, data, b):
    n = indptr.shape[0] - 1
    return _adjoint_solve(indptr, indices, data, b, range(n - 1, -1, -1),
                          lambda c, i: c < i)


def csr_upper_solve_adjoint(indptr, indices, data, b):
    n = indptr.shape[0] - 1
    return _adjoint_solve(indptr, indices, data, b, range(n),
                          lambda c, i: c > i)


def ilu_threshold(n, col_ptr, row_idx, vals, col_tol, row_tol, pivot):
    """Same contract as the compiled kernel; a heap replaces the O(n) scan
    over earlier pivots so that only touched pivots are visited."""
    l_rows, l_cols, l_vals = [], [], []
    u_rows, u_cols, u_vals = [], [], []
    lcols = [None] * n
    perm = np.full(n, -1, dtype=np.int64)
    pos = np.full(n, -1, dtype=np.int64)

    def pack(fail):
        return (np.array(l_rows, dtype=np.int64), np.array(l_cols, dtype=np.int64),
                np.array(l_vals, dtype=np.complex128), np.array(u_rows, dtype=np.int64),
                np.array(u_cols, dtype=np.int64), np.array(u_vals, dtype=np.complex128),
                perm, fail)

    for j in range(n):
        work = {}
        sl = slice(col_ptr[j], col_ptr[j + 1])
        for r, v in zip(row_idx[sl], vals[sl]):
            work[int(r)] = work.get(int(r), 0j) + v
        tol = col_tol[j]

        heap = [int(pos[r]) for r in work if pos[r] != -1]
        heapq.heapify(heap)
        seen = set(heap)
        while heap:
            k = heapq.heappop(heap)
            prow = int(perm[k])
            ukj = work.pop(prow)
            if ukj == 0 or abs(ukj) < tol + row_tol[prow]:
                continue
            u_rows.append(k)
            u_cols.append(j)
            u_vals.append(ukj)
            rows, lv = lcols[k]
            for r, l in zip(rows, lv):
                work[r] = work.get(r, 0j) - l * ukj
                kr = int(pos[r])
                if kr != -1 and kr not in seen:
                    seen.add(kr)
                    heapq.heappush(heap, kr)

        if pivot:
            prow, best = -1, -1.0
            for r, v in work.items():
                if pos[r] == -1 and abs(v) > best:
                    prow, best = r, abs(v)
        else:
            prow = j
        if prow == -1 or work.get(prow, 0j) == 0:
            return pack(j)
        piv = work[prow]
        perm[j] = prow
        pos[prow] = j
        u_rows.append(j)
        u_cols.append(j)
        u_vals.append(piv)

        rows, lv = [], []
        for r, v in work.items():
            if pos[r] == -1 and v != 0 and abs(v) >= tol + row_tol[r]:
                rows.append(r)
                lv.append(v / piv)
        lcols[j] = (rows, lv)
        l_rows.extend(rows)
        l_cols.extend([j] * len(rows))
        l_vals.extend(lv)

    return pack(-1)
