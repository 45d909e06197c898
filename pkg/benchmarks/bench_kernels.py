"""Time the numba kernels against the pure numpy fallback.

    python benchmarks/bench_kernels.py --size 10000 --repeat 5

Each kernel is called once per backend before timing (numba compiles
on first use); the best of ``--repeat`` runs is reported. The last row
times a full preconditioned ML(n)BiCGStabt solve with each backend.
"""

import argparse
import time

import numpy as np

from mlbicgstabt import CSRMatrix, SolverConfig, ilut_factorize, kernels, solve_ml_bicgstabt_prec


def convection_diffusion(m, peclet=50.0):
    h = 1.0 / (m + 1)
    idx = np.arange(m * m).reshape(m, m)
    rows, cols, vals = [idx.ravel()], [idx.ravel()], [np.full(m * m, 4 + 2 * peclet * h)]
    for sl_a, sl_b, c in (((slice(1, None), slice(None)), (slice(None, -1), slice(None)),
                           -1 - peclet * h),
                          ((slice(None, -1), slice(None)), (slice(1, None), slice(None)), -1.0),
                          ((slice(None), slice(1, None)), (slice(None), slice(None, -1)),
                           -1 - peclet * h),
                          ((slice(None), slice(None, -1)), (slice(None), slice(1, None)), -1.0)):
        a, b = idx[sl_a].ravel(), idx[sl_b].ravel()
        rows.append(a)
        cols.append(b)
        vals.append(np.full(a.size, c))
    N = m * m
    return CSRMatrix.from_coo(np.concatenate(rows), np.concatenate(cols),
                              np.concatenate(vals), (N, N))


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def cases(A, M, x):
    csc = A.to_csc()
    N = A.shape[0]
    row_tol = 1e-3 * np.sqrt(np.bincount(A.row_ids(), np.abs(A.data) ** 2, minlength=N))
    L, U = M.L, M.U
    return {
        "csr_matvec": lambda: kernels.csr_matvec(A.indptr, A.indices, A.data, x),
        "csr_matvec_adjoint": lambda: kernels.csr_matvec_adjoint(A.indptr, A.indices, A.data,
                                                                 x, N),
        "csr_lower_solve": lambda: kernels.csr_lower_solve(L.indptr, L.indices, L.data, x),
        "csr_upper_solve": lambda: kernels.csr_upper_solve(U.indptr, U.indices, U.data, x),
        "csr_lower_solve_adjoint": lambda: kernels.csr_lower_solve_adjoint(
            L.indptr, L.indices, L.data, x),
        "csr_upper_solve_adjoint": lambda: kernels.csr_upper_solve_adjoint(
            U.indptr, U.indices, U.data, x),
        "ilu_threshold(1e-3)": lambda: kernels.ilu_threshold(N, *csc, np.zeros(N), row_tol,
                                                              True),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=10000, help="approximate number of unknowns")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--n", type=int, default=4, help="shadow dimension for the solve row")
    args = ap.parse_args(argv)

    m = max(int(np.sqrt(args.size)), 4)
    A = convection_diffusion(m)
    N = A.shape[0]
    x = np.random.default_rng(0).standard_normal(N) + 0j
    print(f"N = {N}, nnz = {A.nnz}, best of {args.repeat}")

    start = kernels.backend
    results = {}
    try:
        for name in ("numba", "numpy"):
            kernels.set_backend(name)
            M = ilut_factorize(A, 1e-3)
            for label, fn in cases(A, M, x).items():
                # the pure-python ILU and triangular sweeps are slow; time them once
                rep = 1 if name == "numpy" and ("solve" in label or "ilu" in label) else args.repeat
                results.setdefault(label, {})[name] = best_of(fn, rep)
            b = A @ np.ones(N)
            solve = lambda: solve_ml_bicgstabt_prec(A, b, M=M, config=SolverConfig(n=args.n))
            results.setdefault(f"solve n={args.n} + ILUT", {})[name] = best_of(solve, 1)
    finally:
        kernels.set_backend(start)

    width = max(len(k) for k in results)
    print(f"{'kernel':<{width}}  {'numba [s]':>11}  {'numpy [s]':>11}  {'speedup':>8}")
    for label, t in results.items():
        print(f"{label:<{width}}  {t['numba']:>11.3e}  {t['numpy']:>11.3e}  "
              f"{t['numpy'] / t['numba']:>7.1f}x")


if __name__ == "__main__":
    main()
