"""Sparse Krylov solvers built around ML(n)BiCGStabt, the A^H-using
variant of ML(n)BiCGStab, with ILU preconditioning and a benchmark CLI."""

from .indexing import g, r, split
from .linalg import CSRMatrix, OpCounters, axpy, dot_conj, matvec, matvec_adjoint, norm2, scale
from .precond import (ILUT, FactorizationBreakdown, Identity, Jacobi, apply_inv,
                      apply_inv_adjoint, ilut_factorize, parse_precond)
from .shadow import LeftLanczosBasis, ShadowSpec, build_shadow, left_lanczos_vector
from .solvers import (ConvergenceReport, Flag, SolverConfig, residual_gap, run_method,
                      select_omega, solve_bicg, solve_bicgstab, solve_ml_bicg,
                      solve_ml_bicgstabt, solve_ml_bicgstabt_prec)

__version__ = "0.1.0"

__all__ = [
    "CSRMatrix", "ConvergenceReport", "FactorizationBreakdown", "Flag", "ILUT", "Identity",
    "Jacobi", "LeftLanczosBasis", "OpCounters", "ShadowSpec", "SolverConfig", "apply_inv",
    "apply_inv_adjoint", "axpy", "build_shadow", "dot_conj", "g", "ilut_factorize",
    "left_lanczos_vector", "matvec", "matvec_adjoint", "norm2", "parse_precond", "r",
    "residual_gap", "run_method", "scale", "select_omega", "solve_bicg", "solve_bicgstab",
    "solve_ml_bicg", "solve_ml_bicgstabt", "solve_ml_bicgstabt_prec", "split",
]
