from ._common import (ConvergenceReport, Flag, IterationState, SolverConfig, perturb_omega,
                      residual_gap, select_omega, true_error)
from .classic import solve_bicg, solve_bicgstab
from .mlbicg import solve_ml_bicg
from .mlbicgstabt import solve_ml_bicgstabt, solve_ml_bicgstabt_prec

METHODS = ("mlbicgstabt", "mlbicgstabt-prec", "mlbicg", "bicgstab", "bicg")
ML_METHODS = ("mlbicgstabt", "mlbicgstabt-prec", "mlbicg")


def run_method(method, A, b, x0=None, Q=None, M=None, config=None, callback=None):
    """Dispatch by CLI method name. Unpreconditioned methods ignore ``M``."""
    if method == "mlbicgstabt":
        return solve_ml_bicgstabt(A, b, x0, Q, config, callback)
    if method == "mlbicgstabt-prec":
        return solve_ml_bicgstabt_prec(A, b, x0, Q, M, config, callback)
    if method == "mlbicg":
        return solve_ml_bicg(A, b, x0, Q, config, callback)
    if method == "bicgstab":
        return solve_bicgstab(A, b, x0, M, config, callback=callback)
    if method == "bicg":
        return solve_bicg(A, b, x0, M, config, callback=callback)
    raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")


__all__ = [
    "ConvergenceReport", "Flag", "IterationState", "SolverConfig", "METHODS", "ML_METHODS",
    "perturb_omega", "residual_gap", "run_method", "select_omega", "solve_bicg",
    "solve_bicgstab", "solve_ml_bicg", "solve_ml_bicgstabt", "solve_ml_bicgstabt_prec",
    "true_error",
]
