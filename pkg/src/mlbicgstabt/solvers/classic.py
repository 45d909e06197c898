"""Baseline BiCG and BiCGStab, right-preconditioned, same report contract."""

import numpy as np

from ..linalg import OpCounters, as_vector, axpy, dot_conj, matvec, matvec_adjoint, norm2
from ..precond import Identity, apply_inv, apply_inv_adjoint
from ._common import (Breakdown, Flag, IterationState, SolverConfig, finish,
                      perturb_omega, prepare, select_omega)


def _tiny(x, scale, eps):
    return abs(x) <= eps * scale


def solve_bicgstab(A, b, x0=None, M=None, config=None, shadow=None, callback=None):
    """Preconditioned BiCGStab; one iteration is one full (alpha, omega) step.

    ``shadow`` is the fixed left vector (default r0). Omega uses the same
    selection rule (and kappa) as the ML(n) solvers.
    """
    config = config or SolverConfig()
    b, x, bnrm = prepare(A, b, x0)
    N = A.shape[0]
    M = Identity(N) if M is None else M
    ctr = OpCounters()
    max_it = config.iteration_limit(N)
    eps = config.breakdown_eps

    r = b - matvec(A, x, ctr)
    history = [norm2(r) / bnrm]
    omegas = []
    setup = ctr.copy()

    def report(flag, k, res, site=None):
        return finish("bicgstab", A, b, x, res, flag, k, history, ctr - setup, setup, config,
                      omegas, site)

    if history[0] < config.tol:
        return x, report(Flag.CONVERGED, 0, r)
    rt = r.copy() if shadow is None else as_vector(shadow, N)
    rt_norm = norm2(rt)
    rho_old = alpha = omega = 1 + 0j
    p = v = None
    k = 0
    try:
        while True:
            k += 1
            rho = dot_conj(rt, r, ctr)
            if _tiny(rho, rt_norm * norm2(r), eps):
                raise Breakdown(f"rho_{k}")
            if p is None:
                p = r.copy()
            else:
                beta = (rho / rho_old) * (alpha / omega)
                p = axpy(beta, axpy(-omega, v, p, ctr), r, ctr)
            p_hat = apply_inv(M, p, ctr)
            v = matvec(A, p_hat, ctr)
            sigma = dot_conj(rt, v, ctr)
            if _tiny(sigma, rt_norm * norm2(v), eps):
                raise Breakdown(f"rt_v_{k}")
            alpha = rho / sigma
            s = axpy(-alpha, v, r, ctr)
            if norm2(s) / bnrm < config.tol:
                x = axpy(alpha, p_hat, x, ctr)
                history.append(norm2(s) / bnrm)
                if callback is not None:
                    callback(IterationState(k=k, x=x, r=s, alpha=alpha, omega=omega))
                return x, report(Flag.CONVERGED, k, s)
            s_hat = apply_inv(M, s, ctr)
            t = matvec(A, s_hat, ctr)
            try:
                omega = select_omega(s, t, config.kappa, ctr)
            except ZeroDivisionError:
                raise Breakdown(f"t_{k}") from None
            omega = perturb_omega(omega, norm2(s), norm2(t), config.omega_perturb)
            omegas.append(omega)
            x = axpy(alpha, p_hat, x, ctr)
            x = axpy(omega, s_hat, x, ctr)
            r = axpy(-omega, t, s, ctr)
            history.append(norm2(r) / bnrm)
            rho_old = rho
            if callback is not None:
                callback(IterationState(k=k, x=x, r=r, u=s, alpha=alpha, omega=omega,
                                        counters=ctr - setup))
            if history[-1] < config.tol:
                return x, report(Flag.CONVERGED, k, r)
            if k >= max_it:
                return x, report(Flag.MAX_ITERATIONS, k, r)
    except Breakdown as exc:
        return x, report(Flag.BREAKDOWN, k, r, exc.site)


def solve_bicg(A, b, x0=None, M=None, config=None, shadow=None, callback=None):
    """Preconditioned BiCG (uses A^H and M^{-H}); shadow residual defaults to r0."""
    config = config or SolverConfig()
    b, x, bnrm = prepare(A, b, x0)
    N = A.shape[0]
    M = Identity(N) if M is None else M
    ctr = OpCounters()
    max_it = config.iteration_limit(N)
    eps = config.breakdown_eps

    r = b - matvec(A, x, ctr)
    history = [norm2(r) / bnrm]
    setup = ctr.copy()

    def report(flag, k, site=None):
        return finish("bicg", A, b, x, r, flag, k, history, ctr - setup, setup, config,
                      site=site)

    if history[0] < config.tol:
        return x, report(Flag.CONVERGED, 0)
    rt = r.copy() if shadow is None else as_vector(shadow, N).copy()
    rho_old = 1 + 0j
    p = pt = None
    k = 0
    try:
        while True:
            k += 1
            z = apply_inv(M, r, ctr)
            zt = apply_inv_adjoint(M, rt, ctr)
            rho = dot_conj(rt, z, ctr)
            if _tiny(rho, norm2(rt) * norm2(z), eps):
                raise Breakdown(f"rho_{k}")
            if p is None:
                p, pt = z, zt
            else:
                beta = rho / rho_old
                p = axpy(beta, p, z, ctr)
                pt = axpy(np.conj(beta), pt, zt, ctr)
            qv = matvec(A, p, ctr)
            qt = matvec_adjoint(A, pt, ctr)
            sigma = dot_conj(pt, qv, ctr)
            if _tiny(sigma, norm2(pt) * norm2(qv), eps):
                raise Breakdown(f"pt_Ap_{k}")
            alpha = rho / sigma
            x = axpy(alpha, p, x, ctr)
            r = axpy(-alpha, qv, r, ctr)
            rt = axpy(-np.conj(alpha), qt, rt, ctr)
            rho_old = rho
            history.append(norm2(r) / bnrm)
            if callback is not None:
                callback(IterationState(k=k, x=x, r=r, alpha=alpha, counters=ctr - setup))
            if history[-1] < config.tol:
                return x, report(Flag.CONVERGED, k)
            if k >= max_it:
                return x, report(Flag.MAX_ITERATIONS, k)
    except Breakdown as exc:
        return x, report(Flag.BREAKDOWN, k, exc.site)
