"""ML(n)BiCG: BiCG with the shadow Krylov space replaced by a block space.

The left vectors are the raw p_k = (A^H)^{g(k)} q_{r(k)} (not
bi-orthogonalized). This solver is slow and mostly serves as the
reference for the polynomial relations of the stabilized variants.
"""

from ..linalg import OpCounters, axpy, dot_conj, matvec, norm2
from ..shadow import LeftLanczosBasis
from ._common import Breakdown, Flag, IterationState, SolverConfig, finish, prepare
from .mlbicgstabt import _shadow


def solve_ml_bicg(A, b, x0=None, Q=None, config=None, callback=None):
    config = config or SolverConfig()
    b, x, bnrm = prepare(A, b, x0)
    ctr = OpCounters()
    max_it = config.iteration_limit(A.shape[0])
    eps = config.breakdown_eps

    r = b - matvec(A, x, ctr)
    history = [norm2(r) / bnrm]

    def report(flag, k, site=None):
        return finish("mlbicg", A, b, x, r, flag, k, history, ctr - setup, setup, config,
                      site=site)

    setup = OpCounters()
    if history[0] < config.tol:
        return x, report(Flag.CONVERGED, 0)
    Q = _shadow(A, r, Q, config)
    n = Q.shape[1]
    P = LeftLanczosBasis(A, Q, ctr)

    g = {0: r.copy()}
    Ag = {0: matvec(A, r, ctr)}
    den = {}
    setup = ctr.copy()

    k = 0
    try:
        while True:
            k += 1
            p = P[k]
            d = dot_conj(p, Ag[k - 1], ctr)
            if abs(d) <= eps * norm2(p) * norm2(Ag[k - 1]):
                raise Breakdown(f"pAg_{k - 1}")
            den[k - 1] = d
            alpha = dot_conj(p, r, ctr) / d
            x = axpy(alpha, g[k - 1], x, ctr)
            r = axpy(-alpha, Ag[k - 1], r, ctr)
            history.append(norm2(r) / bnrm)
            if history[-1] < config.tol:
                if callback is not None:
                    callback(IterationState(k=k, x=x, r=r, alpha=alpha))
                return x, report(Flag.CONVERGED, k)
            if k >= max_it:
                return x, report(Flag.MAX_ITERATIONS, k)

            lo = max(k - n, 0)
            v = matvec(A, r, ctr)
            gk = r
            beta = {}
            for s in range(lo, k):
                bs = -dot_conj(P[s + 1], v, ctr) / den[s]
                beta[s] = bs
                v = axpy(bs, Ag[s], v, ctr)
                gk = axpy(bs, g[s], gk, ctr)
            g[k] = gk
            Ag[k] = matvec(A, gk, ctr)
            for s in [s for s in g if s < k - n]:
                del g[s], Ag[s]
            if callback is not None:
                callback(IterationState(k=k, x=x, r=r, g=gk, w=Ag[k], alpha=alpha, beta=beta,
                                        counters=ctr - setup))
    except Breakdown as exc:
        return x, report(Flag.BREAKDOWN, k, exc.site)
