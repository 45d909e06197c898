"""ML(n)BiCGStab with A^H (ML(n)BiCGStabt), plain and right-preconditioned.

Both solvers keep the g_s and w_s vectors of the active window in
n-slot circular storage: the vector with index s lives in slot
``r(n, s + 1) - 1``. Each k-iteration ends with ``w_k = A g_k`` (or
``A M^{-1} g_k``), which keeps the recursive residual close to b - A x_k.

Termination follows the reference Matlab driver: the recursive residual
is tested after every update (including the intermediate u_k of the
omega step), one k-iteration is counted per inner step, and the iteration
limit is checked after the convergence test.
"""

import numpy as np

from ..indexing import r as phase
from ..indexing import split
from ..linalg import OpCounters, axpy, dot_conj, matvec, matvec_adjoint, norm2, scale
from ..precond import Identity, apply_inv, apply_inv_adjoint
from ..shadow import ShadowSpec, build_shadow
from ._common import (Breakdown, Flag, IterationState, SolverConfig, finish,
                      perturb_omega, prepare, select_omega, true_error)


class _Run:
    """Bookkeeping shared by the two drivers: history, limits, callback."""

    def __init__(self, A, b, x, config, callback):
        self.A, self.b = A, b
        self.config = config
        self.callback = callback
        self.bnrm = norm2(b) or 1.0
        self.max_it = config.iteration_limit(A.shape[0])
        self.ctr = OpCounters()
        self.setup = OpCounters()
        self.history = []
        self.te_hist = [] if config.track_true_error else None
        self.omegas = []
        self.k = 0

    def log(self, x, res_vec):
        rel = norm2(res_vec) / self.bnrm
        self.history.append(rel)
        if self.te_hist is not None:
            self.te_hist.append(true_error(self.A, x, self.b))
        return rel < self.config.tol

    def end_setup(self):
        self.setup = self.ctr.copy()

    def loop_counters(self):
        return self.ctr - self.setup

    def check_c(self, c, q_norm, w):
        if abs(c) <= self.config.breakdown_eps * q_norm * norm2(w):
            raise Breakdown(f"c_{self.k}")

    def notify(self, x, r, **kw):
        if self.callback is not None:
            self.callback(IterationState(k=self.k, x=x, r=r, counters=self.loop_counters(), **kw))

    def report(self, method, x, r, flag, site=None):
        return finish(method, self.A, self.b, x, r, flag, self.k, self.history,
                      self.loop_counters(), self.setup, self.config, self.omegas, site,
                      self.te_hist)

    def omega(self, u, z):
        try:
            om = select_omega(u, z, self.config.kappa, self.ctr)
        except ZeroDivisionError:
            raise Breakdown(f"Au_{self.k}") from None
        om = perturb_omega(om, norm2(u), norm2(z), self.config.omega_perturb)
        self.omegas.append(om)
        return om


def _shadow(A, r0, Q, config):
    if Q is None:
        return build_shadow(r0, ShadowSpec(config.n, config.seed))
    Q = np.asarray(Q, dtype=np.complex128)
    if Q.ndim != 2 or Q.shape[0] != A.shape[0]:
        raise ValueError(f"Q must be N x n with N = {A.shape[0]}, got {Q.shape}")
    return Q


def solve_ml_bicgstabt(A, b, x0=None, Q=None, config=None, callback=None):
    """ML(n)BiCGStabt without preconditioning, driven by the index functions.

    ``Q`` defaults to ``[r0, sign(randn(N, n-1))]`` from ``config.seed``;
    when given, its column count sets n. Returns ``(x, report)``.
    """
    config = config or SolverConfig()
    b, x, _ = prepare(A, b, x0)
    run = _Run(A, b, x, config, callback)
    ctr = run.ctr

    r = b - matvec(A, x, ctr)
    if run.log(x, r):
        return x, run.report("mlbicgstabt", x, r, Flag.CONVERGED)
    Q = _shadow(A, r, Q, config)
    n = Q.shape[1]
    q = [np.ascontiguousarray(Q[:, i]) for i in range(n)]
    q_norm = [norm2(v) for v in q]
    F = [matvec_adjoint(A, q[i], ctr) for i in range(n - 1)]

    G = [None] * n
    W = [None] * n
    c = [0j] * n
    G[0] = r.copy()
    W[0] = matvec(A, G[0], ctr)
    c[0] = dot_conj(q[0], W[0], ctr)
    e = dot_conj(q[0], r, ctr)
    run.end_setup()
    omega = 1 + 0j
    try:
        run.check_c(c[0], q_norm[0], W[0])
    except Breakdown as exc:
        return x, run.report("mlbicgstabt", x, r, Flag.BREAKDOWN, exc.site)

    try:
        while True:
            run.k = k = run.k + 1
            j, i = split(n, k)
            prev = i - 1
            alpha = e / c[prev]
            beta, beta_t = {}, {}
            u = None
            if i < n:
                x = axpy(alpha, G[prev], x, ctr)
                r = axpy(-alpha, W[prev], r, ctr)
                if run.log(x, r):
                    run.notify(x, r, alpha=alpha, omega=omega)
                    return x, run.report("mlbicgstabt", x, r, Flag.CONVERGED)
                if k >= run.max_it:
                    run.notify(x, r, alpha=alpha, omega=omega)
                    return x, run.report("mlbicgstabt", x, r, Flag.MAX_ITERATIONS)
                e = dot_conj(q[i], r, ctr)
                if j >= 1:
                    # previous-cycle window s = k-n .. jn-1
                    zw, gk = r, None
                    for s in range(k - n, j * n):
                        sl = phase(n, s + 1) - 1
                        qz = e if s == k - n else dot_conj(q[sl], zw, ctr)
                        bt = -qz / c[sl]
                        beta_t[s] = bt
                        zw = axpy(bt, W[sl], zw, ctr)
                        gk = scale(bt, G[sl], ctr) if gk is None else axpy(bt, G[sl], gk, ctr)
                    gk = axpy(-1 / omega, gk, zw, ctr)
                else:
                    gk = r
                # current-cycle window s = jn .. k-1 uses f = A^H q
                for s in range(j * n, k):
                    sl = phase(n, s + 1) - 1
                    bs = -dot_conj(F[sl], gk, ctr) / c[sl]
                    beta[s] = bs
                    gk = axpy(bs, G[sl], gk, ctr)
            else:
                x = axpy(alpha, G[prev], x, ctr)
                u = axpy(-alpha, W[prev], r, ctr)
                if norm2(u) / run.bnrm < run.config.tol:
                    run.log(x, u)
                    run.notify(x, u, u=u, alpha=alpha, omega=omega)
                    return x, run.report("mlbicgstabt", x, u, Flag.CONVERGED)
                Au = matvec(A, u, ctr)
                omega = run.omega(u, Au)
                x = axpy(omega, u, x, ctr)
                r = axpy(-omega, Au, u, ctr)
                if run.log(x, r):
                    run.notify(x, r, u=u, alpha=alpha, omega=omega)
                    return x, run.report("mlbicgstabt", x, r, Flag.CONVERGED)
                if k >= run.max_it:
                    run.notify(x, r, u=u, alpha=alpha, omega=omega)
                    return x, run.report("mlbicgstabt", x, r, Flag.MAX_ITERATIONS)
                e = dot_conj(q[0], r, ctr)
                zw, gk = r, None
                for s in range(j * n, k):
                    sl = phase(n, s + 1) - 1
                    qz = e if s == j * n else dot_conj(q[sl], zw, ctr)
                    bt = -qz / c[sl]
                    beta_t[s] = bt
                    zw = axpy(bt, W[sl], zw, ctr)
                    gk = scale(bt, G[sl], ctr) if gk is None else axpy(bt, G[sl], gk, ctr)
                gk = axpy(-1 / omega, gk, zw, ctr)

            cur = phase(n, k + 1) - 1
            G[cur] = gk
            W[cur] = matvec(A, gk, ctr)
            c[cur] = dot_conj(q[cur], W[cur], ctr)
            run.notify(x, r, u=u, g=G[cur], w=W[cur], alpha=alpha, omega=omega,
                       beta=beta, beta_tilde=beta_t)
            run.check_c(c[cur], q_norm[cur], W[cur])
    except Breakdown as exc:
        return x, run.report("mlbicgstabt", x, r, Flag.BREAKDOWN, exc.site)


def solve_ml_bicgstabt_prec(A, b, x0=None, Q=None, M=None, config=None, callback=None):
    """Right-preconditioned ML(n)BiCGStabt in split (j, i) loop form.

    Iterates on ``A M^{-1} y = b`` and accumulates ``x = M^{-1} y``
    directly. ``F = M^{-H} A^H [q_1..q_{n-1}]`` is formed once up front.
    With ``M`` the identity the iterates match :func:`solve_ml_bicgstabt`.
    """
    config = config or SolverConfig()
    b, x, _ = prepare(A, b, x0)
    N = A.shape[0]
    M = Identity(N) if M is None else M
    if M.n != N:
        raise ValueError(f"preconditioner size {M.n} does not match N = {N}")
    run = _Run(A, b, x, config, callback)
    ctr = run.ctr
    name = "mlbicgstabt-prec"

    r = b - matvec(A, x, ctr)
    if run.log(x, r):
        return x, run.report(name, x, r, Flag.CONVERGED)
    Q = _shadow(A, r, Q, config)
    n = Q.shape[1]
    q = [np.ascontiguousarray(Q[:, i]) for i in range(n)]
    q_norm = [norm2(v) for v in q]
    F = [apply_inv_adjoint(M, matvec_adjoint(A, q[i], ctr), ctr) for i in range(n - 1)]

    G = [None] * n
    W = [None] * n
    c = [0j] * n
    G[0] = r.copy()
    g_hat = apply_inv(M, G[0], ctr)
    W[0] = matvec(A, g_hat, ctr)
    c[0] = dot_conj(q[0], W[0], ctr)
    e = dot_conj(q[0], r, ctr)
    run.end_setup()
    omega = 1 + 0j
    try:
        run.check_c(c[0], q_norm[0], W[0])
    except Breakdown as exc:
        return x, run.report(name, x, r, Flag.BREAKDOWN, exc.site)

    try:
        j = 0
        while True:
            for i in range(1, n):
                run.k = k = run.k + 1
                beta, beta_t = {}, {}
                alpha = e / c[i - 1]
                x = axpy(alpha, g_hat, x, ctr)
                r = axpy(-alpha, W[i - 1], r, ctr)
                if run.log(x, r):
                    run.notify(x, r, alpha=alpha, omega=omega)
                    return x, run.report(name, x, r, Flag.CONVERGED)
                if k >= run.max_it:
                    run.notify(x, r, alpha=alpha, omega=omega)
                    return x, run.report(name, x, r, Flag.MAX_ITERATIONS)
                e = dot_conj(q[i], r, ctr)
                if j >= 1:
                    bt = -e / c[i]
                    beta_t[(j - 1) * n + i] = bt
                    zw = axpy(bt, W[i], r, ctr)
                    gk = scale(bt, G[i], ctr)
                    for s in range(i + 1, n):
                        bt = -dot_conj(q[s], zw, ctr) / c[s]
                        beta_t[(j - 1) * n + s] = bt
                        zw = axpy(bt, W[s], zw, ctr)
                        gk = axpy(bt, G[s], gk, ctr)
                    gk = axpy(-1 / omega, gk, zw, ctr)
                    start = 0
                else:
                    # first cycle: no previous-cycle window
                    bs = -dot_conj(F[0], r, ctr) / c[0]
                    beta[0] = bs
                    gk = axpy(bs, G[0], r, ctr)
                    start = 1
                for s in range(start, i):
                    bs = -dot_conj(F[s], gk, ctr) / c[s]
                    beta[j * n + s] = bs
                    gk = axpy(bs, G[s], gk, ctr)
                G[i] = gk
                g_hat = apply_inv(M, gk, ctr)
                W[i] = matvec(A, g_hat, ctr)
                c[i] = dot_conj(q[i], W[i], ctr)
                run.notify(x, r, g=G[i], w=W[i], alpha=alpha, omega=omega,
                           beta=beta, beta_tilde=beta_t)
                run.check_c(c[i], q_norm[i], W[i])

            # closing step of cycle j: k = (j + 1) n
            run.k = k = run.k + 1
            alpha = e / c[n - 1]
            x = axpy(alpha, g_hat, x, ctr)
            u = axpy(-alpha, W[n - 1], r, ctr)
            if norm2(u) / run.bnrm < run.config.tol:
                run.log(x, u)
                run.notify(x, u, u=u, alpha=alpha, omega=omega)
                return x, run.report(name, x, u, Flag.CONVERGED)
            u_hat = apply_inv(M, u, ctr)
            z = matvec(A, u_hat, ctr)
            omega = run.omega(u, z)
            x = axpy(omega, u_hat, x, ctr)
            r = axpy(-omega, z, u, ctr)
            if run.log(x, r):
                run.notify(x, r, u=u, alpha=alpha, omega=omega)
                return x, run.report(name, x, r, Flag.CONVERGED)
            if k >= run.max_it:
                run.notify(x, r, u=u, alpha=alpha, omega=omega)
                return x, run.report(name, x, r, Flag.MAX_ITERATIONS)
            beta_t = {}
            e = dot_conj(q[0], r, ctr)
            bt = -e / c[0]
            beta_t[j * n] = bt
            zw = axpy(bt, W[0], r, ctr)
            gk = scale(bt, G[0], ctr)
            for s in range(1, n):
                bt = -dot_conj(q[s], zw, ctr) / c[s]
                beta_t[j * n + s] = bt
                zw = axpy(bt, W[s], zw, ctr)
                gk = axpy(bt, G[s], gk, ctr)
            gk = axpy(-1 / omega, gk, zw, ctr)
            G[0] = gk
            g_hat = apply_inv(M, gk, ctr)
            W[0] = matvec(A, g_hat, ctr)
            c[0] = dot_conj(q[0], W[0], ctr)
            run.notify(x, r, u=u, g=G[0], w=W[0], alpha=alpha, omega=omega,
                       beta_tilde=beta_t)
            run.check_c(c[0], q_norm[0], W[0])
            j += 1
    except Breakdown as exc:
        return x, run.report(name, x, r, Flag.BREAKDOWN, exc.site)
