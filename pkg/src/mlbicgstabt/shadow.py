"""Shadow block Q and the left Lanczos vectors p_k = (A^H)^{g(k)} q_{r(k)}.

Random columns come from numpy's PCG64 bit generator seeded with the
user seed. The (n-1) x N standard normals are drawn row-major, one row
per column of Q, so column q_{i+1} is the i-th block of N draws. Signs of
exact zeros map to +1.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .indexing import g, r
from .linalg import as_vector, matvec_adjoint


class ZeroInitialResidual(ValueError):
    """r0 = 0: the initial guess already solves the system."""


@dataclass(frozen=True)
class ShadowSpec:
    n: int
    seed: int = 0
    mode: str = "rademacher"
    columns: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.mode not in ("rademacher", "provided"):
            raise ValueError(f"unknown shadow mode {self.mode!r}")
        if self.mode == "provided" and self.columns is None:
            raise ValueError("provided mode needs columns")


def rademacher_columns(N, m, seed):
    """N x m matrix of sign(randn) entries from PCG64(seed)."""
    rng = np.random.Generator(np.random.PCG64(seed))
    z = rng.standard_normal((m, N))
    return np.where(z < 0, -1.0, 1.0).T


def build_shadow(r0, spec):
    """Q = [r0, sign(randn(N, n-1))] (or the provided columns)."""
    r0 = as_vector(r0)
    if not np.any(r0):
        raise ZeroInitialResidual("initial residual is zero; x0 already solves the system")
    N = r0.shape[0]
    if spec.mode == "provided":
        cols = np.asarray(spec.columns, dtype=np.complex128)
        if cols.ndim == 1:
            cols = cols[:, None]
        if cols.shape[0] != N or cols.shape[1] < spec.n:
            raise ValueError(f"provided shadow block has shape {cols.shape}, need ({N}, >= {spec.n})")
        return np.ascontiguousarray(cols[:, : spec.n])
    Q = np.empty((N, spec.n), dtype=np.complex128)
    Q[:, 0] = r0
    if spec.n > 1:
        Q[:, 1:] = rademacher_columns(N, spec.n - 1, spec.seed)
    return Q


class LeftLanczosBasis:
    """Incremental p_k generator that caches the latest A^H power per column.

    Requests in increasing k (as ML(n)BiCG makes them) cost one adjoint
    matvec per new vector; an out-of-order request recomputes that column
    from q.
    """

    def __init__(self, A, Q, counters=None):
        if Q.shape[0] != A.shape[0]:
            raise ValueError(f"dimension mismatch: Q has {Q.shape[0]} rows, A is {A.shape}")
        self.A = A
        self.Q = Q
        self.n = Q.shape[1]
        self.counters = counters
        self._power = [0] * self.n
        self._vec = [Q[:, i].copy() for i in range(self.n)]

    def __getitem__(self, k):
        if k < 1:
            raise IndexError("p_k is defined for k >= 1")
        col = r(self.n, k) - 1
        want = g(self.n, k)
        if self._power[col] > want:
            self._power[col] = 0
            self._vec[col] = self.Q[:, col].copy()
        while self._power[col] < want:
            self._vec[col] = matvec_adjoint(self.A, self._vec[col], self.counters)
            self._power[col] += 1
        return self._vec[col]


def left_lanczos_vector(A, Q, k):
    """p_k = (A^H)^{g_n(k)} q_{r_n(k)} for n = Q.shape[1]."""
    return LeftLanczosBasis(A, Q)[k].copy()
