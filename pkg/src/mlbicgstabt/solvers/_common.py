"""Configuration, reports and helpers shared by every solver."""

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..linalg import OpCounters, as_vector, dot_conj, matvec, norm2


class Flag(enum.Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"
    BREAKDOWN = "breakdown"

    @property
    def matlab_code(self):
        return {"converged": 0, "max_iterations": 1, "breakdown": -1}[self.value]


@dataclass
class SolverConfig:
    n: int = 4
    tol: float = 1e-7
    max_it: Optional[int] = None  # None means 10 * N
    kappa: float = 0.0
    seed: int = 0
    breakdown_eps: float = 1e-14
    omega_perturb: float = 1e-14
    track_true_error: bool = False

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_it is not None and self.max_it < 1:
            raise ValueError(f"max_it must be >= 1, got {self.max_it}")
        if self.kappa < 0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")
        if self.breakdown_eps < 0 or self.omega_perturb < 0:
            raise ValueError("breakdown_eps and omega_perturb must be non-negative")
        self.n = int(self.n)

    def iteration_limit(self, N):
        return 10 * N if self.max_it is None else int(self.max_it)


@dataclass
class ConvergenceReport:
    method: str
    flag: Flag
    iterations: int
    residual_history: list
    true_error: float
    residual_gap: float
    counters: OpCounters
    setup_counters: OpCounters = field(default_factory=OpCounters)
    omega_history: list = field(default_factory=list)
    true_error_history: Optional[list] = None
    breakdown_site: Optional[str] = None
    n: Optional[int] = None
    tol: Optional[float] = None

    @property
    def converged(self):
        return self.flag is Flag.CONVERGED

    def to_dict(self):
        return {
            "method": self.method,
            "flag": self.flag.value,
            "breakdown_site": self.breakdown_site,
            "iterations": self.iterations,
            "n": self.n,
            "tol": self.tol,
            "true_error": self.true_error,
            "residual_gap": self.residual_gap,
            "residual_history": list(self.residual_history),
            "true_error_history": None if self.true_error_history is None
            else list(self.true_error_history),
            "omega_history": [[w.real, w.imag] for w in self.omega_history],
            "counters": self.counters.as_dict(),
            "setup_counters": self.setup_counters.as_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            method=d["method"],
            flag=Flag(d["flag"]),
            breakdown_site=d.get("breakdown_site"),
            iterations=d["iterations"],
            n=d.get("n"),
            tol=d.get("tol"),
            true_error=d["true_error"],
            residual_gap=d["residual_gap"],
            residual_history=list(d["residual_history"]),
            true_error_history=d.get("true_error_history"),
            omega_history=[complex(re, im) for re, im in d.get("omega_history", [])],
            counters=OpCounters(**d["counters"]),
            setup_counters=OpCounters(**d.get("setup_counters", {})),
        )


@dataclass
class IterationState:
    """Snapshot handed to a solver callback once per k-iteration.

    Vectors are references into the solver's working set; copy them if
    they must outlive the callback. ``g``/``w`` are None on the iteration
    where the solver stops before forming them.
    """

    k: int
    x: np.ndarray
    r: np.ndarray
    u: Optional[np.ndarray] = None
    g: Optional[np.ndarray] = None
    w: Optional[np.ndarray] = None
    alpha: complex = 0j
    omega: complex = 1 + 0j
    beta: dict = field(default_factory=dict)
    beta_tilde: dict = field(default_factory=dict)
    counters: Optional[OpCounters] = None


class Breakdown(Exception):
    """Internal signal: a divisor vanished at ``site``."""

    def __init__(self, site):
        self.site = site
        super().__init__(site)


def select_omega(u, Au, kappa=0.0, counters=None):
    """Minimize ||u - omega*Au||_2, optionally kappa-adjusted.

    Returns ``(Au)^H u / ||Au||^2``. For ``kappa > 0`` and a normalized
    correlation ``rho = (Au)^H u / (||Au|| ||u||)`` with ``0 < |rho| < kappa``
    the step is enlarged to ``omega * kappa / |rho|``.
    Raises ZeroDivisionError when Au = 0.
    """
    den = dot_conj(Au, Au, counters).real
    if den == 0:
        raise ZeroDivisionError("||A u|| = 0")
    rho = dot_conj(Au, u, counters)
    omega = rho / den
    if kappa > 0:
        rho_n = abs(rho) / (np.sqrt(den) * norm2(u))
        if 0 < rho_n < kappa:
            omega = omega * kappa / rho_n
    return omega


def perturb_omega(omega, u_norm, Au_norm, rel):
    """Push a near-zero omega to magnitude rel*||u||/||Au||, keeping its phase."""
    thresh = rel * u_norm / Au_norm
    if abs(omega) >= thresh:
        return omega
    if omega == 0:
        return complex(thresh)
    return omega / abs(omega) * thresh


def residual_gap(A, x, b, r_computed):
    """||(b - A x) - r_computed||_2 / ||b||_2 (uninstrumented)."""
    b = as_vector(b)
    bnrm = norm2(b) or 1.0
    return norm2(b - matvec(A, x) - r_computed) / bnrm


def true_error(A, x, b):
    bnrm = norm2(b) or 1.0
    return norm2(b - matvec(A, x)) / bnrm


def prepare(A, b, x0):
    N, m = A.shape
    if N != m:
        raise ValueError(f"solvers need a square matrix, got {A.shape}")
    b = as_vector(b, N)
    x = np.zeros(N, dtype=np.complex128) if x0 is None else as_vector(x0, N).copy()
    bnrm = norm2(b)
    return b, x, (bnrm if bnrm != 0 else 1.0)


def finish(method, A, b, x, r, flag, k, history, counters, setup, config,
           omegas=(), site=None, te_hist=None):
    return ConvergenceReport(
        method=method,
        flag=flag,
        iterations=k,
        residual_history=history,
        true_error=true_error(A, x, b),
        residual_gap=residual_gap(A, x, b, r),
        counters=counters,
        setup_counters=setup,
        omega_history=list(omegas),
        true_error_history=te_hist,
        breakdown_site=site,
        n=getattr(config, "n", None),
        tol=config.tol,
    )
