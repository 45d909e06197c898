import os
from pathlib import Path

import numpy as np
import pytest

from mlbicgstabt import CSRMatrix

DATA_ENV = "MLBICGSTABT_DATA_DIR"


def data_dir():
    return Path(os.environ.get(DATA_ENV, Path(__file__).parent / "data"))


def find_matrix(name):
    """Return the path of ``name``.mtx(.gz) in the data dir, or None."""
    d = data_dir()
    for cand in (d / f"{name}.mtx", d / f"{name}.mtx.gz", d / name / f"{name}.mtx"):
        if cand.exists():
            return cand
    return None


def well_conditioned(N, seed, shift=3.0, complex_=False):
    """shift*I plus a scaled Gaussian block: spectrum stays away from 0."""
    rng = np.random.default_rng(seed)
    E = rng.standard_normal((N, N))
    if complex_:
        E = E + 1j * rng.standard_normal((N, N))
    A = shift * np.eye(N) + E / np.sqrt(N)
    b = rng.standard_normal(N) + (1j * rng.standard_normal(N) if complex_ else 0)
    return A, b


def random_sparse(N, density, seed, shift=4.0):
    """Sparse, diagonally shifted random matrix as (dense, CSR)."""
    rng = np.random.default_rng(seed)
    mask = rng.random((N, N)) < density
    A = np.where(mask, rng.standard_normal((N, N)), 0.0) + shift * np.eye(N)
    return A, CSRMatrix.from_dense(A)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def rel(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
