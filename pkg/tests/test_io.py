import gzip
import json

import numpy as np
import pytest

from mlbicgstabt import CSRMatrix, SolverConfig, solve_ml_bicgstabt
from mlbicgstabt.io import (IndexOutOfRange, MalformedEntry, MalformedHeader, MatrixMarketError,
                            UnsupportedField, default_rhs, load_problem, load_rhs, read_dense,
                            read_matrix_market, read_report, write_dense, write_matrix_market,
                            write_report)


def write(tmp_path, text, name="m.mtx"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_identity(tmp_path):
    p = write(tmp_path, "%%MatrixMarket matrix coordinate real general\n% c\n3 3 3\n"
                        "1 1 1\n2 2 1\n3 3 1\n")
    A = read_matrix_market(p)
    assert np.array_equal(A.to_dense(), np.eye(3))


def test_symmetric_expansion(tmp_path):
    p = write(tmp_path, "%%MatrixMarket matrix coordinate real symmetric\n3 3 3\n"
                        "1 1 2\n3 1 -1\n2 2 5\n")
    A, info = read_matrix_market(p, return_info=True)
    assert np.array_equal(A.to_dense(), [[2, 0, -1], [0, 5, 0], [-1, 0, 0]])
    assert info["stored_entries"] == 3 and info["nnz"] == 4


def test_skew_and_hermitian(tmp_path):
    p = write(tmp_path, "%%MatrixMarket matrix coordinate real skew-symmetric\n2 2 1\n2 1 3\n")
    assert np.array_equal(read_matrix_market(p).to_dense(), [[0, -3], [3, 0]])
    p = write(tmp_path, "%%MatrixMarket matrix coordinate complex hermitian\n2 2 2\n"
                        "1 1 1 0\n2 1 1 2\n")
    assert np.array_equal(read_matrix_market(p).to_dense(), [[1, 1 - 2j], [1 + 2j, 0]])


def test_pattern_integer_and_duplicates(tmp_path):
    p = write(tmp_path, "%%MatrixMarket matrix coordinate pattern general\n2 2 2\n1 2\n2 1\n")
    assert np.array_equal(read_matrix_market(p).to_dense(), [[0, 1], [1, 0]])
    p = write(tmp_path, "%%MatrixMarket matrix coordinate integer general\n2 2 3\n"
                        "1 1 2\n1 1 3\n2 2 0\n")
    A = read_matrix_market(p)
    assert np.array_equal(A.to_dense(), [[5, 0], [0, 0]]) and A.nnz == 2


def test_gzip(tmp_path):
    p = tmp_path / "g.mtx.gz"
    with gzip.open(p, "wt") as fh:
        fh.write("%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 4.5\n")
    assert read_matrix_market(p).to_dense()[0, 0] == 4.5


@pytest.mark.parametrize("text,exc,line", [
    ("%%MatrixMarket matrix coordinate real\n1 1 1\n1 1 1\n", MalformedHeader, 1),
    ("%%MatrixMarket vector coordinate real general\n", UnsupportedField, 1),
    ("%%MatrixMarket matrix coordinate quaternion general\n", UnsupportedField, 1),
    ("%%MatrixMarket matrix coordinate real general\n2 x 1\n", MalformedHeader, 2),
    ("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n", IndexOutOfRange, 3),
    ("%%MatrixMarket matrix coordinate real general\n%\n2 2 2\n1 1 1.0\n1 2 abc\n",
     MalformedEntry, 5),
    ("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n", MalformedEntry, 3),
    ("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n1 2 1.0\n", IndexOutOfRange, 3),
    ("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1\n", MalformedEntry, 3),
])
def test_errors_carry_line(tmp_path, text, exc, line):
    p = write(tmp_path, text)
    with pytest.raises(exc) as info:
        read_matrix_market(p)
    assert info.value.line == line
    assert f":{line}:" in str(info.value)
    assert isinstance(info.value, MatrixMarketError)


def test_write_read_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    D = np.where(rng.random((6, 5)) < 0.5, rng.standard_normal((6, 5)), 0)
    D = D + 1j * np.where(rng.random((6, 5)) < 0.3, rng.standard_normal((6, 5)), 0)
    A = CSRMatrix.from_dense(D)
    p1, p2 = tmp_path / "a.mtx", tmp_path / "b.mtx"
    write_matrix_market(p1, A, comment="test")
    B = read_matrix_market(p1)
    assert np.array_equal(B.to_dense(), D)
    write_matrix_market(p2, B, comment="test")
    assert p1.read_bytes() == p2.read_bytes()


def test_dense_round_trip_and_rhs_column(tmp_path):
    X = np.arange(12.0).reshape(4, 3)
    p = tmp_path / "x.mtx"
    write_dense(p, X)
    assert np.array_equal(read_dense(p).real, X)
    A = CSRMatrix.identity(4)
    assert np.array_equal(load_rhs(p, A, 2), X[:, 1])
    with pytest.raises(ValueError):
        load_rhs(p, A, 4)
    assert np.array_equal(load_rhs("ones", CSRMatrix.diag([1.0, 2, 3, 4]), 1), [1, 2, 3, 4])


def test_array_symmetric(tmp_path):
    p = write(tmp_path, "%%MatrixMarket matrix array real symmetric\n2 2\n1\n2\n3\n")
    assert np.array_equal(read_dense(p).real, [[1, 2], [2, 3]])


def test_default_rhs_and_problem(tmp_path):
    D = np.array([[1.0, 2], [3, 4]])
    A = CSRMatrix.from_dense(D)
    assert np.array_equal(default_rhs(A), [3, 7])
    p = tmp_path / "two.mtx"
    write_matrix_market(p, A)
    inst = load_problem(p)
    assert inst.name == "two" and np.array_equal(inst.b, [3, 7])
    with pytest.raises(ValueError):
        load_problem(p, "ones", 1).__class__(A, np.ones(3), "bad", "x")


def report(track=False):
    D = np.diag(np.arange(1.0, 21.0))
    D[0, 5] = 0.3
    A = CSRMatrix.from_dense(D)
    return solve_ml_bicgstabt(A, np.ones(20),
                              config=SolverConfig(n=3, tol=1e-10, track_true_error=track))[1]


def test_json_round_trip(tmp_path):
    rep = report()
    p = tmp_path / "r.json"
    write_report(rep, "json", p)
    back = read_report(p)
    assert back.to_dict() == rep.to_dict()
    assert json.loads(p.read_text())["flag"] == "converged"


@pytest.mark.parametrize("track", [False, True])
def test_csv_round_trip(tmp_path, track):
    rep = report(track)
    p = tmp_path / "r.csv"
    write_report(rep, "csv", p)
    cols = read_report(p)
    assert cols["k"] == list(range(rep.iterations + 1))
    assert cols["relative_residual"] == rep.residual_history
    assert ("true_error" in cols) == track
    assert p.read_text().splitlines()[0].startswith("k,relative_residual")


def test_unknown_format(tmp_path):
    with pytest.raises(ValueError):
        write_report(report(), "xml", tmp_path / "r.xml")
