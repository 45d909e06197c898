import pytest
from hypothesis import given
from hypothesis import strategies as st

from mlbicgstabt.indexing import IndexPair, g, r, split


@pytest.mark.parametrize("n,k,want", [
    (4, 1, (0, 1)), (4, 4, (0, 4)), (4, 5, (1, 1)), (4, 8, (1, 4)),
    (1, 7, (6, 1)), (3, 0, (-1, 3)), (3, -2, (-1, 1)), (16, 33, (2, 1)),
])
def test_examples(n, k, want):
    assert (g(n, k), r(n, k)) == want
    assert split(n, k) == IndexPair(*want)


def test_rejects_nonpositive_n():
    with pytest.raises(ValueError):
        g(0, 3)
    with pytest.raises(ValueError):
        r(-1, 3)


@given(st.integers(1, 200), st.integers(-10**6, 10**6))
def test_decomposition(n, k):
    j, i = split(n, k)
    assert k == n * j + i
    assert 1 <= i <= n


@given(st.integers(1, 50), st.integers(-1000, 1000))
def test_shift_by_n(n, k):
    # one full cycle moves g by exactly one and leaves r alone
    assert g(n, k + n) == g(n, k) + 1
    assert r(n, k + n) == r(n, k)
