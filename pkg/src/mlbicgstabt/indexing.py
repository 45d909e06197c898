"""Index functions mapping the flat iteration counter k to (cycle, phase).

For ``k = n*j + i`` with ``1 <= i <= n`` we have ``g(n, k) == j`` and
``r(n, k) == i``.
"""

from typing import NamedTuple


class IndexPair(NamedTuple):
    cycle: int
    phase: int


def _check(n):
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")


def g(n: int, k: int) -> int:
    """Cycle index floor((k - 1) / n)."""
    _check(n)
    # Python's // already floors toward minus infinity
    return (k - 1) // n


def r(n: int, k: int) -> int:
    """Phase index k - n*g(n, k), always in 1..n."""
    return k - n * g(n, k)


def split(n: int, k: int) -> IndexPair:
    j = g(n, k)
    return IndexPair(j, k - n * j)
