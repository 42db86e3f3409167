"""Exact rational linear algebra helpers.

Everything here works on plain Python lists of ``Fraction`` (or ``int``)
values. Rank is computed by fraction-free (Bareiss) elimination on an
integer-scaled copy of the matrix, so no tolerance is ever involved.
"""

from fractions import Fraction
from math import lcm
from typing import Sequence, Union

Number = Union[int, Fraction]
Matrix = list[list[Fraction]]


def to_fraction(value: Union[int, float, str, Fraction]) -> Fraction:
    """Convert a user-supplied number to an exact rational.

    Strings are parsed as decimals or ``p/q`` fractions, so ``"0.571429"``
    becomes ``571429/1000000``. Floats go through their shortest repr for
    the same reason.

    Raises:
        ValueError: If the value cannot be read as a rational.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError(f"not a number: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError) as e:
        raise ValueError(f"not a rational number: {value!r}") from e


def zeros(rows: int, cols: int) -> Matrix:
    """Return a rows x cols matrix of exact zeros."""
    return [[Fraction(0)] * cols for _ in range(rows)]


def matmul(a: Sequence[Sequence[Number]], b: Sequence[Sequence[Number]]) -> Matrix:
    """Exact matrix product ``a @ b``."""
    if not a:
        return []
    inner = len(b)
    if any(len(row) != inner for row in a):
        raise ValueError("matrix dimensions do not match")
    cols = len(b[0]) if b else 0
    out = zeros(len(a), cols)
    for i, row in enumerate(a):
        out_row = out[i]
        for k, a_ik in enumerate(row):
            if a_ik == 0:
                continue
            b_row = b[k]
            for j in range(cols):
                if b_row[j] != 0:
                    out_row[j] += a_ik * b_row[j]
    return out


def _integer_rows(rows: Sequence[Sequence[Number]]) -> list[list[int]]:
    """Scale each row by the lcm of its denominators."""
    out = []
    for row in rows:
        fracs = [Fraction(v) for v in row]
        scale = 1
        for v in fracs:
            scale = lcm(scale, v.denominator)
        out.append([int(v * scale) for v in fracs])
    return out


def bareiss_rank(rows: Sequence[Sequence[Number]]) -> int:
    """Rank of a rational matrix by fraction-free Gaussian elimination.

    Rows are first scaled to integers (which does not change the rank);
    afterwards every intermediate entry is a minor of that integer matrix
    and the division by the previous pivot is exact.

    Args:
        rows: Matrix given as a sequence of equally long rows.

    Returns:
        The exact rank.
    """
    if not rows:
        return 0
    a = _integer_rows(rows)
    n_rows = len(a)
    n_cols = len(a[0])
    if any(len(row) != n_cols for row in a):
        raise ValueError("ragged matrix")

    rank = 0
    prev = 1
    for col in range(n_cols):
        if rank == n_rows:
            break
        pivot_row = next((r for r in range(rank, n_rows) if a[r][col] != 0), None)
        if pivot_row is None:
            continue
        if pivot_row != rank:
            a[rank], a[pivot_row] = a[pivot_row], a[rank]
        pivot = a[rank][col]
        top = a[rank]
        for r in range(rank + 1, n_rows):
            row = a[r]
            factor = row[col]
            for c in range(col + 1, n_cols):
                row[c] = (pivot * row[c] - factor * top[c]) // prev
            row[col] = 0
        prev = pivot
        rank += 1
    return rank
