"""Unit tests for exact linear algebra helpers."""

from fractions import Fraction

import numpy as np
import pytest

from crn_dot.linalg import bareiss_rank, matmul, to_fraction, zeros


class TestToFraction:
    """Tests for to_fraction."""

    def test_decimal_string_is_exact(self):
        """Decimal text should become the exact decimal rational."""
        assert to_fraction("0.571429") == Fraction(571429, 1000000)

    def test_fraction_string(self):
        """p/q text should parse as a fraction."""
        assert to_fraction(" 1/3 ") == Fraction(1, 3)

    def test_float_uses_shortest_repr(self):
        """0.1 should become 1/10, not the binary expansion."""
        assert to_fraction(0.1) == Fraction(1, 10)

    def test_int_and_fraction_pass_through(self):
        """Integers and fractions should be returned unchanged in value."""
        assert to_fraction(3) == 3
        assert to_fraction(Fraction(2, 7)) == Fraction(2, 7)

    @pytest.mark.parametrize("bad", ["abc", "1/0", True, ""])
    def test_rejects_non_numbers(self, bad):
        """Unreadable values should raise ValueError."""
        with pytest.raises(ValueError):
            to_fraction(bad)


class TestProducts:
    """Tests for matmul and zeros."""

    def test_matmul_matches_hand_result(self):
        """A 2x2 product should match the hand computation."""
        a = [[1, 2], [3, 4]]
        b = [[Fraction(1, 2), 0], [0, 1]]
        assert matmul(a, b) == [[Fraction(1, 2), 2], [Fraction(3, 2), 4]]

    def test_matmul_rejects_mismatched_shapes(self):
        """Inner dimensions must agree."""
        with pytest.raises(ValueError):
            matmul([[1, 2]], [[1, 2]])

    def test_zeros(self):
        """zeros should be all zero."""
        assert zeros(2, 3) == [[0, 0, 0], [0, 0, 0]]


class TestBareissRank:
    """Tests for bareiss_rank."""

    def test_empty_matrix(self):
        """No rows means rank zero."""
        assert bareiss_rank([]) == 0

    def test_dependent_rows(self):
        """A row that is a rational combination of others adds nothing."""
        rows = [[1, 2, 3], [Fraction(1, 2), 1, Fraction(3, 2)], [0, 1, 1]]
        assert bareiss_rank(rows) == 2

    def test_full_rank_with_fractions(self):
        """Fractional entries should be handled exactly."""
        rows = [[Fraction(1, 3), 0], [0, Fraction(2, 7)]]
        assert bareiss_rank(rows) == 2

    def test_ragged_matrix_rejected(self):
        """Rows of different length should raise."""
        with pytest.raises(ValueError):
            bareiss_rank([[1, 2], [1]])

    def test_agrees_with_numpy_on_small_integer_matrices(self):
        """Exact rank should match numpy's on small integer matrices."""
        rng = np.random.default_rng(7)
        for _ in range(50):
            rows, cols = rng.integers(1, 6, size=2)
            a = rng.integers(-2, 3, size=(rows, cols))
            expected = int(np.linalg.matrix_rank(a.astype(float)))
            assert bareiss_rank(a.tolist()) == expected
