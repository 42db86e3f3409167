"""Unit tests for the exact bounded-variable simplex."""

from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest

from crn_dot.simplex import (
    INFEASIBLE,
    LIMIT,
    OPTIMAL,
    UNBOUNDED,
    LinearProgram,
    Tableau,
    solve_lp,
)


def _solve_square(a, b):
    """Exact Gaussian elimination; None when singular."""
    n = len(a)
    m = [list(map(Fraction, row)) + [Fraction(rhs)] for row, rhs in zip(a, b)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            return None
        m[col], m[pivot] = m[pivot], m[col]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col] / m[col][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [m[i][n] / m[i][i] for i in range(n)]


def _feasible(lp, x):
    for j, v in enumerate(x):
        if v < lp.lower[j] or (lp.upper[j] is not None and v > lp.upper[j]):
            return False
    for row, sense, rhs in zip(lp.rows, lp.senses, lp.rhs):
        lhs = sum(a * x[j] for j, a in row.items())
        if (sense == "<=" and lhs > rhs) or (sense == ">=" and lhs < rhs) or (sense == "=" and lhs != rhs):
            return False
    return True


def vertex_optimum(lp):
    """Brute-force optimum over all vertices of a bounded LP (None if infeasible).

    Rows have integer coefficients, so a nonsingular basis has |det| >= 1 and
    a float solve screens the candidates before the exact one.
    """
    n = lp.num_vars
    planes = []
    for row, rhs in zip(lp.rows, lp.rhs):
        planes.append(([row.get(j, 0) for j in range(n)], rhs))
    for j in range(n):
        unit = [1 if k == j else 0 for k in range(n)]
        planes.append((unit, lp.lower[j]))
        planes.append((unit, lp.upper[j]))
    lower = np.array([float(v) for v in lp.lower])
    upper = np.array([float(v) for v in lp.upper])
    best = None
    for subset in combinations(planes, n):
        a = np.array([[float(v) for v in p[0]] for p in subset])
        if abs(np.linalg.det(a)) < 0.5:
            continue
        approx = np.linalg.solve(a, np.array([float(p[1]) for p in subset]))
        if np.any(approx < lower - 1e-7) or np.any(approx > upper + 1e-7):
            continue
        x = _solve_square([p[0] for p in subset], [p[1] for p in subset])
        if x is None or not _feasible(lp, x):
            continue
        value = sum(c * v for c, v in zip(lp.objective, x))
        if best is None or value < best:
            best = value
    return best


def random_lp(rng, n=3, rows=3, with_equalities=True):
    senses = ["<=", ">="] + (["="] if with_equalities else [])
    lp = LinearProgram(
        objective=[Fraction(int(v)) for v in rng.integers(-3, 4, size=n)],
        lower=[Fraction(int(v)) for v in rng.integers(-1, 1, size=n)],
        upper=[Fraction(int(v)) for v in rng.integers(1, 4, size=n)],
    )
    for _ in range(rows):
        coeffs = {j: Fraction(int(v)) for j, v in enumerate(rng.integers(-3, 4, size=n)) if v}
        lp.add_row(coeffs, senses[int(rng.integers(len(senses)))], Fraction(int(rng.integers(-3, 6)), int(rng.integers(1, 3))))
    return lp


class TestSolveLp:
    """Tests for solve_lp on hand-made programs."""

    def test_simple_maximization(self):
        """max x + y s.t. x + 2y <= 4, 3x + y <= 6 is 14/5 at (8/5, 6/5)."""
        lp = LinearProgram(objective=[Fraction(-1), Fraction(-1)], lower=[0, 0], upper=[None, None])
        lp.add_row({0: 1, 1: 2}, "<=", 4)
        lp.add_row({0: 3, 1: 1}, "<=", 6)
        result = solve_lp(lp)
        assert result.status == OPTIMAL
        assert result.objective == Fraction(-14, 5)
        assert result.values == [Fraction(8, 5), Fraction(6, 5)]

    def test_equality_and_lower_bounds(self):
        """x + y = 3 with x >= 1, y >= 1, minimize x gives x = 1."""
        lp = LinearProgram(objective=[Fraction(1), Fraction(0)], lower=[1, 1], upper=[None, None])
        lp.add_row({0: 1, 1: 1}, "=", 3)
        result = solve_lp(lp)
        assert result.values == [1, 2]

    def test_upper_bound_flip(self):
        """Without rows, minimizing -x pushes x to its upper bound."""
        lp = LinearProgram(objective=[Fraction(-1)], lower=[Fraction(-2)], upper=[Fraction(5, 2)])
        result = solve_lp(lp)
        assert result.values == [Fraction(5, 2)]

    def test_infeasible(self):
        """x <= 1 and x >= 2 cannot both hold."""
        lp = LinearProgram(objective=[Fraction(0)], lower=[0], upper=[None])
        lp.add_row({0: 1}, "<=", 1)
        lp.add_row({0: 1}, ">=", 2)
        result = solve_lp(lp)
        assert result.status == INFEASIBLE
        assert result.certificate > 0

    def test_unbounded_with_ray(self):
        """min -x with x unbounded above has an improving ray."""
        lp = LinearProgram(objective=[Fraction(-1), Fraction(0)], lower=[0, 0], upper=[None, None])
        lp.add_row({0: 1, 1: -1}, "<=", 1)
        result = solve_lp(lp)
        assert result.status == UNBOUNDED
        ray = result.certificate
        assert ray[0] > 0
        assert ray[0] - ray[1] <= 0

    def test_iteration_limit(self):
        """A zero iteration budget stops before the first pivot."""
        lp = LinearProgram(objective=[Fraction(-1)], lower=[0], upper=[None])
        lp.add_row({0: 1}, "<=", 1)
        assert solve_lp(lp, max_iterations=0).status == LIMIT

    def test_fixed_variable(self):
        """lower == upper fixes a variable."""
        lp = LinearProgram(objective=[Fraction(1), Fraction(1)], lower=[2, 0], upper=[2, None])
        lp.add_row({0: 1, 1: 1}, ">=", 5)
        assert solve_lp(lp).values == [2, 3]

    @pytest.mark.parametrize(
        "lower, upper, sense",
        [([0], [None], "<"), ([None], [None], "<="), ([2], [1], "<=")],
    )
    def test_validation(self, lower, upper, sense):
        """Bad senses and bounds are rejected."""
        lp = LinearProgram(objective=[Fraction(1)], lower=lower, upper=upper)
        lp.add_row({0: 1}, sense, 1)
        with pytest.raises(ValueError):
            solve_lp(lp)

    def test_float_arithmetic(self):
        """Float mode agrees with exact mode on a small program."""
        lp = LinearProgram(objective=[Fraction(-1), Fraction(-1)], lower=[0, 0], upper=[None, None])
        lp.add_row({0: 1, 1: 2}, "<=", 4)
        lp.add_row({0: 3, 1: 1}, "<=", 6)
        result = solve_lp(lp, "float")
        assert result.status == OPTIMAL
        assert result.objective == pytest.approx(-2.8)


class TestAgainstVertexEnumeration:
    """Random bounded programs against brute-force vertex enumeration."""

    def test_random_programs(self):
        """Status and optimal value match the enumeration oracle."""
        rng = np.random.default_rng(2024)
        for _ in range(150):
            lp = random_lp(rng, n=int(rng.integers(1, 4)), rows=int(rng.integers(1, 5)))
            expected = vertex_optimum(lp)
            result = solve_lp(lp)
            if expected is None:
                assert result.status == INFEASIBLE
            else:
                assert result.status == OPTIMAL
                assert result.objective == expected
                assert _feasible(lp, result.values)

    @pytest.mark.integration
    def test_six_variable_programs(self):
        """100 programs with up to six variables and eight rows."""
        rng = np.random.default_rng(606)
        for _ in range(100):
            lp = random_lp(rng, n=int(rng.integers(4, 7)), rows=int(rng.integers(4, 9)))
            expected = vertex_optimum(lp)
            result = solve_lp(lp)
            if expected is None:
                assert result.status == INFEASIBLE
            else:
                assert result.status == OPTIMAL
                assert result.objective == expected
                assert _feasible(lp, result.values)

    def test_float_mode_matches_exact(self):
        """Float optima agree with the exact optima."""
        rng = np.random.default_rng(99)
        for _ in range(60):
            lp = random_lp(rng, with_equalities=False)
            exact = solve_lp(lp)
            approx = solve_lp(lp, "float")
            assert approx.status == exact.status
            if exact.is_optimal:
                assert approx.objective == pytest.approx(float(exact.objective), abs=1e-7)


class TestWarmStart:
    """Tests for Tableau.fix and reoptimize."""

    def test_fix_then_reoptimize_matches_cold_solve(self):
        """Dual simplex after a fixing gives the cold-start optimum."""
        rng = np.random.default_rng(5)
        checked = 0
        for _ in range(150):
            lp = random_lp(rng)
            tab = Tableau(lp)
            if not tab.solve().is_optimal:
                continue
            j = int(rng.integers(lp.num_vars))
            value = Fraction(int(rng.integers(int(lp.lower[j]), int(lp.upper[j]) + 1)))
            warm = tab.copy()
            assert warm.fix(j, value)
            result = warm.reoptimize()
            cold = solve_lp(lp.with_fixings({j: value}))
            assert result.status == cold.status
            if cold.is_optimal:
                assert result.objective == cold.objective
                assert result.values[j] == value
                checked += 1
        assert checked > 10

    def test_fix_out_of_range(self):
        """Fixing outside the bounds is refused."""
        lp = LinearProgram(objective=[Fraction(1)], lower=[0], upper=[Fraction(1)])
        tab = Tableau(lp)
        tab.solve()
        assert not tab.fix(0, 2)

    def test_copy_is_independent(self):
        """Fixing a copy leaves the original tableau untouched."""
        lp = LinearProgram(objective=[Fraction(-1), Fraction(-1)], lower=[0, 0], upper=[Fraction(1), Fraction(1)])
        lp.add_row({0: 1, 1: 1}, "<=", Fraction(3, 2))
        tab = Tableau(lp)
        before = tab.solve().values
        other = tab.copy()
        other.fix(0, 0)
        other.reoptimize()
        assert tab.values() == before
