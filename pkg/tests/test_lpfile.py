"""Unit tests for LP export and solution import."""

from fractions import Fraction

import pytest

from crn_dot.lpfile import (
    LINE_WIDTH,
    SolutionImportError,
    export_lp,
    format_number,
    import_solution,
    parse_solution,
)
from crn_dot.solver import FEASIBLE


def solution_text(values, skip=()):
    return "".join(f"{name} {value}\n" for name, value in values.items() if name not in skip)


class TestFormatNumber:
    """Tests for format_number."""

    @pytest.mark.parametrize(
        "value, text",
        [
            (Fraction(3), "3"),
            (Fraction(1, 4), "0.25"),
            (Fraction(11, 100), "0.11"),
            (Fraction(-5, 2), "-2.5"),
            (Fraction(1, 20), "0.05"),
            (Fraction(-7), "-7"),
        ],
    )
    def test_terminating_decimals_are_exact(self, value, text):
        """Fractions with a finite decimal expansion print exactly."""
        assert format_number(value) == text

    def test_repeating_decimal_uses_17_digits(self):
        """1/3 falls back to 17 significant digits."""
        assert format_number(Fraction(1, 3)) == format(1 / 3, ".17g")


class TestExportLp:
    """Tests for export_lp."""

    def test_sections_in_order(self, conjugate_model):
        """Header, objective, rows, bounds, binaries, End."""
        text = export_lp(conjugate_model)
        lines = text.splitlines()
        assert lines[0].startswith("\\ crn-dot realization model m=2 n=4 s=1 slots=3")
        order = [lines.index(s) for s in ("Minimize", "Subject To", "Bounds", "Binaries", "End")]
        assert order == sorted(order)
        assert lines[-1] == "End"

    def test_objective_and_named_rows(self, conjugate_model):
        """Rows carry the model's constraint names."""
        text = export_lp(conjugate_model)
        assert " obj: - L_1 - L_2 - L_3" in text
        assert " lc_1_1:" in text
        assert " span: " in text
        assert " wr5_4:" in text

    def test_bounds_and_binaries(self, conjugate_model):
        """Continuous variables get bounds; binaries are listed."""
        text = export_lp(conjugate_model)
        assert " 0.11 <= d_1 <= 10" in text
        assert " 0 <= w_1_2 <= 100" in text
        binaries = text.split("Binaries\n", 1)[1]
        assert "Lam_1_1" in binaries
        assert "d_1" not in binaries

    def test_lines_are_wrapped(self, conjugate_model):
        """Body lines stay within the line width."""
        lines = export_lp(conjugate_model).splitlines()[1:]
        assert all(len(line) <= LINE_WIDTH for line in lines)

    def test_deterministic(self, conjugate_model):
        """Same model, same text."""
        assert export_lp(conjugate_model) == export_lp(conjugate_model)


class TestParseSolution:
    """Tests for parse_solution."""

    def test_formats_and_headers(self):
        """Headers, comments and trailing annotations are skipped."""
        text = "objective value: -3\n# comment\nd_1 = 1\nd_2 0.5 (obj:0)\n\nb_1_3=1/2\n"
        assert parse_solution(text) == {"d_1": 1, "d_2": Fraction(1, 2), "b_1_3": Fraction(1, 2)}

    def test_repeated_name(self):
        """A name given twice is an error."""
        with pytest.raises(SolutionImportError, match="twice"):
            parse_solution("d_1 1\nd_1 2\n")

    def test_bad_value(self):
        """Values must be numbers."""
        with pytest.raises(SolutionImportError, match="line 1"):
            parse_solution("d_1 abc\n")

    def test_missing_value(self):
        """A bare name is an error."""
        with pytest.raises(SolutionImportError):
            parse_solution("d_1\n")


class TestImportSolution:
    """Tests for import_solution."""

    def test_hand_point_is_feasible(self, conjugate_model, conjugate_point):
        """The fixture point satisfies every row exactly."""
        values = conjugate_model.values_from_names(conjugate_point)
        assert conjugate_model.check(values) == []
        assert conjugate_model.objective_value(values) == -3

    def test_import_feasible_point(self, conjugate_model, conjugate_point):
        """A feasible point imports with the same binaries and objective."""
        solution = import_solution(solution_text(conjugate_point), conjugate_model)
        assert solution.status == FEASIBLE
        assert solution.objective == -3
        for v in conjugate_model.variables:
            if v.binary:
                assert solution[v.name] == conjugate_point[v.name]
        assert conjugate_model.check(conjugate_model.values_from_names(solution.values)) == []

    def test_exact_point_is_kept(self, conjugate_model, conjugate_point):
        """An exactly feasible import keeps every value, so c stays (1, 2)."""
        solution = import_solution(solution_text(conjugate_point), conjugate_model)
        assert solution.values == conjugate_point
        assert (1 / solution["d_1"], 1 / solution["d_2"]) == (1, 2)

    def test_inexact_continuous_part_is_resolved(self, conjugate_model, conjugate_point):
        """Values within tolerance but not exact are replaced by an exact vertex."""
        point = dict(conjugate_point, b_1_3=Fraction(1, 2) + Fraction(1, 10**10))
        solution = import_solution(solution_text(point), conjugate_model)
        values = conjugate_model.values_from_names(solution.values)
        assert conjugate_model.check(values) == []
        for v in conjugate_model.variables:
            if v.binary:
                assert solution[v.name] == conjugate_point[v.name]

    def test_small_perturbation_is_snapped(self, conjugate_model, conjugate_point):
        """Deviations below 1e-9 are accepted and made exact."""
        text = solution_text(conjugate_point).replace("Lam_1_1 1\n", "Lam_1_1 0.9999999999999\n")
        solution = import_solution(text, conjugate_model)
        assert solution["Lam_1_1"] == 1

    def test_violation_names_constraint(self, conjugate_model, conjugate_point):
        """The error names the first violated row."""
        point = dict(conjugate_point, b_1_3=Fraction(3, 5))
        with pytest.raises(SolutionImportError, match="lc_1_1"):
            import_solution(solution_text(point), conjugate_model)

    def test_all_zero_rejected(self, conjugate_model):
        """The zero point breaks the d bounds."""
        text = "".join(f"{v.name} 0\n" for v in conjugate_model.variables)
        with pytest.raises(SolutionImportError, match="bound:d_1"):
            import_solution(text, conjugate_model)

    def test_unknown_variable(self, conjugate_model, conjugate_point):
        """Names outside the model are rejected."""
        text = solution_text(conjugate_point) + "zz_1 0\n"
        with pytest.raises(SolutionImportError, match="unknown variable zz_1"):
            import_solution(text, conjugate_model)

    def test_missing_variable(self, conjugate_model, conjugate_point):
        """Every variable must be present unless missing_as_zero is set."""
        text = solution_text(conjugate_point, skip={"w_1_2"})
        with pytest.raises(SolutionImportError, match="missing variable w_1_2"):
            import_solution(text, conjugate_model)
        solution = import_solution(text, conjugate_model, missing_as_zero=True)
        assert solution.status == FEASIBLE

    def test_nonzeros_only(self, conjugate_model, conjugate_point):
        """Solvers that print only nonzeros work with missing_as_zero."""
        nonzero = {k: v for k, v in conjugate_point.items() if v}
        solution = import_solution(solution_text(nonzero), conjugate_model, missing_as_zero=True)
        assert solution.objective == -3
