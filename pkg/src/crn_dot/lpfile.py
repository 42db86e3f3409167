"""CPLEX LP text export and solution import for external MILP solvers.

The exported file uses the model's variable and constraint names
(``b_2_4``, ``lc_1_3``), so any solver that reads LP files (GLPK, SCIP,
HiGHS, CBC) can solve it. Solutions come back as one ``name value`` or
``name = value`` pair per line; ``#`` starts a comment.
"""

import logging
import re
from fractions import Fraction
from typing import Iterable

from crn_dot.linalg import to_fraction
from crn_dot.model import MilpModel
from crn_dot.solver import FEASIBLE, MilpSolution, SolveStats, exact_point

logger = logging.getLogger(__name__)

IMPORT_TOLERANCE = Fraction(1, 10**9)
LINE_WIDTH = 78

_HEADER_RE = re.compile(r"^(objective|solution|optimal|status)\b", re.IGNORECASE)


class SolutionImportError(ValueError):
    """An external solution is incomplete or violates the model."""


def format_number(value: Fraction) -> str:
    """Exact decimal when one exists, otherwise 17 significant digits."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    d = value.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return format(float(value), ".17g")
    digits = max(twos, fives)
    scaled = abs(value) * 10**digits
    whole, frac = divmod(int(scaled), 10**digits)
    sign = "-" if value < 0 else ""
    return f"{sign}{whole}.{frac:0{digits}d}".rstrip("0")


def _terms(coeffs: Iterable[tuple[str, Fraction]]) -> list[str]:
    out = []
    for k, (name, a) in enumerate(coeffs):
        sign = "-" if a < 0 else "+"
        mag = abs(a)
        body = name if mag == 1 else f"{format_number(mag)} {name}"
        out.append(f"{sign} {body}" if k or a < 0 else body)
    return out


def _wrap(head: str, terms: list[str], tail: str = "") -> list[str]:
    lines = []
    current = head
    for term in terms + ([tail] if tail else []):
        if len(current) + len(term) + 1 > LINE_WIDTH and current.strip():
            lines.append(current)
            current = "   "
        current = f"{current} {term}" if current.strip() else f"{current}{term}"
    lines.append(current)
    return lines


def export_lp(model: MilpModel) -> str:
    """Render the model in CPLEX LP format."""
    names = [v.name for v in model.variables]
    cfg = model.config
    lines = [
        f"\\ crn-dot realization model m={model.m} n={model.n} s={model.s} "
        f"slots={model.slots} eps={cfg.eps} seed={cfg.seed} mode={cfg.mode.value} "
        f"theorem={cfg.theorem.value}",
        "Minimize",
    ]
    objective = [(names[j], a) for j, a in sorted(model.objective.items())]
    lines += _wrap(" obj:", _terms(objective) or ["0 " + names[0]])

    lines.append("Subject To")
    for c in model.constraints:
        terms = _terms((names[j], a) for j, a in sorted(c.coeffs.items())) or ["0 " + names[0]]
        lines += _wrap(f" {c.name}:", terms, f"{c.sense} {format_number(c.rhs)}")

    lines.append("Bounds")
    for v in model.variables:
        if v.binary:
            continue
        if v.upper is None:
            lines.append(f" {v.name} >= {format_number(v.lower)}")
        else:
            lines.append(f" {format_number(v.lower)} <= {v.name} <= {format_number(v.upper)}")

    binaries = [v.name for v in model.variables if v.binary]
    if binaries:
        lines.append("Binaries")
        lines += _wrap("", binaries)
    lines.append("End")
    return "\n".join(lines) + "\n"


def parse_solution(text: str) -> dict[str, Fraction]:
    """Read ``name value`` / ``name = value`` lines.

    Header lines such as ``objective value: -3`` are skipped; anything after
    the value (e.g. SCIP's ``(obj:0)``) is ignored.

    Raises:
        SolutionImportError: On unreadable values or repeated names.
    """
    values: dict[str, Fraction] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line or _HEADER_RE.match(line):
            continue
        parts = line.replace("=", " ").split()
        if len(parts) < 2:
            raise SolutionImportError(f"line {lineno}: expected 'name value', got {line!r}")
        name, text_value = parts[0], parts[1]
        if name in values:
            raise SolutionImportError(f"line {lineno}: {name} given twice")
        try:
            values[name] = to_fraction(text_value)
        except ValueError as e:
            raise SolutionImportError(f"line {lineno}: {e}") from e
    return values


def import_solution(
    text: str,
    model: MilpModel,
    missing_as_zero: bool = False,
) -> MilpSolution:
    """Load an external solution, check it, and make it exactly feasible.

    The values must satisfy every bound and constraint within 1e-9. With the
    binaries rounded, values that already satisfy the model exactly are kept
    as they are; otherwise the continuous part is re-solved over the
    rationals, so the returned point always has a zero residual.

    Args:
        text: Solution file contents.
        model: The model the solution belongs to.
        missing_as_zero: Treat variables absent from the file as 0 (solvers
            that print only nonzeros).

    Raises:
        SolutionImportError: Naming a missing or unknown variable, or the
            first violated constraint.
    """
    parsed = parse_solution(text)
    unknown = sorted(name for name in parsed if not model.has_variable(name))
    if unknown:
        raise SolutionImportError(f"unknown variable {unknown[0]}")
    if missing_as_zero:
        parsed = {v.name: parsed.get(v.name, Fraction(0)) for v in model.variables}
    try:
        values = model.values_from_names(parsed)
    except KeyError as e:
        raise SolutionImportError(f"missing variable {e.args[0]}") from None

    problems = model.check(values, IMPORT_TOLERANCE)
    if problems:
        raise SolutionImportError(f"solution violates {problems[0]}" + (
            f" (and {len(problems) - 1} more)" if len(problems) > 1 else ""
        ))

    exact = exact_point(model, values)
    if exact is None:
        raise SolutionImportError("solution is within tolerance but cannot be made exactly feasible")
    logger.info("imported solution with objective %s", model.objective_value(exact))
    return MilpSolution(
        FEASIBLE,
        model.values_by_name(exact),
        model.objective_value(exact),
        SolveStats(),
    )
