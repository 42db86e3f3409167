"""Formatting utilities for reports and network files.

Rationals are always shown exactly and, next to that, as a rounded decimal
with a fixed number of fractional digits.
"""

from fractions import Fraction
from typing import Any, Iterable, Sequence

DECIMAL_DIGITS = 10


def decimal_string(value: Fraction, digits: int = DECIMAL_DIGITS) -> str:
    """Render a rational as a decimal rounded to ``digits`` fractional digits.

    Args:
        value: Exact rational value
        digits: Number of digits after the decimal point

    Returns:
        Decimal string such as ``"2.3333333333"``
    """
    value = Fraction(value)
    scaled = round(abs(value) * 10**digits)
    sign = "-" if value < 0 and scaled else ""
    whole, frac = divmod(scaled, 10**digits)
    if digits == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{frac:0{digits}d}"


def rational_json(value: Fraction) -> dict[str, str]:
    """JSON form of a rational: exact ``p/q`` text plus its decimal rendering."""
    value = Fraction(value)
    return {"value": str(value), "decimal": decimal_string(value)}


def format_coefficient(value: Fraction) -> str:
    return str(Fraction(value))


def format_complex(y: Sequence[Fraction], names: Sequence[str]) -> str:
    """Render a stoichiometric vector, e.g. ``X1 + 3 X2`` or ``0``."""
    terms = []
    for coefficient, name in zip(y, names):
        if coefficient == 0:
            continue
        if coefficient == 1:
            terms.append(name)
        else:
            terms.append(f"{format_coefficient(coefficient)} {name}")
    return " + ".join(terms) if terms else "0"


def format_reaction(source: str, target: str, rate: Any = None) -> str:
    """Render one reaction line in network file syntax."""
    line = f"{source} -> {target}"
    if rate is not None:
        line += f" ; k={format_coefficient(rate)}"
    return line


def format_partition(blocks: Iterable[Iterable[int]], labels: Sequence[str]) -> str:
    """Render a partition of complex indices as ``{a, b} {c}``."""
    return " ".join("{" + ", ".join(labels[i] for i in block) + "}" for block in blocks)


def format_verdict(flag: bool) -> str:
    return "[green]satisfied[/green]" if flag else "[red]not satisfied[/red]"
