"""Text formats for networks and polynomial ODE systems.

Network files hold one reaction per line::

    # comment
    2 X1 -> X1 + X3 ; k=1
    X2 + X3 <-> X4 ; k=1/2,0.25
    0 -> X1

``0`` is the zero complex, coefficients may be integers, decimals or
fractions, and a missing ``k=`` means rate 1. Species are ordered by
natural name order (``X2`` before ``X10``).

ODE files hold one equation per species::

    dx1/dt = 2*x2^3 - x1^2 - x1*x2*x3

Equation order fixes the species order; species ``x1`` is named ``X1``.
"""

import re
from fractions import Fraction
from pathlib import Path
from typing import Optional, Union

from sympy import Poly, Symbol
from sympy.parsing.sympy_parser import (
    convert_xor,
    parse_expr,
    rationalize,
    standard_transformations,
)

from crn_dot.crn import Complex, MassActionSystem, Network, NetworkError, PolynomialSystem
from crn_dot.formatting import format_complex, format_reaction
from crn_dot.linalg import to_fraction

_ARROW_RE = re.compile(r"<->|->")
_TERM_RE = re.compile(
    r"^(?P<coef>\d+(?:\.\d+)?(?:/\d+)?)?\s*\*?\s*(?P<name>[A-Za-z_][A-Za-z0-9_]*)$"
)
_RATE_RE = re.compile(r"^k\s*=\s*(?P<rates>.+)$")
_ODE_RE = re.compile(r"^d(?P<name>[A-Za-z_][A-Za-z0-9_]*)\s*/\s*dt\s*=\s*(?P<rhs>.+)$")
_ODE_TRANSFORMS = standard_transformations + (convert_xor, rationalize)


class NetworkParseError(ValueError):
    """Malformed network file; ``line`` is 1-based (0 for whole-file errors)."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class OdeParseError(ValueError):
    """Malformed ODE file; ``line`` is 1-based (0 for whole-file errors)."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


def natural_key(name: str) -> list:
    """Sort key that orders embedded integers numerically."""
    return [int(part) if part.isdigit() else part for part in re.split(r"(\d+)", name)]


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0].strip()


def _parse_complex(text: str, lineno: int) -> dict[str, Fraction]:
    text = text.strip()
    if not text:
        raise NetworkParseError(lineno, "empty complex (use 0 for the zero complex)")
    if text == "0":
        return {}
    out: dict[str, Fraction] = {}
    for raw in text.split("+"):
        term = raw.strip()
        match = _TERM_RE.match(term)
        if match is None:
            raise NetworkParseError(lineno, f"cannot read complex term {term!r}")
        coefficient = to_fraction(match.group("coef")) if match.group("coef") else Fraction(1)
        if coefficient == 0:
            raise NetworkParseError(lineno, f"zero coefficient in term {term!r}")
        name = match.group("name")
        out[name] = out.get(name, Fraction(0)) + coefficient
    return out


def _parse_rates(text: Optional[str], count: int, lineno: int) -> list[Fraction]:
    if text is None or not text.strip():
        return [Fraction(1)] * count
    match = _RATE_RE.match(text.strip())
    if match is None:
        raise NetworkParseError(lineno, f"expected 'k=<rate>' after ';', got {text.strip()!r}")
    parts = [p.strip() for p in match.group("rates").split(",")]
    if len(parts) != count:
        raise NetworkParseError(lineno, f"expected {count} rate(s), got {len(parts)}")
    rates = []
    for part in parts:
        try:
            k = to_fraction(part)
        except ValueError as e:
            raise NetworkParseError(lineno, str(e)) from e
        if k <= 0:
            raise NetworkParseError(lineno, f"rate constants must be positive, got {part}")
        rates.append(k)
    return rates


def parse_network(text: str) -> MassActionSystem:
    """Parse network file text into a mass action system.

    Raises:
        NetworkParseError: On syntax errors, nonpositive rates, duplicate
            reactions, or a file without reactions.
    """
    entries: list[tuple[int, dict[str, Fraction], dict[str, Fraction], Fraction]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        body, _, rate_text = line.partition(";")
        arrows = _ARROW_RE.findall(body)
        if len(arrows) != 1:
            raise NetworkParseError(lineno, "expected exactly one '->' or '<->'")
        arrow = arrows[0]
        lhs_text, rhs_text = body.split(arrow)
        lhs = _parse_complex(lhs_text, lineno)
        rhs = _parse_complex(rhs_text, lineno)
        if arrow == "->":
            (k,) = _parse_rates(rate_text, 1, lineno)
            entries.append((lineno, lhs, rhs, k))
        else:
            k_fwd, k_rev = _parse_rates(rate_text, 2, lineno)
            entries.append((lineno, lhs, rhs, k_fwd))
            entries.append((lineno, rhs, lhs, k_rev))

    if not entries:
        raise NetworkParseError(0, "file contains no reactions")

    names = sorted({name for _, l, r, _ in entries for name in (*l, *r)}, key=natural_key)
    complexes: list[Complex] = []
    index: dict[Complex, int] = {}
    reactions: list[tuple[int, int]] = []
    rates: list[Fraction] = []
    seen: set[tuple[int, int]] = set()

    def intern(terms: dict[str, Fraction]) -> int:
        c = Complex(tuple(terms.get(name, Fraction(0)) for name in names))
        if c not in index:
            index[c] = len(complexes)
            complexes.append(c)
        return index[c]

    for lineno, lhs, rhs, k in entries:
        pair = (intern(lhs), intern(rhs))
        if pair in seen:
            raise NetworkParseError(lineno, "duplicate reaction")
        seen.add(pair)
        reactions.append(pair)
        rates.append(k)

    try:
        network = Network.build(names, complexes, reactions)
        return MassActionSystem(network, tuple(rates))
    except NetworkError as e:
        raise NetworkParseError(0, str(e)) from e


def parse_ode(text: str) -> PolynomialSystem:
    """Parse ``d<name>/dt = ...`` lines into a polynomial system.

    Raises:
        OdeParseError: On syntax errors, repeated equations, unknown
            variables, or non-polynomial right-hand sides.
    """
    equations: list[tuple[int, str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        match = _ODE_RE.match(line)
        if match is None:
            raise OdeParseError(lineno, "expected 'd<name>/dt = <polynomial>'")
        equations.append((lineno, match.group("name"), match.group("rhs")))

    if not equations:
        raise OdeParseError(0, "file contains no equations")

    variables = [name for _, name, _ in equations]
    for lineno, name, _ in equations:
        if variables.count(name) > 1:
            raise OdeParseError(lineno, f"repeated equation for {name}")
    species = [name[0].upper() + name[1:] for name in variables]
    if len(set(species)) != len(species):
        raise OdeParseError(0, f"variables {variables} collide once capitalized")

    symbols = [Symbol(name) for name in variables]
    local = dict(zip(variables, symbols))
    rows = []
    for lineno, name, rhs in equations:
        try:
            expr = parse_expr(rhs, local_dict=local, transformations=_ODE_TRANSFORMS)
        except Exception as e:
            raise OdeParseError(lineno, f"cannot parse {rhs!r}: {e}") from e
        unknown = sorted(str(s) for s in expr.free_symbols if s not in symbols)
        if unknown:
            raise OdeParseError(lineno, f"unknown variables {unknown}")
        try:
            poly = Poly(expr, *symbols)
        except Exception as e:
            raise OdeParseError(lineno, f"right-hand side of d{name}/dt is not a polynomial") from e
        if not poly.domain.is_QQ and not poly.domain.is_ZZ:
            raise OdeParseError(lineno, f"coefficients of d{name}/dt must be rational")
        terms = []
        for monom, coeff in poly.terms():
            if coeff == 0:
                continue
            terms.append((Fraction(int(coeff.p), int(coeff.q)), tuple(int(e) for e in monom)))
        rows.append(tuple(terms))
    return PolynomialSystem(tuple(species), tuple(rows))


def format_network(sys: MassActionSystem) -> str:
    """Render a mass action system in network file syntax, one reaction per line."""
    net = sys.network
    labels = [format_complex(c.y, net.species_names) for c in net.complexes]
    lines = [
        format_reaction(labels[r.source], labels[r.target], k)
        for r, k in zip(net.reactions, sys.rates)
    ]
    return "\n".join(lines) + "\n"


def read_ode(path: Union[str, Path]) -> PolynomialSystem:
    return parse_ode(Path(path).read_text(encoding="utf-8"))


def looks_like_ode(text: str) -> bool:
    """True when the first non-comment line is a ``d<name>/dt =`` equation."""
    for raw in text.splitlines():
        line = _strip_comment(raw)
        if line:
            return _ODE_RE.match(line) is not None
    return False
