"""Reaction networks and mass action systems.

Domain types are frozen dataclasses holding tuples, so they can be shared
between threads freely. All arithmetic is exact (``fractions.Fraction``).

Conventions:
    * complex i has stoichiometric vector ``y_i`` of length m
    * ``Y[k][i] = y_i[k]`` (species k, complex i)
    * ``A[j][i] = k(i, j)`` for a reaction C_i -> C_j, diagonal is the
      negative out-flow of the column, so every column of A sums to zero
    * ``M = Y @ A``
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import lcm
from typing import Iterable, Literal, Sequence

from sympy import integer_nthroot

from crn_dot.linalg import Matrix, bareiss_rank, matmul, to_fraction, zeros

logger = logging.getLogger(__name__)


class NetworkError(ValueError):
    """A network or mass action system violates a structural invariant."""


class InadmissibleTermError(ValueError):
    """A polynomial term cannot be produced by mass action kinetics."""

    def __init__(self, species: str, coefficient: Fraction, exponent: Sequence[int], names: Sequence[str]):
        self.species = species
        self.coefficient = coefficient
        self.exponent = tuple(exponent)
        monomial = "*".join(
            f"{name.lower()}^{e}" if e != 1 else name.lower() for name, e in zip(names, exponent) if e
        ) or "1"
        super().__init__(
            f"term {coefficient}*{monomial} in d{species.lower()}/dt is negative but does not "
            f"contain {species.lower()}; no mass action reaction produces it"
        )


@dataclass(frozen=True)
class Species:
    id: int
    name: str


@dataclass(frozen=True)
class Complex:
    """A complex, given by its stoichiometric vector."""

    y: tuple[Fraction, ...]

    @classmethod
    def of(cls, values: Iterable) -> "Complex":
        return cls(tuple(to_fraction(v) for v in values))

    @classmethod
    def zero(cls, m: int) -> "Complex":
        return cls((Fraction(0),) * m)

    @property
    def is_zero(self) -> bool:
        return all(v == 0 for v in self.y)

    def shifted(self, species: int, amount: int) -> "Complex":
        """Return this complex with ``amount`` added to one coordinate."""
        y = list(self.y)
        y[species] += amount
        return Complex(tuple(y))

    def monomial(self, x: Sequence[Fraction]) -> Fraction:
        """Evaluate ``prod_k x_k ** y_k`` exactly."""
        out = Fraction(1)
        for x_k, y_k in zip(x, self.y):
            if y_k:
                out *= exact_power(x_k, y_k)
        return out


@dataclass(frozen=True)
class Reaction:
    source: int
    target: int

    @property
    def is_self_loop(self) -> bool:
        return self.source == self.target


@dataclass(frozen=True)
class Network:
    """A reaction network (S, C, R).

    Raises:
        NetworkError: On duplicate species names, duplicate complexes,
            reactions referencing unknown complexes, duplicate reactions,
            complexes used by no reaction, or species used by no complex.
    """

    species: tuple[Species, ...]
    complexes: tuple[Complex, ...]
    reactions: tuple[Reaction, ...]

    def __post_init__(self):
        m = len(self.species)
        names = [sp.name for sp in self.species]
        if len(set(names)) != m:
            raise NetworkError(f"duplicate species names in {names}")
        if [sp.id for sp in self.species] != list(range(m)):
            raise NetworkError("species ids must be 0..m-1 in order")
        if not self.complexes:
            raise NetworkError("network has no complexes")
        for c in self.complexes:
            if len(c.y) != m:
                raise NetworkError(f"complex has {len(c.y)} coordinates, expected {m}")
            if any(v < 0 for v in c.y):
                raise NetworkError("stoichiometric coefficients must be nonnegative")
        if len(set(self.complexes)) != len(self.complexes):
            raise NetworkError("complexes must be pairwise distinct")
        n = len(self.complexes)
        for r in self.reactions:
            if not (0 <= r.source < n and 0 <= r.target < n):
                raise NetworkError(f"reaction {r} references an unknown complex")
        if len(set(self.reactions)) != len(self.reactions):
            raise NetworkError("duplicate reactions")
        used = {r.source for r in self.reactions} | {r.target for r in self.reactions}
        if len(used) != n:
            missing = sorted(set(range(n)) - used)
            raise NetworkError(f"complexes {missing} appear in no reaction")
        for sp in self.species:
            if all(c.y[sp.id] == 0 for c in self.complexes):
                raise NetworkError(f"species {sp.name} appears in no complex")

    @classmethod
    def build(
        cls,
        species_names: Sequence[str],
        complexes: Sequence[Complex],
        reactions: Iterable[tuple[int, int]],
    ) -> "Network":
        return cls(
            species=tuple(Species(i, name) for i, name in enumerate(species_names)),
            complexes=tuple(complexes),
            reactions=tuple(Reaction(s, t) for s, t in reactions),
        )

    @property
    def m(self) -> int:
        return len(self.species)

    @property
    def n(self) -> int:
        return len(self.complexes)

    @property
    def species_names(self) -> tuple[str, ...]:
        return tuple(sp.name for sp in self.species)

    def index_of(self, complex_: Complex) -> int:
        try:
            return self.complexes.index(complex_)
        except ValueError:
            raise NetworkError("complex not in network") from None

    def complex_matrix(self) -> Matrix:
        """The m x n matrix Y with ``Y[k][i] = y_i[k]``."""
        return [[c.y[k] for c in self.complexes] for k in range(self.m)]

    def reaction_vector(self, reaction: Reaction) -> tuple[Fraction, ...]:
        src = self.complexes[reaction.source].y
        tgt = self.complexes[reaction.target].y
        return tuple(b - a for a, b in zip(src, tgt))

    def with_species_order(self, names: Sequence[str]) -> "Network":
        """Permute the species (and complex coordinates) into ``names`` order."""
        if sorted(names) != sorted(self.species_names):
            raise NetworkError(
                f"species {sorted(self.species_names)} cannot be reordered as {list(names)}"
            )
        perm = [self.species_names.index(name) for name in names]
        complexes = tuple(Complex(tuple(c.y[k] for k in perm)) for c in self.complexes)
        return Network.build(names, complexes, ((r.source, r.target) for r in self.reactions))


@dataclass(frozen=True)
class MassActionSystem:
    """A network with one positive rate constant per reaction (same order)."""

    network: Network
    rates: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.rates) != len(self.network.reactions):
            raise NetworkError(
                f"{len(self.rates)} rates given for {len(self.network.reactions)} reactions"
            )
        for reaction, k in zip(self.network.reactions, self.rates):
            if k <= 0:
                raise NetworkError(f"rate of reaction {reaction} must be positive, got {k}")

    def with_species_order(self, names: Sequence[str]) -> "MassActionSystem":
        return MassActionSystem(self.network.with_species_order(names), self.rates)


@dataclass(frozen=True)
class KineticMatrix:
    """Y, the Laplacian A(K) and M = Y @ A(K) of a mass action system."""

    Y: Matrix
    A: Matrix
    M: Matrix

    @cached_property
    def rank(self) -> int:
        """Kinetic dimension s = rank(M)."""
        return bareiss_rank(self.M)


@dataclass(frozen=True)
class PolynomialSystem:
    """Polynomial right-hand sides ``dx_i/dt = sum_t c_t * x**e_t``.

    ``terms[i]`` lists ``(coefficient, exponent)`` pairs for species i.
    """

    species: tuple[str, ...]
    terms: tuple[tuple[tuple[Fraction, tuple[int, ...]], ...], ...]

    def __post_init__(self):
        if len(self.terms) != len(self.species):
            raise ValueError("one term list per species is required")
        for row in self.terms:
            for _, exponent in row:
                if len(exponent) != self.m or any(e < 0 or int(e) != e for e in exponent):
                    raise ValueError(f"exponent {exponent} must be {self.m} nonnegative integers")

    @property
    def m(self) -> int:
        return len(self.species)

    def coefficients(self) -> dict[tuple[int, ...], list[Fraction]]:
        """Map each monomial to its coefficient in every equation (zeros dropped)."""
        table: dict[tuple[int, ...], list[Fraction]] = {}
        for i, row in enumerate(self.terms):
            for c, exponent in row:
                table.setdefault(tuple(exponent), [Fraction(0)] * self.m)[i] += c
        return {e: v for e, v in table.items() if any(v)}

    def evaluate(self, x: Sequence[Fraction]) -> list[Fraction]:
        return [
            sum((c * _int_monomial(x, e) for c, e in row), Fraction(0))
            for row in self.terms
        ]


def exact_power(base: Fraction, exponent: Fraction) -> Fraction:
    """``base ** exponent`` for a positive rational base, exactly.

    Raises:
        ValueError: If a fractional exponent yields an irrational value.
    """
    base = Fraction(base)
    exponent = Fraction(exponent)
    if exponent.denominator == 1:
        return base ** int(exponent)
    q = exponent.denominator
    num, num_exact = integer_nthroot(base.numerator, q)
    den, den_exact = integer_nthroot(base.denominator, q)
    if not (num_exact and den_exact):
        raise ValueError(f"{base}**{exponent} is not rational")
    return Fraction(int(num), int(den)) ** exponent.numerator


def _int_monomial(x: Sequence[Fraction], exponent: Sequence[int]) -> Fraction:
    out = Fraction(1)
    for x_k, e in zip(x, exponent):
        if e:
            out *= Fraction(x_k) ** int(e)
    return out


def _check_positive(x: Sequence, m: int) -> tuple[Fraction, ...]:
    if len(x) != m:
        raise ValueError(f"state has {len(x)} entries, expected {m}")
    values = tuple(to_fraction(v) for v in x)
    if any(v <= 0 for v in values):
        raise ValueError(f"state must be strictly positive, got {[str(v) for v in values]}")
    return values


def build_matrices(sys: MassActionSystem) -> KineticMatrix:
    """Assemble Y, A(K) and M = Y @ A(K) exactly.

    Self-loops add ``k`` off-diagonal and ``-k`` on the diagonal of the same
    entry, so they cancel and contribute nothing.
    """
    net = sys.network
    n = net.n
    A = zeros(n, n)
    for reaction, k in zip(net.reactions, sys.rates):
        i, j = reaction.source, reaction.target
        A[j][i] += k
        A[i][i] -= k
    Y = net.complex_matrix()
    return KineticMatrix(Y=Y, A=A, M=matmul(Y, A))


def monomial_vector(net: Network, x: Sequence) -> list[Fraction]:
    """Psi(x): the monomial of every complex at a strictly positive state."""
    values = _check_positive(x, net.m)
    return [c.monomial(values) for c in net.complexes]


def mass_action_rhs(
    sys: MassActionSystem,
    x: Sequence,
    form: Literal["matrix", "summation"] = "matrix",
) -> list[Fraction]:
    """Evaluate the mass action vector field at x.

    ``form="matrix"`` computes ``Y @ A(K) @ Psi(x)``; ``form="summation"``
    sums ``k(i,j) * (y_j - y_i) * Psi_i(x)`` over reactions. The two are
    independent code paths and agree exactly.
    """
    net = sys.network
    psi = monomial_vector(net, x)
    if form == "matrix":
        km = build_matrices(sys)
        rates = [sum((a_ji * p for a_ji, p in zip(row, psi) if a_ji), Fraction(0)) for row in km.A]
        return [sum((y * r for y, r in zip(row, rates) if y), Fraction(0)) for row in km.Y]
    if form == "summation":
        out = [Fraction(0)] * net.m
        for reaction, k in zip(net.reactions, sys.rates):
            if reaction.is_self_loop:
                continue
            flux = k * psi[reaction.source]
            for s, dy in enumerate(net.reaction_vector(reaction)):
                if dy:
                    out[s] += flux * dy
        return out
    raise ValueError(f"unknown form: {form!r}")


def coefficient_map(sys: MassActionSystem) -> dict[tuple[Fraction, ...], list[Fraction]]:
    """Coefficient of every source monomial in every species equation."""
    net = sys.network
    table: dict[tuple[Fraction, ...], list[Fraction]] = {}
    for reaction, k in zip(net.reactions, sys.rates):
        if reaction.is_self_loop:
            continue
        row = table.setdefault(net.complexes[reaction.source].y, [Fraction(0)] * net.m)
        for s, dy in enumerate(net.reaction_vector(reaction)):
            row[s] += k * dy
    return {y: v for y, v in table.items() if any(v)}


def polynomial_system(sys: MassActionSystem) -> PolynomialSystem:
    """The polynomial ODE generated by a mass action system.

    Raises:
        ValueError: If a source complex has non-integer stoichiometry.
    """
    table = coefficient_map(sys)
    m = sys.network.m
    rows: list[list[tuple[Fraction, tuple[int, ...]]]] = [[] for _ in range(m)]
    for y in sorted(table):
        if any(v.denominator != 1 for v in y):
            raise ValueError(f"complex {y} has non-integer stoichiometry")
        exponent = tuple(int(v) for v in y)
        for i, c in enumerate(table[y]):
            if c:
                rows[i].append((c, exponent))
    return PolynomialSystem(sys.network.species_names, tuple(tuple(r) for r in rows))


def canonical_realization(p: PolynomialSystem) -> MassActionSystem:
    """Turn a mass-action-admissible polynomial system into a network.

    Each term ``c * x**y`` of ``dx_i/dt`` becomes ``y -> y + e_i`` (c > 0) or
    ``y -> y - e_i`` (c < 0) with rate ``|c|``; duplicate reactions are merged
    by summing their rates. Complexes are numbered by first appearance.

    Raises:
        InadmissibleTermError: If a negative term lacks its own species.
        NetworkError: If a species ends up in no complex.
    """
    complexes: list[Complex] = []
    index: dict[Complex, int] = {}
    rates: dict[Reaction, Fraction] = {}

    def intern(c: Complex) -> int:
        if c not in index:
            index[c] = len(complexes)
            complexes.append(c)
        return index[c]

    for i, row in enumerate(p.terms):
        for coefficient, exponent in row:
            c = Fraction(coefficient)
            if c == 0:
                continue
            if c < 0 and exponent[i] < 1:
                raise InadmissibleTermError(p.species[i], c, exponent, p.species)
            source = Complex.of(exponent)
            target = source.shifted(i, 1 if c > 0 else -1)
            reaction = Reaction(intern(source), intern(target))
            rates[reaction] = rates.get(reaction, Fraction(0)) + abs(c)

    if not rates:
        raise NetworkError("polynomial system is identically zero")
    network = Network.build(p.species, complexes, ((r.source, r.target) for r in rates))
    logger.debug(
        "canonical realization: %d complexes, %d reactions", network.n, len(network.reactions)
    )
    return MassActionSystem(network, tuple(rates.values()))


def stoichiometry_lcm(net: Network) -> int:
    """Least common denominator of all stoichiometric coefficients."""
    out = 1
    for c in net.complexes:
        for v in c.y:
            out = lcm(out, v.denominator)
    return out

