"""MILP model for Deficiency One realizations.

The model searches for scaled rate constants ``b[i,j]`` of a target network
on the complexes of the original system, and reciprocal conjugacy constants
``d[k]``, such that the target is linearly conjugate to the original and
satisfies the Deficiency One conditions (or the Boros condition).

Variable families (names are 1-based, e.g. ``b_2_4`` is ``b[2,4]``):

    d      reciprocal conjugacy constants, one per species
    b      scaled target rates, one per ordered pair i != j
    Lam    complex i assigned to linkage slot theta (binary)
    Gam    complexes i and j both in slot theta (binary)
    S      weight of y_j - y_i in the random span vector of slot theta
    Sp     indicator that S is in use (binary)
    L      slot theta is nonempty
    w      weakly reversible flow on target reactions
    wp     supplemental flow out of the chosen terminal complexes
    C      complex i is the chosen terminal complex of slot theta (binary)
    Cp     complex i is a chosen terminal complex

Slots theta range over 1..n-s, which bounds the number of linkage classes.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import isqrt
from typing import Iterator, Mapping, Optional, Sequence, Union

import numpy as np

from crn_dot.linalg import Matrix, bareiss_rank, to_fraction
from crn_dot.simplex import LinearProgram

logger = logging.getLogger(__name__)

DEFAULT_EPS = Fraction(1, 10)
DELTA_DENOMINATOR = 10**6

# Branching order used by the solver, structural families first
BRANCH_PRIORITY = ("C", "Lam", "Sp", "Gam")


class ModelError(ValueError):
    """The inputs do not admit a well-posed model."""


class Mode(str, Enum):
    DYNEQUIV = "dynequiv"
    CONJUGATE = "conjugate"


class Theorem(str, Enum):
    DOT = "dot"
    BOROS = "boros"


class WPrimeCap(str, Enum):
    LITERAL = "literal"
    SCALED = "scaled"


@dataclass(frozen=True)
class ModelConfig:
    """Model parameters.

    ``delta_samples`` maps 0-based pairs ``(i, j)`` to the random weights;
    when omitted they are drawn from ``seed``.
    """

    eps: Fraction = DEFAULT_EPS
    seed: int = 0
    mode: Mode = Mode.CONJUGATE
    theorem: Theorem = Theorem.DOT
    delta_samples: Optional[Mapping[tuple[int, int], Fraction]] = None
    wprime_cap: WPrimeCap = WPrimeCap.LITERAL

    def __post_init__(self):
        eps = to_fraction(self.eps)
        if not 0 < eps < 1:
            raise ValueError(f"eps must lie in (0, 1), got {eps}")
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "theorem", Theorem(self.theorem))
        object.__setattr__(self, "wprime_cap", WPrimeCap(self.wprime_cap))

    def deltas(self, n: int) -> dict[tuple[int, int], Fraction]:
        if self.delta_samples is not None:
            missing = [(i, j) for i, j in _pairs(n) if (i, j) not in self.delta_samples]
            if missing:
                raise ModelError(f"delta samples missing for pairs {missing[:3]}")
            return {p: to_fraction(self.delta_samples[p]) for p in _pairs(n)}
        return sample_deltas(n, self.eps, self.seed)


def _pairs(n: int) -> Iterator[tuple[int, int]]:
    for i in range(n):
        for j in range(n):
            if i != j:
                yield i, j


def delta_range(eps: Fraction) -> tuple[int, int]:
    """Integer numerators u with ``u / 10**6`` inside ``[sqrt(eps), 1/sqrt(eps)]``."""
    eps = Fraction(eps)
    scale = DELTA_DENOMINATOR**2
    low_sq = -((-eps.numerator * scale) // eps.denominator)  # ceil(eps * 10**12)
    lo = isqrt(low_sq)
    if lo * lo < low_sq:
        lo += 1
    hi = isqrt((scale * eps.denominator) // eps.numerator)  # floor(10**12 / eps)
    return lo, hi


def sample_deltas(n: int, eps: Fraction, seed: int) -> dict[tuple[int, int], Fraction]:
    """Draw pairwise distinct weights uniformly from ``[sqrt(eps), 1/sqrt(eps)]``.

    Values are exact rationals with denominator ``10**6``. A draw is redone
    when it collides with an earlier value, or when it lies closer than
    ``eps`` to the weight of the reversed pair: a two-complex class then needs
    a single basis weight of at least ``eps``.
    """
    lo, hi = delta_range(eps)
    gap = min(int(Fraction(eps) * DELTA_DENOMINATOR), (hi - lo) // 4)
    rng = np.random.default_rng(seed)
    seen: set[int] = set()
    numerators: dict[tuple[int, int], int] = {}
    for i, j in _pairs(n):
        reverse = numerators.get((j, i))
        u = int(rng.integers(lo, hi + 1))
        while u in seen or (reverse is not None and abs(u - reverse) < gap):
            u = int(rng.integers(lo, hi + 1))
        seen.add(u)
        numerators[(i, j)] = u
    return {pair: Fraction(u, DELTA_DENOMINATOR) for pair, u in numerators.items()}


@dataclass(frozen=True)
class Variable:
    name: str
    family: str
    index: tuple[int, ...]
    lower: Fraction
    upper: Optional[Fraction]
    binary: bool = False


@dataclass(frozen=True)
class Constraint:
    name: str
    family: str
    coeffs: dict[int, Fraction]
    sense: str
    rhs: Fraction

    def activity(self, values: Sequence) -> Fraction:
        return sum((a * values[j] for j, a in self.coeffs.items()), Fraction(0))

    def violation(self, values: Sequence) -> Fraction:
        lhs = self.activity(values)
        if self.sense == "<=":
            return max(lhs - self.rhs, Fraction(0))
        if self.sense == ">=":
            return max(self.rhs - lhs, Fraction(0))
        return abs(lhs - self.rhs)


def var_name(family: str, index: Sequence[int]) -> str:
    """1-based variable name: ``var_name("b", (1, 3)) == "b_2_4"``."""
    return "_".join([family, *(str(i + 1) for i in index)])


@dataclass
class MilpModel:
    """Variables, linear constraints and a linear objective (minimized)."""

    m: int
    n: int
    s: int
    config: ModelConfig
    Y: Matrix
    M: Matrix
    variables: list[Variable] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)
    objective: dict[int, Fraction] = field(default_factory=dict)
    deltas: dict[tuple[int, int], Fraction] = field(default_factory=dict)
    _index: dict[str, int] = field(default_factory=dict, repr=False)

    @property
    def slots(self) -> int:
        return self.n - self.s

    @property
    def eps(self) -> Fraction:
        return self.config.eps

    def add_variable(
        self,
        family: str,
        index: Sequence[int],
        lower: Fraction,
        upper: Optional[Fraction],
        binary: bool = False,
    ) -> int:
        name = var_name(family, index)
        if name in self._index:
            raise ModelError(f"variable {name} declared twice")
        self._index[name] = len(self.variables)
        self.variables.append(Variable(name, family, tuple(index), Fraction(lower), upper, binary))
        return self._index[name]

    def col(self, family: str, *index: int) -> int:
        return self._index[var_name(family, index)]

    def has_variable(self, name: str) -> bool:
        return name in self._index

    def add_constraint(
        self,
        family: str,
        index: Sequence[int],
        coeffs: Mapping[int, Union[int, Fraction]],
        sense: str,
        rhs: Union[int, Fraction],
    ) -> None:
        merged: dict[int, Fraction] = {}
        for j, a in coeffs.items():
            merged[j] = merged.get(j, Fraction(0)) + Fraction(a)
        merged = {j: a for j, a in merged.items() if a != 0}
        self.constraints.append(
            Constraint(var_name(family, index), family, merged, sense, Fraction(rhs))
        )

    def family_size(self, family: str) -> int:
        return sum(1 for v in self.variables if v.family == family)

    def constraint_count(self, family: str) -> int:
        return sum(1 for c in self.constraints if c.family == family)

    def binary_columns(self) -> list[int]:
        return [j for j, v in enumerate(self.variables) if v.binary]

    def values_by_name(self, values: Sequence) -> dict[str, Fraction]:
        return {v.name: values[j] for j, v in enumerate(self.variables)}

    def values_from_names(self, named: Mapping[str, Fraction]) -> list[Fraction]:
        missing = [v.name for v in self.variables if v.name not in named]
        if missing:
            raise KeyError(missing[0])
        return [Fraction(named[v.name]) for v in self.variables]

    def objective_value(self, values: Sequence) -> Fraction:
        return sum((c * values[j] for j, c in self.objective.items()), Fraction(0))

    def check(self, values: Sequence, tol: Fraction = Fraction(0)) -> list[str]:
        """Names of violated bounds, integrality requirements and constraints."""
        problems = []
        for j, v in enumerate(self.variables):
            x = values[j]
            if x < v.lower - tol or (v.upper is not None and x > v.upper + tol):
                problems.append(f"bound:{v.name}")
            elif v.binary and min(abs(x), abs(x - 1)) > tol:
                problems.append(f"integrality:{v.name}")
        for c in self.constraints:
            if c.violation(values) > tol:
                problems.append(c.name)
        return problems

    def relaxation(self) -> LinearProgram:
        """LP relaxation (binaries relaxed to [0, 1])."""
        lp = LinearProgram(
            objective=[self.objective.get(j, Fraction(0)) for j in range(len(self.variables))],
            lower=[v.lower for v in self.variables],
            upper=[v.upper for v in self.variables],
        )
        for c in self.constraints:
            lp.add_row(c.coeffs, c.sense, c.rhs)
        return lp


def declare_variables(model: MilpModel) -> None:
    """Declare the variable families with their bounds."""
    eps = model.eps
    inv = 1 / eps
    one = Fraction(1)
    zero = Fraction(0)
    n, slots = model.n, model.slots
    for k in range(model.m):
        model.add_variable("d", (k,), eps + eps * eps, inv)
    for i, j in _pairs(n):
        model.add_variable("b", (i, j), zero, inv)
    for i in range(n):
        for th in range(slots):
            model.add_variable("Lam", (i, th), zero, one, binary=True)
    for i, j in _pairs(n):
        for th in range(slots):
            model.add_variable("Gam", (i, j, th), zero, one, binary=True)
    for i, j in _pairs(n):
        for th in range(slots):
            model.add_variable("S", (i, j, th), zero, inv)
    for i, j in _pairs(n):
        for th in range(slots):
            model.add_variable("Sp", (i, j, th), zero, one, binary=True)
    for th in range(slots):
        model.add_variable("L", (th,), zero, one)
    wp_cap = one if model.config.wprime_cap == WPrimeCap.LITERAL else inv
    for i, j in _pairs(n):
        model.add_variable("w", (i, j), zero, inv * inv)
    for i, j in _pairs(n):
        model.add_variable("wp", (i, j), zero, wp_cap)
    for i in range(n):
        for th in range(slots):
            model.add_variable("C", (i, th), zero, one, binary=True)
    for i in range(n):
        model.add_variable("Cp", (i,), zero, one)


def add_lc(model: MilpModel, Y: Matrix, M: Matrix) -> None:
    """Conjugacy rows ``(Y A(B))[k,i] = d[k] M[k,i]``; dynamical equivalence also pins d = 1."""
    n = model.n
    for k in range(model.m):
        for i in range(n):
            coeffs = {
                model.col("b", i, j): Y[k][j] - Y[k][i] for j in range(n) if j != i
            }
            coeffs[model.col("d", k)] = -M[k][i]
            model.add_constraint("lc", (k, i), coeffs, "=", 0)
    if model.config.mode == Mode.DYNEQUIV:
        for k in range(model.m):
            model.add_constraint("dyneq", (k,), {model.col("d", k): 1}, "=", 1)


def add_linkage(model: MilpModel) -> None:
    """Slot assignment, slot counting and symmetry breaking."""
    inv = 1 / model.eps
    eps = model.eps
    n, slots = model.n, model.slots
    lam = model.col
    for i, j in _pairs(n):
        for th in range(slots):
            model.add_constraint(
                "link1",
                (i, j, th),
                {lam("b", i, j): 1, lam("Lam", i, th): -inv, lam("Lam", j, th): inv},
                "<=",
                inv,
            )
    for i in range(n):
        model.add_constraint("link2", (i,), {lam("Lam", i, th): 1 for th in range(slots)}, "=", 1)
    for th in range(slots):
        coeffs = {lam("Lam", i, th): 1 for i in range(n)}
        coeffs[lam("L", th)] = -eps
        model.add_constraint("link3", (th,), coeffs, ">=", 0)
        coeffs = {lam("Lam", i, th): -1 for i in range(n)}
        coeffs[lam("L", th)] = inv
        model.add_constraint("link4", (th,), coeffs, ">=", 0)
    for i in range(n):
        for th in range(min(i + 1, slots - 1)):
            coeffs: dict[int, Fraction] = {lam("Lam", j, th): Fraction(1) for j in range(i + 1)}
            for later in range(th + 1, slots):
                col = lam("Lam", i, later)
                coeffs[col] = coeffs.get(col, Fraction(0)) - 1
            model.add_constraint("link5", (i, th), coeffs, ">=", 0)


def add_stoic(model: MilpModel, Y: Matrix, deltas: Mapping[tuple[int, int], Fraction]) -> None:
    """Per-slot stoichiometric dimension via a random vector in the slot's span."""
    eps = model.eps
    inv = 1 / eps
    n, slots = model.n, model.slots
    col = model.col
    for i, j in _pairs(n):
        for th in range(slots):
            idx = (i, j, th)
            sp, s, gam = col("Sp", *idx), col("S", *idx), col("Gam", *idx)
            lam_i, lam_j = col("Lam", i, th), col("Lam", j, th)
            model.add_constraint("stoic1", idx, {sp: 1, gam: -1}, "<=", 0)
            model.add_constraint("stoic2", idx, {s: 1, sp: -inv}, "<=", 0)
            model.add_constraint("stoic3", idx, {s: -1, sp: eps}, "<=", 0)
            model.add_constraint("stoic4", idx, {gam: 1, lam_i: -eps, lam_j: -eps}, "<=", 1 - 2 * eps)
            model.add_constraint("stoic5", idx, {gam: 1, lam_i: -eps, lam_j: -eps}, ">=", -eps)
    for th in range(slots):
        for k in range(model.m):
            coeffs: dict[int, Fraction] = {}
            for i, j in _pairs(n):
                dy = Y[k][j] - Y[k][i]
                if dy:
                    coeffs[col("S", i, j, th)] = dy
                    coeffs[col("Gam", i, j, th)] = -deltas[(i, j)] * dy
            if coeffs:
                model.add_constraint("stoic6", (th, k), coeffs, "=", 0)


def add_theorem(model: MilpModel, s: int, theorem: Theorem) -> None:
    """Deficiency One conditions 1 and 2, or the Boros condition alone."""
    n, slots = model.n, model.slots
    col = model.col
    if theorem == Theorem.DOT:
        for th in range(slots):
            coeffs = {col("Lam", i, th): Fraction(1) for i in range(n)}
            for i, j in _pairs(n):
                coeffs[col("Sp", i, j, th)] = Fraction(-1)
            model.add_constraint("dot", (th,), coeffs, "<=", 2)
    total = {col("Sp", i, j, th): 1 for i, j in _pairs(n) for th in range(slots)}
    model.add_constraint("span", (), total, "=", s)


def add_terminal(model: MilpModel) -> None:
    """At most one chosen terminal complex per slot whose supplemental flow makes the target weakly reversible."""
    eps = model.eps
    inv = 1 / eps
    n, slots = model.n, model.slots
    col = model.col
    wp_cap = Fraction(1) if model.config.wprime_cap == WPrimeCap.LITERAL else inv
    for i in range(n):
        for th in range(slots):
            model.add_constraint("cp1", (i, th), {col("C", i, th): 1, col("Lam", i, th): -1}, "<=", 0)
    for i in range(n):
        coeffs = {col("C", i, th): Fraction(-1) for th in range(slots)}
        coeffs[col("Cp", i)] = Fraction(1)
        model.add_constraint("cp2", (i,), coeffs, "=", 0)
    for th in range(slots):
        model.add_constraint("cp3", (th,), {col("C", i, th): 1 for i in range(n)}, "<=", 1)
    for i, j in _pairs(n):
        w, b, wp = col("w", i, j), col("b", i, j), col("wp", i, j)
        model.add_constraint("wr1", (i, j), {w: 1, b: -eps}, ">=", 0)
        model.add_constraint("wr2", (i, j), {w: -1, b: inv}, ">=", 0)
        model.add_constraint("wr3", (i, j), {wp: 1, col("Cp", i): -wp_cap}, "<=", 0)
        for th in range(slots):
            model.add_constraint(
                "wr4",
                (i, j, th),
                {wp: 1, col("Lam", i, th): -inv, col("Lam", j, th): inv},
                "<=",
                inv,
            )
    for i in range(n):
        coeffs: dict[int, Fraction] = {}
        for j in range(n):
            if j == i:
                continue
            for family in ("w", "wp"):
                out_col, in_col = col(family, i, j), col(family, j, i)
                coeffs[out_col] = coeffs.get(out_col, Fraction(0)) + 1
                coeffs[in_col] = coeffs.get(in_col, Fraction(0)) - 1
        model.add_constraint("wr5", (i,), coeffs, "=", 0)


def set_objective(model: MilpModel) -> None:
    """Maximize the number of nonempty slots, i.e. minimize ``-sum L``."""
    model.objective = {model.col("L", th): Fraction(-1) for th in range(model.slots)}


def build_model(Y: Matrix, M: Matrix, s: int, config: ModelConfig) -> MilpModel:
    """Build the full model from the complex matrix, M = Y A(K) and s = rank(M).

    Raises:
        ModelError: If the shapes disagree, n < 2, rank(M) != s, or n - s < 1.
    """
    m = len(Y)
    n = len(Y[0]) if m else 0
    if len(M) != m or any(len(row) != n for row in (*Y, *M)):
        raise ModelError("Y and M must both be m x n")
    if n < 2:
        raise ModelError(f"need at least two complexes, got {n}")
    rank = bareiss_rank(M)
    if rank != s:
        raise ModelError(f"rank(M) = {rank} but s = {s}")
    if n - s < 1:
        raise ModelError(f"n - s = {n - s}; no linkage slots available")

    Yf = [[Fraction(v) for v in row] for row in Y]
    Mf = [[Fraction(v) for v in row] for row in M]
    model = MilpModel(m=m, n=n, s=s, config=config, Y=Yf, M=Mf)
    model.deltas = config.deltas(n)
    declare_variables(model)
    add_lc(model, Yf, Mf)
    add_linkage(model)
    add_stoic(model, Yf, model.deltas)
    add_theorem(model, s, config.theorem)
    add_terminal(model)
    set_objective(model)
    logger.info(
        "built model: m=%d n=%d s=%d slots=%d variables=%d constraints=%d binaries=%d",
        m, n, s, model.slots, len(model.variables), len(model.constraints), len(model.binary_columns()),
    )
    return model
