"""Bounded-variable simplex over exact rationals.

``LinearProgram`` is the plain data form (minimize ``c.x`` subject to sparse
rows and finite lower / optional upper bounds). ``Tableau`` solves it with a
two-phase primal simplex and can be re-optimized after bound changes with a
dual simplex, which is how branch-and-bound warm-starts its nodes.

Tableau conventions:
    * every column is a nonnegative variable ``t_j`` in ``[0, upper_j]``
      with ``x_j = offset_j + sign_j * t_j`` in the original space
    * nonbasic variables always sit at 0; a variable that has to rest at
      its upper bound is complemented (``t -> upper - t``) instead
    * row i reads ``t_{basis[i]} + sum_j rows[i][j] * t_j = beta[i]``
    * ``d[j]`` is the reduced cost of nonbasic column j

Pricing is Dantzig's rule, switching to Bland's smallest-index rule after
every degenerate pivot; a cycle would consist of degenerate pivots only, so
it would be driven entirely by Bland's rule, which cannot cycle.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal, Optional, Union

logger = logging.getLogger(__name__)

Num = Union[Fraction, float]
Arithmetic = Literal["exact", "float"]

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
LIMIT = "limit"

DEFAULT_MAX_ITERATIONS = 200_000
FLOAT_TOLERANCE = 1e-9
_FLOAT_DROP = 1e-12


@dataclass
class LinearProgram:
    """minimize ``objective . x`` s.t. ``rows[i] . x (senses[i]) rhs[i]``, ``lower <= x <= upper``."""

    objective: list[Fraction]
    rows: list[dict[int, Fraction]] = field(default_factory=list)
    senses: list[str] = field(default_factory=list)
    rhs: list[Fraction] = field(default_factory=list)
    lower: list[Fraction] = field(default_factory=list)
    upper: list[Optional[Fraction]] = field(default_factory=list)

    @property
    def num_vars(self) -> int:
        return len(self.objective)

    def add_row(self, coeffs: dict[int, Fraction], sense: str, rhs) -> None:
        self.rows.append(dict(coeffs))
        self.senses.append(sense)
        self.rhs.append(Fraction(rhs))

    def validate(self) -> None:
        n = self.num_vars
        if len(self.lower) != n or len(self.upper) != n:
            raise ValueError("bounds must be given for every variable")
        if not (len(self.rows) == len(self.senses) == len(self.rhs)):
            raise ValueError("rows, senses and rhs must have equal length")
        for sense in self.senses:
            if sense not in ("<=", ">=", "="):
                raise ValueError(f"unknown constraint sense {sense!r}")
        for row in self.rows:
            if any(not 0 <= j < n for j in row):
                raise ValueError("row references an unknown variable")
        for lo, hi in zip(self.lower, self.upper):
            if lo is None:
                raise ValueError("every variable needs a finite lower bound")
            if hi is not None and hi < lo:
                raise ValueError(f"empty bound interval [{lo}, {hi}]")

    def with_fixings(self, fixings: dict[int, Fraction]) -> "LinearProgram":
        """Copy with some variables fixed (lower = upper = value)."""
        lower = list(self.lower)
        upper = list(self.upper)
        for j, value in fixings.items():
            lower[j] = upper[j] = Fraction(value)
        return LinearProgram(list(self.objective), self.rows, self.senses, self.rhs, lower, upper)


@dataclass
class LpResult:
    status: str
    values: Optional[list[Num]] = None
    objective: Optional[Num] = None
    iterations: int = 0
    certificate: object = None

    @property
    def is_optimal(self) -> bool:
        return self.status == OPTIMAL


class Tableau:
    """Sparse simplex tableau for one ``LinearProgram``."""

    def __init__(
        self,
        lp: LinearProgram,
        arithmetic: Arithmetic = "exact",
        max_iterations: int = DEFAULT_MAX_ITERATIONS,
    ):
        lp.validate()
        if arithmetic not in ("exact", "float"):
            raise ValueError(f"unknown arithmetic {arithmetic!r}")
        self.exact = arithmetic == "exact"
        self.tol = 0 if self.exact else FLOAT_TOLERANCE
        self.max_iterations = max_iterations
        self.iterations = 0
        self.num_structural = lp.num_vars
        conv = Fraction if self.exact else float
        self._conv = conv

        self.cost: list[Num] = [conv(c) for c in lp.objective]
        self.offset: list[Num] = [conv(lo) for lo in lp.lower]
        self.sign: list[int] = [1] * lp.num_vars
        self.upper: list[Optional[Num]] = [
            None if hi is None else conv(hi) - conv(lo) for lo, hi in zip(lp.lower, lp.upper)
        ]
        self.removed: set[int] = {j for j, u in enumerate(self.upper) if u is not None and u == 0}

        self.rows: list[dict[int, Num]] = []
        self.beta: list[Num] = []
        self.basis: list[int] = []
        pending_artificial: list[int] = []

        for coeffs, sense, rhs in zip(lp.rows, lp.senses, lp.rhs):
            r = conv(rhs)
            row: dict[int, Num] = {}
            for j, a in coeffs.items():
                if a == 0:
                    continue
                a = conv(a)
                r -= a * self.offset[j]
                if j not in self.removed:
                    row[j] = a
            slack_coeff = {"<=": 1, ">=": -1, "=": 0}[sense]
            if r < 0:
                row = {j: -a for j, a in row.items()}
                r = -r
                slack_coeff = -slack_coeff
            slack = None
            if slack_coeff:
                slack = self._new_column(cost=0)
            if slack is not None and slack_coeff == 1:
                self.basis.append(slack)
            else:
                if slack is not None:
                    row[slack] = conv(slack_coeff)
                self.basis.append(-1)
                pending_artificial.append(len(self.rows))
            self.rows.append(row)
            self.beta.append(r)

        self.first_artificial = len(self.cost)
        for i in pending_artificial:
            self.basis[i] = self._new_column(cost=0)
        self.d: dict[int, Num] = {}

    def _new_column(self, cost) -> int:
        self.cost.append(self._conv(cost))
        self.offset.append(self._conv(0))
        self.sign.append(1)
        self.upper.append(None)
        return len(self.cost) - 1

    def copy(self) -> "Tableau":
        other = object.__new__(Tableau)
        other.__dict__.update(self.__dict__)
        other.rows = [dict(row) for row in self.rows]
        other.beta = list(self.beta)
        other.basis = list(self.basis)
        other.offset = list(self.offset)
        other.sign = list(self.sign)
        other.upper = list(self.upper)
        other.removed = set(self.removed)
        other.d = dict(self.d)
        other.iterations = 0
        return other

    # -- elementary operations -------------------------------------------

    def _is_zero(self, v: Num) -> bool:
        return v == 0 if self.exact else abs(v) <= _FLOAT_DROP

    def _pivot(self, r: int, e: int) -> None:
        row_r = self.rows[r]
        a = row_r.pop(e)
        leaving = self.basis[r]
        inv = 1 / a
        new_row = {j: v * inv for j, v in row_r.items()}
        new_row[leaving] = inv
        beta_r = self.beta[r] * inv
        self.rows[r] = new_row
        self.beta[r] = beta_r
        self.basis[r] = e
        for i, row_i in enumerate(self.rows):
            if i == r:
                continue
            a_ie = row_i.pop(e, None)
            if a_ie is None:
                continue
            for j, v in new_row.items():
                nv = row_i.get(j, 0) - a_ie * v
                if self._is_zero(nv):
                    row_i.pop(j, None)
                else:
                    row_i[j] = nv
            self.beta[i] -= a_ie * beta_r
        d_e = self.d.pop(e, None)
        if d_e:
            for j, v in new_row.items():
                nv = self.d.get(j, 0) - d_e * v
                if self._is_zero(nv):
                    self.d.pop(j, None)
                else:
                    self.d[j] = nv
        self.iterations += 1

    def _complement_nonbasic(self, j: int) -> None:
        u = self.upper[j]
        for i, row in enumerate(self.rows):
            a = row.get(j)
            if a is not None:
                self.beta[i] -= a * u
                row[j] = -a
        if j in self.d:
            self.d[j] = -self.d[j]
        self.offset[j] += self.sign[j] * u
        self.sign[j] = -self.sign[j]

    def _complement_basic(self, r: int) -> None:
        b = self.basis[r]
        u = self.upper[b]
        self.rows[r] = {j: -a for j, a in self.rows[r].items()}
        self.beta[r] = u - self.beta[r]
        self.offset[b] += self.sign[b] * u
        self.sign[b] = -self.sign[b]

    def _drop_column(self, j: int) -> None:
        for row in self.rows:
            row.pop(j, None)
        self.d.pop(j, None)
        self.removed.add(j)

    # -- primal simplex ----------------------------------------------------

    def _choose_entering(self, bland: bool) -> Optional[int]:
        best = None
        best_d = None
        for j, dj in self.d.items():
            if dj >= -self.tol or j in self.removed:
                continue
            if bland:
                if best is None or j < best:
                    best = j
            elif best is None or dj < best_d or (dj == best_d and j < best):
                best, best_d = j, dj
        return best

    def _primal(self) -> str:
        degenerate = False
        while True:
            e = self._choose_entering(bland=degenerate)
            if e is None:
                return OPTIMAL
            if self.iterations >= self.max_iterations:
                return LIMIT
            step = self.upper[e]
            leave = None
            for i, row in enumerate(self.rows):
                a = row.get(e)
                if a is None or (not self.exact and abs(a) <= self.tol):
                    continue
                b = self.basis[i]
                if a > 0:
                    t = self.beta[i] / a
                else:
                    ub = self.upper[b]
                    if ub is None:
                        continue
                    t = (ub - self.beta[i]) / (-a)
                if not self.exact and t < 0:
                    t = 0.0
                if step is None or t < step or (
                    t == step and leave is not None and b < self.basis[leave]
                ):
                    step, leave = t, i
            if step is None:
                self._ray_column = e
                return UNBOUNDED
            degenerate = step <= self.tol
            if leave is None:
                self._complement_nonbasic(e)
                self.iterations += 1
                continue
            at_upper = self.rows[leave][e] < 0
            leaving = self.basis[leave]
            self._pivot(leave, e)
            if at_upper:
                self._complement_nonbasic(leaving)

    def _phase_one(self) -> tuple[str, Num]:
        art_rows = [i for i, b in enumerate(self.basis) if b >= self.first_artificial]
        if not art_rows:
            return OPTIMAL, self._conv(0)
        self.d = {}
        for i in art_rows:
            for j, a in self.rows[i].items():
                nv = self.d.get(j, 0) - a
                if self._is_zero(nv):
                    self.d.pop(j, None)
                else:
                    self.d[j] = nv
        status = self._primal()
        if status == LIMIT:
            return LIMIT, self._conv(0)
        residual = sum(
            (self.beta[i] for i, b in enumerate(self.basis) if b >= self.first_artificial),
            self._conv(0),
        )
        if residual > self.tol:
            return INFEASIBLE, residual

        r = 0
        while r < len(self.rows):
            if self.basis[r] < self.first_artificial:
                r += 1
                continue
            candidates = [
                j for j, a in self.rows[r].items()
                if j < self.first_artificial and abs(a) > self.tol
            ]
            if candidates:
                self._pivot(r, min(candidates))
                r += 1
            else:
                del self.rows[r]
                del self.beta[r]
                del self.basis[r]
        for j in range(self.first_artificial, len(self.cost)):
            self._drop_column(j)
        return OPTIMAL, residual

    def _reset_costs(self) -> None:
        reduced: dict[int, Num] = {}
        basic = set(self.basis)
        for j in range(len(self.cost)):
            if j in basic or j in self.removed:
                continue
            c = self.cost[j] * self.sign[j]
            if c:
                reduced[j] = c
        for i, b in enumerate(self.basis):
            cb = self.cost[b] * self.sign[b]
            if not cb:
                continue
            for j, a in self.rows[i].items():
                nv = reduced.get(j, 0) - cb * a
                if self._is_zero(nv):
                    reduced.pop(j, None)
                else:
                    reduced[j] = nv
        self.d = reduced

    def solve(self) -> LpResult:
        """Run phase one and phase two from the initial slack/artificial basis."""
        status, residual = self._phase_one()
        if status == INFEASIBLE:
            return LpResult(INFEASIBLE, iterations=self.iterations, certificate=residual)
        if status == LIMIT:
            return LpResult(LIMIT, iterations=self.iterations)
        self._reset_costs()
        return self._finish(self._primal())

    # -- bound changes and dual simplex --------------------------------------

    def fix(self, j: int, value) -> bool:
        """Fix original variable j to ``value``; returns False if out of range."""
        value = self._conv(value)
        tau = (value - self.offset[j]) * self.sign[j]
        u = self.upper[j]
        if tau < -self.tol or (u is not None and tau > u + self.tol):
            return False
        if j in self.basis:
            r = self.basis.index(j)
            self.beta[r] -= tau
        else:
            for i, row in enumerate(self.rows):
                a = row.get(j)
                if a is not None:
                    self.beta[i] -= a * tau
            self._drop_column(j)
        self.offset[j] = value
        self.upper[j] = self._conv(0)
        self.removed.add(j)
        return True

    def reoptimize(self) -> LpResult:
        """Dual simplex from a dual feasible basis, then a primal clean-up pass."""
        while True:
            r = None
            for i, b in enumerate(self.basis):
                ub = self.upper[b]
                if self.beta[i] < -self.tol or (ub is not None and self.beta[i] > ub + self.tol):
                    if r is None or b < self.basis[r]:
                        r = i
            if r is None:
                break
            if self.iterations >= self.max_iterations:
                return LpResult(LIMIT, iterations=self.iterations)
            if self.beta[r] >= 0:
                self._complement_basic(r)
            best = None
            best_ratio = None
            for j, a in self.rows[r].items():
                if a >= -self.tol or j in self.removed:
                    continue
                ratio = max(self.d.get(j, 0), 0) / (-a)
                if best is None or ratio < best_ratio or (ratio == best_ratio and j < best):
                    best, best_ratio = j, ratio
            if best is None:
                return LpResult(INFEASIBLE, iterations=self.iterations, certificate=None)
            self._pivot(r, best)
        return self._finish(self._primal())

    # -- results -----------------------------------------------------------

    def _finish(self, status: str) -> LpResult:
        if status == LIMIT:
            return LpResult(LIMIT, iterations=self.iterations)
        if status == UNBOUNDED:
            return LpResult(UNBOUNDED, iterations=self.iterations, certificate=self._ray())
        values = self.values()
        objective = sum(
            (c * v for c, v in zip(self.cost[: self.num_structural], values) if c), self._conv(0)
        )
        return LpResult(OPTIMAL, values, objective, self.iterations)

    def values(self) -> list[Num]:
        t = {b: beta for b, beta in zip(self.basis, self.beta)}
        return [
            self.offset[j] + self.sign[j] * t.get(j, 0)
            for j in range(self.num_structural)
        ]

    def _ray(self) -> list[Num]:
        e = self._ray_column
        direction = [self._conv(0)] * self.num_structural
        if e < self.num_structural:
            direction[e] = self._conv(self.sign[e])
        for i, b in enumerate(self.basis):
            a = self.rows[i].get(e)
            if a is not None and b < self.num_structural:
                direction[b] = -a * self.sign[b]
        return direction


def solve_lp(
    lp: LinearProgram,
    arithmetic: Arithmetic = "exact",
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
) -> LpResult:
    """Solve a bounded-variable LP from scratch.

    Returns an ``LpResult`` whose status is ``optimal`` (with an optimal
    basic solution), ``infeasible`` (certificate: phase-one residual),
    ``unbounded`` (certificate: an improving ray) or ``limit``.
    """
    result = Tableau(lp, arithmetic, max_iterations).solve()
    logger.debug("lp solved: status=%s iterations=%d", result.status, result.iterations)
    return result
