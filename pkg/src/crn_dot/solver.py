"""Solving realization models.

Two engines produce incumbents. ``highs`` hands the model to HiGHS in
floating point; ``internal`` is a depth-first branch-and-bound over the
rational simplex. Either way the point returned by ``solve_milp`` satisfies
every row exactly.

In the internal search every node is an LP relaxation with some binaries
fixed. Children are warm-started from the parent's optimal tableau with the
dual simplex; the better child is explored next and keeps its tableau, the
other one is pushed with its bound only and re-solved from the root tableau
when popped.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Literal, Optional, Sequence

from crn_dot import highs, metrics
from crn_dot.exporter import get_tracer
from crn_dot.model import BRANCH_PRIORITY, MilpModel
from crn_dot.simplex import (
    DEFAULT_MAX_ITERATIONS,
    FLOAT_TOLERANCE,
    INFEASIBLE,
    LIMIT,
    OPTIMAL,
    UNBOUNDED,
    Arithmetic,
    LinearProgram,
    LpResult,
    Tableau,
    solve_lp,
)

logger = logging.getLogger(__name__)

FEASIBLE = "feasible"

Engine = Literal["highs", "internal"]

# Float values are read back as the nearest rational with at most this denominator
RATIONAL_DENOMINATOR = 10**6


@dataclass(frozen=True)
class SolveLimits:
    engine: Engine = "highs"
    max_nodes: int = 200_000
    time_limit: float = 1800.0
    threads: int = 1
    arithmetic: Arithmetic = "exact"
    max_lp_iterations: int = DEFAULT_MAX_ITERATIONS


@dataclass
class SolveStats:
    nodes: int = 0
    lp_iterations: int = 0
    duration: float = 0.0

    def to_dict(self) -> dict:
        return {
            "nodes": self.nodes,
            "lp_iterations": self.lp_iterations,
            "duration_s": round(self.duration, 3),
        }


@dataclass
class BranchResult:
    """Outcome of ``branch_and_bound`` in column space."""

    status: str
    values: Optional[list[Fraction]] = None
    objective: Optional[Fraction] = None
    stats: SolveStats = field(default_factory=SolveStats)


@dataclass
class MilpSolution:
    """A solution of a ``MilpModel``, keyed by variable name.

    ``status`` is optimal, feasible (imported), infeasible or limit; values
    are present for optimal, feasible, and limit runs that found an incumbent.
    """

    status: str
    values: dict[str, Fraction] = field(default_factory=dict)
    objective: Optional[Fraction] = None
    stats: SolveStats = field(default_factory=SolveStats)

    @property
    def has_values(self) -> bool:
        return bool(self.values)

    def __getitem__(self, name: str) -> Fraction:
        return self.values[name]


@dataclass
class _Node:
    fixings: dict[int, int]
    bound: Fraction
    depth: int
    tableau: Optional[Tableau] = None
    result: Optional[LpResult] = None


class _Search:
    def __init__(
        self,
        lp: LinearProgram,
        binaries: Sequence[int],
        priority: dict[int, int],
        limits: SolveLimits,
    ):
        self.lp = lp
        self.binaries = list(binaries)
        self.priority = priority
        self.limits = limits
        self.exact = limits.arithmetic == "exact"
        self.tol = 0 if self.exact else FLOAT_TOLERANCE
        self.stats = SolveStats()
        self.incumbent: Optional[list] = None
        self.incumbent_obj = None
        self.limited = False
        self.root: Optional[Tableau] = None

    def _fractional(self, values) -> Optional[int]:
        best = None
        best_key = None
        for j in self.binaries:
            x = values[j]
            frac = min(x, 1 - x)
            if frac <= self.tol:
                continue
            key = (self.priority.get(j, len(BRANCH_PRIORITY)), -frac, j)
            if best_key is None or key < best_key:
                best, best_key = j, key
        return best

    def _solve_child(self, parent: Tableau, j: int, value: int) -> tuple[Tableau, LpResult]:
        tab = parent.copy()
        if not tab.fix(j, value):
            return tab, LpResult(INFEASIBLE)
        return tab, tab.reoptimize()

    def _resolve(self, node: _Node) -> LpResult:
        tab = self.root.copy()
        for j, value in node.fixings.items():
            if not tab.fix(j, value):
                return LpResult(INFEASIBLE)
        result = tab.reoptimize()
        node.tableau = tab
        return result

    def _accept(self, values, objective) -> None:
        if not self.exact:
            snapped = {j: round(values[j]) for j in self.binaries}
            exact = solve_lp(self.lp.with_fixings(snapped), "exact", self.limits.max_lp_iterations)
            if not exact.is_optimal:
                logger.debug("rounded float incumbent rejected: %s", exact.status)
                return
            values, objective = exact.values, exact.objective
        if self.incumbent_obj is None or objective < self.incumbent_obj:
            self.incumbent = [Fraction(v) for v in values]
            self.incumbent_obj = Fraction(objective)
            logger.info("new incumbent %s at node %d", self.incumbent_obj, self.stats.nodes)

    def _pruned(self, bound) -> bool:
        return self.incumbent_obj is not None and bound >= self.incumbent_obj - self.tol

    def run(self, executor: Optional[ThreadPoolExecutor]) -> BranchResult:
        started = time.monotonic()
        root = Tableau(self.lp, self.limits.arithmetic, self.limits.max_lp_iterations)
        result = root.solve()
        self.stats.lp_iterations += result.iterations
        if result.status == UNBOUNDED:
            raise ValueError("LP relaxation is unbounded")
        if result.status != OPTIMAL:
            self.stats.nodes = 1
            self.stats.duration = time.monotonic() - started
            return BranchResult(INFEASIBLE if result.status == INFEASIBLE else LIMIT, stats=self.stats)
        self.root = root.copy()

        stack = [_Node({}, result.objective, 0, root, result)]
        while stack:
            if self.stats.nodes >= self.limits.max_nodes:
                self.limited = True
                break
            if time.monotonic() - started > self.limits.time_limit:
                self.limited = True
                break
            node = stack.pop()
            if self._pruned(node.bound):
                continue
            self.stats.nodes += 1
            result = node.result
            if result is None:
                result = self._resolve(node)
                self.stats.lp_iterations += result.iterations
            if result.status == LIMIT:
                self.limited = True
                continue
            if result.status != OPTIMAL or self._pruned(result.objective):
                continue

            j = self._fractional(result.values)
            if j is None:
                self._accept(result.values, result.objective)
                continue

            parent = node.tableau
            node.tableau = None
            if executor is not None:
                outcomes = list(executor.map(lambda v: self._solve_child(parent, j, v), (0, 1)))
            else:
                outcomes = [self._solve_child(parent, j, v) for v in (0, 1)]

            children = []
            for value, (tab, res) in zip((0, 1), outcomes):
                self.stats.lp_iterations += res.iterations
                if res.status == LIMIT:
                    self.limited = True
                    continue
                if res.status != OPTIMAL or self._pruned(res.objective):
                    continue
                fixings = dict(node.fixings)
                fixings[j] = value
                children.append(_Node(fixings, res.objective, node.depth + 1, tab, res))

            preferred = 1 if result.values[j] >= Fraction(1, 2) else 0
            children.sort(key=lambda c: (c.bound, c.fixings[j] != preferred), reverse=True)
            for k, child in enumerate(children):
                if k < len(children) - 1:
                    child.tableau = None
                    child.result = None
                stack.append(child)

        self.stats.duration = time.monotonic() - started
        if self.incumbent is None:
            status = LIMIT if self.limited else INFEASIBLE
        else:
            status = LIMIT if self.limited else OPTIMAL
        return BranchResult(status, self.incumbent, self.incumbent_obj, self.stats)


def branch_and_bound(
    lp: LinearProgram,
    binaries: Sequence[int],
    limits: SolveLimits = SolveLimits(),
    priority: Optional[dict[int, int]] = None,
) -> BranchResult:
    """Minimize ``lp`` with the columns in ``binaries`` restricted to {0, 1}.

    Branching picks the most fractional binary among those with the lowest
    ``priority`` rank (ties by column index) and explores the child whose
    LP bound is better first, the rounding direction breaking ties.

    Returns:
        BranchResult with status optimal, infeasible or limit. A limit
        result carries the best incumbent found, if any.

    Raises:
        ValueError: If the root relaxation is unbounded.
    """
    search = _Search(lp, binaries, priority or {}, limits)
    if limits.threads > 1:
        with ThreadPoolExecutor(max_workers=min(limits.threads, 2)) as executor:
            return search.run(executor)
    return search.run(None)


def _rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(float(x)).limit_denominator(RATIONAL_DENOMINATOR)


def exact_point(model: MilpModel, values: Sequence) -> Optional[list[Fraction]]:
    """An exactly feasible point of ``model`` with the binaries of ``values``.

    Binaries are rounded and floats read back as nearby rationals. That point
    is returned unchanged when it satisfies every bound and row exactly;
    otherwise the continuous part is re-solved over the rationals with the
    binaries fixed. Returns None when the rounded binaries admit no point.
    """
    point = [_rational(x) for x in values]
    binaries = model.binary_columns()
    for j in binaries:
        point[j] = Fraction(round(point[j]))
    problems = model.check(point)
    if not problems:
        return point
    logger.debug("rounded point violates %d rows, re-solving the continuous part", len(problems))
    fixings = {j: point[j] for j in binaries}
    result = solve_lp(model.relaxation().with_fixings(fixings), "exact")
    if result.is_optimal:
        return list(result.values)
    logger.debug("exact re-solve with rounded binaries: %s", result.status)
    return None


def _branch_and_bound_model(model: MilpModel, limits: SolveLimits) -> BranchResult:
    rank = {family: r for r, family in enumerate(BRANCH_PRIORITY)}
    priority = {
        j: rank.get(v.family, len(BRANCH_PRIORITY))
        for j, v in enumerate(model.variables)
        if v.binary
    }
    return branch_and_bound(model.relaxation(), model.binary_columns(), limits, priority)


def _highs_model(model: MilpModel, limits: SolveLimits) -> BranchResult:
    started = time.monotonic()
    found = highs.search(model, limits.time_limit, limits.max_nodes)
    stats = SolveStats(nodes=found.nodes)
    values = None
    if found.x is not None:
        values = exact_point(model, found.x)
        if values is None:
            logger.warning("HiGHS binaries admit no exact point; continuing with exact branch-and-bound")
    elif found.status in (INFEASIBLE, LIMIT):
        stats.duration = time.monotonic() - started
        return BranchResult(found.status, stats=stats)
    else:
        logger.warning("HiGHS stopped without a point (%s); continuing with exact branch-and-bound", found.message)

    if values is None:
        remaining = limits.time_limit - (time.monotonic() - started)
        if remaining <= 0:
            stats.duration = time.monotonic() - started
            return BranchResult(LIMIT, stats=stats)
        outcome = _branch_and_bound_model(model, replace(limits, time_limit=remaining))
        outcome.stats.nodes += stats.nodes
        outcome.stats.duration = time.monotonic() - started
        return outcome

    stats.duration = time.monotonic() - started
    status = OPTIMAL if found.status == OPTIMAL else LIMIT
    return BranchResult(status, values, model.objective_value(values), stats)


def solve_milp(model: MilpModel, limits: SolveLimits = SolveLimits()) -> MilpSolution:
    """Solve a realization model and check the answer exactly.

    With the ``highs`` engine the optimum is proven in floating point and the
    returned point is made exactly feasible with ``exact_point``; if that
    fails, the exact branch-and-bound takes over for the remaining time.

    Raises:
        RuntimeError: If the incumbent violates the model, which would be a
            solver bug.
    """
    tracer = get_tracer()
    with tracer.start_as_current_span("milp.solve") as span:
        span.set_attribute("milp.variables", len(model.variables))
        span.set_attribute("milp.constraints", len(model.constraints))
        span.set_attribute("milp.engine", limits.engine)
        span.set_attribute("milp.arithmetic", limits.arithmetic)
        if limits.engine == "highs":
            outcome = _highs_model(model, limits)
        else:
            outcome = _branch_and_bound_model(model, limits)
        span.set_attribute("milp.status", outcome.status)
        span.set_attribute("milp.nodes", outcome.stats.nodes)

    stats = outcome.stats
    metrics.record_milp_solve(outcome.status, stats.nodes, stats.lp_iterations, stats.duration * 1000)
    logger.info(
        "milp %s (%s): nodes=%d lp_iterations=%d duration=%.2fs objective=%s",
        outcome.status, limits.engine, stats.nodes, stats.lp_iterations, stats.duration, outcome.objective,
    )

    if outcome.values is None:
        return MilpSolution(outcome.status, stats=stats)
    problems = model.check(outcome.values)
    if problems:
        raise RuntimeError(f"solver returned a point violating {problems[:5]}")
    return MilpSolution(
        outcome.status,
        model.values_by_name(outcome.values),
        outcome.objective,
        stats,
    )
