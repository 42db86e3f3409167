"""Decode MILP solutions into target networks and certify them.

With ``x = T x*`` and ``T = diag(c)``, a target mass action system is
linearly conjugate to the original exactly when, for every source
monomial ``y`` and species ``k``,

    coef_y[k] = c_k * coef*_y[k] / Psi_y(c)

where ``coef`` / ``coef*`` are the coefficients of ``x**y`` in the two
vector fields. The model's ``b[i,j]`` is ``k*(i,j) / Psi_i(c)``, so decoding
sets ``k*(i,j) = b[i,j] * Psi_i(c)`` with ``c = 1/d``.
"""

import logging
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import lcm
from typing import Any, Optional, Sequence

from crn_dot import metrics
from crn_dot.analysis import (
    DeficiencyReport,
    deficiency_report,
    isolated_complexes,
    kinetic_dim,
    remove_isolated_complexes,
)
from crn_dot.crn import (
    Complex,
    MassActionSystem,
    Network,
    NetworkError,
    build_matrices,
    coefficient_map,
    mass_action_rhs,
    stoichiometry_lcm,
)
from crn_dot.exporter import get_tracer
from crn_dot.formatting import format_complex, rational_json
from crn_dot.model import MilpModel, ModelConfig, build_model, var_name
from crn_dot.solver import MilpSolution, SolveLimits, solve_milp
from crn_dot.simplex import INFEASIBLE, LIMIT, OPTIMAL

logger = logging.getLogger(__name__)

DEFAULT_POINTS = 100
CERTIFIED = "certified"


class RealizationError(RuntimeError):
    """Certification kept failing after every resampling attempt."""


@dataclass(frozen=True)
class ConjugacyCheck:
    """Coefficient comparison plus pointwise vector-field comparison."""

    residual: Fraction
    mismatched_monomials: tuple[str, ...]
    points_checked: int
    points_failed: int
    points_skipped: int = 0

    @property
    def conjugate(self) -> bool:
        return self.residual == 0 and not self.mismatched_monomials and self.points_failed == 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "conjugate": self.conjugate,
            "lc_residual": rational_json(self.residual),
            "mismatched_monomials": list(self.mismatched_monomials),
            "points_checked": self.points_checked,
            "points_failed": self.points_failed,
            "points_skipped": self.points_skipped,
        }


@dataclass(frozen=True)
class VerificationReport:
    conjugacy: ConjugacyCheck
    theorem: str
    target_report: DeficiencyReport
    isolated: tuple[int, ...]
    verdict_with_isolated: bool
    verdict_without_isolated: bool
    notes: tuple[str, ...] = ()

    @property
    def isolation_consistent(self) -> bool:
        return self.verdict_with_isolated == self.verdict_without_isolated

    @property
    def theorem_verdict(self) -> bool:
        return self.verdict_without_isolated

    @property
    def certified(self) -> bool:
        return self.conjugacy.conjugate and self.theorem_verdict and self.isolation_consistent

    def to_dict(self) -> dict[str, Any]:
        return {
            "certified": self.certified,
            "theorem": self.theorem,
            "theorem_verdict": self.theorem_verdict,
            "isolation_consistent": self.isolation_consistent,
            "isolated_complexes": list(self.isolated),
            "conjugacy": self.conjugacy.to_dict(),
            "target": self.target_report.to_dict(),
            "notes": list(self.notes),
        }


@dataclass(frozen=True)
class RealizationResult:
    """A decoded target system together with its conjugacy constants."""

    c: tuple[Fraction, ...]
    target: MassActionSystem
    mode: str
    theorem: str
    assignment: tuple[int, ...]
    config: ModelConfig
    verification: Optional[VerificationReport] = None
    solution: Optional[MilpSolution] = None

    @property
    def certified(self) -> bool:
        return self.verification is not None and self.verification.certified

    def to_dict(self) -> dict[str, Any]:
        net = self.target.network
        labels = [format_complex(cx.y, net.species_names) for cx in net.complexes]
        reactions = [
            {"source": labels[r.source], "target": labels[r.target], "rate": rational_json(k)}
            for r, k in zip(net.reactions, self.target.rates)
            if not r.is_self_loop
        ]
        out: dict[str, Any] = {
            "config": {
                "eps": str(self.config.eps),
                "seed": self.config.seed,
                "mode": self.mode,
                "theorem": self.theorem,
            },
            "species": list(net.species_names),
            "c": [rational_json(v) for v in self.c],
            "reactions": reactions,
            "isolated_complexes": [labels[i] for i in isolated_complexes(net)],
            "linkage_slots": [a + 1 for a in self.assignment],
        }
        if self.verification is not None:
            out["verification"] = self.verification.to_dict()
        if self.solution is not None:
            out["solver"] = {
                "status": self.solution.status,
                "objective": None if self.solution.objective is None else str(self.solution.objective),
                **self.solution.stats.to_dict(),
            }
        return out


def decode(solution: MilpSolution, original: MassActionSystem, model: MilpModel) -> RealizationResult:
    """Build the target system from ``d`` and ``b``.

    Complexes that take part in no target reaction keep a self-loop with
    rate 1, so the target has the same complex set as the original.

    Raises:
        RealizationError: If the solution carries no values, a ``d`` is not
            positive, or a monomial of ``c`` is irrational.
    """
    if not solution.has_values:
        raise RealizationError(f"cannot decode a {solution.status} solution without values")
    net = original.network
    values = solution.values
    d = [values[var_name("d", (k,))] for k in range(net.m)]
    if any(v <= 0 for v in d):
        raise RealizationError(f"nonpositive conjugacy variable in {d}")
    c = tuple(1 / v for v in d)
    try:
        psi = [cx.monomial(c) for cx in net.complexes]
    except ValueError as e:
        raise RealizationError(str(e)) from e

    pairs: list[tuple[int, int]] = []
    rates: list[Fraction] = []
    for i in range(net.n):
        for j in range(net.n):
            if i != j:
                b = values[var_name("b", (i, j))]
                if b > 0:
                    pairs.append((i, j))
                    rates.append(b * psi[i])
    used = {i for pair in pairs for i in pair}
    for i in range(net.n):
        if i not in used:
            pairs.append((i, i))
            rates.append(Fraction(1))

    assignment = []
    for i in range(net.n):
        slot = next(
            (th for th in range(model.slots) if values[var_name("Lam", (i, th))] == 1),
            -1,
        )
        assignment.append(slot)

    target = MassActionSystem(
        Network.build(net.species_names, net.complexes, pairs),
        tuple(rates),
    )
    logger.debug("decoded %d target reactions, c=%s", len(rates), [str(v) for v in c])
    return RealizationResult(
        c=c,
        target=target,
        mode=model.config.mode.value,
        theorem=model.config.theorem.value,
        assignment=tuple(assignment),
        config=model.config,
        solution=solution,
    )


def verify_conjugacy(
    original: MassActionSystem,
    target: MassActionSystem,
    c: Sequence[Fraction],
    points: int = DEFAULT_POINTS,
    seed: int = 0,
) -> ConjugacyCheck:
    """Check that ``x = diag(c) x*`` maps target trajectories onto original ones.

    Two independent checks: the coefficient of every monomial in every
    equation, compared exactly, and the identity ``f(x) = T f*(T^-1 x)`` at
    ``points`` random positive rational states.

    Raises:
        NetworkError: If the species sets differ or ``c`` has the wrong length.
    """
    names = original.network.species_names
    target = target.with_species_order(names)
    c = tuple(Fraction(v) for v in c)
    if len(c) != len(names):
        raise NetworkError(f"{len(c)} conjugacy constants given for {len(names)} species")
    if any(v <= 0 for v in c):
        raise NetworkError("conjugacy constants must be positive")

    m = len(names)
    zero = [Fraction(0)] * m
    coef = coefficient_map(original)
    coef_target = coefficient_map(target)
    residual = Fraction(0)
    mismatched = []
    for y in sorted(set(coef) | set(coef_target)):
        lhs = coef.get(y, zero)
        rhs = coef_target.get(y, zero)
        try:
            scale = 1 / Complex(y).monomial(c)
        except ValueError:
            mismatched.append(format_complex(y, names))
            continue
        worst = max(abs(lhs[k] - c[k] * rhs[k] * scale) for k in range(m))
        if worst:
            mismatched.append(format_complex(y, names))
            residual = max(residual, worst)

    rng = random.Random(seed)
    power = lcm(stoichiometry_lcm(original.network), stoichiometry_lcm(target.network))
    failed = skipped = 0
    for _ in range(points):
        r = [Fraction(rng.randint(1, 20), rng.randint(1, 20)) for _ in range(m)]
        x_star = [v**power for v in r]
        x = [ck * v for ck, v in zip(c, x_star)]
        try:
            f = mass_action_rhs(original, x)
            f_star = mass_action_rhs(target, x_star)
        except ValueError:
            skipped += 1
            continue
        if any(f[k] != c[k] * f_star[k] for k in range(m)):
            failed += 1

    check = ConjugacyCheck(residual, tuple(mismatched), points - skipped, failed, skipped)
    logger.debug(
        "conjugacy residual=%s mismatched=%d failed_points=%d", residual, len(mismatched), failed
    )
    return check


def certify(
    original: MassActionSystem,
    target: MassActionSystem,
    c: Sequence[Fraction],
    theorem: str = "dot",
    points: int = DEFAULT_POINTS,
    seed: int = 0,
) -> VerificationReport:
    """Re-derive every claim about a target from scratch.

    The theorem verdict is computed on the target with and without its
    isolated self-loop complexes; the two must agree.
    """
    tracer = get_tracer()
    with tracer.start_as_current_span("realization.certify") as span:
        conjugacy = verify_conjugacy(original, target, c, points, seed)
        report = deficiency_report(target.network)
        isolated = isolated_complexes(target.network)
        stripped = remove_isolated_complexes(target.network) if isolated else target.network
        report_stripped = deficiency_report(stripped) if isolated else report
        notes = []
        if report_stripped.weakly_reversible:
            notes.append(
                "target is weakly reversible: the system admits a positive steady state "
                "for every choice of rate constants"
            )
        if report_stripped.deficiency_zero:
            notes.append("deficiency zero and weakly reversible: steady states are complex balanced")
        verification = VerificationReport(
            conjugacy=conjugacy,
            theorem=theorem,
            target_report=report_stripped,
            isolated=isolated,
            verdict_with_isolated=report.verdict(theorem),
            verdict_without_isolated=report_stripped.verdict(theorem),
            notes=tuple(notes),
        )
        span.set_attribute("realization.certified", verification.certified)
        span.set_attribute("realization.lc_residual", float(conjugacy.residual))
    return verification


def decode_and_certify(
    solution: MilpSolution,
    original: MassActionSystem,
    model: MilpModel,
    points: int = DEFAULT_POINTS,
) -> RealizationResult:
    result = decode(solution, original, model)
    verification = certify(
        original, result.target, result.c, model.config.theorem.value, points, model.config.seed
    )
    return replace(result, verification=verification)


def accepted(result: RealizationResult) -> bool:
    """Certified, and one terminal strong linkage class per linkage class."""
    return (
        result.verification is not None
        and result.verification.certified
        and result.verification.target_report.dot_condition_3
    )


def model_for(original: MassActionSystem, config: ModelConfig) -> MilpModel:
    """Build the realization model of ``original`` under ``config``."""
    km = build_matrices(original)
    s = kinetic_dim(original)
    tracer = get_tracer()
    with tracer.start_as_current_span("milp.build_model") as span:
        model = build_model(km.Y, km.M, s, config)
        span.set_attribute("model.species", model.m)
        span.set_attribute("model.complexes", model.n)
        span.set_attribute("model.slots", model.slots)
        span.set_attribute("model.variables", len(model.variables))
        span.set_attribute("model.constraints", len(model.constraints))
    return model


@dataclass
class FindOutcome:
    """Status of a realization search: certified, infeasible or limit."""

    status: str
    result: Optional[RealizationResult] = None
    attempts: int = 1
    seeds: list[int] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"status": self.status, "attempts": self.attempts, "seeds": self.seeds}
        if self.result is not None:
            out["realization"] = self.result.to_dict()
        return out


def find_realization(
    original: MassActionSystem,
    config: ModelConfig = ModelConfig(),
    limits: SolveLimits = SolveLimits(),
    retries: int = 3,
) -> FindOutcome:
    """Search for a certified realization, resampling the random weights on failure.

    Attempt ``a`` uses seed ``config.seed + a``. Infeasible and limit outcomes
    are returned as they are; only a solution that fails certification
    triggers a resample. Pinned ``delta_samples`` do not depend on the seed,
    so with them there is a single attempt.

    Raises:
        RealizationError: If every attempt produced an uncertifiable solution.
        ModelError: If the model cannot be built.
    """
    tracer = get_tracer()
    seeds: list[int] = []
    with tracer.start_as_current_span("crn.find") as span:
        span.set_attribute("crn.mode", config.mode.value)
        span.set_attribute("crn.theorem", config.theorem.value)
        attempts = retries + 1
        if config.delta_samples is not None and retries:
            logger.info("span weights are pinned; skipping %d resampling attempts", retries)
            attempts = 1
        for attempt in range(attempts):
            attempt_config = replace(config, seed=config.seed + attempt)
            seeds.append(attempt_config.seed)
            span.set_attribute("crn.seed", attempt_config.seed)
            model = model_for(original, attempt_config)
            solution = solve_milp(model, limits)
            if solution.status == INFEASIBLE:
                span.set_attribute("crn.status", INFEASIBLE)
                return FindOutcome(INFEASIBLE, attempts=attempt + 1, seeds=seeds)
            if not solution.has_values:
                span.set_attribute("crn.status", LIMIT)
                return FindOutcome(LIMIT, attempts=attempt + 1, seeds=seeds)
            result = decode_and_certify(solution, original, model)
            if accepted(result):
                status = CERTIFIED if solution.status == OPTIMAL else LIMIT
                span.set_attribute("crn.status", status)
                return FindOutcome(status, result, attempt + 1, seeds)
            logger.warning(
                "solution for seed %d failed certification (residual %s); resampling",
                attempt_config.seed,
                result.verification.conjugacy.residual if result.verification else "n/a",
            )
            metrics.record_resample(attempt_config.seed)
        span.set_attribute("crn.status", "failed")
    raise RealizationError(
        f"no certified realization after {len(seeds)} attempts (seeds {seeds})"
    )
