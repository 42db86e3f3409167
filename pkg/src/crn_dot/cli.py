"""Command-line interface for crn-dot."""

import json
import logging
from fractions import Fraction
from pathlib import Path
from typing import Annotated, Any, Optional

import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from crn_dot import __version__, metrics
from crn_dot.analysis import DeficiencyReport, deficiency_report
from crn_dot.config import RunConfig, get_config
from crn_dot.crn import (
    InadmissibleTermError,
    MassActionSystem,
    NetworkError,
    canonical_realization,
    polynomial_system,
)
from crn_dot.exporter import configure_tracing
from crn_dot.formatting import decimal_string, format_complex, format_partition, format_verdict
from crn_dot.linalg import to_fraction
from crn_dot.lpfile import SolutionImportError, export_lp, import_solution
from crn_dot.model import ModelConfig, ModelError
from crn_dot.parsing import (
    NetworkParseError,
    OdeParseError,
    format_network,
    looks_like_ode,
    parse_network,
    parse_ode,
    read_ode,
)
from crn_dot.realize import (
    CERTIFIED,
    RealizationError,
    RealizationResult,
    VerificationReport,
    accepted,
    certify,
    decode_and_certify,
    find_realization,
    model_for,
)
from crn_dot.simplex import INFEASIBLE
from crn_dot.solver import SolveLimits

logger = logging.getLogger(__name__)

console = Console()
err_console = Console(stderr=True)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2
EXIT_LIMIT = 3

_USER_ERRORS = (
    NetworkParseError,
    OdeParseError,
    InadmissibleTermError,
    NetworkError,
    ModelError,
    SolutionImportError,
    RealizationError,
    ValueError,
    RuntimeError,
    OSError,
)

app = typer.Typer(
    add_completion=False,
    rich_markup_mode="rich",
    no_args_is_help=True,
    help="""
    [bold]Deficiency One realizations of mass action systems[/bold]

    [bold]Examples:[/bold]

      crn-dot analyze network.txt
      crn-dot realize system.ode --out network.txt
      crn-dot find network.txt --mode dynequiv --out result.json
      crn-dot verify original.txt target.txt --c 1,2
      crn-dot export-lp network.txt --out model.lp
    """,
)

EpsOption = Annotated[Optional[str], typer.Option("--eps", help="Big-M parameter in (0, 1), e.g. 0.1 or 1/10")]
SeedOption = Annotated[Optional[int], typer.Option("--seed", help="Seed for the random span weights")]
ModeOption = Annotated[Optional[str], typer.Option("--mode", help="conjugate or dynequiv")]
TheoremOption = Annotated[Optional[str], typer.Option("--theorem", help="dot or boros")]
JsonOption = Annotated[bool, typer.Option("--json", help="Print JSON instead of a summary")]
OutOption = Annotated[Optional[Path], typer.Option("--out", "-o", help="Write output to this file")]


def version_callback(value: bool) -> None:
    """Show version and exit."""
    if value:
        console.print(f"crn-dot version {__version__}")
        raise typer.Exit


def config_callback(value: bool) -> None:
    """Show config and exit."""
    if value:
        show_config()
        raise typer.Exit


def show_config() -> None:
    """Show the configuration loaded from the environment."""
    config = get_config()

    table = Table(title="Configuration", show_header=True)
    table.add_column("Setting", style="cyan")
    table.add_column("Value", style="green")

    table.add_row("eps", str(config.eps))
    table.add_row("seed", str(config.seed))
    table.add_row("mode", config.mode)
    table.add_row("theorem", config.theorem)
    table.add_row("solver", config.solver)
    table.add_row("retries", str(config.retries))
    table.add_row("threads", str(config.threads))
    table.add_row("max nodes", str(config.max_nodes))
    table.add_row("time limit (s)", str(config.time_limit))
    table.add_row("arithmetic", config.arithmetic)
    table.add_row("w' cap", config.wprime_cap)
    table.add_row("Traces Enabled", str(config.traces_enabled))
    table.add_row("Metrics Enabled", str(config.metrics_enabled))

    if config.debug:
        table.add_row("Debug Mode", "Enabled")

    console.print(table)


def _setup_logging(debug: bool) -> None:
    package_logger = logging.getLogger("crn_dot")
    package_logger.setLevel(logging.DEBUG if debug else logging.WARNING)
    if not any(isinstance(h, RichHandler) for h in package_logger.handlers):
        package_logger.addHandler(RichHandler(console=err_console, show_path=False))


@app.callback()
def main(
    debug: Annotated[
        bool,
        typer.Option("--debug", help="Enable debug logging", envvar="CRN_DEBUG"),
    ] = False,
    version: Annotated[
        Optional[bool],
        typer.Option("--version", "-v", callback=version_callback, is_eager=True, help="Show version and exit"),
    ] = None,
    config: Annotated[
        Optional[bool],
        typer.Option("--config", callback=config_callback, is_eager=True, help="Show configuration and exit"),
    ] = None,
) -> None:
    """Set up logging and telemetry for every command."""
    settings = get_config()
    _setup_logging(debug or settings.debug)
    try:
        configure_tracing(settings)
    except RuntimeError as e:
        logger.warning("tracing not configured: %s", e)
    metrics.configure_metrics(settings)


def _finish(command: str, code: int) -> None:
    metrics.record_command(command, code)
    raise typer.Exit(code)


def _fail(command: str, error: Exception) -> None:
    err_console.print(f"[red]error:[/red] {error}", highlight=False)
    _finish(command, EXIT_ERROR)


def _load_system(path: Path) -> MassActionSystem:
    """Read a network file, or an ODE file through its canonical realization."""
    text = path.read_text(encoding="utf-8")
    if looks_like_ode(text):
        return canonical_realization(parse_ode(text))
    return parse_network(text)


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        typer.echo(text, nl=not text.endswith("\n"))
    else:
        out.write_text(text, encoding="utf-8")
        err_console.print(f"[dim]wrote {out}[/dim]")


def _dump(data: dict[str, Any]) -> str:
    return json.dumps(data, indent=2) + "\n"


def _parse_c(text: Optional[str], m: int) -> tuple[Fraction, ...]:
    if text is None:
        return (Fraction(1),) * m
    values = tuple(to_fraction(part) for part in text.split(","))
    if len(values) != m:
        raise ValueError(f"--c has {len(values)} values, expected {m}")
    return values


def print_report(report: DeficiencyReport, labels: list[str]) -> None:
    """Human summary of a deficiency report."""
    d = report.decomposition
    table = Table(show_header=False, box=None)
    table.add_column(style="cyan")
    table.add_column()
    table.add_row("complexes n", str(report.n))
    table.add_row("linkage classes l", str(report.l))
    table.add_row("stoichiometric dim s", str(report.s))
    table.add_row("deficiency", str(report.delta))
    table.add_row("class deficiencies", str(list(report.class_deficiencies)))
    table.add_row("terminal classes t", str(report.t))
    table.add_row("weakly reversible", "yes" if report.weakly_reversible else "no")
    table.add_row("linkage classes", format_partition(d.linkage_classes, labels))
    table.add_row("terminal strong classes", format_partition(d.terminal_classes, labels))
    table.add_row("Deficiency One Theorem", format_verdict(report.dot))
    table.add_row("Boros condition", format_verdict(report.boros))
    table.add_row("Deficiency Zero Theorem", format_verdict(report.deficiency_zero))
    console.print(table)


def print_verification(verification: VerificationReport) -> None:
    conj = verification.conjugacy
    console.print(
        f"linear conjugacy: {format_verdict(conj.conjugate)} "
        f"(residual {conj.residual}, {conj.points_checked - conj.points_failed}/{conj.points_checked} points agree)"
    )
    console.print(f"{verification.theorem.upper()} verdict on target: {format_verdict(verification.theorem_verdict)}")
    for note in verification.notes:
        console.print(f"[dim]{note}[/dim]")
    status = "[green]certified[/green]" if verification.certified else "[red]not certified[/red]"
    console.print(f"result: {status}")


def print_result(result: RealizationResult) -> None:
    net = result.target.network
    names = net.species_names
    labels = [format_complex(cx.y, names) for cx in net.complexes]
    console.print(
        "c = (" + ", ".join(f"{name}: {decimal_string(v)}" for name, v in zip(names, result.c)) + ")"
    )
    table = Table(title="Target reactions", show_header=True)
    table.add_column("Source", style="cyan")
    table.add_column("Target", style="cyan")
    table.add_column("Rate", style="green")
    table.add_column("Decimal", style="dim")
    for r, k in zip(net.reactions, result.target.rates):
        if not r.is_self_loop:
            table.add_row(labels[r.source], labels[r.target], str(k), decimal_string(k))
    console.print(table)
    if result.verification is not None:
        print_verification(result.verification)


@app.command()
def analyze(
    file: Annotated[Path, typer.Argument(help="Network file (or ODE file)")],
    as_json: JsonOption = False,
    out: OutOption = None,
) -> None:
    """Deficiency, linkage classes and theorem verdicts of a network."""
    try:
        system = _load_system(file)
        report = deficiency_report(system.network)
    except _USER_ERRORS as e:
        _fail("analyze", e)
        return
    if as_json or out is not None:
        _emit(_dump(report.to_dict()), out)
    else:
        net = system.network
        print_report(report, [format_complex(cx.y, net.species_names) for cx in net.complexes])
    _finish("analyze", EXIT_OK)


@app.command()
def realize(
    file: Annotated[Path, typer.Argument(help="Polynomial ODE file")],
    out: OutOption = None,
) -> None:
    """Canonical mass action network of a polynomial ODE system."""
    try:
        polynomials = read_ode(file)
        system = canonical_realization(polynomials)
        if polynomial_system(system).coefficients() != polynomials.coefficients():
            raise RuntimeError("canonical network does not reproduce the input polynomials")
    except _USER_ERRORS as e:
        _fail("realize", e)
        return
    logger.info("canonical network: %d complexes, %d reactions", system.network.n, len(system.network.reactions))
    _emit(format_network(system), out)
    _finish("realize", EXIT_OK)


@app.command()
def find(
    file: Annotated[Path, typer.Argument(help="Network file (or ODE file)")],
    mode: ModeOption = None,
    theorem: TheoremOption = None,
    eps: EpsOption = None,
    seed: SeedOption = None,
    solver: Annotated[Optional[str], typer.Option("--solver", help="highs, internal or lpfile")] = None,
    threads: Annotated[Optional[int], typer.Option("--threads", help="Branch-and-bound worker threads")] = None,
    retries: Annotated[Optional[int], typer.Option("--retries", help="Resamples after a failed certification")] = None,
    max_nodes: Annotated[Optional[int], typer.Option("--max-nodes", help="Branch-and-bound node limit")] = None,
    time_limit: Annotated[Optional[int], typer.Option("--time-limit", help="Solver time limit in seconds")] = None,
    arithmetic: Annotated[Optional[str], typer.Option("--arithmetic", help="exact or float")] = None,
    wprime_cap: Annotated[Optional[str], typer.Option("--wprime-cap", help="literal or scaled")] = None,
    lp_out: Annotated[Optional[Path], typer.Option("--lp-out", help="lpfile solver: where to write the model")] = None,
    solution: Annotated[Optional[Path], typer.Option("--solution", help="lpfile solver: external solution to import")] = None,
    target_out: Annotated[Optional[Path], typer.Option("--target-out", help="Write the target network file")] = None,
    as_json: JsonOption = False,
    out: OutOption = None,
) -> None:
    """Search for a weakly reversible Deficiency One realization.

    Exit codes: 0 certified realization, 2 proven infeasible, 3 limit reached.
    """
    try:
        run = RunConfig.from_flags(
            "find", (file,), eps=eps, seed=seed, mode=mode, theorem=theorem, solver=solver,
            threads=threads, retries=retries, max_nodes=max_nodes, time_limit=time_limit,
            arithmetic=arithmetic, wprime_cap=wprime_cap, output=None if out is None else str(out),
        )
        system = _load_system(file)
        model_config = ModelConfig(
            eps=run.eps, seed=run.seed, mode=run.mode, theorem=run.theorem, wprime_cap=run.wprime_cap
        )
        if run.solver == "lpfile":
            model = model_for(system, model_config)
            if solution is None:
                _emit(export_lp(model), lp_out)
                _finish("find", EXIT_OK)
                return
            imported = import_solution(solution.read_text(encoding="utf-8"), model)
            result = decode_and_certify(imported, system, model)
            status = CERTIFIED if accepted(result) else "rejected"
            payload = {"status": status, "run": run.echo(), "realization": result.to_dict()}
            code = EXIT_OK if status == CERTIFIED else EXIT_ERROR
        else:
            limits = SolveLimits(
                engine=run.solver,
                max_nodes=run.max_nodes,
                time_limit=run.time_limit,
                threads=run.threads,
                arithmetic=run.arithmetic,
            )
            outcome = find_realization(system, model_config, limits, run.retries)
            result = outcome.result
            status = outcome.status
            payload = {"run": run.echo(), **outcome.to_dict()}
            code = {CERTIFIED: EXIT_OK, INFEASIBLE: EXIT_INFEASIBLE}.get(status, EXIT_LIMIT)
    except typer.Exit:
        raise
    except _USER_ERRORS as e:
        _fail("find", e)
        return

    if result is not None and target_out is not None:
        target_out.write_text(format_network(result.target), encoding="utf-8")
    if as_json or out is not None:
        _emit(_dump(payload), out)
    else:
        console.print(f"status: [bold]{status}[/bold]")
        if result is not None:
            print_result(result)
    _finish("find", code)


@app.command()
def verify(
    original: Annotated[Path, typer.Argument(help="Original network file")],
    target: Annotated[Path, typer.Argument(help="Target network file")],
    c: Annotated[Optional[str], typer.Option("--c", help="Comma-separated conjugacy constants (default all 1)")] = None,
    theorem: Annotated[str, typer.Option("--theorem", help="dot or boros")] = "dot",
    as_json: JsonOption = False,
) -> None:
    """Check that TARGET is linearly conjugate to ORIGINAL under x = diag(c) x*.

    Exits 0 when the systems are conjugate; theorem verdicts are reported.
    """
    try:
        original_system = _load_system(original)
        target_system = _load_system(target)
        constants = _parse_c(c, original_system.network.m)
        verification = certify(original_system, target_system, constants, theorem)
    except _USER_ERRORS as e:
        _fail("verify", e)
        return
    if as_json:
        _emit(_dump(verification.to_dict()), None)
    else:
        print_verification(verification)
    _finish("verify", EXIT_OK if verification.conjugacy.conjugate else EXIT_ERROR)


@app.command("export-lp")
def export_lp_command(
    file: Annotated[Path, typer.Argument(help="Network file (or ODE file)")],
    mode: ModeOption = None,
    theorem: TheoremOption = None,
    eps: EpsOption = None,
    seed: SeedOption = None,
    import_path: Annotated[
        Optional[Path], typer.Option("--import", help="Import this solution, decode and certify it")
    ] = None,
    missing_zero: Annotated[
        bool, typer.Option("--missing-zero", help="Treat variables missing from the solution as 0")
    ] = False,
    as_json: JsonOption = False,
    out: OutOption = None,
) -> None:
    """Write the realization model as an LP file, or import a solution for it."""
    try:
        run = RunConfig.from_flags("export-lp", (file,), eps=eps, seed=seed, mode=mode, theorem=theorem)
        system = _load_system(file)
        model = model_for(
            system,
            ModelConfig(eps=run.eps, seed=run.seed, mode=run.mode, theorem=run.theorem, wprime_cap=run.wprime_cap),
        )
        if import_path is None:
            _emit(export_lp(model), out)
            _finish("export-lp", EXIT_OK)
            return
        imported = import_solution(import_path.read_text(encoding="utf-8"), model, missing_zero)
        result = decode_and_certify(imported, system, model)
    except typer.Exit:
        raise
    except _USER_ERRORS as e:
        _fail("export-lp", e)
        return

    ok = accepted(result)
    if as_json or out is not None:
        _emit(_dump({"status": CERTIFIED if ok else "rejected", "run": run.echo(), "realization": result.to_dict()}), out)
    else:
        print_result(result)
    _finish("export-lp", EXIT_OK if ok else EXIT_ERROR)


if __name__ == "__main__":
    app()
