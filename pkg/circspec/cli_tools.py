"""
Command bodies shared by the click commands and YAML run configurations.
"""

from pathlib import Path
from typing import Any, Callable, Dict, Optional, Tuple

import click
import numpy as np
from colorama import Fore, Style

from circspec import corpus
from circspec.config import (
    GRID_SUFFIXES,
    RunConfig,
    load_document,
    load_forcing,
    load_function,
    load_nonlinearity,
    load_system,
    settings_from_overrides,
)
from circspec.errors import CertificationFailure, InvalidInput
from circspec.funcspace import GridFunction, TrigPolynomial
from circspec.logger import CircspecLogger
from circspec.perturb import solve_perturbed
from circspec.pipeline import Pipeline
from circspec.process import (
    IntegrationSettings,
    PeriodicSystem,
    SystemKind,
    autonomous_gap,
    growth_bound,
    monodromy,
    multiplier_mismatch,
    spectral_gap,
)
from circspec.reports import build_report, read_grid, series_text, to_json_text, write_atomic, write_report, write_series
from circspec.solver import (
    MildSolution,
    apply_Tfh,
    forcing_angles,
    inclusion_settings,
    iterate_T1,
    project_forcing,
    residual,
    solve_linear,
    verify_spectral_inclusion,
)
from circspec.spectrum import circular_spectrum, compare_spectra
from circspec.validator import InputValidator

SEMIGROUP_TOL = 1e-7
FIXED_POINT_DT = 1.0 / 64


def _settings_dict(settings: Dict[str, Any]) -> Dict[str, Any]:
    return {section: value.to_dict() for section, value in settings.items()}


def _require(config: RunConfig, key: str) -> str:
    path = config.inputs.get(key)
    if not path:
        raise InvalidInput(f"'{config.command}' needs --{key}")
    return path


def _system(config: RunConfig) -> PeriodicSystem:
    sys = load_system(_require(config, "system"), config.period)
    overrides = config.settings.get("integration")
    if overrides:
        sys = sys.with_integration(settings_from_overrides(IntegrationSettings, overrides, base=sys.integ))
    return sys


def _forcing(config: RunConfig, settings: Dict[str, Any]) -> Tuple[TrigPolynomial, Optional[float]]:
    """Forcing on the unit clock, projected first when it is given on a grid."""
    path = _require(config, "forcing")
    if Path(path).suffix.lower() in GRID_SUFFIXES:
        grid = read_grid(path)
        poly, defect = project_forcing(grid, settings["resolvent"], omega_range=config.params.get("omega_range"))
        return poly.rescaled(config.period), defect
    return load_forcing(path, config.period), None


def _emit(config: RunConfig, settings: Dict[str, Any], payload: Dict[str, Any]) -> Dict[str, Any]:
    report = build_report(config.command, payload, _settings_dict(settings), config.seed, config.period)
    out = config.outputs.get("out")
    if out:
        write_report(Path(out), report)
    else:
        click.echo(to_json_text(report), nl=False)
    return report


def _write_solution_series(config: RunConfig, solution: MildSolution) -> None:
    """Series of ``u(t)`` in the caller's time, ``u(t) = y(t / tau)``."""
    path = config.outputs.get("series")
    if not path:
        return
    tau = config.period
    a, b = config.window or (0.0, 10.0 * tau)
    dt = config.dt or tau / 64
    n = int(round((b - a) / dt)) + 1
    times = a + dt * np.arange(n)
    write_series(Path(path), times, solution(times / tau), {"command": config.command, "period": tau})


# Commands

def run_spectrum(config: RunConfig, settings: Dict[str, Any], logger: Optional[CircspecLogger] = None) -> Dict[str, Any]:
    resolvent = settings["resolvent"]
    path = _require(config, "input")
    pipe = Pipeline("spectrum", logger)
    pipe.add("load", lambda r: load_function(path))
    pipe.add("circular_spectrum", lambda r: circular_spectrum(r["load"], resolvent))
    pipe.add(
        "carleman_comparison",
        lambda r: compare_spectra(r["load"], resolvent) if isinstance(r["load"], TrigPolynomial) else None,
    )
    results = pipe.run()
    payload: Dict[str, Any] = {"input": path}
    payload.update(results["circular_spectrum"].to_dict())
    if results["carleman_comparison"] is not None:
        payload["comparison"] = results["carleman_comparison"].to_dict()
    return _emit(config, settings, payload)


def run_monodromy(config: RunConfig, settings: Dict[str, Any], logger: Optional[CircspecLogger] = None) -> Dict[str, Any]:
    anchor = float(config.params.get("anchor", 0.0)) / config.period
    pipe = Pipeline("monodromy", logger)
    pipe.add("load", lambda r: _system(config))
    pipe.add("monodromy", lambda r: monodromy(r["load"], anchor))
    pipe.add("multiplier_mismatch", lambda r: multiplier_mismatch(r["load"]))
    pipe.add("growth_bound", lambda r: growth_bound(r["load"]))
    results = pipe.run()
    sys, mono = results["load"], results["monodromy"]
    bound = results["growth_bound"]
    payload: Dict[str, Any] = {
        "system": sys.to_dict(),
        "monodromy": mono.to_dict(),
        "multiplier_mismatch": results["multiplier_mismatch"],
        "growth_bound": {"N": bound.N, "omega": bound.omega},
    }
    if config.inputs.get("forcing"):
        forcing, _ = _forcing(config, settings)
        angles = forcing_angles(forcing)
        payload["gap"] = spectral_gap(mono, angles)
        if sys.kind is SystemKind.CONSTANT:
            payload["autonomous_gap"] = autonomous_gap(sys.constant, angles)
    return _emit(config, settings, payload)


def run_solve(config: RunConfig, settings: Dict[str, Any], logger: Optional[CircspecLogger] = None) -> Dict[str, Any]:
    pipe = Pipeline("solve", logger)
    pipe.add("load_system", lambda r: _system(config))
    pipe.add("load_forcing", lambda r: _forcing(config, settings))
    pipe.add("solve", lambda r: solve_linear(r["load_system"], r["load_forcing"][0], settings["solver"]))
    results = pipe.run()
    solution = results["solve"]
    defect = results["load_forcing"][1]
    if defect is not None:
        solution.report.projection_defect = defect
    if logger:
        logger.certificate("mild-solution residual", True, f"{solution.report.residual:.3e}")
    _write_solution_series(config, solution)
    return _emit(config, settings, solution.to_dict())


def run_perturb(config: RunConfig, settings: Dict[str, Any], logger: Optional[CircspecLogger] = None) -> Dict[str, Any]:
    pipe = Pipeline("perturb", logger)
    pipe.add("load_system", lambda r: _system(config))
    pipe.add("load_forcing", lambda r: _forcing(config, settings)[0])
    pipe.add(
        "load_nonlinearity",
        lambda r: load_nonlinearity(_require(config, "nonlinearity"), r["load_system"], config.period),
    )
    pipe.add(
        "picard",
        lambda r: solve_perturbed(
            r["load_system"],
            r["load_forcing"],
            r["load_nonlinearity"],
            config.epsilon,
            settings["perturb"],
            settings["solver"],
        ),
    )
    results = pipe.run()
    solution, report = results["picard"]
    if logger:
        logger.certificate("norm bound |w| <= 2 rho M", report.bound_ok, f"{report.final_norm:.6g}")
        logger.certificate("perturbed residual", True, f"{report.residual:.3e}")
    _write_solution_series(config, solution)
    payload = solution.to_dict()
    payload["nonlinearity"] = results["load_nonlinearity"].to_dict()
    payload["perturb"] = report.to_dict()
    return _emit(config, settings, payload)


def _semigroup_gap(sys: PeriodicSystem, f: TrigPolynomial, seed: int) -> float:
    rng = np.random.default_rng(seed)
    t = float(rng.uniform(-2.0, 2.0))
    h, k = (1.0 - rng.random(2)).tolist()
    inner = lambda s: apply_Tfh(sys, f, f, k, s)
    return float(np.linalg.norm(apply_Tfh(sys, f, f, h + k, t) - apply_Tfh(sys, f, inner, h, t)))


def run_verify(config: RunConfig, settings: Dict[str, Any], logger: Optional[CircspecLogger] = None) -> Dict[str, Any]:
    """
    Bundle the certificates for one system and forcing.

    Checks: multiplier consistency across anchors, residual of the direct
    solve, spectral inclusion, fixed point under one period of the affine
    semigroup and the semigroup law at a seeded probe. The report is written
    before a failing check is raised.
    """
    solver_settings = settings["solver"]
    pipe = Pipeline("verify", logger)
    pipe.add("load_system", lambda r: _system(config))
    pipe.add("load_forcing", lambda r: _forcing(config, settings)[0])
    pipe.add("multipliers", lambda r: multiplier_mismatch(r["load_system"]))
    pipe.add("solve", lambda r: solve_linear(r["load_system"], r["load_forcing"], solver_settings, certify=False))
    pipe.add(
        "residual",
        lambda r: residual(
            r["load_system"], r["solve"], r["load_forcing"],
            solver_settings.n_pairs, solver_settings.seed, solver_settings.max_span,
        ),
    )
    pipe.add("inclusion", lambda r: verify_spectral_inclusion(r["solve"], r["load_forcing"], inclusion_settings()))

    def fixed_point(r):
        g0 = r["solve"].sample((0.0, 3.0), FIXED_POINT_DT)
        g1 = iterate_T1(r["load_system"], r["load_forcing"], g0, 1)
        return float(np.max(np.linalg.norm(g1.samples - g0.restrict(g1.t0, g1.t_end).samples, axis=1)))

    pipe.add("fixed_point", fixed_point)
    pipe.add("semigroup", lambda r: _semigroup_gap(r["load_system"], r["load_forcing"], config.seed))
    results = pipe.run()

    tol = solver_settings.resid_tol
    inclusion = results["inclusion"]
    checks = {
        "multipliers": {"value": results["multipliers"], "passed": results["multipliers"] < 1e-6},
        "residual": {"value": results["residual"], "passed": results["residual"] < tol},
        "inclusion": {"value": len(inclusion.excess), "passed": inclusion.holds},
        "fixed_point": {"value": results["fixed_point"], "passed": results["fixed_point"] < tol},
        "semigroup": {"value": results["semigroup"], "passed": results["semigroup"] < SEMIGROUP_TOL},
    }
    if logger:
        for name, check in checks.items():
            logger.certificate(name, check["passed"], check["value"])

    solution = results["solve"]
    solution.report.residual = results["residual"]
    payload = {
        "checks": checks,
        "inclusion": inclusion.to_dict(),
        "solution": solution.to_dict(),
    }
    report = _emit(config, settings, payload)
    failed = [name for name, check in checks.items() if not check["passed"]]
    if failed:
        raise CertificationFailure(f"verify failed: {', '.join(failed)}", residual=results["residual"])
    return report


def run_corpus(config: RunConfig, settings: Dict[str, Any], logger: Optional[CircspecLogger] = None) -> Dict[str, Any]:
    """Write a corpus object: grid functions as series, everything else as a document."""
    params = dict(config.params)
    if config.window is not None:
        params.setdefault("window", list(config.window))
    if config.dt is not None:
        params.setdefault("dt", config.dt)
    entry = corpus.build(config.name, params)
    out = config.outputs.get("out")
    if isinstance(entry.obj, GridFunction):
        grid = entry.obj
        comments = {"corpus": entry.name, **entry.params}
        if out:
            write_series(Path(out), grid.times, grid.samples, comments)
        else:
            click.echo(series_text(grid.times, grid.samples, comments), nl=False)
    else:
        text = to_json_text(entry.to_dict())
        if out:
            write_atomic(Path(out), text)
        else:
            click.echo(text, nl=False)
    if logger:
        logger.info(f"corpus '{entry.name}' written{f' to {out}' if out else ''}")
    return {"name": entry.name, "kind": entry.kind, "params": entry.params, "out": out}


COMMANDS: Dict[str, Callable[..., Dict[str, Any]]] = {
    "spectrum": run_spectrum,
    "monodromy": run_monodromy,
    "solve": run_solve,
    "perturb": run_perturb,
    "verify": run_verify,
    "corpus": run_corpus,
}


def execute(config: RunConfig, logger: Optional[CircspecLogger] = None) -> Dict[str, Any]:
    """
    Run one configured command.

    Returns:
        The report (or corpus summary) produced by the command
    """
    settings = config.resolved_settings()
    return COMMANDS[config.command](config, settings, logger)


def validate_run_file(path: Path) -> bool:
    """
    Validate a run configuration file and print the outcome.

    Args:
        path: Path to the YAML run configuration

    Returns:
        True if valid, False otherwise
    """
    path = Path(path)
    if not path.exists():
        click.echo(f"{Fore.RED}❌ Run configuration not found: {path}{Style.RESET_ALL}")
        return False
    try:
        data = load_document(path)
    except InvalidInput as e:
        click.echo(f"{Fore.RED}❌ {e.message}{Style.RESET_ALL}")
        return False

    is_valid, errors = InputValidator().validate_run_config(data, path.parent)
    if not is_valid:
        click.echo(f"{Fore.RED}❌ Run configuration has errors:{Style.RESET_ALL}")
        for error in errors:
            click.echo(f"  {Fore.RED}•{Style.RESET_ALL} {error}")
        return False

    try:
        RunConfig.from_dict(data, path.parent).resolved_settings()
    except InvalidInput as e:
        click.echo(f"{Fore.RED}❌ {e.message}{Style.RESET_ALL}")
        return False

    click.echo(f"{Fore.GREEN}✅ Run configuration is valid{Style.RESET_ALL}")
    click.echo(f"  {Fore.CYAN}command:{Style.RESET_ALL} {data['command']}")
    for key, value in (data.get("inputs") or {}).items():
        click.echo(f"  {Fore.CYAN}{key}:{Style.RESET_ALL} {value}")
    return True
