"""
Command-line interface.

Every command builds a ``RunConfig`` and hands it to ``cli_tools.execute``;
``circspec run CONFIG`` does the same from a YAML file. Errors print one
``CODE: message`` line on stderr and exit with the status of their class.
"""

import sys
import traceback
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Tuple

import click
import yaml

from circspec import __version__, cli_tools
from circspec.config import RunConfig, load_run_config
from circspec.errors import CircspecError, InvalidInput
from circspec.logger import CircspecLogger


def _parse_sets(items: Iterable[str]) -> Dict[str, Dict[str, Any]]:
    """``section.key=value`` pairs; values are parsed as YAML scalars or lists."""
    settings: Dict[str, Dict[str, Any]] = {}
    for item in items:
        key, sep, raw = item.partition("=")
        section, dot, name = key.partition(".")
        if not sep or not dot or not name:
            raise InvalidInput(f"--set expects section.key=value, got '{item}'")
        settings.setdefault(section, {})[name] = yaml.safe_load(raw)
    return settings


def _parse_deltas(text: str) -> Tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise InvalidInput(f"--deltas expects comma-separated numbers, got '{text}'")


def _run(ctx: click.Context, build) -> None:
    """Build the run configuration, execute it and map errors to exit statuses."""
    opts = ctx.obj
    logger = None
    try:
        config = build()
        # reports echoed to stdout keep it free of log lines
        stream = sys.stdout if config.outputs.get("out") else sys.stderr
        logger = CircspecLogger(log_file=opts["log_file"], verbose=opts["verbose"], stream=stream)
        cli_tools.execute(config, logger)
    except CircspecError as e:
        click.echo(e.one_line(), err=True)
        ctx.exit(e.exit_status)
    except Exception as e:
        if opts["verbose"]:
            traceback.print_exc()
        click.echo(f"E_INTERNAL: {' '.join(str(e).split())}", err=True)
        ctx.exit(1)
    finally:
        if logger is not None:
            logger.close()


def _config(
    ctx: click.Context,
    command: str,
    inputs: Dict[str, Optional[str]],
    outputs: Dict[str, Optional[str]],
    sets: Iterable[str] = (),
    angle_grid: Optional[int] = None,
    deltas: Optional[str] = None,
    m_env: Optional[int] = None,
    **extra: Any,
) -> RunConfig:
    settings = _parse_sets(sets)
    if angle_grid is not None:
        settings.setdefault("resolvent", {})["angle_grid"] = angle_grid
    if deltas:
        settings.setdefault("resolvent", {})["radial_deltas"] = list(_parse_deltas(deltas))
    if m_env is not None:
        settings.setdefault("solver", {})["m_env"] = m_env
    opts = ctx.obj
    return RunConfig(
        command=command,
        inputs={k: v for k, v in inputs.items() if v},
        settings=settings,
        outputs={k: v for k, v in outputs.items() if v},
        seed=opts["seed"] if opts["seed"] is not None else 0,
        period=opts["period"] if opts["period"] is not None else 1.0,
        **extra,
    )


def _window(window: Tuple[float, ...]) -> Optional[Tuple[float, float]]:
    if not window:
        return None
    if not window[0] < window[1]:
        raise InvalidInput("--window expects A B with A < B")
    return float(window[0]), float(window[1])


out_option = click.option("--out", type=click.Path(dir_okay=False), help="Report file (stdout if omitted)")
set_option = click.option("--set", "sets", multiple=True, metavar="SECTION.KEY=VALUE", help="Override a setting")
window_option = click.option("--window", nargs=2, type=float, default=None, metavar="A B", help="Time window")
dt_option = click.option("--dt", type=float, default=None, help="Time step")
series_option = click.option("--series", type=click.Path(dir_okay=False), help="CSV time series of u(t)")
system_option = click.option("--system", type=click.Path(dir_okay=False), help="System document")
forcing_option = click.option("--forcing", type=click.Path(dir_okay=False), help="Forcing document or grid CSV")


@click.group()
@click.version_option(__version__, prog_name="circspec")
@click.option("--period", type=float, default=None, help="Period tau of the inputs (default 1)")
@click.option("--seed", type=int, default=None, help="Seed recorded in every output (default 0)")
@click.option("--verbose", "-v", is_flag=True, help="Debug logging and tracebacks")
@click.option("--log-file", type=click.Path(dir_okay=False), default=None, help="Also log to this file")
@click.pass_context
def cli(ctx: click.Context, period, seed, verbose, log_file):
    """circspec: circular spectrum and bounded solutions of periodic evolution equations."""
    if period is not None and not period > 0:
        click.echo("E_INPUT: --period must be positive", err=True)
        ctx.exit(4)
    ctx.obj = {"period": period, "seed": seed, "verbose": verbose, "log_file": Path(log_file) if log_file else None}


@cli.command()
@click.option("--input", "input_path", type=click.Path(dir_okay=False), help="Trigonometric polynomial document or grid CSV")
@click.option("--angle-grid", type=int, default=None, help="Number of probed angles")
@click.option("--deltas", default=None, metavar="D1,D2,...", help="Radial distances from the circle")
@out_option
@set_option
@click.pass_context
def spectrum(ctx, input_path, angle_grid, deltas, out, sets):
    """Circular spectrum of a bounded function."""
    _run(ctx, lambda: _config(ctx, "spectrum", {"input": input_path}, {"out": out}, sets, angle_grid, deltas))


@cli.command()
@system_option
@forcing_option
@click.option("--anchor", type=float, default=0.0, help="Anchor time t of P(t)")
@out_option
@set_option
@click.pass_context
def monodromy(ctx, system, forcing, anchor, out, sets):
    """Monodromy operator, multipliers and growth bound of a system."""
    _run(ctx, lambda: _config(
        ctx, "monodromy", {"system": system, "forcing": forcing}, {"out": out}, sets,
        params={"anchor": anchor},
    ))


@cli.command()
@system_option
@forcing_option
@click.option("--m-env", type=int, default=None, help="Envelope samples per period")
@out_option
@series_option
@window_option
@dt_option
@set_option
@click.pass_context
def solve(ctx, system, forcing, m_env, out, series, window, dt, sets):
    """Bounded mild solution of the forced linear system."""
    _run(ctx, lambda: _config(
        ctx, "solve", {"system": system, "forcing": forcing}, {"out": out, "series": series}, sets,
        m_env=m_env, window=_window(window), dt=dt,
    ))


@cli.command()
@system_option
@forcing_option
@click.option("--nonlinearity", type=click.Path(dir_okay=False), help="Nonlinearity document")
@click.option("--epsilon", type=float, required=True, help="Perturbation size")
@click.option("--force", is_flag=True, help="Allow epsilon above the admissible threshold")
@out_option
@series_option
@window_option
@dt_option
@set_option
@click.pass_context
def perturb(ctx, system, forcing, nonlinearity, epsilon, force, out, series, window, dt, sets):
    """Bounded solution of the nonlinearly perturbed system."""
    _run(ctx, lambda: _config(
        ctx, "perturb", {"system": system, "forcing": forcing, "nonlinearity": nonlinearity},
        {"out": out, "series": series}, sets,
        epsilon=epsilon, force=force, window=_window(window), dt=dt,
    ))


@cli.command()
@system_option
@forcing_option
@out_option
@set_option
@click.pass_context
def verify(ctx, system, forcing, out, sets):
    """Certificate bundle for a system and forcing."""
    _run(ctx, lambda: _config(ctx, "verify", {"system": system, "forcing": forcing}, {"out": out}, sets))


@cli.command()
@click.argument("name")
@window_option
@dt_option
@click.option("--modes", type=int, default=None, help="Galerkin modes (heat_demo)")
@click.option("--param", "params", multiple=True, metavar="KEY=VALUE", help="Corpus parameter")
@out_option
@click.pass_context
def corpus(ctx, name, window, dt, modes, params, out):
    """Write a built-in test object."""

    def build():
        extra = {}
        for item in params:
            key, sep, raw = item.partition("=")
            if not sep:
                raise InvalidInput(f"--param expects KEY=VALUE, got '{item}'")
            extra[key] = yaml.safe_load(raw)
        if modes is not None:
            extra["modes"] = modes
        return _config(ctx, "corpus", {}, {"out": out}, name=name, params=extra, window=_window(window), dt=dt)

    _run(ctx, build)


@cli.command()
@click.argument("config_file", type=click.Path(dir_okay=False))
@click.pass_context
def run(ctx, config_file):
    """Run a YAML run configuration."""

    def build():
        config = load_run_config(config_file)
        if ctx.obj["seed"] is not None:
            config.seed = ctx.obj["seed"]
        if ctx.obj["period"] is not None:
            config.period = ctx.obj["period"]
        return config

    _run(ctx, build)


@cli.command()
@click.argument("config_file", type=click.Path(dir_okay=False))
@click.pass_context
def check(ctx, config_file):
    """Validate a YAML run configuration."""
    ctx.exit(0 if cli_tools.validate_run_file(Path(config_file)) else 4)


def main() -> None:
    cli(prog_name="circspec")


if __name__ == "__main__":
    main()
