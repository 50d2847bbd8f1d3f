import logging
from pathlib import Path

import click
from flask import current_app
from flask.cli import FlaskGroup
from pydantic import ValidationError

from app import create_app
from services.experiment_config import SUITES, load_config
from services.experiment_runner import ExperimentRunner, RunOutcome
from services.persistence import RunStore

logger = logging.getLogger(__name__)


def common_options(fn):
    """Config file plus the per-flag overrides shared by every subcommand."""
    options = [
        click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                     help="Flat TOML experiment file"),
        click.option("--id", "experiment_id", help="Experiment identifier"),
        click.option("--n", "dim", type=click.IntRange(2, 3), help="Spatial dimension"),
        click.option("--N", "points", type=int, help="Grid points per axis"),
        click.option("--alpha", type=float),
        click.option("--nu", type=float),
        click.option("--generator", type=click.Choice(["taylor_green", "random_sobolev", "single_mode"])),
        click.option("--s", "regularity", type=float, help="Regularity of random initial data"),
        click.option("--amplitude", type=float),
        click.option("--seed", type=int),
        click.option("--T", "horizon", type=float, help="Final time"),
        click.option("--dt", type=float),
        click.option("--samples", type=int),
        click.option("--sampling", type=click.Choice(["uniform", "log"])),
        click.option("--nonlinearity", type=click.Choice(["lans", "navier_stokes", "off"])),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _load(config_path, **overrides):
    try:
        return load_config(config_path, overrides)
    except ValidationError as e:
        raise click.BadParameter(str(e))


def _runner() -> ExperimentRunner:
    return ExperimentRunner(RunStore(current_app.config["RUNS_ROOT"]))


def _finish(outcome: RunOutcome):
    for report in outcome.reports:
        click.echo(f"{report.verdict:>12}  {report.criterion}")
    click.echo(f"Results written to {outcome.run_dir}")
    click.get_current_context().exit(0 if outcome.passed else 1)


@click.group(cls=FlaskGroup, create_app=create_app)
def cli():
    """LANS-alpha laboratory."""


@cli.command("gen-ic")
@common_options
@click.option("--out", type=click.Path(dir_okay=False), required=True, help="Checkpoint file to write")
def gen_ic(config_path, out, **overrides):
    """Write an initial-data checkpoint."""
    cfg = _load(config_path, **overrides)
    phi = _runner().generate(cfg, Path(out))
    click.echo(f"Wrote {cfg.generator} field on {phi.grid.dim}D N={phi.grid.points_per_axis} to {out}")


@cli.command("solve")
@common_options
@click.option("--solver", type=click.Choice(["timestep", "both"]), default=None)
def solve(config_path, solver, **overrides):
    """Time-step the equation (optionally against the Picard solver)."""
    cfg = _load(config_path, solver=solver, **overrides)
    if cfg.solver == "picard":
        cfg = cfg.model_copy(update={"solver": "timestep"})
    _finish(_runner().solve(cfg))


@cli.command("picard")
@common_options
@click.option("--aux-norm", "picard_aux_norm", type=click.Choice(["weighted", "la"]))
@click.option("--max-iterations", "picard_max_iterations", type=int)
@click.option("--tolerance", "picard_tolerance", type=float)
def picard(config_path, **overrides):
    """Solve the mild formulation by Picard iteration."""
    cfg = _load(config_path, solver="picard", **overrides)
    _finish(_runner().solve(cfg))


@cli.command("verify")
@click.argument("suite", type=click.Choice(SUITES))
@common_options
@click.option("--s1", type=float)
@click.option("--s2", type=float)
@click.option("--p", type=float)
@click.option("--q", type=float)
@click.option("--r", type=float)
def verify(suite, config_path, **overrides):
    """Run a verification suite; exit status 0 iff every verdict passes."""
    cfg = _load(config_path, suite=suite, **overrides)
    _finish(_runner().verify(cfg, suite))


if __name__ == "__main__":
    cli()
