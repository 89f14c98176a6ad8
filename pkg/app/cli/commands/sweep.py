"""
Parameter sweeps.
"""

import click
from pydantic import ValidationError

from app.cli.options import (
    command_config,
    level_option,
    model_options,
    output_options,
    run_records,
    truncation_options,
)
from app.core.physics_config import EXIT_INVALID_INPUT, EXIT_SUCCESS, SWEEPABLE_PARAMETERS, SWEEP_QUANTITIES
from app.schemas.report import SweepGrid
from app.services.reporting import sweep_point_record
from app.workers.sweep_runner import run_sweep, sweep_succeeded


@click.command("sweep")
@click.option("--param", "parameter", type=click.Choice(list(SWEEPABLE_PARAMETERS)), required=True)
@click.option("--from", "start", type=float, required=True, help="First grid value.")
@click.option("--to", "stop", type=float, required=True, help="Last grid value.")
@click.option("--steps", type=int, required=True, help="Number of grid points (>= 2).")
@click.option(
    "--quantity",
    type=click.Choice(SWEEP_QUANTITIES),
    default="gamma_closed",
    show_default=True,
)
@click.option("--workers", type=int, default=None, help="Worker threads (default from settings).")
@model_options
@level_option
@truncation_options
@output_options
@click.pass_context
def sweep_command(ctx: click.Context, parameter, start, stop, steps, quantity, workers, **flags):
    """Evaluate one quantity over an evenly spaced grid of one parameter."""
    try:
        grid = SweepGrid(parameter=parameter, start=start, stop=stop, steps=steps, quantity=quantity)
    except ValidationError as exc:
        click.echo(f"Invalid input: {exc}", err=True)
        ctx.exit(EXIT_INVALID_INPUT)
    # the swept parameter needs no base value
    swept_key = parameter.replace("-", "_")
    config = command_config(ctx, flags, defaults={swept_key: start}, sweep=grid)
    records = run_records(ctx, config, lambda cfg: run_sweep(cfg, sweep_point_record, workers=workers))
    if sweep_succeeded(records):
        ctx.exit(EXIT_SUCCESS)
    ctx.exit(records[0].errors[0].exit_code)
