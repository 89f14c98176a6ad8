"""
Time evolution of a gauge-solution state.
"""

import click

from app.cli.options import (
    command_config,
    level_option,
    model_options,
    output_options,
    run_records,
    truncation_options,
)
from app.core.physics_config import EXIT_SUCCESS, EXIT_UNCERTIFIED
from app.services.reporting import evolve_records


@click.command("evolve")
@model_options
@level_option
@click.option("--periods", type=float, default=None, help="Evolution time in drive periods (default 1).")
@click.option("--samples", type=int, default=None, help="Number of output times (default 9).")
@truncation_options
@output_options
@click.pass_context
def evolve_command(ctx: click.Context, periods, samples, **flags):
    """Evolve R^-1(0)|n> and report its norm and pairing with the gauge-solution bra."""
    config = command_config(ctx, flags, periods=periods, samples=samples)
    records = run_records(ctx, config, evolve_records)
    failed = [record for record in records if not record.certified]
    ctx.exit(EXIT_UNCERTIFIED if failed else EXIT_SUCCESS)
