"""
Spectrum and gauge commands.
"""

import click

from app.cli.options import (
    command_config,
    model_options,
    nmax_option,
    output_options,
    run_records,
    truncation_options,
)
from app.core.physics_config import EXIT_UNCERTIFIED
from app.services.reporting import gauge_record, spectrum_record


@click.command("spectrum")
@model_options
@nmax_option
@truncation_options
@output_options
@click.pass_context
def spectrum_command(ctx: click.Context, **flags):
    """Print E_n = (n + 1/2) Gamma for n = 0 .. nmax-1 under a Delta, eta, Gamma header."""
    config = command_config(ctx, flags)
    records = run_records(ctx, config, lambda cfg: [spectrum_record(cfg)])
    ctx.exit(records[0].exit_code(EXIT_UNCERTIFIED))


@click.command("gauge")
@model_options
@truncation_options
@output_options
@click.pass_context
def gauge_command(ctx: click.Context, **flags):
    """Gauge angle, kernel frequency and kernel coefficients of the new gauge."""
    config = command_config(ctx, flags)
    records = run_records(ctx, config, lambda cfg: [gauge_record(cfg)])
    ctx.exit(records[0].exit_code(EXIT_UNCERTIFIED))
