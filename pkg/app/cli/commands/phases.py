"""
Berry phase, Hannay angle and their correspondence.
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
from app.core.physics_config import EXIT_UNCERTIFIED
from app.services.reporting import berry_record, correspond_record, hannay_record


@click.command("berry")
@model_options
@level_option
@truncation_options
@output_options
@click.pass_context
def berry_command(ctx: click.Context, **flags):
    """Berry phase of level n by closed form, quadrature and evolution."""
    config = command_config(ctx, flags)
    records = run_records(ctx, config, lambda cfg: [berry_record(cfg)])
    ctx.exit(records[0].exit_code(EXIT_UNCERTIFIED))


@click.command("hannay")
@model_options
@truncation_options
@output_options
@click.pass_context
def hannay_command(ctx: click.Context, **flags):
    """Hannay angle by closed form and double quadrature."""
    config = command_config(ctx, flags)
    records = run_records(ctx, config, lambda cfg: [hannay_record(cfg)])
    ctx.exit(records[0].exit_code(EXIT_UNCERTIFIED))


@click.command("correspond")
@model_options
@level_option
@truncation_options
@output_options
@click.pass_context
def correspond_command(ctx: click.Context, **flags):
    """Compare gamma_n with (n + 1/2) times the Hannay angle."""
    config = command_config(ctx, flags)
    records = run_records(ctx, config, lambda cfg: [correspond_record(cfg)])
    ctx.exit(records[0].exit_code(EXIT_UNCERTIFIED))
