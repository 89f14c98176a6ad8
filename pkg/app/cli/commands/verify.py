"""
Verification suite.
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
from app.core.physics_config import EXIT_VERIFICATION_FAILED
from app.services.reporting import verify_record


@click.command("verify")
@model_options
@nmax_option
@click.option("--inject-fault", "inject_fault", is_flag=True, default=False, hidden=True)
@truncation_options
@output_options
@click.pass_context
def verify_command(ctx: click.Context, inject_fault: bool, **flags):
    """Run every identity check and print a pass/fail table of residuals."""
    config = command_config(ctx, flags, inject_fault=inject_fault)
    records = run_records(ctx, config, lambda cfg: [verify_record(cfg)])
    ctx.exit(records[0].exit_code(EXIT_VERIFICATION_FAILED))
