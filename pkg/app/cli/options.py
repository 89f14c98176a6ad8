"""
Shared click options, run-configuration assembly and record emission.
"""

import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import click
from dotenv import dotenv_values
from pydantic import ValidationError

from app.core.config import settings
from app.core.exceptions import PTGaugeError
from app.core.physics_config import CONFIG_FILE_KEYS, EXIT_INVALID_INPUT, OUTPUT_FORMATS
from app.models.gauge import ModelParams
from app.schemas.report import ReportRecord, RunConfig
from app.services.report_writer import render

logger = logging.getLogger(__name__)

# Config-file key -> flag, for the three model parameters every command needs
REQUIRED_PARAMETERS = {"omega_cap": "--omega-cap", "g": "--g", "drive": "--drive"}

BRANCH_TOKENS = {"+": 1, "+1": 1, "1": 1, "-": -1, "-1": -1, "−": -1, "−1": -1}

RecordBuilder = Callable[[RunConfig], List[ReportRecord]]


def parse_branch(value: Any) -> int:
    token = str(value).strip()
    if token not in BRANCH_TOKENS:
        raise click.BadParameter(f"expected + or - (or +1 / -1), got {value!r}", param_hint="'--branch'")
    return BRANCH_TOKENS[token]


def _stack(*decorators: Callable) -> Callable:
    def apply(func: Callable) -> Callable:
        for decorator in reversed(decorators):
            func = decorator(func)
        return func

    return apply


model_options = _stack(
    click.option("--omega-cap", "omega_cap", type=float, default=None, help="Static frequency Omega."),
    click.option("--g", "g", type=float, default=None, help="Drive amplitude G."),
    click.option("--drive", "drive", type=float, default=None, help="Drive frequency omega (> 0)."),
    click.option("--branch", "branch", type=str, default=None, help="Gauge-angle branch: + or - (default -)."),
    click.option(
        "--config",
        "config_path",
        type=click.Path(exists=True, dir_okay=False),
        default=None,
        help="Run-configuration file (key = value per line); flags win.",
    ),
)

truncation_options = _stack(
    click.option("--cutoff", "cutoff", type=int, default=None, help="Fock-space cutoff N."),
    click.option("--margin", "margin", type=int, default=None, help="Boundary margin excluded from checks."),
    click.option(
        "--cutoff-policy",
        "cutoff_policy",
        type=click.Choice(["auto", "fixed"]),
        default=None,
        help="auto doubles the cutoff until certified; fixed uses --cutoff as given.",
    ),
    click.option("--tol-ode", "tol_ode", type=float, default=None, help="Relative ODE tolerance."),
    click.option("--tol-quad", "tol_quad", type=float, default=None, help="Quadrature tolerance."),
    click.option("--tol-assert", "tol_assert", type=float, default=None, help="Assertion tolerance."),
)

output_options = _stack(
    click.option("--format", "format", type=click.Choice(OUTPUT_FORMATS), default=None, help="Output format."),
    click.option("--out", "out", type=click.Path(dir_okay=False), default=None, help="Output file (default stdout)."),
)

level_option = click.option("--n", "n", type=int, default=None, help="Level index n.")

nmax_option = click.option("--nmax", "nmax", type=int, default=None, help="Number of levels.")


def load_config_file(path: Optional[str]) -> Dict[str, str]:
    """key = value pairs from a run-configuration file, restricted to known keys."""
    if not path:
        return {}
    if not Path(path).is_file():
        raise click.UsageError(f"configuration file {path!r} not found")
    values = {key: value for key, value in dotenv_values(path).items() if value is not None}
    unknown = sorted(set(values) - set(CONFIG_FILE_KEYS))
    if unknown:
        raise click.UsageError(f"unknown keys in {path}: {', '.join(unknown)}")
    logger.debug(f"Loaded {len(values)} keys from {path}")
    return values


def merge_flags(ctx: click.Context, flags: Dict[str, Any], defaults: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Defaults, then the configuration file, then explicit flags."""
    path = flags.pop("config_path", None) or settings.config_path
    merged: Dict[str, Any] = dict(defaults or {})
    merged.update(load_config_file(path))
    merged.update({key: value for key, value in flags.items() if value is not None})
    missing = [flag for key, flag in REQUIRED_PARAMETERS.items() if merged.get(key) is None]
    if missing:
        raise click.UsageError(f"Missing option {', '.join(repr(flag) for flag in missing)}.", ctx=ctx)
    return merged


def build_run_config(merged: Dict[str, Any], **extra: Any) -> RunConfig:
    params = ModelParams(
        Omega=merged["omega_cap"],
        G=merged["g"],
        omega=merged["drive"],
        branch=parse_branch(merged.get("branch", "-")),
    )
    fields = {
        CONFIG_FILE_KEYS[key]: value
        for key, value in merged.items()
        if key in CONFIG_FILE_KEYS and key not in REQUIRED_PARAMETERS and key != "branch"
    }
    fields.update({key: value for key, value in extra.items() if value is not None})
    return RunConfig(params=params, **fields)


def command_config(
    ctx: click.Context,
    flags: Dict[str, Any],
    defaults: Optional[Dict[str, Any]] = None,
    **extra: Any,
) -> RunConfig:
    """Merged and validated RunConfig; invalid physics input exits with code 2."""
    merged = merge_flags(ctx, flags, defaults)
    try:
        return build_run_config(merged, **extra)
    except ValidationError as exc:
        click.echo(f"Invalid input: {exc}", err=True)
        ctx.exit(EXIT_INVALID_INPUT)


def emit(records: List[ReportRecord], config: RunConfig) -> None:
    text = render(records, config.format)
    if config.out:
        Path(config.out).write_text(text, encoding="utf-8", newline="\n")
        logger.info(f"Wrote {len(records)} record(s) to {config.out}")
    else:
        click.echo(text, nl=False)
    for record in records:
        for error in record.errors:
            click.echo(f"Error [{error.error_code}]: {error.detail}", err=True)


def run_records(ctx: click.Context, config: RunConfig, build: RecordBuilder) -> List[ReportRecord]:
    """Build and emit records; a library error that prevents any record exits with its code."""
    try:
        records = build(config)
    except PTGaugeError as exc:
        click.echo(f"Error [{exc.error_code}]: {exc.detail}", err=True)
        ctx.exit(exc.exit_code)
    emit(records, config)
    return records
