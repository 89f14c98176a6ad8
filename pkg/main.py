"""
PT Gauge Lab - Gauge reduction of driven non-Hermitian SU(1,1) Hamiltonians
A command-line laboratory that reduces PT-symmetric driven SU(1,1) Hamiltonians
to a static oscillator, computes non-adiabatic Berry phases and Hannay angles,
and cross-checks every closed form against an independent numeric route.
"""

import logging
import sys

import click

from app.cli.commands import evolve, phases, spectrum, sweep, verify
from app.core.config import settings
from app.core.physics_config import EXIT_SUCCESS, EXIT_USAGE


class PTGaugeGroup(click.Group):
    """Root group that maps click usage errors to exit code 64."""

    def main(self, *args, **kwargs):
        kwargs["standalone_mode"] = False
        try:
            result = super().main(*args, **kwargs)
        except click.UsageError as exc:
            exc.show()
            sys.exit(EXIT_USAGE)
        except click.ClickException as exc:
            exc.show()
            sys.exit(exc.exit_code)
        except click.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(1)
        sys.exit(result if isinstance(result, int) else EXIT_SUCCESS)


@click.group(cls=PTGaugeGroup)
@click.version_option(settings.app_version, prog_name=settings.app_name)
@click.option("--verbose", is_flag=True, help="Log at DEBUG level.")
def cli(verbose: bool):
    """Driven PT-symmetric SU(1,1) gauge reduction, Berry phases and Hannay angles."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else settings.log_level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


# Register command groups
cli.add_command(spectrum.spectrum_command)
cli.add_command(spectrum.gauge_command)
cli.add_command(phases.berry_command)
cli.add_command(phases.hannay_command)
cli.add_command(phases.correspond_command)
cli.add_command(evolve.evolve_command)
cli.add_command(verify.verify_command)
cli.add_command(sweep.sweep_command)

if __name__ == "__main__":
    cli()
