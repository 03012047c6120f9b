#!/usr/bin/env python3
"""
Command Line Interface for the BLE proximity simulator

Exit codes: 0 ok, 1 replay check failed, 2 parse error, 3 validation error,
4 I/O error, 5 matrix differs from the measured reference.
"""

import functools
import sys
from typing import Optional

import click

from ble_proximity_sim import __version__
from ble_proximity_sim.analysis.availability import DEFAULT_SESSIONS, DEFAULT_TRIALS, UsageModel
from ble_proximity_sim.contacts.aggregate import DEFAULT_ATOM_LENGTH, DEFAULT_GAP_TOLERANCE
from ble_proximity_sim.core.config import SEED_ENV_VAR
from ble_proximity_sim.core.errors import (
    ConfigParseError, LogFormatError, ModelValidationError, ScenarioValidationError,
)
from ble_proximity_sim.core.manager import ProximityStudyManager
from ble_proximity_sim.core.types import format_seconds, parse_duration
from ble_proximity_sim.platform.behavior import default_behavior_table
from ble_proximity_sim.simengine.matrix import config_label
from ble_proximity_sim.utils.logging import get_logger, setup_logging

logger = get_logger(__name__)

EXIT_REPLAY = 1
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_IO = 4
EXIT_REFERENCE_MISMATCH = 5


class DurationType(click.ParamType):
    """Durations like ``10s``, ``250ms`` or ``2m``; bare numbers are seconds"""

    name = 'duration'

    def convert(self, value, param, ctx):
        if isinstance(value, int) and not isinstance(value, bool):
            return value
        try:
            return parse_duration(value)
        except ValueError as e:
            self.fail(str(e), param, ctx)


DURATION = DurationType()


def _fail(error: Exception, code: int) -> None:
    logger.error(str(error))
    click.echo(f"❌ {error}", err=True)
    sys.exit(code)


def handle_errors(func):
    """Map package exceptions onto the documented exit codes"""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (ConfigParseError, LogFormatError, ModelValidationError, UnicodeDecodeError) as e:
            _fail(e, EXIT_PARSE)
        except ScenarioValidationError as e:
            _fail(e, EXIT_VALIDATION)
        except OSError as e:
            _fail(e, EXIT_IO)
    return wrapper


def _print_version(ctx: click.Context, param: click.Parameter, value: bool) -> None:
    if not value or ctx.resilient_parsing:
        return
    click.echo(f"ble-proximity-sim {__version__}")
    click.echo(f"behavior table calibration: {default_behavior_table().calibration_hash()}")
    ctx.exit()


seed_option = click.option(
    '--seed', type=int, default=None,
    help=f"Random seed (overrides the config; defaults to ${SEED_ENV_VAR} or 0)",
)


@click.group()
@click.option('--version', is_flag=True, expose_value=False, is_eager=True, callback=_print_version,
              help="Show the version and the behavior-table calibration hash")
@click.option('--log-level', default='WARNING', show_default=True,
              type=click.Choice(['DEBUG', 'INFO', 'WARNING', 'ERROR'], case_sensitive=False))
@click.option('--log-file', type=click.Path(dir_okay=False), default=None, help="Also log to this file")
def cli(log_level: str, log_file: Optional[str]):
    """Simulate BLE proximity detection between Android-like and iOS-like handsets."""
    setup_logging(
        log_level=log_level,
        log_file=log_file or 'ble_proximity_sim.log',
        enable_file_logging=log_file is not None,
    )


@cli.command()
@click.argument('config', type=click.Path(dir_okay=False))
@click.argument('out', type=click.Path(dir_okay=False))
@seed_option
@click.option('--verify', is_flag=True, help="Replay the log against the scenario and report violations")
@handle_errors
def simulate(config: str, out: str, seed: Optional[int], verify: bool):
    """Run the scenario in CONFIG and write its detection log to OUT."""
    manager = ProximityStudyManager(config)
    log, violations = manager.simulate(out, seed_override=seed, verify=verify)
    click.echo(f"✅ Wrote {len(log)} detections ({len(log.resolved)} resolved) to {out}")
    if verify:
        if violations:
            for violation in violations:
                click.echo(f"❌ t={violation.detection.timestamp} us: {violation.reason}", err=True)
            sys.exit(EXIT_REPLAY)
        click.echo("✅ Replay check passed")


@cli.command()
@click.argument('out', type=click.Path(dir_okay=False))
@click.option('--config', type=click.Path(dir_okay=False), default=None,
              help="Scenario file supplying timing defaults and behavior overrides")
@click.option('--check-reference', '--check-paper', 'check_reference', is_flag=True,
              help="Exit 5 if the matrix differs from the measured reference")
@click.option('--handsets', is_flag=True, help="Also repeat the grid for every pair of physical handsets")
@seed_option
@click.option('--duration', type=DURATION, default=None, help="Per-cell test duration (default 60s)")
@handle_errors
def matrix(out: str, config: Optional[str], check_reference: bool, handsets: bool,
           seed: Optional[int], duration: Optional[int]):
    """Run the 6x6 cross-platform detection matrix and write it to OUT."""
    manager = ProximityStudyManager(config)
    result = manager.matrix(out, seed_override=seed, duration_override=duration)
    click.echo(result.to_text())

    mismatch = False
    if handsets:
        handset_result = manager.handset_matrix(seed_override=seed, duration_override=duration)
        inconsistent = handset_result.inconsistencies()
        click.echo(f"📱 Handset pairs: {len(handset_result.cells)} cells, {len(inconsistent)} inconsistent")
        for name_a, state_a, name_b, state_b in inconsistent:
            click.echo(f"  • {name_a}-{state_a.label} x {name_b}-{state_b.label}")
        mismatch = bool(inconsistent)

    if check_reference:
        differences = result.differences()
        for row, col in differences:
            click.echo(f"❌ {config_label(row)} x {config_label(col)} differs from reference", err=True)
        if differences or mismatch:
            sys.exit(EXIT_REFERENCE_MISMATCH)
        click.echo("✅ Matrix matches the measured reference")


@cli.command()
@click.argument('log', type=click.Path(dir_okay=False))
@click.argument('out', type=click.Path(dir_okay=False))
@click.option('--gap-tolerance', type=DURATION, default=DEFAULT_GAP_TOLERANCE,
              help="Largest gap between sightings merged into one contact (default 10s)")
@click.option('--min-duration', type=DURATION, default=0, help="Drop contacts shorter than this")
@click.option('--atom', 'atom_length', type=DURATION, default=DEFAULT_ATOM_LENGTH,
              help="Length credited to an isolated sighting (default 5s)")
@click.option('--config', type=click.Path(dir_okay=False), default=None,
              help="Scenario the log came from; clips isolated sightings to its proximity spans")
@handle_errors
def graph(log: str, out: str, gap_tolerance: int, min_duration: int, atom_length: int,
          config: Optional[str]):
    """Aggregate the detection LOG into a weighted contact graph written to OUT."""
    manager = ProximityStudyManager(config)
    social_graph, fragmentation = manager.graph(log, out, gap_tolerance, min_duration, atom_length)
    click.echo(f"✅ Wrote {len(social_graph.edges)} edges over {len(social_graph.nodes)} devices to {out}")
    click.echo(f"Total contact time: {format_seconds(social_graph.total_weight)} s")
    for scanner, stats in sorted(fragmentation.items(), key=lambda item: str(item[0])):
        click.echo(f"  • {scanner}: {stats.observed_macs} MACs for {stats.resolved_peers} peers")


@cli.command()
@click.option('--usage-hours', type=float, default=37.0, show_default=True, help="Phone use per month")
@click.option('--days', type=float, default=30.0, show_default=True, help="Days per month")
@click.option('--sleep-hours', type=float, default=8.0, show_default=True, help="Sleep per day")
@click.option('--trials', type=click.IntRange(min=1), default=DEFAULT_TRIALS, show_default=True)
@click.option('--sessions', type=click.IntRange(min=1), default=DEFAULT_SESSIONS, show_default=True,
              help="Phone sessions per day in the Monte Carlo model")
@seed_option
@handle_errors
def analyze(usage_hours: float, days: float, sleep_hours: float, trials: int,
            sessions: int, seed: Optional[int]):
    """Report how much of the waking day two locked iOS devices miss each other."""
    model = UsageModel(usage_hours, days, sleep_hours)
    report = ProximityStudyManager().analyze(model, trials=trials, seed=seed, sessions=sessions)
    for line in report.lines():
        click.echo(line)


def main():
    """Main CLI function"""
    cli(prog_name='ble-proximity-sim')


if __name__ == '__main__':
    main()
