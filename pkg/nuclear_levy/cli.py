"""Command line interface: validate, cf, simulate and verify subcommands."""

from __future__ import annotations

import argparse
import cmath
import logging
from collections.abc import Sequence
from dataclasses import asdict
from pathlib import Path
from typing import NoReturn

import numpy as np

from . import __version__
from .char_func import lk_exponent
from .const import EXIT_FAIL, EXIT_PASS, EXIT_USAGE, LARGE_TAG
from .coordinator import ReplicaCoordinator, tag_counts
from .diagnostics import get_path_metadata, get_simulation_summary
from .exceptions import ConfigError, LevyException
from .levy_measure import validate
from .models import RunConfig, load_run_config, selector_kwargs
from .simulate import PathSkeleton
from .utils import csv_writer, get_output_dir, write_json, write_rows
from .verify import exit_code, run_suite

LOG = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage errors with the usage exit code."""

    def error(self, message: str) -> NoReturn:
        self.print_usage()
        self.exit(EXIT_USAGE, f'{self.prog}: error: {message}\n')


def _prepare(args: argparse.Namespace) -> tuple[RunConfig, Path]:
    config = load_run_config(args.config)
    output_dir = get_output_dir(args.output_dir, config.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    return config, output_dir


def cmd_validate(args: argparse.Namespace) -> int:
    """Validate the Levy measure of the configured triplet; exit 0 iff valid."""
    config, output_dir = _prepare(args)
    report = validate(config.triplet.levy, config.triplet.r)
    write_json(output_dir / 'validation.json', asdict(report))
    LOG.info(f'Validation at r={report.r}: valid={report.valid}')
    return EXIT_PASS if report.valid else EXIT_FAIL


def cmd_cf(args: argparse.Namespace) -> int:
    """Write cf.csv with eta and the CF for every (t, phi) of the configured grid."""
    config, output_dir = _prepare(args)
    exponents = [lk_exponent(config.triplet, phi) for phi in config.cf.phis]
    rows = []
    for t in config.cf.times:
        if t < 0:
            raise ConfigError(f'cf times must be non-negative, got {t}')
        for phi_id, eta in enumerate(exponents):
            cf = cmath.exp(t * eta)
            rows.append((t, phi_id, eta.real, eta.imag, cf.real, cf.imag))
    with (output_dir / 'cf.csv').open('w', encoding='utf-8', newline='') as handle:
        writer = csv_writer(handle, ['t', 'phi_id', 're_eta', 'im_eta', 're_cf', 'im_cf'])
        count = write_rows(writer, rows)
    LOG.info(f'Wrote {count} cf rows to {output_dir}')
    return EXIT_PASS


def _jump_rows(batch: PathSkeleton) -> list[list[float | int]]:
    jumps = batch.jumps
    return [
        [int(jumps.replica[i]), float(jumps.time[i]), int(jumps.tag[i]), *jumps.marks[i].tolist()]
        for i in range(len(jumps))
    ]


def _grid_rows(batch: PathSkeleton, config: RunConfig) -> list[list[float | int]]:
    grid = config.sim.grid
    values = np.array(
        [[batch.values(float(t), phi) for phi in config.cf.phis] for t in grid]
    )  # (times, phis, replicas)
    rows = []
    for b in range(batch.size):
        for i, t in enumerate(grid):
            for j in range(len(config.cf.phis)):
                rows.append([batch.first_replica + b, float(t), j, float(values[i, j, b])])
    return rows


def cmd_simulate(args: argparse.Namespace) -> int:
    """Simulate all replicas and export jumps.csv, grid.csv, paths.json and summary.json."""
    config, output_dir = _prepare(args)
    coordinator = ReplicaCoordinator(config.triplet, config.sim)
    shells = config.sim.shells
    totals = np.zeros(shells + 1, dtype=np.int64)
    marks = [f'f{n}' for n in range(config.triplet.dim)]

    with (
        (output_dir / 'jumps.csv').open('w', encoding='utf-8', newline='') as jumps_handle,
        (output_dir / 'grid.csv').open('w', encoding='utf-8', newline='') as grid_handle,
    ):
        jumps_writer = csv_writer(jumps_handle, ['replica', 'time', 'tag', *marks])
        grid_writer = csv_writer(grid_handle, ['replica', 't', 'phi_id', 'value'])
        # single writer: blocks arrive in order from the worker pool
        for batch in coordinator.batches():
            write_rows(jumps_writer, _jump_rows(batch))
            write_rows(grid_writer, _grid_rows(batch, config))
            totals += tag_counts(batch, shells)

    summary = coordinator.summarize(totals)
    write_json(output_dir / 'summary.json', get_simulation_summary(config, summary))
    write_json(
        output_dir / 'paths.json', get_path_metadata(config, coordinator, config.cf.phis)
    )
    LOG.info(
        f'Simulated {summary.replicas} replicas: {summary.large_jumps} large '
        f'(tag {LARGE_TAG}) and {summary.small_jumps} small jumps'
    )
    return EXIT_PASS


def cmd_verify(args: argparse.Namespace) -> int:
    """Run the configured tests and write report.json."""
    config, output_dir = _prepare(args)
    tests = [
        (selector.name, selector_kwargs(selector, config.triplet, config.sim))
        for selector in config.tests
    ]
    reports = run_suite(tests)
    write_json(output_dir / 'report.json', [asdict(report) for report in reports])
    code = exit_code(reports)
    LOG.info(f'{len(reports)} reports written to {output_dir}, exit code {code}')
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog='nuclear-levy', description=__doc__)
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    parser.add_argument('--debug', action='store_true', help='enable debug logging')
    subparsers = parser.add_subparsers(dest='command', required=True, parser_class=_Parser)
    commands = {
        'validate': cmd_validate,
        'cf': cmd_cf,
        'simulate': cmd_simulate,
        'verify': cmd_verify,
    }
    for name, handler in commands.items():
        sub = subparsers.add_parser(name, help=(handler.__doc__ or '').splitlines()[0])
        sub.add_argument('config', help='path to the JSON run config')
        sub.add_argument('--output-dir', help='output directory (overrides config and env)')
        sub.set_defaults(handler=handler)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.debug else logging.INFO,
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
    )
    try:
        return args.handler(args)
    except ConfigError as err:
        LOG.error(f'Configuration error: {err}')
        return EXIT_USAGE
    except LevyException as err:
        LOG.error(f'{type(err).__name__}: {err}')
        return EXIT_FAIL
    except Exception:
        LOG.exception('Unexpected error')
        return EXIT_FAIL
