#!/usr/bin/env python3
"""
MHH Command Line
Computes Tor E^2 tables and Hilbert tables, draws bidegree charts and runs the
verification suites.

Exit codes: 0 success, 1 verification failure, 2 usage/config error.
"""

import argparse
import json
import logging
import os
import sys
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Optional

from mhh.bar_complex import tor_E2
from mhh.charts import chart_svg
from mhh.config import ENV_LOG_LEVEL, ConfigError, RunConfig, build_config
from mhh.dual_steenrod import SteenrodVariant, Variant
from mhh.graded_algebra import Bounds
from mhh.mhh_rings import RINGS, make_ring
from mhh.tables import DimensionTable
from mhh.verify import SUITES, print_summary, run_suite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def configure_logging(level: str):
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.WARNING),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )


def write_output(text: str, out: Optional[str]):
    """Write to stdout, or atomically to a file (temp file in the same directory, then rename)."""
    if not out:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    target = Path(out)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, 'w') as f:
            f.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    logger.info(f"wrote {target}")


def render_table(table: DimensionTable, fmt: str) -> str:
    if fmt == "json":
        return table.to_json()
    if fmt == "tsv":
        return table.to_tsv()
    raise ConfigError(f"format {fmt!r} is not available for tables; use tsv or json")


def cmd_tor(config: RunConfig) -> int:
    low, high = config.weight_window
    bounds = Bounds(config.stem_max, low, high, config.filtration_max)
    variant = SteenrodVariant(config.prime, Variant.parse(config.variant))
    table = tor_E2(variant, bounds)
    write_output(render_table(table, config.format), config.out)
    return EXIT_OK


def cmd_verify(config: RunConfig) -> int:
    if not config.suite:
        raise ConfigError("verify needs a suite")
    report = run_suite(config.suite, config)
    print_summary(report)
    write_output(json.dumps(report, indent=2, sort_keys=True, default=str) + "\n", config.out)
    return EXIT_FAILED if report["failures"] else EXIT_OK


def cmd_hilbert(config: RunConfig) -> int:
    if not config.ring:
        raise ConfigError("hilbert needs a ring")
    low, high = config.weight_window
    table = make_ring(config.ring, config.prime).hilbert_table(config.stem_max, low, high)
    write_output(render_table(table, config.format), config.out)
    return EXIT_OK


def cmd_chart(config: RunConfig) -> int:
    if not config.ring:
        raise ConfigError("chart needs a ring")
    low, high = config.weight_window
    ring = make_ring(config.ring, config.prime)
    write_output(chart_svg(ring, config.stem_max, low, high, config.y_axis), config.out)
    return EXIT_OK


COMMANDS = {"tor": cmd_tor, "verify": cmd_verify, "hilbert": cmd_hilbert, "chart": cmd_chart}


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='JSON or YAML run configuration')
    common.add_argument('--prime', type=int, help='The prime p (default: 2)')
    common.add_argument('--variant', choices=['integral', 'mod-tau', 'etale'],
                        help='Steenrod algebra variant (default: integral)')
    common.add_argument('--stem-max', type=int, help='Largest stem (default: 12)')
    common.add_argument('--weight-min', type=int, help='Lower end of the weight window (default: 0)')
    common.add_argument('--weight-max', type=int, help='Upper end of the weight window (default: stem max)')
    common.add_argument('--filtration-max', type=int, help='Largest bar filtration')
    common.add_argument('--f-support-max', type=int, help='Largest index in supp f')
    common.add_argument('--f-value-max', type=int, help='Largest value of f')
    common.add_argument('--max-index', type=int, help='Largest generator index for randomized checks')
    common.add_argument('--format', choices=['tsv', 'json', 'svg'], help='Output format (default: tsv)')
    common.add_argument('--out', help='Output file (default: stdout)')
    common.add_argument('--seed', type=int, help='Seed for randomized checks (default: 0)')
    common.add_argument('--cases', type=int, help='Randomized cases per property (default: 1000)')
    common.add_argument('--y-axis', choices=['weight', 'chow'], help='Chart y axis (default: weight)')
    common.add_argument('--log-level', help=f'Logging level (default: ${ENV_LOG_LEVEL} or WARNING)')
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(
        prog='mhh',
        description='Motivic Hochschild homology of F_p: tables, charts and verification',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python -m mhh tor --prime 2 --variant mod-tau --stem-max 8
  python -m mhh verify cube-contractibility --prime 2
  python -m mhh verify pullback --prime 3 --stem-max 30 --weight-min -2
  python -m mhh hilbert integral --prime 2 --stem-max 12
  python -m mhh chart etale --prime 2 --stem-max 16 --out etale.svg
        """
    )
    commands = parser.add_subparsers(dest='command', required=True)
    commands.add_parser('tor', parents=[common], help='Tor E^2 dimensions from the bar complex')
    verify = commands.add_parser('verify', parents=[common], help='Run a verification suite')
    verify.add_argument('suite', choices=sorted(SUITES) + ['all'])
    for name, text in (('hilbert', 'Bidegree Hilbert table of a ring'),
                       ('chart', 'SVG bidegree chart of a ring')):
        sub = commands.add_parser(name, parents=[common], help=text)
        sub.add_argument('ring', choices=sorted(RINGS))
    return parser


def flags_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    flags = {key: value for key, value in vars(args).items() if key != 'config'}
    if args.command == 'chart' and flags.get('format') is None:
        flags['format'] = 'svg'
    return flags


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK

    try:
        config = build_config(flags_from_args(args), args.config)
    except ConfigError as e:
        print(f"ERROR: {e}", file=sys.stderr)
        return EXIT_USAGE

    configure_logging(config.log_level)
    try:
        return COMMANDS[config.command](config)
    except ValueError as e:
        # ConfigError, InfiniteRegionError and precondition violations
        logger.error(str(e))
        print(f"ERROR: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:
        logger.exception("unexpected failure")
        print(f"FATAL ERROR: {e}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
