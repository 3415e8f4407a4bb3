#!/usr/bin/env python3
"""
Verification Suite Runner
Runs every run configuration in configs/ (or the ones named on the command
line) and prints a combined summary.

Usage:
    python scripts/run_suites.py                          # Run all configs
    python scripts/run_suites.py configs/etale-p2.json    # Run specific configs
    python scripts/run_suites.py --skip pullback odd-pages
"""

import argparse
import json
import sys
import time
from pathlib import Path

# Define paths
SCRIPT_DIR = Path(__file__).parent.absolute()
PROJECT_ROOT = SCRIPT_DIR.parent
CONFIGS_DIR = PROJECT_ROOT / "configs"

sys.path.insert(0, str(PROJECT_ROOT))

from mhh.config import ConfigError, build_config  # noqa: E402
from mhh.verify import run_suite  # noqa: E402

CONFIG_PATTERNS = ("*.json", "*.yaml", "*.yml")


def find_configs(specific_files=None):
    if specific_files:
        return [Path(f) for f in specific_files]
    files = []
    for pattern in CONFIG_PATTERNS:
        files.extend(CONFIGS_DIR.glob(pattern))
    return sorted(files)


def run_configs(specific_files=None, skip=(), report_dir=None):
    """Run each config's suite; return True when none failed."""
    print("=" * 60)
    print("MHH VERIFICATION SUITES")
    print("=" * 60)
    print()

    config_files = find_configs(specific_files)
    if not config_files:
        print("WARNING: No run configurations found")
        return True

    print(f"Found {len(config_files)} run configuration(s)")
    print("-" * 60)

    passed = 0
    all_failures = []
    for config_file in config_files:
        print(f"\nRunning: {config_file.name}")
        try:
            config = build_config({"command": "verify"}, str(config_file), use_environment=False)
        except ConfigError as e:
            print(f"  [FAIL] invalid configuration: {e}")
            all_failures.append({"file": config_file.name, "message": str(e)})
            continue
        if config.suite in skip:
            print(f"  SKIPPED ({config.suite})")
            continue

        started = time.monotonic()
        report = run_suite(config.suite, config)
        elapsed = time.monotonic() - started
        if report_dir:
            out = Path(report_dir) / f"{config_file.stem}.json"
            out.parent.mkdir(parents=True, exist_ok=True)
            out.write_text(json.dumps(report, indent=2, sort_keys=True, default=str) + "\n")

        if report["failures"]:
            print(f"  [FAIL] {len(report['failures'])} failure(s) in {report['cells_checked']} "
                  f"checks ({elapsed:.1f}s)")
            for failure in report["failures"][:10]:
                print(f"    - [{failure.get('check')}] {failure['message']}")
            all_failures.extend({"file": config_file.name, "message": f["message"]}
                                for f in report["failures"])
        else:
            print(f"  [OK] {report['cells_checked']} checks ({elapsed:.1f}s)")
            passed += 1
        for warning in report["warnings"]:
            print(f"  WARNING: {warning['message']}")

    print()
    print("=" * 60)
    print("VERIFICATION SUMMARY")
    print("=" * 60)
    print(f"Total configs:  {len(config_files)}")
    print(f"Passed:         {passed}")
    print(f"Failures:       {len(all_failures)}")
    print()

    if all_failures:
        print("FAILURES:")
        for failure in all_failures[:50]:
            print(f"  - {failure['file']}: {failure['message']}")
        print()
        print("RESULT: VERIFICATION FAILED")
        return False

    print("RESULT: ALL CHECKS PASSED")
    return True


def main():
    """Main entry point."""
    parser = argparse.ArgumentParser(
        description='Run the verification suites described by configs/',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog='''
Examples:
  %(prog)s                                   Run every configuration
  %(prog)s configs/pullback-p3.json          Run one configuration
  %(prog)s --skip odd-pages pullback         Skip the longest suites
  %(prog)s --reports build/reports           Also write one JSON report per config
        '''
    )
    parser.add_argument('files', nargs='*', help='Specific run configurations')
    parser.add_argument('--skip', nargs='*', default=[], help='Suite names to skip')
    parser.add_argument('--reports', help='Directory for JSON reports')
    args = parser.parse_args()

    try:
        success = run_configs(args.files or None, set(args.skip), args.reports)
        sys.exit(0 if success else 1)
    except Exception as e:
        print(f"FATAL ERROR: {e}")
        sys.exit(1)


if __name__ == "__main__":
    main()
