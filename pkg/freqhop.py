#!/usr/bin/env python3
"""
Frequency-hopping interferometer simulator

Runs one simulated experiment from a YAML config (fringe scan, HBT test, QE
curve, ebit conversion, single-shot conversion) or replays raw count records
through the g2(0) estimator, and writes a CSV table plus a JSON summary.
"""

import argparse
import sys
from typing import Dict, Optional

from src.config import ExperimentConfig, apply_overrides, parse_config
from src.csv_utils import read_count_records
from src.errors import ConfigurationError
from src.experiments import (
    PUBLISHED_COUNTS,
    CountRecord,
    ExperimentResult,
    emit_results,
    replay_result,
    run_experiment,
)
from src.file_utils import (
    EXIT_CONFIG_ERROR,
    EXIT_RUNTIME_ERROR,
    log_error_and_exit,
    resolve_output_dir,
    sanitize_input_path,
    validate_file_exists,
    validate_non_negative_integer,
    validate_positive_integer,
)
from src.logging_utils import log_error_with_context, setup_logging

# subcommand -> experiment kinds its config may declare
COMMAND_KINDS: Dict[str, tuple] = {
    'fringes': ('fringes',),
    'hbt': ('hbt_linear', 'hbt_nonlinear'),
    'qe-curve': ('qe_curve',),
    'ebit': ('ebit',),
    'single-shot': ('single_shot',),
}


class ExperimentRunner:
    """Loads configs, runs experiments and reports headline numbers"""

    def __init__(self, logger, max_workers: Optional[int] = None):
        self.logger = logger
        self.max_workers = max_workers

    def load_config(self, path: str, command: str, seed: Optional[int] = None, trials: Optional[int] = None,
                    analytic_only: bool = False) -> ExperimentConfig:
        config = parse_config(path)
        if config.kind not in COMMAND_KINDS[command]:
            raise ConfigurationError(
                f"Config declares kind '{config.kind}' but '{command}' runs {' or '.join(COMMAND_KINDS[command])}",
                key='kind')
        config = apply_overrides(config, seed=seed, trials=trials, analytic_only=analytic_only)
        self.logger.info(f"Loaded {config.kind} config from {path} (seed={config.seed}, trials={config.trials})")
        return config

    def run(self, config: ExperimentConfig) -> ExperimentResult:
        mode = "analytic only" if config.trials == 0 else f"{config.trials} trials per point"
        print(f"🔬 Running {config.kind} experiment ({mode}, seed {config.seed})...")
        return run_experiment(config, max_workers=self.max_workers, logger=self.logger)

    def replay(self, published: bool, counts_path: Optional[str]) -> ExperimentResult:
        if published:
            records = list(PUBLISHED_COUNTS)
            print(f"📋 Replaying {len(records)} published count records")
        else:
            rows = read_count_records(counts_path, self.logger)
            if not rows:
                raise ConfigurationError(f"No count records in {counts_path}")
            records = [CountRecord(**row) for row in rows]
            print(f"📋 Replaying {len(records)} count records from {counts_path}")
        return replay_result(records)

    def report(self, result: ExperimentResult) -> None:
        if result.kind == 'replay_counts':
            for row in result.records:
                published = result.metrics.get(row['label'], {}).get('published_bound')
                quoted = f", published < {published:.3e}" if published is not None else ""
                print(f"📊 {row['label']}: g2(0) = {row['g2_point']:.4g}, bound < {row['g2_upper_bound']:.3e}{quoted} "
                      f"(N={row['n_trials']}, N_A={row['n_a']}, N_B={row['n_b']}, N_C={row['n_c']})")
            return
        for key, value in result.metrics.items():
            if isinstance(value, float):
                print(f"📊 {key}: {value:.9g}")
            elif value is not None:
                print(f"📊 {key}: {value}")


def validate_arguments(args, logger):
    """Validate command line arguments and sanitize paths."""
    for attr in ('config', 'counts'):
        path = getattr(args, attr, None)
        if path is None:
            continue
        try:
            setattr(args, attr, sanitize_input_path(path))
        except ValueError as ve:
            log_error_and_exit(f"❌ Error: {ve}", logger, EXIT_CONFIG_ERROR)
        validate_file_exists(getattr(args, attr), logger)

    validate_non_negative_integer(getattr(args, 'seed', None), "--seed", logger)
    validate_non_negative_integer(getattr(args, 'trials', None), "--trials", logger)
    validate_positive_integer(getattr(args, 'max_workers', None), "--max-workers", logger)


def _add_common_arguments(parser):
    parser.add_argument('--out', help='Output directory for <kind>.csv and <kind>_summary.json '
                                      '(default: $FREQHOP_LOG_PATH)')
    parser.add_argument('--debug', action='store_true', help='Enable detailed debug logging (elements, progress, '
                                                             'error traces)')


def create_argument_parser():
    """Create and configure the argument parser."""
    parser = argparse.ArgumentParser(
        description="Simulate a nonlinear Mach-Zehnder interferometer terminated at two wavelengths"
    )
    subparsers = parser.add_subparsers(dest='command', required=True)

    for command, help_text in (
        ('fringes', 'Dual-wavelength fringe scan over mirror displacement or phase'),
        ('hbt', 'Hanbury-Brown-Twiss anticorrelation test (method A or B)'),
        ('qe-curve', 'Conversion efficiency versus pump intensity'),
        ('ebit', 'Up-conversion of a polarization-entangled photon pair'),
        ('single-shot', 'Single-photon qubit through the converter'),
    ):
        sub = subparsers.add_parser(command, help=help_text)
        sub.add_argument('--config', required=True, help='YAML experiment config file')
        sub.add_argument('--seed', type=int, help='Override the config seed')
        sub.add_argument('--trials', type=int, help='Override the number of sampled trials (0 = analytic only)')
        sub.add_argument('--analytic-only', action='store_true', help='Skip sampling (same as --trials 0)')
        sub.add_argument('--max-workers', type=int, help='Concurrent scan points (default: min(8, points))')
        _add_common_arguments(sub)

    replay = subparsers.add_parser('replay-counts', help='Replay raw (N, N_A, N_B, N_C) records through the g2 estimator')
    source = replay.add_mutually_exclusive_group(required=True)
    source.add_argument('--published', action='store_true', help='Use the three published count sets')
    source.add_argument('--counts', help='CSV file with columns label,n_trials,n_a,n_b,n_c')
    _add_common_arguments(replay)

    return parser


def main(argv=None):
    parser = create_argument_parser()
    args = parser.parse_args(argv)

    logger = setup_logging('freqhop', debug=args.debug)
    logger.info("=== Starting freqhop ===")
    logger.info(f"Command line arguments: {vars(args)}")

    validate_arguments(args, logger)

    # replay-counts only writes files when asked to
    out_dir = None
    if args.command != 'replay-counts' or args.out:
        out_dir = resolve_output_dir(args.out, logger)

    runner = ExperimentRunner(logger, max_workers=getattr(args, 'max_workers', None))

    try:
        if args.command == 'replay-counts':
            result = runner.replay(args.published, args.counts)
        else:
            config = runner.load_config(args.config, args.command, args.seed, args.trials, args.analytic_only)
            result = runner.run(config)
    except ConfigurationError as e:
        log_error_with_context(logger, "Configuration error", e)
        log_error_and_exit(f"❌ Configuration error: {e}", logger, EXIT_CONFIG_ERROR)
    except Exception as e:
        log_error_with_context(logger, "Experiment failed", e)
        log_error_and_exit(f"❌ Fatal error during {args.command}: {e}", logger, EXIT_RUNTIME_ERROR)

    runner.report(result)

    if out_dir:
        try:
            emit_results(result, out_dir, logger)
        except (OSError, ValueError) as e:
            log_error_with_context(logger, "Writing results failed", e)
            log_error_and_exit(f"❌ Error: Failed to write results: {e}", logger, EXIT_RUNTIME_ERROR)

    success_msg = f"✅ {args.command} complete!"
    print(f"\n{success_msg}")
    logger.info(success_msg)
    logger.info("=== freqhop completed successfully ===")
    return 0


if __name__ == '__main__':
    sys.exit(main())
