"""Command-line entry point: ``sslab <experiment> [flags]`` and ``sslab list``."""
import argparse
import logging
import os
import sys
from typing import List, Optional

from sslab.exceptions import ConfigError, ConvergenceError, SslabError
from sslab.experiments.catalog import default_config, list_experiments, run_experiment
from sslab.experiments.config import EXPERIMENT_NAMES, LATTICE_GRIDS, ExperimentConfig
from sslab.logging_config import setup_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CLAIM_FAILED = 1
EXIT_USAGE = 2
LOG_FILE = 'sslab.log'
RESOLVED_CONFIG_FILE = 'config.json'


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='sslab',
        description='Run a numerical check of a short-sale constrained market claim.')
    parser.add_argument('experiment', choices=EXPERIMENT_NAMES + ('list',),
                        help="experiment to run, or 'list' to print the catalog")
    parser.add_argument('--config', metavar='FILE', help='JSON config; flags take precedence')
    parser.add_argument('--seed', type=int, help='master seed of the random streams')
    parser.add_argument('--paths', dest='n_paths', type=int, help='number of Monte Carlo paths')
    parser.add_argument('--steps', dest='n_steps', type=int, help='number of grid steps')
    parser.add_argument('--T', dest='T', type=float, help='horizon')
    parser.add_argument('--beta', type=float, help='exponent of Z^(beta), > 1')
    parser.add_argument('--gamma', type=float, help='power-utility exponent in (0, 1)')
    parser.add_argument('--out', metavar='DIR', help='output directory')
    parser.add_argument('--level', type=float, help='confidence level of claim intervals')
    parser.add_argument('--significance', type=float, help='per-bin drift test level')
    parser.add_argument('--chunk', type=int, help='paths per simulation batch')
    parser.add_argument('--grid', choices=LATTICE_GRIDS,
                        help='include the one-period binomial grid in the lattice family')
    parser.add_argument('--n-random', dest='n_random', type=int,
                        help='number of random lattices')
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('-v', '--verbose', action='store_true', help='debug logging')
    verbosity.add_argument('-q', '--quiet', action='store_true', help='warnings only')
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """Experiment defaults, then the config file, then the command-line flags."""
    config = default_config(args.experiment)
    if args.config:
        config = ExperimentConfig.from_file_overrides(args.config, config)
        if config.experiment != args.experiment:
            logger.warning('config file names experiment {!r}; running {!r}'
                           .format(config.experiment, args.experiment))
    lattice = {key: value for key, value in (('grid', args.grid), ('n_random', args.n_random))
               if value is not None}
    config = config.with_overrides(experiment=args.experiment, seed=args.seed,
                                   n_paths=args.n_paths, n_steps=args.n_steps, T=args.T,
                                   beta=args.beta, gamma=args.gamma, out=args.out,
                                   level=args.level, significance=args.significance,
                                   chunk=args.chunk, lattice=lattice or None)
    return config.validate()


def print_catalog() -> None:
    for name, claim in list_experiments():
        print('{:16s} {}'.format(name, claim))


def main(argv: Optional[List[str]] = None) -> int:
    """Run one experiment.

    Returns:
        int: 0 when every asserted claim passes, 1 when one fails, 2 on a
        usage or configuration error.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.experiment == 'list':
        print_catalog()
        return EXIT_OK
    try:
        config = resolve_config(args)
    except ConfigError as e:
        for problem in e.problems:
            logger.error('config: {}'.format(problem))
        parser.print_usage(sys.stderr)
        return EXIT_USAGE

    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    os.makedirs(config.out, exist_ok=True)
    setup_logging(level, logfile=os.path.join(config.out, LOG_FILE), force=True)
    config.save(os.path.join(config.out, RESOLVED_CONFIG_FILE))
    try:
        result = run_experiment(config)
    except ConfigError as e:
        for problem in e.problems:
            logger.error('config: {}'.format(problem))
        return EXIT_USAGE
    except ConvergenceError as e:
        logger.error('{}: {} {}'.format(config.experiment, e, e.diagnostics))
        return EXIT_CLAIM_FAILED
    except SslabError as e:
        logger.error('{}: {}: {}'.format(config.experiment, type(e).__name__, e))
        return EXIT_CLAIM_FAILED
    for claim in result.failed():
        logger.error('claim failed: {}'.format(claim))
    return result.exit_code


if __name__ == '__main__':
    sys.exit(main())
