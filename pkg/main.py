"""
main.py

Entry point for the successor-representation active inference toolkit. This script parses
the command line, sets up logging, loads the run configuration and dispatches to one of
the run, bench, dump or duality commands.
"""

# General Imports
import argparse
import logging
import sys

# Custom Imports
from src import __version__
from src.config import load_config
from src.errors import ConfigError, ExplosionCap, InvalidSpec, NumericallySingular, UnknownField
from src.harness import DUMP_FIELDS, cmd_bench, cmd_dump, cmd_duality, cmd_run
from src.setup import setup_logging

logger = logging.getLogger('app')

# Exit codes
EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_CHECK = 3

# command-line flag -> configuration key
CONFIG_FLAGS = ("grid_size", "goal", "unknowable", "max_steps", "c_goal", "agent", "agents", "episodes",
                "seed", "gamma", "sr_gamma", "beta", "horizon", "w_utility", "w_epistemic", "policy_cap",
                "planner_eval", "sizes", "out")


def build_parser() -> argparse.ArgumentParser:
    """Builds the argument parser with one subparser per command."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', type=str, help="Flat JSON (or YAML) run configuration.")
    common.add_argument('--out', type=str, help="Output file (JSON report, dump or CSV table).")
    common.add_argument('--seed', type=int, help="64-bit unsigned master seed.")
    common.add_argument('--log-config', type=str, help="Alternative YAML logging configuration.")

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument('--grid-size', type=int, help="Grid side N.")
    grid.add_argument('--goal', type=int, help="Goal cell (default N^2 - 1).")
    grid.add_argument('--unknowable', type=str, help="Comma-separated unknowable cells, e.g. 1,4.")
    grid.add_argument('--max-steps', type=int, help="Step budget per episode (default 4 N^2).")
    grid.add_argument('--c-goal', type=float, help="Goal log-preference in nats.")

    agent = argparse.ArgumentParser(add_help=False)
    agent.add_argument('--agent', choices=["sr", "planner"], help="Agent for run.")
    agent.add_argument('--episodes', type=int, help="Episodes per run or bench cell.")
    agent.add_argument('--gamma', type=float, help="Discount (default 0.99).")
    agent.add_argument('--sr-gamma', type=float, help="Successor discount override, may exceed 1.")
    agent.add_argument('--beta', type=str, help="Precision, or 'greedy'.")
    agent.add_argument('--horizon', type=int, help="Planner horizon H.")
    agent.add_argument('--w-utility', type=float, help="Weight of the utility term.")
    agent.add_argument('--w-epistemic', type=float, help="Weight of the epistemic term.")
    agent.add_argument('--policy-cap', type=int, help="Largest number of planner policies.")
    agent.add_argument('--planner-eval', choices=["tree", "rollout"], help="Planner policy evaluation (default rollout; tree is faster).")

    parser = argparse.ArgumentParser(description="Successor-representation active inference toolkit.")
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    commands.add_parser('run', parents=[common, grid, agent], help="Run episodes of one agent.")

    bench = commands.add_parser('bench', parents=[common, grid, agent], help="Sweep sizes and agents into a CSV.")
    bench.add_argument('--sizes', type=str, help="Comma-separated grid sides, e.g. 3,5,7.")
    bench.add_argument('--agents', type=str, help="Comma-separated agents, e.g. sr,planner.")

    dump = commands.add_parser('dump', parents=[common, grid, agent], help="Dump matrices and value fields.")
    dump.add_argument('--what', type=str, default=",".join(DUMP_FIELDS),
                      help=f"Comma-separated subset of {', '.join(DUMP_FIELDS)}.")

    duality = commands.add_parser('duality', parents=[common], help="Check the control/inference duality.")
    duality.add_argument('--states', type=int, default=10, help="Largest number of states per instance.")
    duality.add_argument('--trials', type=int, default=200, help="Number of random instances.")
    duality.add_argument('--horizon', type=int, default=6, help="Largest horizon.")
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    return {key: getattr(args, key) for key in CONFIG_FLAGS if getattr(args, key, None) is not None}


def dispatch(args: argparse.Namespace) -> int:
    """Runs the selected command and returns its exit code."""
    if args.command == "duality":
        report = cmd_duality(args.states, args.trials, args.horizon, args.seed or 0, args.out)
        return EXIT_OK if report["passed"] else EXIT_CHECK

    config = load_config(args.config, _overrides(args))
    if args.command == "run":
        cmd_run(config)
    elif args.command == "bench":
        cmd_bench(config)
    else:
        cmd_dump(config, [name.strip() for name in args.what.split(",") if name.strip()])
    return EXIT_OK


def main(argv=None) -> int:
    """
    Main function: parses arguments, configures logging and runs the command.

    Args:
        argv (list): Command-line arguments, sys.argv[1:] when omitted.

    Returns:
        (int): Process exit code.
    """
    args = build_parser().parse_args(argv)
    setup_logging(args.log_config)
    logger.info(f"### Starting {args.command} ###")

    try:
        return dispatch(args)
    except (ConfigError, InvalidSpec, UnknownField, ExplosionCap) as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except NumericallySingular as e:
        logger.error(f"Numerical failure: {e} (hint: {e.hint})")
        return EXIT_NUMERICAL
    except Exception as e:
        logger.exception("An unexpected error occurred: %s", e)
        raise
    finally:
        logger.info(f"### {args.command} finished ###")


# run main
if __name__ == "__main__":
    sys.exit(main())
