"""
Command-line interface of the attack lab.

Usage:
    python main.py check fixtures/blocked_target.json --allow-unnormalized
    python main.py run --victim linucb --attack two-stage --T 10000 --seed 7
    python main.py sweep --T1-values 5 20 100 --sigma-values 0.1 0.3 --reps 100
    python main.py probe --checkpoints 2500 10000
    python main.py sample-env --d 10 --k 30 --seed 3 --attackable --out env.json

Exit codes: 0 success, 2 invalid config/instance/arguments, 3 no attackable
environment found, 1 any other lab error.
"""

import argparse
import logging
import os
import sys

from src.attackability.certificate import attackability_index, project_parallel
from src.environment.instance_io import load_instance, save_instance
from src.environment.model import RngStreams
from src.environment.sampling import (
    DEFAULT_MAX_TRIES,
    sample_attackable_environment,
    sample_environment,
    sample_orthonormal_environment,
)
from src.harness.campaign import run_campaign
from src.harness.config import ATTACKS, ENV_SOURCES, SAMPLERS, VICTIMS, load_config
from src.harness.experiments import false_negative_sweep, sublinearity_probe
from src.harness.outputs import dumps, write_campaign_outputs, write_table
from src.utils.common import configure_logging, get_output_dir, write_json_file
from src.utils.errors import (
    AttackLabError,
    ConfigError,
    ExhaustedTries,
    InvalidEnvironment,
    ParseError,
)
from src.utils.table_utils import frame_table, summary_table

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INVALID = 2
EXIT_EXHAUSTED = 3


def _choice(allowed):
    """argparse type accepting dashed or underscored spellings."""

    def parse(value):
        token = value.strip().lower().replace("-", "_")
        if token not in allowed:
            raise argparse.ArgumentTypeError(f"choose from {', '.join(a.replace('_', '-') for a in allowed)}")
        return token

    return parse


def _add_campaign_flags(parser):
    parser.add_argument("--config", help="JSON file with ExperimentConfig fields")
    parser.add_argument("--seed", type=int, help="Run a single seed")
    parser.add_argument("--seeds", type=int, nargs="+", help="Seeds to run")
    parser.add_argument("--T", type=int, dest="T", help="Horizon")
    parser.add_argument("--T1", type=int, dest="T1", help="Stage-1 length (default rule otherwise)")
    parser.add_argument("--victim", type=_choice(VICTIMS), help="linucb or robust-phe")
    parser.add_argument("--attack", type=_choice(ATTACKS), help="none, oracle or two-stage")
    parser.add_argument("--d", type=int, help="Context dimension of sampled environments")
    parser.add_argument("--k", type=int, help="Number of arms of sampled environments")
    parser.add_argument("--sigma", type=float, help="Reward and attack noise standard deviation")
    parser.add_argument("--lambda", type=float, dest="lam", help="LinUCB ridge parameter")
    parser.add_argument("--delta", type=float, help="Confidence level")
    parser.add_argument(
        "--bonus-noise-scale", type=float, help="Noise scale R in the LinUCB exploration term (defaults to --sigma)"
    )
    parser.add_argument("--env-source", type=_choice(ENV_SOURCES), help="sample, sample-attackable or file")
    parser.add_argument("--instance", dest="env_path", help="Instance file (implies --env-source file)")
    parser.add_argument("--sampler", type=_choice(SAMPLERS), help="gaussian or orthonormal")
    parser.add_argument("--allow-unnormalized", action="store_true", default=None, help="Accept vectors with norm above 1")
    parser.add_argument("--solver-max-iter", type=int, help="Subgradient solver budget")
    parser.add_argument("--max-tries", type=int, help="Rejection budget of the attackable sampler")
    parser.add_argument("--workers", type=int, help="Worker threads for seeds")
    parser.add_argument("--out-dir", help="Output directory")


def build_parser():
    parser = argparse.ArgumentParser(prog="attack-lab", description="Reward-poisoning attacks on linear stochastic bandits")
    parser.add_argument("-v", "--verbose", action="store_true", help="Enable debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="Print the attackability report of an instance")
    check.add_argument("instance", help="Instance JSON file")
    check.add_argument("--allow-unnormalized", action="store_true", help="Accept vectors with norm above 1")
    check.add_argument("--solver-max-iter", type=int, default=200_000, help="Subgradient solver budget")

    run = sub.add_parser("run", help="Run a campaign and write its files")
    _add_campaign_flags(run)

    sweep = sub.add_parser("sweep", help="False-negative rate of the two-stage assertion")
    _add_campaign_flags(sweep)
    sweep.add_argument("--T1-values", type=int, nargs="+", default=[5, 10, 20, 50, 100], help="Stage-1 lengths")
    sweep.add_argument("--sigma-values", type=float, nargs="+", default=[0.1, 0.2, 0.3], help="Noise levels")
    sweep.add_argument("--reps", type=int, default=100, help="Repetitions per cell")

    probe = sub.add_parser("probe", help="Cost growth over horizons")
    _add_campaign_flags(probe)
    probe.add_argument("--checkpoints", type=int, nargs="+", default=[2500, 10000], help="Horizons")

    sample = sub.add_parser("sample-env", help="Sample an environment and write it as an instance file")
    sample.add_argument("--d", type=int, default=10, help="Context dimension")
    sample.add_argument("--k", type=int, default=30, help="Number of arms")
    sample.add_argument("--sigma", type=float, default=0.1, help="Noise standard deviation")
    sample.add_argument("--seed", type=int, default=0, help="Master seed")
    sample.add_argument("--attackable", action="store_true", help="Re-sample until attackable")
    sample.add_argument("--orthonormal", action="store_true", help="Orthonormal arms")
    sample.add_argument("--max-tries", type=int, default=DEFAULT_MAX_TRIES, help="Rejection budget")
    sample.add_argument("--solver-max-iter", type=int, default=200_000, help="Subgradient solver budget")
    sample.add_argument("--out", required=True, help="Destination instance file")
    return parser


def config_from_args(args):
    """ExperimentConfig from --config plus flag overrides."""
    overrides = {
        key: getattr(args, key)
        for key in (
            "T", "T1", "victim", "attack", "d", "k", "sigma", "lam", "delta", "bonus_noise_scale", "env_source", "env_path",
            "sampler", "allow_unnormalized", "solver_max_iter", "max_tries", "workers",
        )
    }
    if overrides.pop("lam") is not None:
        overrides["lambda"] = args.lam
    if args.env_path is not None and args.env_source is None:
        overrides["env_source"] = "file"
    if args.seeds is not None:
        overrides["seeds"] = args.seeds
    if args.seed is not None:
        overrides["seeds"] = [args.seed]
    return load_config(args.config, overrides)


def cmd_check(args):
    env = load_instance(args.instance, allow_unnormalized=args.allow_unnormalized)
    report = attackability_index(env, project_parallel(env, env.theta_star), max_iter=args.solver_max_iter)
    sys.stdout.write(dumps(report.to_dict()))
    return EXIT_OK


def cmd_run(args):
    cfg = config_from_args(args)
    results = run_campaign(cfg)
    paths = write_campaign_outputs(results, get_output_dir(args.out_dir))
    print(summary_table([r.summary for r in results]))
    print(f"\nCampaign summary saved to: {paths['summary']}")
    return EXIT_OK


def cmd_sweep(args):
    cfg = config_from_args(args)
    table = false_negative_sweep(cfg, args.T1_values, args.sigma_values, args.reps)
    path = write_table(table, os.path.join(get_output_dir(args.out_dir), f"sweep_{cfg.config_hash()}.csv"))
    print(frame_table(table))
    print(f"\nSweep table saved to: {path}")
    return EXIT_OK


def cmd_probe(args):
    cfg = config_from_args(args)
    report = sublinearity_probe(cfg, args.checkpoints)
    out_dir = get_output_dir(args.out_dir)
    stem = os.path.join(out_dir, f"probe_{cfg.config_hash()}")
    write_table(report.table, f"{stem}.csv")
    write_json_file(f"{stem}.json", report.to_dict())
    print(frame_table(report.table))
    print(f"\nFitted exponent beta: {'-' if report.beta is None else f'{report.beta:.3f}'}")
    print(f"Probe report saved to: {stem}.json")
    return EXIT_OK


def cmd_sample_env(args):
    rng = RngStreams(args.seed)
    sampler = sample_orthonormal_environment if args.orthonormal else sample_environment
    if args.attackable:
        env = sample_attackable_environment(
            args.d, args.k, args.sigma, rng,
            max_tries=args.max_tries, sampler=sampler, solver_max_iter=args.solver_max_iter,
        ).env
    else:
        env = sampler(args.d, args.k, args.sigma, rng)
    save_instance(env, args.out)
    print(f"Instance saved to: {args.out}")
    return EXIT_OK


COMMANDS = {
    "check": cmd_check,
    "run": cmd_run,
    "sweep": cmd_sweep,
    "probe": cmd_probe,
    "sample-env": cmd_sample_env,
}


def main(argv=None):
    """
    Parses argv, runs the subcommand and maps errors to exit codes.

    Args:
        argv (list[str], optional): Arguments without the program name.

    Returns:
        int: The exit code.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_INVALID
    configure_logging(args.verbose)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, ParseError, InvalidEnvironment) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except ExhaustedTries as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_EXHAUSTED
    except AttackLabError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
