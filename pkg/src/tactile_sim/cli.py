"""Command line front end: validate, simulate, compare-grades.

Thin orchestration over the library; all heavy lifting stays in the
core modules. Exit codes: 0 success, 1 validation failure, 2 usage or
I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from dataclasses import dataclass
from datetime import datetime, timezone

from . import __version__, reports
from .arch import TopologyError, classify_scenario, validate_topology
from .config import ConfigError, LoadedConfig, load_config
from .grades import Grade
from .sim import run_monte_carlo


@dataclass(frozen=True)
class RunManifest:
    """Bookkeeping for one invocation.

    The timestamp is informational only and never written into result
    files; emitted artifacts must be reproducible byte for byte.
    """

    config_path: str
    seed: int
    out_dir: str
    subcommand: str
    tool_version: str = __version__
    timestamp: str = ""

    @staticmethod
    def create(args, subcommand: str, seed: int) -> "RunManifest":
        return RunManifest(
            config_path=args.config,
            seed=seed,
            out_dir=getattr(args, "out", ""),
            subcommand=subcommand,
            timestamp=datetime.now(timezone.utc).isoformat(),
        )


def _sim_overrides(args) -> dict:
    return {
        "seed": getattr(args, "seed", None),
        "grade": getattr(args, "grade", None),
        "n_iterations": getattr(args, "iterations", None),
        "n_packets_per_user": getattr(args, "packets", None),
    }


def cmd_validate(args) -> int:
    loaded = load_config(args.config)
    if loaded.topology is None:
        print("error: config has no topology section", file=sys.stderr)
        return 2
    report = validate_topology(loaded.topology)
    if report.ok:
        scenario = classify_scenario(loaded.topology)
        print(f"valid: scenario {scenario}, "
              f"{len(loaded.topology.entities)} entities, "
              f"{len(loaded.topology.links)} links")
        return 0
    print(f"invalid: {len(report.violations)} violation(s)")
    for v in report.violations:
        subjects = f" [{', '.join(v.subjects)}]" if v.subjects else ""
        print(f"violation {v.rule}: {v.message}{subjects}")
    return 1


def _prepare_out_dir(out: str) -> None:
    os.makedirs(out, exist_ok=True)
    probe = os.path.join(out, ".write-probe")
    with open(probe, "w"):
        pass
    os.remove(probe)


def cmd_simulate(args) -> int:
    loaded = load_config(args.config, _sim_overrides(args))
    _prepare_out_dir(args.out)
    manifest = RunManifest.create(args, "simulate", loaded.sim.seed)
    run = run_monte_carlo(loaded.sim)
    reports.write_samples_csv(os.path.join(args.out, "samples.csv"), run, loaded.sha256)
    reports.write_cdf_csv(os.path.join(args.out, "cdf.csv"),
                          run.sum_utility_samples, loaded.sha256, run.seed)
    reports.write_user_metrics_csv(os.path.join(args.out, "user_metrics.csv"),
                                   run, loaded.sha256)
    reports.write_summary(os.path.join(args.out, "summary.txt"), run, loaded.sha256)
    print(f"{manifest.subcommand}: grade={run.grade.value} seed={run.seed} "
          f"iterations={len(run.iterations)} -> {args.out}")
    return 0


def cmd_compare_grades(args) -> int:
    loaded = load_config(args.config, _sim_overrides(args))
    _prepare_out_dir(args.out)
    runs = {}
    for grade in (Grade.ULTRA, Grade.NORMAL):
        cfg = dataclasses.replace(loaded.sim, grade=grade)
        runs[grade] = run_monte_carlo(cfg)
        prefix = os.path.join(args.out, grade.value)
        reports.write_samples_csv(prefix + "_samples.csv", runs[grade], loaded.sha256)
        reports.write_cdf_csv(prefix + "_cdf.csv",
                              runs[grade].sum_utility_samples, loaded.sha256,
                              runs[grade].seed)
    dominates = reports.write_comparison(os.path.join(args.out, "comparison.txt"),
                                         runs[Grade.ULTRA], runs[Grade.NORMAL],
                                         loaded.sha256)
    print(f"dominates: {'true' if dominates else 'false'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tactile-sim",
        description="Architecture validator and system-level grade simulator")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a topology against the interface rules")
    p.add_argument("config")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate", help="run the Monte Carlo evaluation")
    p.add_argument("config")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", default="results")
    p.add_argument("--grade", choices=[g.value for g in Grade])
    p.add_argument("--iterations", type=int)
    p.add_argument("--packets", type=int)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare-grades",
                       help="run both grades on paired seeds and report dominance")
    p.add_argument("config")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", default="results")
    p.add_argument("--iterations", type=int)
    p.add_argument("--packets", type=int)
    p.set_defaults(func=cmd_compare_grades)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, TopologyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
