"""Command-line entry point: simulate, sweep, validate, mc-check.

Single runs and seed sweeps write one trajectory CSV per seed (plus an
optional two-panel SVG); sweeps additionally write a summary CSV and a JSON
manifest.  Sweeps can fan out over processes, and the per-seed outputs are
byte-identical regardless of worker count or completion order.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import checks, controller, gaussian, montecarlo
from .io import summarize_run, trajectory_to_csv, write_summary_csv, write_trajectory_svg
from .model import ControlParams, ParameterError
from .scenarios import BUILTIN_SCENARIOS, ScenarioFormatError, load_scenario


@dataclass(frozen=True)
class RunConfig:
    scenario: str
    seeds: tuple[int, ...]
    out_dir: str
    plots: bool = False
    record_marginals: bool = False
    jobs: int = 1
    summary: bool = True

    def __post_init__(self):
        if len(self.seeds) == 0:
            raise ValueError("seed range must be non-empty")


def _run_one(scenario_ref: str, seed: int, out_dir: str, plots: bool,
             record_marginals: bool) -> dict:
    scenario = load_scenario(scenario_ref)
    stem = f"{scenario.name}__seed{seed}"
    try:
        traj = controller.simulate(scenario, seed)
    except controller.SimulationError as exc:
        return {"seed": seed, "status": "error", "error": str(exc)}
    trajectory_to_csv(traj, Path(out_dir) / f"{stem}.csv", record_marginals=record_marginals)
    if plots:
        write_trajectory_svg(traj, scenario, Path(out_dir) / f"{stem}.svg")
    row = summarize_run(traj, scenario)
    row["status"] = "ok"
    return row


def run(config: RunConfig) -> int:
    """Execute a run or sweep; returns the process exit status."""
    scenario = load_scenario(config.scenario)
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    args = [(config.scenario, seed, str(out), config.plots, config.record_marginals)
            for seed in config.seeds]
    if config.jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            rows = list(pool.map(_run_one, *zip(*args)))
    else:
        rows = [_run_one(*a) for a in args]
    failures = [r for r in rows if r.get("status") != "ok"]
    ok_rows = [r for r in rows if r.get("status") == "ok"]
    if config.summary:
        write_summary_csv(ok_rows, out / f"{scenario.name}__summary.csv", scenario)
        manifest = {
            "scenario": scenario.name,
            "seeds": list(config.seeds),
            "failed": [{"seed": r["seed"], "error": r["error"]} for r in failures],
        }
        (out / f"{scenario.name}__manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
        if ok_rows:
            patterns = Counter(tuple(int(c) for c in r["counts"]) for r in ok_rows)
            modal, times = patterns.most_common(1)[0]
            print(f"{scenario.name}: {len(ok_rows)} runs; modal end counts {modal} "
                  f"in {times}/{len(ok_rows)} ({times / len(ok_rows):.0%})")
    for r in failures:
        print(f"seed {r['seed']}: {r['error']}", file=sys.stderr)
    return 1 if failures else 0


def _parse_seeds(ns) -> tuple[int, ...]:
    if ns.seeds is not None:
        try:
            lo, hi = ns.seeds.split("..")
            lo, hi = int(lo), int(hi)
        except ValueError:
            raise SystemExit(f"--seeds expects A..B, got {ns.seeds!r}")
        if hi < lo:
            raise SystemExit(f"--seeds range {ns.seeds!r} is empty")
        return tuple(range(lo, hi + 1))
    return (ns.seed,)


def _add_run_args(p: argparse.ArgumentParser, sweep: bool) -> None:
    p.add_argument("--scenario", required=True,
                   help=f"scenario file or built-in name ({', '.join(BUILTIN_SCENARIOS)})")
    if sweep:
        p.add_argument("--seeds", required=True, metavar="A..B",
                       help="inclusive seed range, e.g. 0..99")
        p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    else:
        p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="runs", metavar="DIR", help="output directory")
    p.add_argument("--plots", action="store_true", help="write a two-panel SVG per run")
    p.add_argument("--record-marginals", action="store_true",
                   help="include assignment marginal columns in trajectory CSVs")


def _cmd_simulate(ns) -> int:
    return run(RunConfig(scenario=ns.scenario, seeds=(ns.seed,), out_dir=ns.out,
                         plots=ns.plots, record_marginals=ns.record_marginals,
                         summary=False))


def _cmd_sweep(ns) -> int:
    ns.seeds_tuple = _parse_seeds(ns)
    return run(RunConfig(scenario=ns.scenario, seeds=ns.seeds_tuple, out_dir=ns.out,
                         plots=ns.plots, record_marginals=ns.record_marginals,
                         jobs=ns.jobs, summary=True))


def _cmd_validate(ns) -> int:
    report = checks.run_suite(ns.suite, gradient_instances=ns.gradient_instances,
                              oracle_instances=ns.oracle_instances,
                              mc_samples=ns.mc_samples)
    for c in report["checks"]:
        status = "PASS" if c["passed"] else "FAIL"
        print(f"{status} {c['name']}: measured {c['measured']:.3e} vs "
              f"tolerance {c['tolerance']:.3e} ({c['detail']})")
    if ns.out:
        Path(ns.out).write_text(json.dumps(report, indent=2) + "\n")
    return 0 if report["passed"] else 1


def _cmd_mc_check(ns) -> int:
    params = ControlParams(nu=1.0, R=1.0, alpha=1e3, epsilon=0.01, T=1.0)
    mu = np.array([1.0])
    x = np.array([ns.x])
    spec = montecarlo.DiffusionSpec(nu=params.nu, lam=params.lam, dt=params.T / 200)
    kernel = montecarlo.EndKernel.quadratic(mu, params.alpha, params.lam)
    sample = montecarlo.sample_endpoints(x, 0.0, spec, params.T, ns.n_samples, ns.seed)
    log_z, se = montecarlo.estimate_log_z(sample, kernel, np.array([0.0]))
    offset = 0.5 * math.log((params.R / params.alpha) / (params.T + params.R / params.alpha))
    closed = gaussian.log_z_single(x, 0.0, mu, params) + offset
    print(f"log Z estimate: ({log_z:.6f}, {se:.2e}, {ns.n_samples})  closed form {closed:.6f}")
    u, u_se = montecarlo.mc_control(x, 0.0, spec, kernel, np.array([0.0]), params.T,
                                    h=1e-2, n_samples=ns.n_samples, seed=ns.seed + 1)
    exact = gaussian.control_single(x, 0.0, mu, params)
    print(f"control estimate: ({u[0]:.6f}, {u_se[0]:.2e}, {ns.n_samples})  closed form {exact[0]:.6f}")
    ok = abs(log_z - closed) <= 4 * se and abs(u[0] - exact[0]) <= 4 * u_se[0]
    print("agreement within 4 standard errors" if ok else "DISAGREEMENT beyond 4 standard errors")
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="pimas",
        description="Path-integral optimal control of multi-agent target assignment.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one seeded trajectory")
    _add_run_args(p, sweep=False)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep", help="run a seed sweep with a summary CSV")
    _add_run_args(p, sweep=True)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("validate", help="run a validation suite")
    p.add_argument("suite", choices=checks.SUITES)
    p.add_argument("--out", help="also write the JSON report here")
    p.add_argument("--gradient-instances", type=int, default=1000)
    p.add_argument("--oracle-instances", type=int, default=200)
    p.add_argument("--mc-samples", type=int, default=100_000)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("mc-check", help="print Monte-Carlo estimates next to closed forms")
    p.add_argument("--n-samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--x", type=float, default=0.3, help="start position")
    p.set_defaults(func=_cmd_mc_check)

    ns = parser.parse_args(argv)
    try:
        return ns.func(ns)
    except (ScenarioFormatError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
