"""Command line entry point: ``mqaoa {solve,ensemble,rgstats,ringscan,oracle}``.

Settings come from an optional JSON ``--config`` file mirroring
:class:`~mqaoa.experiments.ExperimentConfig`; command line flags override it.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .driver import MqaoaConfig
from .experiments import ExperimentConfig, run_ensemble, run_rgstats, run_ringscan, run_solve
from .oracles import run_all
from .qaoa import OptimizerConfig

_MQAOA_FLAGS = {
    "depth": "depth",
    "rounds": "rounds",
    "matchings": "matchings",
    "base_size": "base_size",
    "rdm_mode": "rdm_mode",
}
_TOP_FLAGS = ("family", "n", "degree", "rho", "graph_file", "count", "out", "seed", "timeout", "workers", "timing")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON file with experiment settings")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--out", help="records file (JSON lines); a CSV table is written alongside")
    common.add_argument("--depth", type=int, help="QAOA depth p")
    common.add_argument("--rounds", type=int, help="rounds K per level")
    common.add_argument("--matchings", type=int, help="matchings C tried per level")
    common.add_argument("--base-size", dest="base_size", type=int, help="solve exactly at or below this size")
    common.add_argument("--rdm-mode", dest="rdm_mode", help="'exact' or 'shots:<count>'")
    common.add_argument("--restarts", type=int, help="optimizer restarts per QAOA run")
    common.add_argument("--family", choices=["cycle", "regular", "erdos_renyi", "file"])
    common.add_argument("--graph", dest="graph_file", help="graph JSON for --family file")
    common.add_argument("--n", type=int, help="number of vertices")
    common.add_argument("--degree", type=int, help="degree for regular graphs")
    common.add_argument("--rho", type=float, help="edge density for Erdos-Renyi graphs")
    common.add_argument("--count", type=int, help="number of instances")
    common.add_argument("--depths", type=int, nargs="+", help="depths scanned by ringscan")
    common.add_argument("--timeout", type=float, help="per-instance wall-clock budget in seconds")
    common.add_argument("--workers", type=int, help="worker processes")
    common.add_argument("--timing", action="store_true", default=None, help="include wall times in records")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="mqaoa", description="Multiscale QAOA experiments")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="run one instance")
    sub.add_parser("ensemble", parents=[common], help="mean error per round over random instances")
    sub.add_parser("rgstats", parents=[common], help="vertex count and degree along repeated RG steps")
    sub.add_parser("ringscan", parents=[common], help="ring of disagrees at several depths")
    sub.add_parser("oracle", parents=[common], help="dense cross-checks on random small instances")
    return p


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    base = json.loads(args.config.read_text()) if args.config else {}
    base["kind"] = args.command
    cfg = ExperimentConfig.from_dict(base)
    top = {k: getattr(args, k) for k in _TOP_FLAGS if getattr(args, k) is not None}
    if args.depths is not None:
        top["depths"] = tuple(args.depths)
    mq = {v: getattr(args, k) for k, v in _MQAOA_FLAGS.items() if getattr(args, k) is not None}
    mqaoa = replace(cfg.mqaoa, **mq)
    if args.restarts is not None:
        mqaoa = replace(mqaoa, optimizer=replace(mqaoa.optimizer, restarts=args.restarts))
    return replace(cfg, mqaoa=mqaoa, **top)


def _fmt(x):
    return "n/a" if x is None else f"{x:.6f}"


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")

    if args.command == "oracle":
        results = run_all(seed=args.seed or 0)
        for r in results:
            print(r.line())
        return 0 if all(r.passed for r in results) else 1

    try:
        cfg = build_config(args)
    except (OSError, ValueError, TypeError) as exc:
        print(f"mqaoa: invalid configuration: {exc}", file=sys.stderr)
        return 2

    if cfg.kind == "solve":
        records = [run_solve(cfg)]
        rec = records[0]
        print(f"status={rec.status} n={rec.n} cut={rec.cut} max={rec.exact_max} r={_fmt(rec.ratio)} "
              f"r_variational={_fmt(rec.ratio_variational)} rounds={rec.rounds_used} qaoa_runs={rec.qaoa_runs}")
    elif cfg.kind == "ensemble":
        records, summary = run_ensemble(cfg)
        print("round  mean_err_post_qaoa  mean_err_post_rg")
        for row in summary:
            print(f"{row['round']:5d}  {row['mean_err_post_qaoa']:18.3e}  {row['mean_err_post_rg']:16.3e}")
        solved = sum(1 for r in records if r.ratio is not None and r.ratio >= 1 - 1e-9)
        print(f"exactly solved: {solved}/{len(records)}")
    elif cfg.kind == "rgstats":
        records, rows = run_rgstats(cfg)
        print("step  mean_v_m  mean_d_m")
        for row in rows:
            print(f"{row['step']:4d}  {row['mean_v']:8.3f}  {row['mean_d']:8.3f}")
    else:
        records, rows = run_ringscan(cfg)
        print("depth  round  err_post_qaoa  err_post_rg")
        for row in rows:
            print(f"{row['depth']:5d}  {row['round']:5d}  {row['err_post_qaoa']:13.3e}  {row['err_post_rg']:11.3e}")

    failed = [r for r in records if r.status != "ok"]
    for r in failed:
        print(f"instance {r.instance}: {r.status}: {r.error}", file=sys.stderr)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
