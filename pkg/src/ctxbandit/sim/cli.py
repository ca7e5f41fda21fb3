"""Command line entry point.

    ctxbandit run --config exp.cfg --out results/ [--seeds 1..20] [--tau 0,50] [--algo pe,uniform]
                  [--T 2000] [--delta 0.05] [--jobs 4] [--plot]
    ctxbandit report --out results/

Exit status: 0 on success, 2 for configuration problems, 1 for runtime failures.
"""
from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Sequence

from ..envio import load_environment
from ..errors import BanditError, ConfigError
from .config import ExperimentConfig, load_config, parse_algorithms, parse_int_list, parse_seeds
from .runner import TRANSCRIPT_COLUMNS, fmt_float, regret_bound, run_episode, transcript_rows

log = logging.getLogger("ctxbandit")

SUMMARY_NAME = "summary.csv"
SUMMARY_COLUMNS = ("algorithm", "tau", "seed", "final_regret", "bound")


def cell_filename(algorithm: str, tau: int, seed: int) -> str:
    return f"{algorithm}_tau{tau}_seed{seed}.csv"


def _write_csv(path: str, header: Sequence[str], rows: List[List[str]]) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        wr.writerows(rows)


def _run_cell(cfg: ExperimentConfig, algorithm: str, tau: int, seed: int):
    env, pclass = load_environment(cfg.environment)
    tr = run_episode(env, pclass, algorithm, cfg.T, cfg.delta, seed, tau=tau,
                     rucb_method=cfg.rucb_method, rucb_tol=cfg.rucb_tol)
    bound = regret_bound(algorithm, cfg.T, pclass.K, pclass.N, cfg.delta, tau)
    return (algorithm, tau, seed), transcript_rows(tr), [algorithm, str(tau), str(seed),
                                                         fmt_float(tr.final_regret), fmt_float(bound)]


def run_experiment(cfg: ExperimentConfig, out_dir: str, jobs: int = 1) -> str:
    """Run every cell, write one transcript per cell plus the summary; returns the summary path."""
    load_environment(cfg.environment)  # fail fast on a bad file
    os.makedirs(out_dir, exist_ok=True)
    cells = cfg.cells()
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            futs = [ex.submit(_run_cell, cfg, *c) for c in cells]
            results = [f.result() for f in futs]
    else:
        results = [_run_cell(cfg, *c) for c in cells]
    results.sort(key=lambda item: item[0])
    summary = []
    for (alg, tau, seed), rows, srow in results:
        _write_csv(os.path.join(out_dir, cell_filename(alg, tau, seed)), TRANSCRIPT_COLUMNS, rows)
        summary.append(srow)
    path = os.path.join(out_dir, SUMMARY_NAME)
    _write_csv(path, SUMMARY_COLUMNS, summary)
    return path


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ctxbandit", description="Contextual bandit simulation harness")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment grid")
    run.add_argument("--config", required=True, help="experiment INI file")
    run.add_argument("--out", help="output directory (overrides the config)")
    run.add_argument("--seeds", help="seed range, e.g. 1..20 or 1,3,5")
    run.add_argument("--tau", help="comma-separated delays")
    run.add_argument("--algo", help="comma-separated algorithms")
    run.add_argument("--T", type=int, help="rounds per episode")
    run.add_argument("--delta", type=float, help="failure probability")
    run.add_argument("--jobs", type=int, default=1, help="worker processes")
    run.add_argument("--plot", action="store_true", help="also render figures next to the CSVs")

    rep = sub.add_parser("report", help="render figures from a results directory")
    rep.add_argument("--out", required=True, help="results directory holding summary.csv")
    return ap


def _config_from_args(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    over = {}
    if args.seeds:
        over["seeds"] = tuple(parse_seeds(args.seeds))
    if args.tau:
        over["taus"] = tuple(parse_int_list(args.tau, "tau"))
    if args.algo:
        over["algorithms"] = tuple(parse_algorithms(args.algo))
    over["T"] = args.T
    over["delta"] = args.delta
    over["out"] = args.out
    return cfg.with_overrides(**over)


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            cfg = _config_from_args(args)
            load_environment(cfg.environment)
            path = run_experiment(cfg, cfg.out, jobs=max(1, args.jobs))
            print(f"wrote {len(cfg.cells())} transcripts and {path}")
            if args.plot:
                from .report import render_report

                for fig in render_report(cfg.out):
                    print(f"wrote {fig}")
        else:
            from .report import render_report

            for fig in render_report(args.out):
                print(f"wrote {fig}")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (BanditError, OSError, RuntimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
