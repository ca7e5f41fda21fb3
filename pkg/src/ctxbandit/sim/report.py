"""Figures rendered from a results directory (summary.csv plus per-cell transcripts)."""
from __future__ import annotations

import csv
import os
from collections import defaultdict
from typing import Dict, List, Tuple

import numpy as np

from ..errors import ConfigError


def read_summary(out_dir: str) -> List[dict]:
    path = os.path.join(out_dir, "summary.csv")
    if not os.path.isfile(path):
        raise ConfigError(f"no summary.csv in {out_dir}")
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def read_regret_curve(path: str) -> np.ndarray:
    with open(path, newline="") as fh:
        return np.array([float(row["cum_regret"]) for row in csv.DictReader(fh)])


def _mean_se(curves: List[np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    n = min(c.size for c in curves)
    M = np.array([c[:n] for c in curves])
    se = M.std(axis=0, ddof=1) / np.sqrt(M.shape[0]) if M.shape[0] > 1 else np.zeros(n)
    return M.mean(axis=0), se


def render_report(out_dir: str) -> List[str]:
    """Regret curves (mean +- one standard error over seeds) and final regret against delay."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    from .cli import cell_filename

    rows = read_summary(out_dir)
    curves: Dict[Tuple[str, int], List[np.ndarray]] = defaultdict(list)
    finals: Dict[str, Dict[int, List[float]]] = defaultdict(lambda: defaultdict(list))
    for row in rows:
        alg, tau, seed = row["algorithm"], int(row["tau"]), int(row["seed"])
        curves[(alg, tau)].append(read_regret_curve(os.path.join(out_dir, cell_filename(alg, tau, seed))))
        finals[alg][tau].append(float(row["final_regret"]))

    written = []
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for (alg, tau), cs in sorted(curves.items()):
        mean, se = _mean_se(cs)
        ts = np.arange(1, mean.size + 1)
        label = alg if tau == 0 else f"{alg} (tau={tau})"
        ax.plot(ts, mean, label=label, lw=1.4)
        ax.fill_between(ts, mean - se, mean + se, alpha=0.2)
    ax.set_xlabel("round t")
    ax.set_ylabel("cumulative regret")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    path = os.path.join(out_dir, "regret_curves.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    if any(len(by_tau) > 1 for by_tau in finals.values()):
        fig, ax = plt.subplots(figsize=(6, 4))
        for alg, by_tau in sorted(finals.items()):
            taus = sorted(by_tau)
            means = [np.mean(by_tau[t]) for t in taus]
            ses = [np.std(by_tau[t], ddof=1) / np.sqrt(len(by_tau[t])) if len(by_tau[t]) > 1 else 0.0 for t in taus]
            ax.errorbar(taus, means, yerr=ses, marker="o", capsize=3, label=alg)
        ax.set_xlabel("delay tau")
        ax.set_ylabel("final regret")
        ax.legend(fontsize=8)
        ax.grid(alpha=0.3)
        fig.tight_layout()
        path = os.path.join(out_dir, "regret_vs_tau.png")
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written
