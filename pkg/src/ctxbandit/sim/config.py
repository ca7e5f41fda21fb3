"""Experiment configuration (INI).

::

    [experiment]
    environment = env.ini     ; relative paths resolve against this file
    algorithms = pe, delayed_pe, uniform
    T = 2000
    delta = 0.05
    tau = 0, 50, 100
    seeds = 1..20
    out = results

    [rucb]                    ; optional solver settings
    method = auto
    tol = 0.01
"""
from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, replace
from typing import List, Optional, Tuple

from ..errors import ConfigError

ALGORITHMS = ("pe", "delayed_pe", "rucb", "eps_greedy", "uniform")


def parse_seeds(text: str) -> List[int]:
    """``"1..20"`` (inclusive), ``"3"`` or ``"1,4,9"``; ranges and lists may be mixed."""
    out: List[int] = []
    for part in str(text).replace(" ", "").split(","):
        if not part:
            continue
        try:
            if ".." in part:
                lo, hi = part.split("..", 1)
                lo, hi = int(lo), int(hi)
                if hi < lo:
                    raise ConfigError(f"empty seed range {part!r}")
                out.extend(range(lo, hi + 1))
            else:
                out.append(int(part))
        except ValueError:
            raise ConfigError(f"bad seed entry {part!r}") from None
    if not out:
        raise ConfigError("no seeds given")
    return sorted(set(out))


def parse_int_list(text: str, what: str) -> List[int]:
    try:
        vals = [int(tok) for tok in str(text).replace(" ", "").split(",") if tok]
    except ValueError:
        raise ConfigError(f"bad {what} list {text!r}") from None
    if not vals:
        raise ConfigError(f"empty {what} list")
    return sorted(set(vals))


def parse_algorithms(text: str) -> List[str]:
    algs = [tok.strip() for tok in str(text).split(",") if tok.strip()]
    bad = [a for a in algs if a not in ALGORITHMS]
    if bad or not algs:
        raise ConfigError(f"unknown algorithm(s) {bad}; choose from {', '.join(ALGORITHMS)}")
    return sorted(set(algs), key=algs.index)


@dataclass(frozen=True)
class ExperimentConfig:
    environment: str
    algorithms: Tuple[str, ...] = ("pe",)
    T: int = 1000
    delta: float = 0.05
    taus: Tuple[int, ...] = (0,)
    seeds: Tuple[int, ...] = (1,)
    out: str = "results"
    rucb_method: str = "auto"
    rucb_tol: Optional[float] = 0.01

    def __post_init__(self):
        if self.T < 1:
            raise ConfigError("T must be at least 1")
        if not 0 < self.delta < 1:
            raise ConfigError("delta must lie in (0, 1)")
        if any(t < 0 for t in self.taus):
            raise ConfigError("delays must be non-negative")
        if self.rucb_method not in ("auto", "direct", "ellipsoid"):
            raise ConfigError(f"unknown rucb method {self.rucb_method!r}")
        parse_algorithms(",".join(self.algorithms))

    def cells(self):
        """All (algorithm, tau, seed) cells in output order."""
        return [(a, tau, s) for a in sorted(self.algorithms) for tau in self.taus for s in self.seeds]

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def load_config(path) -> ExperimentConfig:
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if not cp.has_section("experiment"):
        raise ConfigError(f"{path}: missing [experiment] section")
    sec = cp["experiment"]
    if "environment" not in sec:
        raise ConfigError(f"{path}: [experiment] needs an environment entry")
    base = os.path.dirname(os.path.abspath(path))
    env_path = sec["environment"].strip()
    if not os.path.isabs(env_path):
        env_path = os.path.join(base, env_path)
    try:
        kw = dict(
            environment=env_path,
            algorithms=tuple(parse_algorithms(sec.get("algorithms", "pe"))),
            T=sec.getint("T", 1000),
            delta=sec.getfloat("delta", 0.05),
            taus=tuple(parse_int_list(sec.get("tau", "0"), "tau")),
            seeds=tuple(parse_seeds(sec.get("seeds", "1"))),
            out=sec.get("out", "results"),
        )
        if cp.has_section("rucb"):
            r = cp["rucb"]
            kw["rucb_method"] = r.get("method", "auto").strip()
            tol = r.get("tol", "0.01").strip()
            kw["rucb_tol"] = None if tol.lower() in ("", "none", "default") else float(tol)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return ExperimentConfig(**kw)
