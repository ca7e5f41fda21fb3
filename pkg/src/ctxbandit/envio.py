"""Plain-text (INI) description of a finite environment and, optionally, its policy class.

Example::

    [environment]
    actions = 2
    law = bernoulli          ; or deterministic

    [contexts]               ; context name = probability, in id order
    c0 = 0.5
    c1 = 0.5

    [means]                  ; one comma-separated list of K means per context
    c0 = 0.6, 0.4
    c1 = 0.4, 0.6

    [policies]               ; optional; omitted means every map contexts -> actions
    follow = 0, 1
    always0 = 0, 0

Lines in ``[policies]`` list one action per context, in the ``[contexts]`` order.
"""
from __future__ import annotations

import configparser
import os
from typing import Optional, Tuple

import numpy as np

from .core import FiniteEnvironment, PolicyClass
from .errors import BanditError, ConfigError

MAX_ENUMERATED = 4096


def _floats(text: str):
    return [float(tok) for tok in text.replace(",", " ").split()]


def _ints(text: str):
    return [int(tok) for tok in text.replace(",", " ").split()]


def _parser() -> configparser.ConfigParser:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.optionxform = str  # keep context and policy names case-sensitive
    return cp


def parse_environment(text: str, source: str = "<string>") -> Tuple[FiniteEnvironment, Optional[PolicyClass]]:
    cp = _parser()
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    for sec in ("environment", "contexts", "means"):
        if not cp.has_section(sec):
            raise ConfigError(f"{source}: missing [{sec}] section")
    try:
        K = cp.getint("environment", "actions")
        law = cp.get("environment", "law", fallback="bernoulli").strip()
        names = list(cp["contexts"].keys())
        probs = [float(cp["contexts"][n]) for n in names]
        if set(cp["means"].keys()) != set(names):
            raise ConfigError(f"{source}: [means] must list exactly the contexts of [contexts]")
        means = [_floats(cp["means"][n]) for n in names]
        if any(len(row) != K for row in means):
            raise ConfigError(f"{source}: every [means] row needs {K} values")
        env = FiniteEnvironment(probs, means, law=law, names=names)
        pclass = None
        if cp.has_section("policies") and len(cp["policies"]):
            rows = [_ints(v) for v in cp["policies"].values()]
            pclass = PolicyClass.from_policies(rows, K)
            if pclass.n_contexts != len(names):
                raise ConfigError(f"{source}: policies must give one action per context")
    except ConfigError:
        raise
    except (ValueError, BanditError) as exc:
        raise ConfigError(f"{source}: {exc}") from None
    return env, pclass


def load_environment(path) -> Tuple[FiniteEnvironment, PolicyClass]:
    """Read an environment file; builds the full policy class when none is listed."""
    if not os.path.isfile(path):
        raise ConfigError(f"environment file not found: {path}")
    with open(path) as fh:
        env, pclass = parse_environment(fh.read(), source=str(path))
    if pclass is None:
        if env.K ** env.n_contexts > MAX_ENUMERATED:
            raise ConfigError(f"{path}: no [policies] given and K^|X| exceeds {MAX_ENUMERATED}")
        pclass = PolicyClass.all_maps(env.n_contexts, env.K)
    return env, pclass


def dump_environment(env: FiniteEnvironment, pclass: Optional[PolicyClass] = None) -> str:
    lines = ["[environment]", f"actions = {env.K}", f"law = {env.law}", "", "[contexts]"]
    lines += [f"{n} = {p!r}" for n, p in zip(env.names, env.context_probs.tolist())]
    lines += ["", "[means]"]
    lines += [f"{n} = " + ", ".join(repr(m) for m in row) for n, row in zip(env.names, env.reward_means.tolist())]
    if pclass is not None:
        lines += ["", "[policies]"]
        lines += [f"p{i} = " + ", ".join(str(int(a)) for a in row) for i, row in enumerate(pclass.table)]
    return "\n".join(lines) + "\n"
