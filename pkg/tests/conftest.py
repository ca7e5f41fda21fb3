import os

import numpy as np
import pytest

from ctxbandit.core import FiniteEnvironment, HistoryRecord, PolicyClass

REPO = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CONFIGS = os.path.join(REPO, "configs")


def random_class(rng, N, n_ctx, K):
    return PolicyClass(rng.integers(0, K, (N, n_ctx)), K)


def random_env(rng, n_ctx, K, law="bernoulli"):
    return FiniteEnvironment(rng.dirichlet(np.ones(n_ctx)), rng.random((n_ctx, K)), law=law)


def random_history(rng, n, n_ctx, K, p_floor=0.1):
    hist = []
    for _ in range(n):
        probs = rng.dirichlet(np.ones(K)) * (1 - K * p_floor) + p_floor
        a = int(rng.choice(K, p=probs))
        hist.append(HistoryRecord(int(rng.integers(n_ctx)), a, float(rng.random()), float(probs[a])))
    return hist


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# Acceptance results are collected here and echoed after the run, one line each.
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
