"""Simulation harness: counter-based streams, episode runner, CLI and figures."""

from .runner import Transcript, compute_regret, eps_greedy_step, run_episode
