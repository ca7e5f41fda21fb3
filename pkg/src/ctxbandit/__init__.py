"""Contextual bandits over finite policy classes: policy elimination, randomized UCB
with an argmax-oracle ellipsoid solver, and a reproducible simulation harness."""

from .amo import AmoDataset, BruteForceOracle, CountingOracle, amo_argmax, amo_call_counter
from .concentration import freedman_bound, pe_schedule, rucb_schedule
from .core import (ActionDistribution, FiniteEnvironment, HistoryRecord, Policy, PolicyClass,
                   PolicyDistribution, empirical_best, induced_action_dist, ips_policy_value,
                   ips_randomized_value, smooth, sparsify, true_value)
from .elimination import PeState, find_low_variance_dist, pe_choose, pe_update
from .envio import load_environment
from .rucb import RucbState, rucb_choose, rucb_update

__version__ = "0.1.0"
