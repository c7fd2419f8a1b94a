"""Constructive 0-1 knapsack solving with an actor-critic policy.

The pipeline: generate instance datasets, learn a feature-discretization
policy by tabular Q-learning, train policy/value networks with one-step
advantage actor-critic on the knapsack selection MDP, and benchmark the
result against greedy and exact solvers.
"""

__version__ = "0.1.0"

from .instances import (
    Dataset,
    GenParams,
    KpInstance,
    Solution,
    gen_fixed_instances,
    gen_hard_instances,
    gen_random_instances,
    read_dataset,
    write_dataset,
)
from .solvers import brute_force_solve, dp_solve, greedy_solve

__all__ = [
    "Dataset",
    "GenParams",
    "KpInstance",
    "Solution",
    "gen_fixed_instances",
    "gen_hard_instances",
    "gen_random_instances",
    "read_dataset",
    "write_dataset",
    "greedy_solve",
    "dp_solve",
    "brute_force_solve",
    "__version__",
]
