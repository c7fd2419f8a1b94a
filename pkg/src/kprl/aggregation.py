"""Feature discretization: quantile splits scored by tabular Q-learning.

Each normalized-value column of the instance feature table gets its own
number of splits d*, learned by an epsilon-greedy Q-learning agent whose
reward favors balanced subsets with few values shared across subsets.
Normalized-weight columns keep the fixed cuts {0.5, 1.0}, separating light,
heavy, and illegal items. The four leading scalar features pass through
unchanged.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass, field

import numpy as np

from .errors import CheckpointFormatError, DimensionError, ParameterError

WR_CUTS = (0.5, 1.0)


def quantile_subsets(values, d: int) -> list[list[float]]:
    """Partition sorted values into d+1 subsets of ceil(M/(d+1)) elements.

    The last subset takes the remainder; with heavily skewed (M, d) the
    chunking can leave trailing subsets short or empty, which the reward
    function then scores as 0.
    """
    m = len(values)
    if d < 1:
        raise ParameterError(f"d must be >= 1, got {d}")
    if d + 1 > m:
        raise ParameterError(f"cannot make {d + 1} subsets from {m} values")
    ordered = sorted(float(v) for v in values)
    q = math.ceil(m / (d + 1))
    return [ordered[j * q : (j + 1) * q] for j in range(d + 1)]


@dataclass(frozen=True)
class Bins:
    """Ascending cut values; label(v) counts boundaries strictly below v."""

    boundaries: tuple[float, ...]

    def __post_init__(self):
        if any(b2 <= b1 for b1, b2 in zip(self.boundaries, self.boundaries[1:])):
            raise ParameterError("boundaries must be strictly ascending")

    @property
    def n_labels(self) -> int:
        return len(self.boundaries) + 1

    def label(self, value: float) -> int:
        # Values equal to a boundary fall in the lower bin; values outside
        # the fitted range clamp to the extreme labels.
        return bisect_left(self.boundaries, value)


def quantile_split(values, d: int) -> Bins:
    """Fit Bins whose boundaries are the maxima of the first d subsets."""
    subsets = quantile_subsets(values, d)
    raw = [s[-1] for s in subsets[:-1] if s]
    boundaries = []
    for b in raw:
        if not boundaries or b > boundaries[-1]:
            boundaries.append(b)
    return Bins(boundaries=tuple(boundaries))


def split_reward(values, d: int) -> float:
    """Product of subset sizes over (d+1) * max(1, #cross-subset values).

    A value occurring in k > 1 subsets contributes k-1 to the common count.
    """
    subsets = quantile_subsets(values, d)
    size_product = 1
    for s in subsets:
        size_product *= len(s)
    spans: dict[float, int] = {}
    for s in subsets:
        for v in set(s):
            spans[v] = spans.get(v, 0) + 1
    common = sum(k - 1 for k in spans.values() if k > 1)
    return size_product / ((d + 1) * max(1, common))


@dataclass(frozen=True)
class QLearnParams:
    alpha: float = 0.1
    gamma: float = 0.9
    epsilon: float = 0.1
    iterations: int = 50_000

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ParameterError("alpha must be in (0, 1]")
        if not 0.0 <= self.gamma <= 1.0:
            raise ParameterError("gamma must be in [0, 1]")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ParameterError("epsilon must be in [0, 1]")
        if self.iterations < 1:
            raise ParameterError("iterations must be >= 1")


@dataclass(frozen=True)
class QTable:
    """Learned action values: one row per vr feature, one column per d."""

    values: np.ndarray
    x: int
    params: QLearnParams


@dataclass(frozen=True)
class AggregationPolicy:
    """Fitted discretization: learned vr bins, fixed wr cuts, scalar identity."""

    n_max: int
    d_star: tuple[int, ...]
    vr_bins: tuple[Bins, ...]
    wr_cuts: tuple[float, float] = WR_CUTS
    q_table: QTable | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if len(self.d_star) != self.n_max or len(self.vr_bins) != self.n_max:
            raise DimensionError("d_star/vr_bins length must equal n_max")

    @property
    def width(self) -> int:
        return 2 * self.n_max + 4

    def _boundary_matrix(self) -> np.ndarray:
        pad = max((len(b.boundaries) for b in self.vr_bins), default=0)
        mat = np.full((self.n_max, max(pad, 1)), np.inf)
        for i, b in enumerate(self.vr_bins):
            mat[i, : len(b.boundaries)] = b.boundaries
        return mat

    def embed_entries(self, entries: np.ndarray) -> np.ndarray:
        """Vectorized map of one 2N+4 feature row to its state embedding."""
        if len(entries) != self.width:
            raise DimensionError(
                f"expected {self.width} entries, got {len(entries)}"
            )
        if not hasattr(self, "_bmat"):
            object.__setattr__(self, "_bmat", self._boundary_matrix())
        out = entries.copy()
        vr = entries[4::2]
        wr = entries[5::2]
        out[4::2] = (self._bmat < vr[:, None]).sum(axis=1)
        out[5::2] = (wr > self.wr_cuts[0]).astype(np.float64) + (
            wr > self.wr_cuts[1]
        )
        return out


def embed_state(fv, policy: AggregationPolicy) -> np.ndarray:
    """Discretize a FeatureVector: vr ranks to learned labels, wr to
    {0: light, 1: heavy, 2: illegal}, scalars unchanged."""
    return policy.embed_entries(fv.entries)


def learn_aggregation(
    feature_table: np.ndarray,
    x: int = 9,
    params: QLearnParams = QLearnParams(),
    seed: int = 0,
) -> AggregationPolicy:
    """Run the Q-learning loop over vr features and fit the split policy.

    States are the N vr columns; the action d in 1..x splits a column into
    d+1 quantile subsets scored by split_reward. Rewards are deterministic
    per (column, d), so they are precomputed once and the tabular loop runs
    on lookups. On termination d* is the argmax row action (lowest d on
    ties) and the per-column Bins are fitted with d* splits.
    """
    table = np.asarray(feature_table, dtype=np.float64)
    if table.ndim != 2 or table.shape[0] < 1:
        raise ParameterError("feature table must be a non-empty 2-D array")
    width = table.shape[1]
    if width < 6 or width % 2:
        raise ParameterError(f"feature table width {width} is not 2N+4")
    n_max = (width - 4) // 2
    m = table.shape[0]
    if x < 1:
        raise ParameterError(f"x must be >= 1, got {x}")
    if x + 1 > m:
        raise ParameterError(f"x={x} needs at least x+1={x + 1} instances, got {m}")

    vr_cols = [table[:, 4 + 2 * i] for i in range(n_max)]
    rewards = np.empty((n_max, x))
    for i, col in enumerate(vr_cols):
        for d in range(1, x + 1):
            rewards[i, d - 1] = split_reward(col, d)

    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    q = np.zeros((n_max, x))
    i = int(rng.integers(n_max))
    for _ in range(params.iterations):
        i_next = int(rng.integers(n_max))
        if rng.random() < params.epsilon:
            d = int(rng.integers(1, x + 1))
        else:
            d = int(np.argmax(q[i])) + 1
        r = rewards[i, d - 1]
        q[i, d - 1] += params.alpha * (
            r + params.gamma * q[i_next].max() - q[i, d - 1]
        )
        i = i_next

    d_star = tuple(int(np.argmax(q[i])) + 1 for i in range(n_max))
    bins = tuple(quantile_split(vr_cols[i], d_star[i]) for i in range(n_max))
    return AggregationPolicy(
        n_max=n_max,
        d_star=d_star,
        vr_bins=bins,
        q_table=QTable(values=q, x=x, params=params),
    )


POLICY_MAGIC = "#kprl-agg"
POLICY_VERSION = 1


def save_policy(policy: AggregationPolicy, path) -> None:
    """Versioned text format: one `k d* b1 ... bm` line per feature index."""
    lines = [f"{POLICY_MAGIC} {POLICY_VERSION} {policy.n_max}"]
    for k in range(4):
        lines.append(f"{k} 0")
    for i in range(policy.n_max):
        b = " ".join(repr(v) for v in policy.vr_bins[i].boundaries)
        lines.append(f"{4 + 2 * i} {policy.d_star[i]}{' ' + b if b else ''}")
        cuts = " ".join(repr(c) for c in policy.wr_cuts)
        lines.append(f"{5 + 2 * i} 2 {cuts}")
    with open(path, "w", encoding="ascii") as f:
        f.write("\n".join(lines) + "\n")


def load_policy(path) -> AggregationPolicy:
    with open(path, "r", encoding="ascii") as f:
        lines = [ln for ln in f.read().splitlines() if ln.strip()]
    if not lines:
        raise CheckpointFormatError("empty aggregation policy file")
    head = lines[0].split()
    if len(head) != 3 or head[0] != POLICY_MAGIC:
        raise CheckpointFormatError("missing aggregation policy header")
    if int(head[1]) != POLICY_VERSION:
        raise CheckpointFormatError(f"unsupported policy version {head[1]}")
    n_max = int(head[2])
    d_star: dict[int, int] = {}
    bins: dict[int, Bins] = {}
    for ln in lines[1:]:
        if ln.startswith("#config"):
            continue
        toks = ln.split()
        k = int(toks[0])
        d = int(toks[1])
        bounds = tuple(float(t) for t in toks[2:])
        if k >= 4 and (k - 4) % 2 == 0:
            i = (k - 4) // 2
            d_star[i] = d
            bins[i] = Bins(boundaries=bounds)
    if sorted(d_star) != list(range(n_max)):
        raise CheckpointFormatError("policy file is missing vr feature lines")
    return AggregationPolicy(
        n_max=n_max,
        d_star=tuple(d_star[i] for i in range(n_max)),
        vr_bins=tuple(bins[i] for i in range(n_max)),
    )
