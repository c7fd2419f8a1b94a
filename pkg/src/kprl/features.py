"""Item normalization and the sorted, zero-padded feature vector.

A feature vector for an instance with at most N items has 2N+4 entries:

    (n_P, W_P, Sv, Sw, vr_1, wr_1, ..., vr_N, wr_N)

where vr_i = v_i / (w_i * W_P) and wr_i = w_i / W_P are computed on the
unscaled rational quantities, item pairs are sorted by descending vr with
ties broken by lower original index, and ranks past n_P are zero. Sv and Sw
are the sums of the normalized vr/wr over the remaining items, which keeps
instances of different magnitudes comparable.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ParameterError
from .instances import KpInstance


@dataclass(frozen=True)
class NormalizedItem:
    vr: float
    wr: float
    origin_index: int


def ratio_order(values, weights) -> tuple[int, ...]:
    """Indices sorted by descending value/weight ratio, ties by lower index.

    Comparison is exact over the rationals, so the order is independent of
    the capacity used to normalize (vr ordering equals v/w ordering) and of
    floating-point collisions between near-equal ratios.
    """
    n = len(values)
    return tuple(sorted(range(n), key=lambda i: (Fraction(-values[i], weights[i]), i)))


def normalize(instance: KpInstance) -> list[NormalizedItem]:
    """Per-item (vr, wr) on the unscaled rational values, original order."""
    if instance.capacity < 1:
        raise ParameterError("capacity must be positive")
    out = []
    s = instance.scale
    cap = instance.capacity
    for i, (v, w) in enumerate(instance.items):
        if w < 1:
            raise ParameterError(f"item {i}: weight must be positive")
        # (v/s) / ((w/s)*(W/s)) == v*s / (w*W); exact ints, one rounded divide.
        out.append(NormalizedItem(vr=(v * s) / (w * cap), wr=w / cap, origin_index=i))
    return out


@dataclass(frozen=True)
class FeatureVector:
    """Entries of length 2N+4 plus the rank -> original item permutation."""

    entries: np.ndarray
    item_ranks: tuple[int, ...]

    @property
    def n_max(self) -> int:
        return (len(self.entries) - 4) // 2


def fill_entries(
    n_max: int,
    capacity: int,
    scale: int,
    values_ranked: np.ndarray,
    weights_ranked: np.ndarray,
) -> np.ndarray:
    """Assemble the 2N+4 entry array from rank-ordered scaled item arrays.

    Shared by build_feature_vector and the training loop so both produce
    bit-identical floats for the same remaining item set.
    """
    n_p = len(values_ranked)
    entries = np.zeros(2 * n_max + 4, dtype=np.float64)
    entries[0] = n_p
    entries[1] = capacity / scale
    if n_p:
        vr = (values_ranked * float(scale)) / (
            weights_ranked.astype(np.float64) * float(capacity)
        )
        wr = weights_ranked / float(capacity)
        entries[2] = vr.sum()
        entries[3] = wr.sum()
        entries[4 : 4 + 2 * n_p : 2] = vr
        entries[5 : 5 + 2 * n_p : 2] = wr
    return entries


def build_feature_vector(instance: KpInstance, n_max: int) -> FeatureVector:
    """Sorted, zero-padded feature vector for an instance with n_P <= N."""
    if instance.n > n_max:
        raise ParameterError(
            f"instance has {instance.n} items, above the feature width N={n_max}"
        )
    values = instance.values().astype(np.float64)
    weights = instance.weights()
    order = ratio_order([v for v, _ in instance.items], [w for _, w in instance.items])
    idx = np.array(order, dtype=np.int64)
    entries = fill_entries(
        n_max, instance.capacity, instance.scale, values[idx], weights[idx]
    )
    return FeatureVector(entries=entries, item_ranks=order)


def build_feature_table(dataset) -> np.ndarray:
    """M x (2N+4) table of feature vectors, one row per instance."""
    rows = [build_feature_vector(inst, dataset.n_max).entries for inst in dataset.instances]
    return np.stack(rows)
