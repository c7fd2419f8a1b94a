"""Baseline solvers: greedy heuristic, exact DP, and brute-force oracle."""

from __future__ import annotations

import numpy as np

from .errors import ParameterError, ResourceLimitError
from .features import ratio_order
from .instances import KpInstance, Solution

# Upper bound on the DP reconstruction bitmap, in bytes.
DEFAULT_DP_MEMORY_BUDGET = 512 * 1024 * 1024

BRUTE_FORCE_MAX_ITEMS = 25
_BRUTE_CHUNK = 1 << 16


def greedy_solve(instance: KpInstance) -> Solution:
    """Scan items by non-increasing v/w ratio, adding each one that fits."""
    values = [v for v, _ in instance.items]
    weights = [w for _, w in instance.items]
    left = instance.capacity
    picked = []
    for i in ratio_order(values, weights):
        if weights[i] <= left:
            picked.append(i)
            left -= weights[i]
    picked.sort()
    return Solution(
        selected=tuple(picked),
        total_value=sum(values[i] for i in picked),
        total_weight=instance.capacity - left,
    )


def _dp_table(
    values: np.ndarray, weights: np.ndarray, capacity: int, memory_budget: int
) -> tuple[int, list[int]]:
    """1-D value-maximizing DP over capacity with per-item take bits."""
    n = len(values)
    row_bytes = (capacity + 8) // 8
    need = n * row_bytes + 8 * (capacity + 1)
    if need > memory_budget:
        raise ResourceLimitError(
            f"DP needs ~{need} bytes for capacity {capacity} and {n} items, "
            f"budget is {memory_budget}; use brute force or raise the budget"
        )
    best = np.zeros(capacity + 1, dtype=np.int64)
    take = np.zeros((n, row_bytes), dtype=np.uint8)
    for i in range(n):
        w = int(weights[i])
        v = int(values[i])
        if w > capacity:
            continue
        cand = best[: capacity + 1 - w] + v
        improved = cand > best[w:]
        best[w:] = np.where(improved, cand, best[w:])
        mask = np.zeros(capacity + 1, dtype=bool)
        mask[w:] = improved
        take[i] = np.packbits(mask, bitorder="little")[:row_bytes]
    # Backtrack from full capacity; strict improvement bits make the set unique.
    selected = []
    c = capacity
    for i in range(n - 1, -1, -1):
        if take[i, c >> 3] >> (c & 7) & 1:
            selected.append(i)
            c -= int(weights[i])
    selected.reverse()
    return int(best[capacity]), selected


def dp_solve(
    instance: KpInstance, memory_budget: int = DEFAULT_DP_MEMORY_BUDGET
) -> Solution:
    """Exact optimum by dynamic programming over the scaled capacity."""
    value, selected = _dp_table(
        instance.values(), instance.weights(), instance.capacity, memory_budget
    )
    tw = sum(instance.items[i][1] for i in selected)
    return Solution(selected=tuple(selected), total_value=value, total_weight=tw)


def _brute_force_arrays(
    values: np.ndarray, weights: np.ndarray, capacity: int
) -> tuple[int, int]:
    """Exhaustive max over all subsets; returns (value, best subset bitmask)."""
    n = len(values)
    best_value = 0
    best_mask = 0
    total = 1 << n
    for start in range(0, total, _BRUTE_CHUNK):
        idx = np.arange(start, min(start + _BRUTE_CHUNK, total), dtype=np.uint64)
        sub_v = np.zeros(len(idx), dtype=np.int64)
        sub_w = np.zeros(len(idx), dtype=np.int64)
        for i in range(n):
            bit = ((idx >> np.uint64(i)) & np.uint64(1)).astype(np.int64)
            sub_v += bit * int(values[i])
            sub_w += bit * int(weights[i])
        feasible = sub_w <= capacity
        if feasible.any():
            vals = np.where(feasible, sub_v, -1)
            k = int(vals.argmax())
            if vals[k] > best_value:
                best_value = int(vals[k])
                best_mask = start + k
    return best_value, best_mask


def brute_force_solve(instance: KpInstance) -> Solution:
    """Enumerate all subsets; the independent test oracle for dp_solve."""
    if instance.n > BRUTE_FORCE_MAX_ITEMS:
        raise ParameterError(
            f"brute force is limited to {BRUTE_FORCE_MAX_ITEMS} items, "
            f"got {instance.n}"
        )
    value, mask = _brute_force_arrays(
        instance.values(), instance.weights(), instance.capacity
    )
    selected = tuple(i for i in range(instance.n) if mask >> i & 1)
    tw = sum(instance.items[i][1] for i in selected)
    return Solution(selected=selected, total_value=value, total_weight=tw)
