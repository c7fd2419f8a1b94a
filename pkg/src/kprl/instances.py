"""Knapsack instance types, the three seeded generators, and dataset file I/O.

All quantities are stored as scaled integers: an instance with ``scale`` s
holds value/weight/capacity numbers that denote the rationals v/s, w/s, W/s.
Integer storage keeps the exact dynamic-programming oracle exact even for
the fixed-capacity family, whose item values are reals in (0, 1) materialized
on a 1e-4 grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DatasetFormatError, ParameterError

FAMILIES = ("RI", "FI", "HI")

# Preset capacities for the fixed-capacity family, keyed by item count.
FIXED_CAPACITIES = {50: 12.5, 300: 37.5, 500: 37.5}
FIXED_SCALE = 10**4


def _is_power_of_ten(x: int) -> bool:
    if x < 1:
        return False
    while x % 10 == 0:
        x //= 10
    return x == 1


@dataclass(frozen=True)
class KpInstance:
    """One 0-1 knapsack instance: items are (value, weight) in scaled units."""

    id: int
    items: tuple[tuple[int, int], ...]
    capacity: int
    scale: int = 1

    def __post_init__(self):
        if self.id < 1:
            raise ParameterError(f"instance id must be >= 1, got {self.id}")
        if len(self.items) < 1:
            raise ParameterError("instance must contain at least one item")
        if self.capacity < 1:
            raise ParameterError(f"capacity must be >= 1, got {self.capacity}")
        if not _is_power_of_ten(self.scale):
            raise ParameterError(f"scale must be a power of ten, got {self.scale}")
        for k, (v, w) in enumerate(self.items):
            if v < 0:
                raise ParameterError(f"item {k}: value must be >= 0, got {v}")
            if w < 1:
                raise ParameterError(f"item {k}: weight must be >= 1, got {w}")

    @property
    def n(self) -> int:
        return len(self.items)

    def values(self) -> np.ndarray:
        return np.array([v for v, _ in self.items], dtype=np.int64)

    def weights(self) -> np.ndarray:
        return np.array([w for _, w in self.items], dtype=np.int64)


@dataclass(frozen=True)
class GenParams:
    """Generator parameters recorded in the dataset header."""

    m: int
    n: int
    r: int
    seed: int


@dataclass(frozen=True)
class Dataset:
    """A list of instances plus the dataset-level maximum item count N."""

    instances: tuple[KpInstance, ...]
    n_max: int
    family: str
    gen_params: GenParams

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ParameterError(f"unknown family {self.family!r}")
        if len(self.instances) != self.gen_params.m:
            raise ParameterError("instance count does not match gen_params.m")
        for inst in self.instances:
            if inst.n > self.n_max:
                raise ParameterError(
                    f"instance {inst.id} has {inst.n} items, above n_max={self.n_max}"
                )

    @property
    def m(self) -> int:
        return len(self.instances)


@dataclass(frozen=True)
class Solution:
    """A feasible item selection with its accumulated value and weight."""

    selected: tuple[int, ...]
    total_value: int
    total_weight: int


def solution_from_selection(instance: KpInstance, selected) -> Solution:
    """Build a Solution from item indices, checking feasibility."""
    sel = tuple(sorted(set(int(i) for i in selected)))
    tv = sum(instance.items[i][0] for i in sel)
    tw = sum(instance.items[i][1] for i in sel)
    if tw > instance.capacity:
        raise ParameterError(
            f"selection weight {tw} exceeds capacity {instance.capacity}"
        )
    return Solution(selected=sel, total_value=tv, total_weight=tw)


def _instance_rng(seed: int, p: int) -> np.random.Generator:
    # One PCG64 stream per instance, keyed by (seed, id): instances can be
    # generated in any order or in parallel without changing the dataset.
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, p))))


def _check_common(m: int, seed: int) -> None:
    if m < 1:
        raise ParameterError(f"M must be >= 1, got {m}")
    if seed < 0:
        raise ParameterError(f"seed must be >= 0, got {seed}")


def gen_random_instances(m: int, n: int, r: int, seed: int) -> Dataset:
    """Random family: n_P uniform in 1..N, values/weights in [1, R],
    capacity uniform in [ceil(R/10), 3R]."""
    _check_common(m, seed)
    if n < 1:
        raise ParameterError(f"N must be >= 1, got {n}")
    if r < 10:
        raise ParameterError(f"R must be >= 10, got {r}")
    lo_cap = (r + 9) // 10
    instances = []
    for p in range(1, m + 1):
        rng = _instance_rng(seed, p)
        n_p = int(rng.integers(1, n + 1))
        values = rng.integers(1, r + 1, size=n_p)
        weights = rng.integers(1, r + 1, size=n_p)
        cap = int(rng.integers(lo_cap, 3 * r + 1))
        items = tuple((int(v), int(w)) for v, w in zip(values, weights))
        instances.append(KpInstance(id=p, items=items, capacity=cap, scale=1))
    return Dataset(
        instances=tuple(instances),
        n_max=n,
        family="RI",
        gen_params=GenParams(m, n, r, seed),
    )


def gen_fixed_instances(
    m: int, n: int, seed: int, capacity: float | None = None
) -> Dataset:
    """Fixed-capacity family: n_P = N, values/weights uniform in (0, 1) on a
    1e-4 grid, capacity 12.5 (N=50) or 37.5 (N=300, 500) unless overridden."""
    _check_common(m, seed)
    if n < 1:
        raise ParameterError(f"N must be >= 1, got {n}")
    if capacity is None:
        if n not in FIXED_CAPACITIES:
            raise ParameterError(
                f"no preset capacity for N={n}; pass an explicit capacity"
            )
        capacity = FIXED_CAPACITIES[n]
    if capacity <= 0:
        raise ParameterError(f"capacity must be positive, got {capacity}")
    cap_scaled = round(capacity * FIXED_SCALE)
    if cap_scaled < 1:
        raise ParameterError(f"capacity {capacity} is below the 1e-4 grid")
    instances = []
    for p in range(1, m + 1):
        rng = _instance_rng(seed, p)
        values = rng.integers(1, FIXED_SCALE, size=n)
        weights = rng.integers(1, FIXED_SCALE, size=n)
        items = tuple((int(v), int(w)) for v, w in zip(values, weights))
        instances.append(
            KpInstance(id=p, items=items, capacity=cap_scaled, scale=FIXED_SCALE)
        )
    return Dataset(
        instances=tuple(instances),
        n_max=n,
        family="FI",
        gen_params=GenParams(m, n, 0, seed),
    )


def gen_hard_instances(m: int, n: int, r: int, seed: int) -> Dataset:
    """Hard family: v_i = w_i + R/10 and capacity floor((p/(M+1)) * sum w),
    so capacities grow with the instance id p."""
    _check_common(m, seed)
    if n < 1:
        raise ParameterError(f"N must be >= 1, got {n}")
    if r < 10 or r % 10 != 0:
        raise ParameterError(f"R must be a positive multiple of 10, got {r}")
    bonus = r // 10
    instances = []
    for p in range(1, m + 1):
        rng = _instance_rng(seed, p)
        weights = rng.integers(1, r + 1, size=n)
        sw = int(weights.sum())
        # floor of the rational p*sw/(M+1); clamped so capacity stays >= 1.
        cap = max(1, (p * sw) // (m + 1))
        items = tuple((int(w) + bonus, int(w)) for w in weights)
        instances.append(KpInstance(id=p, items=items, capacity=cap, scale=1))
    return Dataset(
        instances=tuple(instances),
        n_max=n,
        family="HI",
        gen_params=GenParams(m, n, r, seed),
    )


def generate(family: str, m: int, n: int, seed: int, r: int = 0,
             capacity: float | None = None) -> Dataset:
    """Dispatch to one generator by family name."""
    fam = family.upper()
    if fam == "RI":
        return gen_random_instances(m, n, r, seed)
    if fam == "FI":
        return gen_fixed_instances(m, n, seed, capacity=capacity)
    if fam == "HI":
        return gen_hard_instances(m, n, r, seed)
    raise ParameterError(f"unknown family {family!r}")


def write_dataset(dataset: Dataset, path) -> None:
    """Write the line-delimited dataset format (one instance per line)."""
    with open(path, "w", encoding="ascii") as f:
        f.write(dataset_to_text(dataset))


def dataset_to_text(dataset: Dataset) -> str:
    gp = dataset.gen_params
    lines = [f"#{dataset.family.lower()} {gp.m} {gp.n} {gp.r} {gp.seed}"]
    for inst in dataset.instances:
        parts = [str(inst.id), str(inst.n), str(inst.capacity), str(inst.scale)]
        for v, w in inst.items:
            parts.append(str(v))
            parts.append(str(w))
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def read_dataset(path) -> Dataset:
    """Parse a dataset file, validating every instance invariant.

    Raises DatasetFormatError naming the offending line on any violation.
    Lines starting with '#config' are ignored (CLI provenance comments).
    """
    with open(path, "r", encoding="ascii") as f:
        text = f.read()
    return dataset_from_text(text)


def dataset_from_text(text: str) -> Dataset:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise DatasetFormatError("missing '#family M N R seed' header", line=1)
    header = lines[0][1:].split()
    if len(header) != 5:
        raise DatasetFormatError(
            f"header must have 5 fields, got {len(header)}", line=1
        )
    family = header[0].upper()
    if family not in FAMILIES:
        raise DatasetFormatError(f"unknown family {header[0]!r}", line=1)
    try:
        m, n, r, seed = (int(tok) for tok in header[1:])
    except ValueError:
        raise DatasetFormatError("header fields M N R seed must be integers", line=1)

    instances = []
    seen_ids = set()
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        if raw.startswith("#config"):
            continue
        if raw.startswith("#"):
            raise DatasetFormatError("unexpected comment line", line=lineno)
        try:
            fields = [int(tok) for tok in raw.split()]
        except ValueError:
            raise DatasetFormatError("non-integer field", line=lineno)
        if len(fields) < 4:
            raise DatasetFormatError("expected 'id n capacity scale ...'", line=lineno)
        pid, n_p, cap, scale = fields[:4]
        rest = fields[4:]
        if len(rest) != 2 * n_p:
            raise DatasetFormatError(
                f"expected {2 * n_p} item fields, got {len(rest)}", line=lineno
            )
        if pid in seen_ids:
            raise DatasetFormatError(f"duplicate instance id {pid}", line=lineno)
        seen_ids.add(pid)
        items = tuple((rest[2 * k], rest[2 * k + 1]) for k in range(n_p))
        try:
            inst = KpInstance(id=pid, items=items, capacity=cap, scale=scale)
        except ParameterError as exc:
            raise DatasetFormatError(str(exc), line=lineno)
        if inst.n > n:
            raise DatasetFormatError(
                f"instance has {inst.n} items, above dataset N={n}", line=lineno
            )
        instances.append(inst)

    if len(instances) != m:
        raise DatasetFormatError(
            f"header says M={m} but found {len(instances)} instances", line=1
        )
    if seen_ids != set(range(1, m + 1)):
        raise DatasetFormatError("instance ids must be contiguous 1..M", line=1)
    instances.sort(key=lambda inst: inst.id)
    return Dataset(
        instances=tuple(instances),
        n_max=n,
        family=family,
        gen_params=GenParams(m, n, r, seed),
    )
