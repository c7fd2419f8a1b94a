"""End-to-end actor-critic training over a dataset of knapsack instances.

One training run repeats: pick an instance, roll an episode through the
selection MDP with the current policy (sampling actions from the softmax),
update both nets after every transition, and record the best solution value
seen per instance. The state embedding is either the aggregation policy's
discretization or the raw feature vector (the ablation arm); everything
else is identical between the two arms by construction.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace

import numpy as np

from . import env as kpenv
from .aggregation import AggregationPolicy
from .errors import (
    DatasetFormatError,
    DimensionError,
    NumericsError,
    ParameterError,
)
from .features import build_feature_table, fill_entries
from .instances import Dataset, KpInstance, Solution, solution_from_selection
from .nets import MlpParams, OptimizerState, init_mlp, init_optimizer, make_core, policy_forward

T_MAX_PER_ITEM = 3 * 10**4  # default budget: 3N * 10^4 environment steps


@dataclass(frozen=True)
class TrainConfig:
    t_max: int | None = None
    gamma: float = 0.99
    seed: int = 0
    instance_order: str = "uniform"
    action_mode: str = "sample"
    lr: float = 7e-4
    rmsprop_decay: float = 0.99
    rmsprop_eps: float = 1e-5
    entropy_coef: float = 0.01
    raw_rewards: bool = False
    input_scale: bool = True
    policy_head_scale: float = 0.01
    step_log_every: int = 0
    backend: str | None = None

    def __post_init__(self):
        if self.t_max is not None and self.t_max < 1:
            raise ParameterError("t_max must be >= 1")
        if not 0.0 <= self.gamma <= 1.0:
            raise ParameterError("gamma must be in [0, 1]")
        if self.instance_order not in ("uniform", "cyclic"):
            raise ParameterError(f"unknown instance_order {self.instance_order!r}")
        if self.action_mode not in ("sample", "greedy"):
            raise ParameterError(f"unknown action_mode {self.action_mode!r}")


@dataclass(frozen=True)
class EpisodeRecord:
    t: int
    instance_id: int
    value: int
    best_valbar: float


@dataclass(frozen=True)
class StepRecord:
    t: int
    instance_id: int
    reward: float


@dataclass
class TrainLog:
    fingerprint: str
    config_lines: tuple[str, ...]
    t_total: int
    episodes: list[EpisodeRecord]
    steps: list[StepRecord] = field(default_factory=list)

    def save_csv(self, path) -> None:
        with open(path, "w", encoding="ascii") as f:
            f.write(self.to_csv())

    def to_csv(self) -> str:
        lines = [
            f"#kprl-trainlog 1 fingerprint={self.fingerprint} t_total={self.t_total}",
            "t,instance,episode_value,best_valbar",
        ]
        for ep in self.episodes:
            lines.append(
                f"{ep.t},{ep.instance_id},{ep.value},{ep.best_valbar!r}"
            )
        return "\n".join(lines) + "\n"

    @staticmethod
    def load_csv(path) -> "TrainLog":
        with open(path, "r", encoding="ascii") as f:
            lines = [ln for ln in f.read().splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("#kprl-trainlog 1 "):
            raise DatasetFormatError("not a training log file", line=1)
        meta = dict(
            tok.split("=", 1) for tok in lines[0].split()[2:] if "=" in tok
        )
        episodes = []
        for lineno, ln in enumerate(lines[1:], start=2):
            if ln.startswith("t,") or ln.startswith("#"):
                continue
            try:
                t_s, inst_s, val_s, bar_s = ln.split(",")
                episodes.append(
                    EpisodeRecord(int(t_s), int(inst_s), int(val_s), float(bar_s))
                )
            except ValueError:
                raise DatasetFormatError("malformed log row", line=lineno)
        return TrainLog(
            fingerprint=meta.get("fingerprint", ""),
            config_lines=(),
            t_total=int(meta.get("t_total", 0)),
            episodes=episodes,
        )


@dataclass
class BestSolutions:
    """Best episode value and item set per instance, keyed by original id."""

    values: list[int]
    selections: list[tuple[int, ...]]


@dataclass
class TrainResult:
    policy: MlpParams
    value: MlpParams
    policy_opt: OptimizerState
    value_opt: OptimizerState
    log: TrainLog
    best: BestSolutions


def _config_lines(dataset: Dataset, agg: AggregationPolicy | None, cfg: TrainConfig,
                  t_max: int) -> tuple[str, ...]:
    gp = dataset.gen_params
    if agg is None:
        agg_desc = "none"
    else:
        digest = hashlib.sha256(
            repr((agg.d_star, tuple(b.boundaries for b in agg.vr_bins))).encode()
        ).hexdigest()[:12]
        agg_desc = f"agg:{digest}"
    return (
        f"dataset={dataset.family},{gp.m},{gp.n},{gp.r},{gp.seed}",
        f"aggregation={agg_desc}",
        f"t_max={t_max}",
        f"gamma={cfg.gamma!r}",
        f"seed={cfg.seed}",
        f"instance_order={cfg.instance_order}",
        f"action_mode={cfg.action_mode}",
        f"lr={cfg.lr!r}",
        f"rmsprop_decay={cfg.rmsprop_decay!r}",
        f"rmsprop_eps={cfg.rmsprop_eps!r}",
        f"entropy_coef={cfg.entropy_coef!r}",
        f"raw_rewards={cfg.raw_rewards}",
        f"input_scale={cfg.input_scale}",
        f"policy_head_scale={cfg.policy_head_scale!r}",
    )


def fingerprint_of(lines: tuple[str, ...]) -> str:
    return hashlib.sha256("\n".join(lines).encode("ascii")).hexdigest()[:12]


def _make_embed(agg: AggregationPolicy | None):
    if agg is None:
        return lambda entries: entries
    return agg.embed_entries


def derive_input_scale(table: np.ndarray) -> np.ndarray:
    """Per-feature max-abs over the embedded training table; zeros become 1."""
    scale = np.abs(table).max(axis=0)
    return np.where(scale > 0, scale, 1.0)


def _sample_action(rng: np.random.Generator, probs: np.ndarray) -> int:
    u = rng.random()
    a = int(np.searchsorted(np.cumsum(probs), u, side="right"))
    return min(a, len(probs) - 1)


def train(
    dataset: Dataset,
    agg: AggregationPolicy | None,
    config: TrainConfig = TrainConfig(),
) -> TrainResult:
    """Run the training loop until the step budget t_max is consumed.

    Episodes always run to completion, so the realized number of steps is
    in [t_max, t_max + 2N). Best-so-far values are keyed by the original
    instance id and only ever improve.
    """
    n_max = dataset.n_max
    if agg is not None and agg.n_max != n_max:
        raise DimensionError(
            f"aggregation policy is for N={agg.n_max}, dataset has N={n_max}"
        )
    t_max = config.t_max if config.t_max is not None else T_MAX_PER_ITEM * n_max
    dim = 2 * n_max + 4
    embed = _make_embed(agg)

    if config.input_scale:
        table = build_feature_table(dataset)
        embedded = np.stack([embed(row) for row in table])
        iscale = derive_input_scale(embedded)
    else:
        iscale = np.ones(dim)

    policy = init_mlp(
        dim, n_max, "softmax",
        seed=_derive_seed(config.seed, 0),
        head_scale=config.policy_head_scale,
        input_scale=iscale,
    )
    value = init_mlp(
        dim, 1, "linear", seed=_derive_seed(config.seed, 1), input_scale=iscale
    )
    policy_opt = init_optimizer(
        policy, lr=config.lr, decay=config.rmsprop_decay, eps=config.rmsprop_eps
    )
    value_opt = init_optimizer(
        value, lr=config.lr, decay=config.rmsprop_decay, eps=config.rmsprop_eps
    )
    core = make_core(
        policy, value, policy_opt, value_opt,
        gamma=config.gamma,
        entropy_coef=config.entropy_coef,
        backend=config.backend,
    )

    rng = np.random.Generator(
        np.random.PCG64(np.random.SeedSequence((config.seed, 2)))
    )
    m = dataset.m
    best_values = [0] * m
    best_sets: list[tuple[int, ...]] = [() for _ in range(m)]
    episodes: list[EpisodeRecord] = []
    steps: list[StepRecord] = []
    greedy_actions = config.action_mode == "greedy"

    lines = _config_lines(dataset, agg, config, t_max)
    fingerprint = fingerprint_of(lines)

    values_cache = [inst.values().astype(np.float64) for inst in dataset.instances]
    weights_cache = [inst.weights() for inst in dataset.instances]

    t = 0
    n_episodes = 0
    while t < t_max:
        if config.instance_order == "cyclic":
            pick = n_episodes % m
        else:
            pick = int(rng.integers(m))
        inst = dataset.instances[pick]
        v_all = values_cache[pick]
        w_all = weights_cache[pick]

        st = kpenv.reset(inst)
        alive = np.array(st.remaining, dtype=np.intp)
        s = embed(
            fill_entries(n_max, st.capacity_left, inst.scale, v_all[alive], w_all[alive])
        )
        while not st.done:
            probs = core.policy_forward(s)
            if greedy_actions:
                action = int(np.argmax(probs))
            else:
                action = _sample_action(rng, probs)
            st2, reward, done = kpenv.step(
                st, action + 1, raw_rewards=config.raw_rewards
            )
            if done:
                s2 = s  # terminal value is never bootstrapped
            else:
                alive = np.array(st2.remaining, dtype=np.intp)
                s2 = embed(
                    fill_entries(
                        n_max, st2.capacity_left, inst.scale, v_all[alive], w_all[alive]
                    )
                )
            try:
                core.update(s, action, reward, s2, done)
            except NumericsError as exc:
                raise NumericsError(
                    f"aborting at t={t}, instance {inst.id}: {exc}"
                ) from exc
            t += 1
            if config.step_log_every and t % config.step_log_every == 0:
                steps.append(StepRecord(t=t, instance_id=inst.id, reward=reward))
            st, s = st2, s2

        n_episodes += 1
        if st.ov > best_values[pick]:
            best_values[pick] = st.ov
            best_sets[pick] = tuple(sorted(st.accepted))
        episodes.append(
            EpisodeRecord(
                t=t,
                instance_id=inst.id,
                value=st.ov,
                best_valbar=float(np.mean(best_values)),
            )
        )

    log = TrainLog(
        fingerprint=fingerprint,
        config_lines=lines,
        t_total=t,
        episodes=episodes,
        steps=steps,
    )
    return TrainResult(
        policy=policy,
        value=value,
        policy_opt=policy_opt,
        value_opt=value_opt,
        log=log,
        best=BestSolutions(values=best_values, selections=best_sets),
    )


def _derive_seed(seed: int, stream: int) -> int:
    digest = hashlib.sha256(f"kprl-net:{seed}:{stream}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def rollout(
    policy: MlpParams,
    agg: AggregationPolicy | None,
    instance: KpInstance,
    rng: np.random.Generator | None = None,
    raw_rewards: bool = False,
) -> Solution:
    """One episode with the trained policy; samples when rng is given."""
    n_max = policy.out_dim
    if instance.n > n_max:
        raise ParameterError(
            f"instance has {instance.n} items; the model handles up to {n_max}"
        )
    embed = _make_embed(agg)
    v_all = instance.values().astype(np.float64)
    w_all = instance.weights()
    st = kpenv.reset(instance)
    while not st.done:
        alive = np.array(st.remaining, dtype=np.intp)
        s = embed(
            fill_entries(
                n_max, st.capacity_left, instance.scale, v_all[alive], w_all[alive]
            )
        )
        probs = policy_forward(policy, s)
        if rng is None:
            action = int(np.argmax(probs))
        else:
            action = _sample_action(rng, probs)
        st, _, _ = kpenv.step(st, action + 1, raw_rewards=raw_rewards)
    return solution_from_selection(instance, st.accepted)


def solve_with_policy(
    policy: MlpParams,
    agg: AggregationPolicy | None,
    instance: KpInstance,
    mode: str = "greedy",
    episodes: int = 64,
    seed: int = 0,
) -> Solution:
    """Greedy decoding, or the best of sampled episodes plus the greedy one."""
    if mode not in ("greedy", "sample"):
        raise ParameterError(f"unknown mode {mode!r}")
    best = rollout(policy, agg, instance, rng=None)
    if mode == "sample":
        rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence((seed, instance.id)))
        )
        for _ in range(episodes):
            cand = rollout(policy, agg, instance, rng=rng)
            if cand.total_value > best.total_value:
                best = cand
    return best
