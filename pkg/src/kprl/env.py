"""The knapsack selection MDP: items are picked one per step by rank.

Actions index rank positions of the current sorted feature vector, so
action 1 always means "take the best remaining normalized-value item". A
selected item that fits is accepted (positive reward, capacity shrinks); one
that does not fit is discarded with a negative reward; an action past the
remaining item count leaves the instance unchanged and costs the remaining
capacity. Episodes end when items run out, capacity hits zero exactly, or a
2N step guard triggers (undefined actions do not consume items).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import EpisodeDoneError, ParameterError
from .features import ratio_order
from .instances import KpInstance

EPISODE_CAP_FACTOR = 2


@dataclass(frozen=True)
class EnvState:
    """Immutable episode state; step() returns a new one.

    ``remaining`` holds original item indices in rank order (descending
    normalized value, ties by lower index), so ``remaining[i - 1]`` is the
    item selected by action i.
    """

    instance: KpInstance
    remaining: tuple[int, ...]
    capacity_left: int
    ow: int
    ov: int
    steps: int
    done: bool
    accepted: tuple[int, ...] = ()

    @property
    def n_remaining(self) -> int:
        return len(self.remaining)


def reset(instance: KpInstance) -> EnvState:
    values = [v for v, _ in instance.items]
    weights = [w for _, w in instance.items]
    return EnvState(
        instance=instance,
        remaining=ratio_order(values, weights),
        capacity_left=instance.capacity,
        ow=0,
        ov=0,
        steps=0,
        done=False,
    )


def step(
    state: EnvState, action: int, raw_rewards: bool = False
) -> tuple[EnvState, float, bool]:
    """Apply a 1-based rank action; returns (new state, reward, done).

    Rewards are the instance-scale quantities +v, -w, -W' divided by the
    original capacity so magnitudes stay comparable across instances;
    ``raw_rewards`` divides by the scale denominator instead, giving the
    plain rational values.
    """
    if state.done:
        raise EpisodeDoneError("episode is finished; call reset()")
    inst = state.instance
    if action < 1:
        raise ParameterError(f"action must be >= 1, got {action}")
    norm = float(inst.scale) if raw_rewards else float(inst.capacity)
    steps = state.steps + 1

    if action > state.n_remaining:
        reward = -state.capacity_left / norm
        new = replace(state, steps=steps)
    else:
        item_idx = state.remaining[action - 1]
        v, w = inst.items[item_idx]
        remaining = state.remaining[: action - 1] + state.remaining[action:]
        if w <= state.capacity_left:
            reward = v / norm
            new = replace(
                state,
                remaining=remaining,
                capacity_left=state.capacity_left - w,
                ow=state.ow + w,
                ov=state.ov + v,
                steps=steps,
                accepted=state.accepted + (item_idx,),
            )
        else:
            reward = -w / norm
            new = replace(state, remaining=remaining, steps=steps)

    done = (
        new.n_remaining == 0
        or new.capacity_left == 0
        or new.steps >= EPISODE_CAP_FACTOR * len(inst.items)
    )
    if done:
        new = replace(new, done=True)
    return new, reward, done
