"""Pure-numpy fallback for the per-step actor-critic kernels.

Mirrors the compiled extension in kprl._kernels; selected automatically at
import when the extension is unavailable (see kprl.backend). Both nets are
fixed-topology MLPs (input -> 64 -> 64 -> output) with tanh hidden layers;
the policy head is a softmax, the value head a scalar.
"""

from __future__ import annotations

import numpy as np

from .errors import NumericsError

BACKEND_NAME = "python"


class A2CCore:
    """Holds parameter/optimizer arrays and runs forward/update steps.

    Parameter arrays are shared with the caller and updated in place; the
    caller must run policy_forward(s) before update(s, ...) so the cached
    activations match the state being updated.
    """

    def __init__(
        self,
        policy_arrays,
        value_arrays,
        policy_accum,
        value_accum,
        input_scale,
        gamma: float,
        lr: float,
        decay: float,
        eps: float,
        entropy_coef: float,
    ):
        self.pw1, self.pb1, self.pw2, self.pb2, self.pw3, self.pb3 = policy_arrays
        self.vw1, self.vb1, self.vw2, self.vb2, self.vw3, self.vb3 = value_arrays
        self.pacc = list(policy_accum)
        self.vacc = list(value_accum)
        self.iscale = input_scale
        self.gamma = gamma
        self.lr = lr
        self.decay = decay
        self.eps = eps
        self.entropy_coef = entropy_coef
        self.probs = np.zeros(self.pw3.shape[0])
        self._logp = np.zeros_like(self.probs)
        self._xs = None
        self._h1p = None
        self._h2p = None

    def policy_forward(self, x: np.ndarray) -> np.ndarray:
        xs = x / self.iscale
        h1 = np.tanh(self.pw1 @ xs + self.pb1)
        h2 = np.tanh(self.pw2 @ h1 + self.pb2)
        z = self.pw3 @ h2 + self.pb3
        zs = z - z.max()
        lse = np.log(np.exp(zs).sum())
        self._logp = zs - lse
        np.exp(self._logp, out=self.probs)
        self._xs, self._h1p, self._h2p = xs, h1, h2
        return self.probs

    def _value(self, x: np.ndarray, cache: bool = False) -> float:
        xs = x / self.iscale
        h1 = np.tanh(self.vw1 @ xs + self.vb1)
        h2 = np.tanh(self.vw2 @ h1 + self.vb2)
        v = float(self.vw3 @ h2 + self.vb3)
        if cache:
            self._vxs, self._vh1, self._vh2 = xs, h1, h2
        return v

    def value_forward(self, x: np.ndarray) -> float:
        return self._value(x)

    def _rms(self, acc: np.ndarray, param: np.ndarray, grad: np.ndarray) -> None:
        acc *= self.decay
        acc += (1.0 - self.decay) * grad * grad
        param -= self.lr * grad / (np.sqrt(acc) + self.eps)

    def update(
        self, x: np.ndarray, action: int, reward: float, x2: np.ndarray, done: bool
    ) -> tuple[float, float, float]:
        """One-step TD update of both nets; returns (advantage, V(s), target)."""
        v2 = 0.0 if done else self._value(x2)
        v1 = self._value(x, cache=True)
        target = reward + self.gamma * v2
        adv = target - v1
        if not (np.isfinite(adv) and np.isfinite(v1)):
            raise NumericsError(
                f"non-finite TD quantities: V(s)={v1}, target={target}"
            )

        # Policy: descend -(advantage * log pi(a|s)) - entropy_coef * H(pi).
        p = self.probs
        gz = adv * p.copy()
        gz[action] -= adv
        if self.entropy_coef:
            ent = -float(p @ self._logp)
            gz += self.entropy_coef * p * (self._logp + ent)
        dh2 = self.pw3.T @ gz
        self._rms(self.pacc[4], self.pw3, np.outer(gz, self._h2p))
        self._rms(self.pacc[5], self.pb3, gz)
        dz2 = (1.0 - self._h2p * self._h2p) * dh2
        dh1 = self.pw2.T @ dz2
        self._rms(self.pacc[2], self.pw2, np.outer(dz2, self._h1p))
        self._rms(self.pacc[3], self.pb2, dz2)
        dz1 = (1.0 - self._h1p * self._h1p) * dh1
        self._rms(self.pacc[0], self.pw1, np.outer(dz1, self._xs))
        self._rms(self.pacc[1], self.pb1, dz1)

        # Value: descend the squared TD error with the target held fixed.
        gv = 2.0 * (v1 - target)
        gz3 = np.array([gv])
        dh2v = self.vw3.T @ gz3
        self._rms(self.vacc[4], self.vw3, np.outer(gz3, self._vh2))
        self._rms(self.vacc[5], self.vb3, gz3)
        dz2v = (1.0 - self._vh2 * self._vh2) * dh2v
        dh1v = self.vw2.T @ dz2v
        self._rms(self.vacc[2], self.vw2, np.outer(dz2v, self._vh1))
        self._rms(self.vacc[3], self.vb2, dz2v)
        dz1v = (1.0 - self._vh1 * self._vh1) * dh1v
        self._rms(self.vacc[0], self.vw1, np.outer(dz1v, self._vxs))
        self._rms(self.vacc[1], self.vb1, dz1v)

        return float(adv), v1, float(target)
