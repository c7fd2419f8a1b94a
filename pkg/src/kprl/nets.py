"""Feedforward policy/value networks with manual backprop and RMSProp.

Both networks are tanh MLPs over the state embedding: the policy maps
2N+4 inputs through two 64-unit hidden layers to N softmax outputs, the
value net to a single linear output. Initialization is scaled-uniform
(Glorot): weights uniform in +-sqrt(6/(fan_in+fan_out)), biases zero; an
optional head_scale shrinks the output layer so the initial policy starts
near uniform. Inputs are divided elementwise by a fixed per-feature
``input_scale`` before the first layer, which keeps raw-magnitude features
(such as the capacity) inside the active range of tanh.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from . import backend as _backend
from .errors import CheckpointFormatError, DimensionError

HIDDEN = (64, 64)


@dataclass
class MlpParams:
    """Layer weights/biases plus the head kind and fixed input scaling."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    head: str
    input_scale: np.ndarray

    def __post_init__(self):
        if self.head not in ("softmax", "linear"):
            raise DimensionError(f"unknown head {self.head!r}")
        if len(self.weights) != len(self.biases):
            raise DimensionError("weights/biases length mismatch")
        prev = self.in_dim
        for w, b in zip(self.weights, self.biases):
            if w.shape != (len(b), prev):
                raise DimensionError(f"layer shape {w.shape} breaks the chain")
            prev = w.shape[0]
        if len(self.input_scale) != self.in_dim:
            raise DimensionError("input_scale length must match the input dim")
        if not all(np.isfinite(w).all() for w in self.weights):
            raise DimensionError("non-finite weight entries")

    @property
    def in_dim(self) -> int:
        return self.weights[0].shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights[-1].shape[0]

    def copy(self) -> "MlpParams":
        return MlpParams(
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            head=self.head,
            input_scale=self.input_scale.copy(),
        )


@dataclass
class OptimizerState:
    """RMSProp squared-gradient accumulators and hyperparameters."""

    sq_weights: list[np.ndarray]
    sq_biases: list[np.ndarray]
    lr: float = 7e-4
    decay: float = 0.99
    eps: float = 1e-5


@dataclass(frozen=True)
class Transition:
    """One environment step: (s, a, r, s', done) with 0-based action."""

    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray
    done: bool


def init_mlp(
    in_dim: int,
    out_dim: int,
    head: str,
    seed: int,
    hidden: tuple[int, ...] = HIDDEN,
    head_scale: float = 1.0,
    input_scale: np.ndarray | None = None,
) -> MlpParams:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    dims = (in_dim, *hidden, out_dim)
    weights, biases = [], []
    for k, (fan_in, fan_out) in enumerate(zip(dims, dims[1:])):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        if k == len(dims) - 2:
            limit *= head_scale
        weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    if input_scale is None:
        input_scale = np.ones(in_dim)
    return MlpParams(
        weights=weights,
        biases=biases,
        head=head,
        input_scale=np.ascontiguousarray(input_scale, dtype=np.float64),
    )


def init_optimizer(
    params: MlpParams, lr: float = 7e-4, decay: float = 0.99, eps: float = 1e-5
) -> OptimizerState:
    return OptimizerState(
        sq_weights=[np.zeros_like(w) for w in params.weights],
        sq_biases=[np.zeros_like(b) for b in params.biases],
        lr=lr,
        decay=decay,
        eps=eps,
    )


def _check_embedding(params: MlpParams, embedding: np.ndarray) -> np.ndarray:
    x = np.asarray(embedding, dtype=np.float64)
    if x.shape != (params.in_dim,):
        raise DimensionError(
            f"embedding length {x.shape} does not match input dim {params.in_dim}"
        )
    return x


def _hidden_forward(params: MlpParams, x: np.ndarray) -> np.ndarray:
    h = x / params.input_scale
    for w, b in zip(params.weights[:-1], params.biases[:-1]):
        h = np.tanh(w @ h + b)
    return params.weights[-1] @ h + params.biases[-1]


def softmax(z: np.ndarray) -> np.ndarray:
    zs = z - z.max()
    e = np.exp(zs)
    return e / e.sum()


def policy_forward(params: MlpParams, embedding) -> np.ndarray:
    """Action probabilities; non-negative and summing to 1."""
    if params.head != "softmax":
        raise DimensionError("policy_forward requires a softmax head")
    return softmax(_hidden_forward(params, _check_embedding(params, embedding)))


def value_forward(params: MlpParams, embedding) -> float:
    if params.head != "linear" or params.out_dim != 1:
        raise DimensionError("value_forward requires a scalar linear head")
    return float(_hidden_forward(params, _check_embedding(params, embedding))[0])


def make_core(
    policy: MlpParams,
    value: MlpParams,
    policy_opt: OptimizerState,
    value_opt: OptimizerState,
    gamma: float,
    entropy_coef: float = 0.0,
    backend: str | None = None,
):
    """Bind both nets and their optimizers into a per-step update core.

    The core shares the parameter arrays, so updates mutate the MlpParams
    in place. Requires the fixed two-hidden-layer topology.
    """
    if len(policy.weights) != 3 or len(value.weights) != 3:
        raise DimensionError("the update core requires exactly two hidden layers")
    if policy.in_dim != value.in_dim:
        raise DimensionError("policy and value nets must share the input dim")
    if not np.array_equal(policy.input_scale, value.input_scale):
        raise DimensionError("policy and value nets must share input_scale")
    if (policy_opt.lr, policy_opt.decay, policy_opt.eps) != (
        value_opt.lr,
        value_opt.decay,
        value_opt.eps,
    ):
        raise DimensionError("optimizers must share hyperparameters")
    mod = _backend.get_backend(backend)

    def flat(params, opt):
        arrays = []
        accums = []
        for w, b, sw, sb in zip(
            params.weights, params.biases, opt.sq_weights, opt.sq_biases
        ):
            arrays += [w, b]
            accums += [sw, sb]
        return arrays, accums

    pol_arrays, pol_acc = flat(policy, policy_opt)
    val_arrays, val_acc = flat(value, value_opt)
    return mod.A2CCore(
        pol_arrays,
        val_arrays,
        pol_acc,
        val_acc,
        policy.input_scale,
        gamma,
        policy_opt.lr,
        policy_opt.decay,
        policy_opt.eps,
        entropy_coef,
    )


def a2c_update(
    policy: MlpParams,
    value: MlpParams,
    policy_opt: OptimizerState,
    value_opt: OptimizerState,
    transition: Transition,
    gamma: float,
    entropy_coef: float = 0.0,
    backend: str | None = None,
) -> tuple[float, float, float]:
    """One-step advantage update of both nets; returns (advantage, V(s), target).

    The policy ascends grad log pi(a|s) * A with A = r + gamma * V(s') *
    (1-done) - V(s); the value net descends the squared TD error with the
    target held fixed. Both apply RMSProp in place.
    """
    core = make_core(
        policy, value, policy_opt, value_opt, gamma, entropy_coef, backend
    )
    s = _check_embedding(policy, transition.state)
    s2 = _check_embedding(policy, transition.next_state)
    core.policy_forward(s)
    return core.update(
        s, int(transition.action), float(transition.reward), s2, bool(transition.done)
    )


CHECKPOINT_MAGIC = "#kprl-net"
CHECKPOINT_VERSION = 1
_MARKER = b"\n---\n"


def checkpoint_to_bytes(params: MlpParams, opt: OptimizerState) -> bytes:
    dims = [params.in_dim] + [w.shape[0] for w in params.weights]
    header = [
        f"{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}",
        f"head {params.head}",
        "dims " + " ".join(str(d) for d in dims),
        f"rmsprop {params_repr(opt.lr)} {params_repr(opt.decay)} {params_repr(opt.eps)}",
    ]
    buf = io.BytesIO()
    buf.write("\n".join(header).encode("ascii"))
    buf.write(_MARKER)
    arrays = [params.input_scale]
    for w, b in zip(params.weights, params.biases):
        arrays += [w, b]
    for sw, sb in zip(opt.sq_weights, opt.sq_biases):
        arrays += [sw, sb]
    for a in arrays:
        buf.write(np.ascontiguousarray(a, dtype="<f8").tobytes())
    return buf.getvalue()


def params_repr(x: float) -> str:
    return repr(float(x))


def checkpoint_from_bytes(data: bytes, expected_n: int | None = None):
    pos = data.find(_MARKER)
    if pos < 0:
        raise CheckpointFormatError("missing checkpoint header marker")
    try:
        lines = data[:pos].decode("ascii").splitlines()
    except UnicodeDecodeError:
        raise CheckpointFormatError("undecodable checkpoint header")
    if not lines or not lines[0].startswith(CHECKPOINT_MAGIC):
        raise CheckpointFormatError("not a network checkpoint")
    if lines[0].split()[1] != str(CHECKPOINT_VERSION):
        raise CheckpointFormatError(f"unsupported checkpoint version: {lines[0]}")
    fields = dict(ln.split(None, 1) for ln in lines[1:] if ln.strip())
    try:
        head = fields["head"].strip()
        dims = [int(t) for t in fields["dims"].split()]
        lr, decay, eps = (float(t) for t in fields["rmsprop"].split())
    except (KeyError, ValueError):
        raise CheckpointFormatError("incomplete checkpoint header")
    if expected_n is not None and dims[-1] != expected_n:
        raise DimensionError(
            f"checkpoint has {dims[-1]} outputs, expected {expected_n}"
        )
    blob = np.frombuffer(data[pos + len(_MARKER) :], dtype="<f8")
    counts = [dims[0]]
    for fan_in, fan_out in zip(dims, dims[1:]):
        counts += [fan_in * fan_out, fan_out]
    counts += counts[1:]  # optimizer accumulators mirror the layer arrays
    if len(blob) != sum(counts):
        raise CheckpointFormatError(
            f"checkpoint payload has {len(blob)} floats, expected {sum(counts)}"
        )
    chunks = np.split(blob.copy(), np.cumsum(counts)[:-1])
    it = iter(chunks)
    input_scale = next(it)
    weights, biases = [], []
    for fan_in, fan_out in zip(dims, dims[1:]):
        weights.append(next(it).reshape(fan_out, fan_in))
        biases.append(next(it))
    sq_weights, sq_biases = [], []
    for fan_in, fan_out in zip(dims, dims[1:]):
        sq_weights.append(next(it).reshape(fan_out, fan_in))
        sq_biases.append(next(it))
    params = MlpParams(
        weights=weights, biases=biases, head=head, input_scale=input_scale
    )
    opt = OptimizerState(
        sq_weights=sq_weights, sq_biases=sq_biases, lr=lr, decay=decay, eps=eps
    )
    return params, opt


def checkpoint_save(path, params: MlpParams, opt: OptimizerState) -> None:
    """Versioned binary checkpoint: text header + little-endian f8 arrays."""
    with open(path, "wb") as f:
        f.write(checkpoint_to_bytes(params, opt))


def checkpoint_load(path, expected_n: int | None = None):
    with open(path, "rb") as f:
        data = f.read()
    return checkpoint_from_bytes(data, expected_n=expected_n)


MODEL_MAGIC = "#kprl-model"
MODEL_VERSION = 1


def save_model(path, policy, value, policy_opt, value_opt, meta: dict) -> None:
    """Single-file container holding both nets plus run metadata."""
    pol = checkpoint_to_bytes(policy, policy_opt)
    val = checkpoint_to_bytes(value, value_opt)
    with open(path, "wb") as f:
        f.write(f"{MODEL_MAGIC} {MODEL_VERSION}\n".encode("ascii"))
        for k in sorted(meta):
            f.write(f"meta {k}={meta[k]}\n".encode("ascii"))
        f.write(f"policy {len(pol)}\n".encode("ascii"))
        f.write(pol)
        f.write(f"value {len(val)}\n".encode("ascii"))
        f.write(val)


def load_model(path, expected_n: int | None = None):
    with open(path, "rb") as f:
        data = f.read()
    first, _, rest = data.partition(b"\n")
    if not first.decode("ascii", "replace").startswith(f"{MODEL_MAGIC} {MODEL_VERSION}"):
        raise CheckpointFormatError("not a model file or unsupported version")
    meta = {}
    sections = {}
    while rest:
        line, _, rest = rest.partition(b"\n")
        text = line.decode("ascii", "replace")
        if text.startswith("meta "):
            k, _, v = text[5:].partition("=")
            meta[k] = v
            continue
        kind, _, size = text.partition(" ")
        if kind not in ("policy", "value"):
            raise CheckpointFormatError(f"unexpected model section {kind!r}")
        nbytes = int(size)
        if len(rest) < nbytes:
            raise CheckpointFormatError("truncated model file")
        sections[kind] = rest[:nbytes]
        rest = rest[nbytes:]
    if set(sections) != {"policy", "value"}:
        raise CheckpointFormatError("model file is missing a network section")
    policy, policy_opt = checkpoint_from_bytes(sections["policy"], expected_n)
    value, value_opt = checkpoint_from_bytes(sections["value"])
    return policy, value, policy_opt, value_opt, meta
