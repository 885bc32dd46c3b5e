"""Dense feed-forward networks with analytic backpropagation and Adam.

Weights follow the ``[out, in]`` convention and inputs are row batches, so a
layer computes ``a @ W.T + b``.  Single vectors are accepted everywhere and
promoted to a one-row batch.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

__all__ = [
    "Activation",
    "LEAKY_RELU",
    "SIGMOID",
    "TANH",
    "IDENTITY",
    "Layer",
    "Mlp",
    "Tape",
    "StaleTapeError",
    "AdamState",
    "init_mlp",
    "forward",
    "backward",
    "adam_init",
    "adam_step",
    "save_mlp",
    "load_mlp",
]

_KINDS = ("leaky_relu", "sigmoid", "tanh", "identity")


class StaleTapeError(RuntimeError):
    """Raised when a tape is replayed against parameters that have changed."""


@dataclass(frozen=True)
class Activation:
    kind: str
    slope: float = 0.2

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown activation {self.kind!r}")
        if self.kind == "leaky_relu" and not 0.0 < self.slope < 1.0:
            raise ValueError("leaky ReLU slope must lie in (0, 1)")

    def __call__(self, pre: np.ndarray) -> np.ndarray:
        if self.kind == "leaky_relu":
            return np.where(pre > 0, pre, self.slope * pre)
        if self.kind == "sigmoid":
            return _sigmoid(pre)
        if self.kind == "tanh":
            return np.tanh(pre)
        return pre

    def derivative(self, pre: np.ndarray, out: np.ndarray) -> np.ndarray:
        if self.kind == "leaky_relu":
            return np.where(pre > 0, 1.0, self.slope)
        if self.kind == "sigmoid":
            return out * (1.0 - out)
        if self.kind == "tanh":
            return 1.0 - out * out
        return np.ones_like(pre)

    def to_json(self) -> dict:
        if self.kind == "leaky_relu":
            return {"kind": self.kind, "slope": self.slope}
        return {"kind": self.kind}

    @classmethod
    def from_json(cls, obj) -> "Activation":
        if isinstance(obj, str):
            return cls(obj)
        return cls(obj["kind"], obj.get("slope", 0.2))


LEAKY_RELU = Activation("leaky_relu", 0.2)
SIGMOID = Activation("sigmoid")
TANH = Activation("tanh")
IDENTITY = Activation("identity")


def _sigmoid(x):
    # split by sign so exp never overflows
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@dataclass
class Layer:
    weight: np.ndarray  # [out, in]
    bias: np.ndarray  # [out]
    activation: Activation


@dataclass
class Mlp:
    layers: list[Layer]
    seed: int | None = None
    version: int = field(default=0, compare=False)

    def __post_init__(self):
        if not self.layers:
            raise ValueError("an Mlp needs at least one layer")
        for k, layer in enumerate(self.layers):
            w, b = layer.weight, layer.bias
            if w.ndim != 2 or b.shape != (w.shape[0],):
                raise ValueError(f"layer {k}: weight {w.shape} / bias {b.shape} mismatch")
            if k and w.shape[1] != self.layers[k - 1].weight.shape[0]:
                raise ValueError(f"layer {k} input dim does not chain with layer {k - 1}")

    @property
    def input_dim(self) -> int:
        return self.layers[0].weight.shape[1]

    @property
    def output_dim(self) -> int:
        return self.layers[-1].weight.shape[0]

    @property
    def layer_sizes(self) -> list[int]:
        return [self.input_dim] + [layer.weight.shape[0] for layer in self.layers]

    @property
    def activations(self) -> list[Activation]:
        return [layer.activation for layer in self.layers]

    @property
    def n_params(self) -> int:
        return sum(layer.weight.size + layer.bias.size for layer in self.layers)

    def get_flat(self) -> np.ndarray:
        """Parameters as one vector: W (row-major) then b, layer by layer."""
        parts = []
        for layer in self.layers:
            parts.append(layer.weight.ravel())
            parts.append(layer.bias)
        return np.concatenate(parts)

    def set_flat(self, flat: np.ndarray) -> None:
        flat = np.asarray(flat, dtype=np.float64)
        if flat.shape != (self.n_params,):
            raise ValueError(f"expected {self.n_params} parameters, got {flat.shape}")
        i = 0
        for layer in self.layers:
            n = layer.weight.size
            layer.weight = flat[i:i + n].reshape(layer.weight.shape).copy()
            i += n
            n = layer.bias.size
            layer.bias = flat[i:i + n].copy()
            i += n
        self.touch()

    def touch(self) -> None:
        """Mark parameters as modified so outstanding tapes go stale."""
        self.version += 1

    def copy(self) -> "Mlp":
        layers = [Layer(l.weight.copy(), l.bias.copy(), l.activation) for l in self.layers]
        return Mlp(layers, self.seed)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return forward(self, x)[0]


@dataclass
class Tape:
    """Cached pre-activations and outputs from one forward pass."""
    inputs: list[np.ndarray]  # input to each layer
    pre: list[np.ndarray]
    out: list[np.ndarray]
    net_id: int
    version: int
    squeeze: bool


def init_mlp(seed: int, layer_sizes: Sequence[int],
             activations: Sequence[Activation]) -> Mlp:
    """Glorot-uniform weights, zero biases, fully determined by ``seed``."""
    layer_sizes = [int(s) for s in layer_sizes]
    if len(layer_sizes) < 2:
        raise ValueError("layer_sizes needs at least an input and an output size")
    if len(activations) != len(layer_sizes) - 1:
        raise ValueError(
            f"{len(layer_sizes) - 1} layers but {len(activations)} activations")
    if any(s < 1 for s in layer_sizes):
        raise ValueError("layer sizes must be positive")
    rng = np.random.default_rng(seed)
    layers = []
    for fan_in, fan_out, act in zip(layer_sizes[:-1], layer_sizes[1:], activations):
        a = np.sqrt(6.0 / (fan_in + fan_out))
        w = rng.uniform(-a, a, size=(fan_out, fan_in))
        layers.append(Layer(w, np.zeros(fan_out), act))
    return Mlp(layers, seed)


def forward(net: Mlp, x: np.ndarray) -> tuple[np.ndarray, Tape]:
    x = np.asarray(x, dtype=np.float64)
    squeeze = x.ndim == 1
    a = np.atleast_2d(x)
    if a.ndim != 2 or a.shape[1] != net.input_dim:
        raise ValueError(f"input has shape {x.shape}, network expects {net.input_dim} features")
    inputs, pres, outs = [], [], []
    for layer in net.layers:
        inputs.append(a)
        z = a @ layer.weight.T + layer.bias
        a = layer.activation(z)
        pres.append(z)
        outs.append(a)
    tape = Tape(inputs, pres, outs, id(net), net.version, squeeze)
    return (a[0] if squeeze else a), tape


def backward(net: Mlp, tape: Tape, dloss_dy: np.ndarray, *,
             param_grads: bool = True):
    """Backpropagate ``dloss_dy`` through the cached pass.

    Returns ``(grads, dloss_dx)`` where ``grads`` is a flat vector aligned with
    :meth:`Mlp.get_flat` (summed over the batch), or ``None`` when
    ``param_grads`` is false.
    """
    if tape.net_id != id(net) or tape.version != net.version:
        raise StaleTapeError("network parameters changed since the forward pass")
    g = np.asarray(dloss_dy, dtype=np.float64)
    g = g.reshape(tape.out[-1].shape)
    grads = [] if param_grads else None
    for k in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[k]
        g = g * layer.activation.derivative(tape.pre[k], tape.out[k])
        if param_grads:
            grads.append(g.sum(axis=0))
            grads.append((g.T @ tape.inputs[k]).ravel())
        g = g @ layer.weight
    dx = g[0] if tape.squeeze else g
    if param_grads:
        grads = np.concatenate(grads[::-1])
    return grads, dx


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ValueError("Adam betas must lie in (0, 1)")
        if self.m.shape != self.v.shape:
            raise ValueError("moment accumulators differ in shape")


def adam_init(shape, lr: float = 1e-4, beta1: float = 0.9, beta2: float = 0.999,
              eps: float = 1e-8) -> AdamState:
    return AdamState(np.zeros(shape), np.zeros(shape), 0, lr, beta1, beta2, eps)


def adam_step(state: AdamState, params: np.ndarray,
              grads: np.ndarray) -> tuple[np.ndarray, AdamState]:
    """One bias-corrected Adam update.  Pure: inputs are not modified."""
    params = np.asarray(params, dtype=np.float64)
    grads = np.asarray(grads, dtype=np.float64)
    if params.shape != grads.shape or params.shape != state.m.shape:
        raise ValueError(
            f"shape mismatch: params {params.shape}, grads {grads.shape}, state {state.m.shape}")
    t = state.t + 1
    m = state.beta1 * state.m + (1 - state.beta1) * grads
    v = state.beta2 * state.v + (1 - state.beta2) * grads * grads
    m_hat = m / (1 - state.beta1 ** t)
    v_hat = v / (1 - state.beta2 ** t)
    new = params - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return new, AdamState(m, v, t, state.lr, state.beta1, state.beta2, state.eps)


def mlp_to_json(net: Mlp) -> dict:
    return {
        "layer_sizes": net.layer_sizes,
        "activations": [a.to_json() for a in net.activations],
        "params": net.get_flat().tolist(),
        "seed": net.seed,
    }


def mlp_from_json(obj: dict) -> Mlp:
    acts = [Activation.from_json(a) for a in obj["activations"]]
    net = init_mlp(0, obj["layer_sizes"], acts)
    net.set_flat(np.array(obj["params"], dtype=np.float64))
    net.seed = obj.get("seed")
    net.version = 0
    return net


def save_mlp(net: Mlp, path) -> None:
    # json writes floats with repr, which round-trips float64 exactly
    Path(path).write_text(json.dumps(mlp_to_json(net)))


def load_mlp(path) -> Mlp:
    return mlp_from_json(json.loads(Path(path).read_text()))
