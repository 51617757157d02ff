"""Feed-forward tanh networks with exact gradients and input derivatives.

Everything here works on plain float64 numpy arrays.  A network is a list
of (weight, bias) pairs; weights for layer l have shape (n_{l+1}, n_l) and
the forward map is x -> W_L(tanh(... W_0 x + b_0 ...)) + b_L.

Two forward modes exist:

* value only, for inputs of any width, and
* value with first and second derivative w.r.t. a scalar input, obtained by
  propagating the triple (v, v', v'') through every layer.

The matching reverse passes give exact parameter gradients of any loss that
is expressed through per-sample adjoints of the forward outputs, including
losses that read the derivative channels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import ConfigError, NumericsError

Array = np.ndarray


class DerivTriple(NamedTuple):
    """Value and first/second derivative with respect to the scalar input."""

    value: float
    d1: float
    d2: float


@dataclass
class Mlp:
    """Parameters of a fully connected tanh network."""

    weights: list[Array]
    biases: list[Array]

    @property
    def layer_sizes(self) -> list[int]:
        return [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]

    @property
    def in_width(self) -> int:
        return self.weights[0].shape[1]

    @property
    def out_width(self) -> int:
        return self.weights[-1].shape[0]

    @property
    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))


def mlp_init(layer_sizes: Sequence[int], init_scale: float = 1.0, seed=0) -> Mlp:
    """Create a network with uniform(+-init_scale/sqrt(fan_in)) weights, zero biases.

    Deterministic for a given seed; seed may be anything accepted by
    numpy.random.default_rng.
    """
    sizes = list(layer_sizes)
    if len(sizes) < 2 or any(int(n) < 1 or int(n) != n for n in sizes):
        raise ConfigError(f"layer_sizes must be >=2 positive integers, got {sizes}")
    if not (init_scale > 0):
        raise ConfigError(f"init_scale must be positive, got {init_scale}")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        lim = init_scale / math.sqrt(fan_in)
        weights.append(rng.uniform(-lim, lim, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return Mlp(weights, biases)


def n_params(layer_sizes: Sequence[int]) -> int:
    """Parameter count for the given layer sizes without building the net."""
    return sum((a + 1) * b for a, b in zip(layer_sizes[:-1], layer_sizes[1:]))


# ---------------------------------------------------------------------------
# forward passes


def _as_batch(x: Array, width: int) -> Array:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        if width != 1:
            raise ConfigError(f"input width {width} needs 2-D batch, got 1-D")
        return x[:, None]
    if x.ndim == 2 and x.shape[1] == width:
        return x
    raise ConfigError(f"batch shape {x.shape} incompatible with input width {width}")


class ValueTape(NamedTuple):
    x: Array
    acts: list[Array]  # tanh outputs per hidden layer


class DerivTape(NamedTuple):
    x: Array
    acts: list[Array]   # tanh outputs a_k
    acts1: list[Array]  # first-derivative channel after activation
    acts2: list[Array]  # second-derivative channel after activation
    pre1: list[Array]   # first-derivative channel before activation
    pre2: list[Array]   # second-derivative channel before activation


def forward_value(net: Mlp, x: Array, tape: bool = False):
    """Batched value-only forward pass; returns (B,) outputs.

    With tape=True also returns the intermediates needed by backward_value.
    """
    a = _as_batch(x, net.in_width)
    x0 = a
    acts = []
    last = len(net.weights) - 1
    for l, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = a @ w.T + b
        if l < last:
            a = np.tanh(z)
            if tape:
                acts.append(a)
        else:
            a = z
    y = a[:, 0]
    if tape:
        return y, ValueTape(x0, acts)
    return y


def forward_derivs(net: Mlp, x: Array, tape: bool = False):
    """Forward pass propagating (value, d/dx, d2/dx2); scalar input only.

    Returns three (B,) arrays, plus the tape when requested.
    """
    if net.in_width != 1:
        raise ConfigError("derivative propagation requires input width 1")
    a = _as_batch(x, 1)
    x0 = a
    b_sz = a.shape[0]
    acts, acts1, acts2, pre1, pre2 = [], [], [], [], []
    last = len(net.weights) - 1
    w0 = net.weights[0]
    z = a @ w0.T + net.biases[0]
    z1 = np.broadcast_to(w0[:, 0], (b_sz, w0.shape[0]))
    z2 = np.zeros_like(z)
    for l in range(1, len(net.weights) + 1):
        # activation on (z, z1, z2)
        if l <= last:
            a = np.tanh(z)
            s1 = 1.0 - a * a
            s2 = -2.0 * a * s1
            a1 = s1 * z1
            a2 = s2 * z1 * z1 + s1 * z2
            if tape:
                acts.append(a)
                acts1.append(a1)
                acts2.append(a2)
                pre1.append(z1)
                pre2.append(z2)
        if l > last:
            break
        w, b = net.weights[l], net.biases[l]
        z = a @ w.T + b
        z1 = a1 @ w.T
        z2 = a2 @ w.T
    y, y1, y2 = z[:, 0], z1[:, 0], z2[:, 0]
    if tape:
        return (y, y1, y2), DerivTape(x0, acts, acts1, acts2, pre1, pre2)
    return y, y1, y2


def forward_with_input_derivs(net: Mlp, x: float) -> DerivTriple:
    """Value, first and second input derivative of a scalar->scalar net at x."""
    if net.out_width != 1:
        raise ConfigError("forward_with_input_derivs needs output width 1")
    y, y1, y2 = forward_derivs(net, np.array([float(x)]))
    out = DerivTriple(float(y[0]), float(y1[0]), float(y2[0]))
    if not all(math.isfinite(v) for v in out):
        raise NumericsError(f"non-finite network output at x={x}")
    return out


# ---------------------------------------------------------------------------
# reverse passes


def backward_value(net: Mlp, tape: ValueTape, gy: Array) -> list[tuple[Array, Array]]:
    """Parameter gradients for a value-only forward; gy is (B,) dL/dy."""
    grads: list = [None] * len(net.weights)
    gz = np.asarray(gy, dtype=float)[:, None]
    for l in range(len(net.weights) - 1, 0, -1):
        a = tape.acts[l - 1]
        grads[l] = (gz.T @ a, gz.sum(axis=0))
        ga = gz @ net.weights[l]
        gz = ga * (1.0 - a * a)
    grads[0] = (gz.T @ tape.x, gz.sum(axis=0))
    return grads


def backward_derivs(
    net: Mlp, tape: DerivTape, gy: Array, gy1: Array | None, gy2: Array | None
) -> list[tuple[Array, Array]]:
    """Parameter gradients for a derivative-propagating forward.

    gy, gy1, gy2 are (B,) adjoints of the value/d1/d2 output channels; the
    derivative adjoints may be None when the loss ignores those channels.
    """
    b_sz = tape.x.shape[0]
    zeros = np.zeros((b_sz, 1))
    gz = np.asarray(gy, dtype=float)[:, None]
    gz1 = zeros if gy1 is None else np.asarray(gy1, dtype=float)[:, None]
    gz2 = zeros if gy2 is None else np.asarray(gy2, dtype=float)[:, None]
    grads: list = [None] * len(net.weights)
    for l in range(len(net.weights) - 1, 0, -1):
        a, a1, a2 = tape.acts[l - 1], tape.acts1[l - 1], tape.acts2[l - 1]
        z1, z2 = tape.pre1[l - 1], tape.pre2[l - 1]
        w = net.weights[l]
        grads[l] = (gz.T @ a + gz1.T @ a1 + gz2.T @ a2, gz.sum(axis=0))
        ga = gz @ w
        ga1 = gz1 @ w
        ga2 = gz2 @ w
        # adjoint of tanh acting on the three channels
        s1 = 1.0 - a * a
        s2 = -2.0 * a * s1
        s3 = s1 * (4.0 * a * a - 2.0 * s1)
        gz = ga * s1 + ga1 * s2 * z1 + ga2 * (s3 * z1 * z1 + s2 * z2)
        gz1 = ga1 * s1 + ga2 * (2.0 * s2 * z1)
        gz2 = ga2 * s1
    # first layer: z = X W0^T + b0, z1 = W0[:, 0], z2 = 0
    dw0 = gz.T @ tape.x
    dw0[:, 0] += gz1.sum(axis=0)
    grads[0] = (dw0, gz.sum(axis=0))
    return grads


def param_gradient(
    net: Mlp,
    xs: Array,
    loss_fn: Callable,
    with_input_derivs: bool = False,
) -> tuple[float, Array]:
    """Exact reverse-mode gradient of a batch loss w.r.t. every weight and bias.

    loss_fn receives the forward outputs -- (y,) in value mode, (y, y1, y2)
    in derivative mode -- and must return (loss, adjoints) where adjoints are
    the per-sample partial derivatives of the loss with respect to each
    output channel, in the same order.  Returns (loss, flat gradient).
    """
    if with_input_derivs:
        (y, y1, y2), tape = forward_derivs(net, xs, tape=True)
        loss, (gy, gy1, gy2) = loss_fn(y, y1, y2)
        grads = backward_derivs(net, tape, gy, gy1, gy2)
    else:
        y, tape = forward_value(net, xs, tape=True)
        loss, (gy,) = loss_fn(y)
        grads = backward_value(net, tape, gy)
    flat = pack_grads(grads)
    if not np.all(np.isfinite(flat)):
        raise NumericsError("non-finite entries in parameter gradient")
    return float(loss), flat


# ---------------------------------------------------------------------------
# flat parameter vectors


def flatten_params(net: Mlp) -> Array:
    parts = []
    for w, b in zip(net.weights, net.biases):
        parts.append(w.ravel())
        parts.append(b)
    return np.concatenate(parts)


def unflatten_params(theta: Array, layer_sizes: Sequence[int]) -> Mlp:
    """View a flat vector as an Mlp; the returned arrays share theta's memory."""
    weights, biases = [], []
    off = 0
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        w = theta[off : off + fan_in * fan_out].reshape(fan_out, fan_in)
        off += fan_in * fan_out
        b = theta[off : off + fan_out]
        off += fan_out
        weights.append(w)
        biases.append(b)
    if off != theta.size:
        raise ConfigError("flat vector length does not match layer sizes")
    return Mlp(weights, biases)


def pack_grads(grads: Sequence[tuple[Array, Array]]) -> Array:
    parts = []
    for dw, db in grads:
        parts.append(np.asarray(dw).ravel())
        parts.append(np.asarray(db).ravel())
    return np.concatenate(parts)


def weight_reg(nets: Sequence[Mlp]) -> float:
    """Sum of squared Frobenius norms of all weight matrices (biases excluded)."""
    return float(sum((w * w).sum() for net in nets for w in net.weights))


def weight_reg_grads(net: Mlp, beta: float) -> list[tuple[Array, Array]]:
    """Gradient contribution of beta * weight_reg for one net."""
    return [(2.0 * beta * w, np.zeros_like(b)) for w, b in zip(net.weights, net.biases)]


# ---------------------------------------------------------------------------
# Adam


@dataclass
class AdamState:
    """First/second moment state of the Adam optimizer for one flat vector."""

    m: Array
    v: Array
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0

    @classmethod
    def fresh(cls, n: int, lr: float, beta1: float = 0.9, beta2: float = 0.999,
              eps: float = 1e-8) -> "AdamState":
        if not (lr > 0):
            raise ConfigError(f"learning rate must be positive, got {lr}")
        return cls(np.zeros(n), np.zeros(n), lr, beta1, beta2, eps)


def adam_step(state: AdamState, theta: Array, grad: Array) -> None:
    """One Adam update, in place on theta and state (single writer)."""
    if theta.shape != grad.shape or theta.shape != state.m.shape:
        raise ConfigError("parameter/gradient/state length mismatch")
    state.step += 1
    state.m *= state.beta1
    state.m += (1.0 - state.beta1) * grad
    state.v *= state.beta2
    state.v += (1.0 - state.beta2) * grad * grad
    mhat = state.m / (1.0 - state.beta1 ** state.step)
    vhat = state.v / (1.0 - state.beta2 ** state.step)
    theta -= state.lr * mhat / (np.sqrt(vhat) + state.eps)


@dataclass
class TrainConfig:
    """Shared training knobs.

    beta_reg is the weight-regularization coefficient; init_scale is the
    initialization scale applied to every layer of freshly created subnets.
    """

    epochs: int
    batch_size: int
    lr: float = 0.002
    seed: int = 0
    beta_reg: float = 0.0
    init_scale: float = 1.0

    def __post_init__(self):
        if self.epochs < 0 or self.batch_size < 1:
            raise ConfigError("epochs must be >=0 and batch_size >=1")
        if not (self.lr > 0) or self.beta_reg < 0 or not (self.init_scale > 0):
            raise ConfigError("lr/init_scale must be positive, beta_reg >= 0")
