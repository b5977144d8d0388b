"""Small dense networks with explicit reverse-mode gradients.

Everything here is plain numpy over float64.  Networks are feed-forward
stacks with softplus hidden units and either a linear or tanh output head;
backward passes return exact gradients with respect to both weights and
inputs.  ``RandomBasis`` holds a bank of frozen single-hidden-layer maps
used as fixed feature functions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def softplus(x: np.ndarray) -> np.ndarray:
    """log(1 + e^x) computed without overflow or underflow."""
    x = np.asarray(x, dtype=float)
    return np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))


def sigmoid(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    t = np.exp(-np.abs(x))
    return np.where(x >= 0.0, 1.0 / (1.0 + t), t / (1.0 + t))


def logsumexp(x: np.ndarray, axis=-1) -> np.ndarray:
    m = np.max(x, axis=axis, keepdims=True)
    out = m + np.log(np.sum(np.exp(x - m), axis=axis, keepdims=True))
    return np.squeeze(out, axis=axis)


def stable_softmax(x: np.ndarray, axis=-1) -> np.ndarray:
    z = x - np.max(x, axis=axis, keepdims=True)
    e = np.exp(z)
    return e / np.sum(e, axis=axis, keepdims=True)


ACTIVATIONS = ("softplus", "tanh", "identity")


def _activate(pre: np.ndarray, kind: str) -> np.ndarray:
    if kind == "softplus":
        return softplus(pre)
    if kind == "tanh":
        return np.tanh(pre)
    return pre


def _activation_grad(pre: np.ndarray, post: np.ndarray, kind: str) -> np.ndarray:
    if kind == "softplus":
        return sigmoid(pre)
    if kind == "tanh":
        return 1.0 - post**2
    return np.ones_like(pre)


class DenseNet:
    """Fully-connected net; weights list of (W, b) with W shaped (out, in)."""

    def __init__(self, sizes, rng=None, hidden_activation="softplus", output_activation="identity"):
        if len(sizes) < 2:
            raise ValueError("need at least input and output sizes")
        if hidden_activation not in ACTIVATIONS or output_activation not in ACTIVATIONS:
            raise ValueError("unknown activation")
        self.sizes = [int(s) for s in sizes]
        self.hidden_activation = hidden_activation
        self.output_activation = output_activation
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for fan_in, fan_out in zip(self.sizes[:-1], self.sizes[1:]):
            if rng is None:
                W = np.zeros((fan_out, fan_in))
            else:
                W = rng.standard_normal((fan_out, fan_in)) / np.sqrt(fan_in)
            self.weights.append(W)
            self.biases.append(np.zeros(fan_out))

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    def _layer_activation(self, i: int) -> str:
        return self.output_activation if i == self.n_layers - 1 else self.hidden_activation

    def forward(self, x: np.ndarray) -> np.ndarray:
        y, _ = self.forward_cache(x)
        return y

    def forward_cache(self, x: np.ndarray):
        """Forward pass keeping per-layer inputs and pre-activations.

        Accepts a single input (d,) or a batch (B, d); the output matches.
        """
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        h = x[None, :] if single else x
        if h.shape[1] != self.sizes[0]:
            raise ValueError(f"input dim {h.shape[1]} != {self.sizes[0]}")
        cache = []
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            pre = h @ W.T + b
            post = _activate(pre, self._layer_activation(i))
            cache.append((h, pre, post))
            h = post
        return (h[0] if single else h), (cache, single)

    def backward(self, cache_token, upstream: np.ndarray):
        """Gradients of sum(upstream * output) w.r.t. weights and input.

        Returns ``(weight_grads, bias_grads, input_grad)`` with weight grads
        summed over the batch, input grad per sample.
        """
        cache, single = cache_token
        up = np.asarray(upstream, dtype=float)
        delta = up[None, :] if single else up
        if delta.shape != cache[-1][2].shape:
            raise ValueError("upstream shape mismatch")
        w_grads = [None] * self.n_layers
        b_grads = [None] * self.n_layers
        for i in range(self.n_layers - 1, -1, -1):
            h_in, pre, post = cache[i]
            delta = delta * _activation_grad(pre, post, self._layer_activation(i))
            w_grads[i] = delta.T @ h_in
            b_grads[i] = delta.sum(axis=0)
            delta = delta @ self.weights[i]
        return w_grads, b_grads, (delta[0] if single else delta)

    def grad_input(self, x: np.ndarray, upstream: np.ndarray) -> np.ndarray:
        _, token = self.forward_cache(x)
        return self.backward(token, upstream)[2]

    # -- flat parameter views (optimizers, serialization) -------------------

    def n_params(self) -> int:
        return sum(W.size + b.size for W, b in zip(self.weights, self.biases))

    def get_flat(self) -> np.ndarray:
        return np.concatenate([np.concatenate([W.ravel(), b]) for W, b in zip(self.weights, self.biases)])

    def set_flat(self, flat: np.ndarray) -> None:
        flat = np.asarray(flat, dtype=float)
        k = 0
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            self.weights[i] = flat[k : k + W.size].reshape(W.shape).copy()
            k += W.size
            self.biases[i] = flat[k : k + b.size].copy()
            k += b.size
        if k != flat.size:
            raise ValueError("flat vector length mismatch")

    def grads_flat(self, w_grads, b_grads) -> np.ndarray:
        return np.concatenate([np.concatenate([gW.ravel(), gb]) for gW, gb in zip(w_grads, b_grads)])

    def clone(self) -> "DenseNet":
        other = DenseNet(self.sizes, rng=None, hidden_activation=self.hidden_activation,
                         output_activation=self.output_activation)
        other.set_flat(self.get_flat())
        return other

    def to_arrays(self) -> dict[str, np.ndarray]:
        out = {}
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            out[f"W{i}"] = W
            out[f"b{i}"] = b
        return out

    def meta(self) -> dict:
        return {
            "sizes": self.sizes,
            "hidden_activation": self.hidden_activation,
            "output_activation": self.output_activation,
        }

    @staticmethod
    def from_arrays(meta: dict, arrays: dict[str, np.ndarray]) -> "DenseNet":
        net = DenseNet(meta["sizes"], rng=None, hidden_activation=meta["hidden_activation"],
                       output_activation=meta["output_activation"])
        for i in range(net.n_layers):
            net.weights[i] = np.asarray(arrays[f"W{i}"], dtype=float).copy()
            net.biases[i] = np.asarray(arrays[f"b{i}"], dtype=float).copy()
        return net


@dataclass(frozen=True)
class RandomBasis:
    """Bank of frozen random shallow networks used as feature functions.

    Feature j is c_j . softplus(V_j x + b_j).  Hidden weights are drawn
    N(0, 1/fan_in), readout weights N(0, 1/hidden); hidden biases are
    N(0, 1) so the nonlinearities bend at varied input locations.
    """

    V: np.ndarray  # (n_basis, hidden, d_in)
    b: np.ndarray  # (n_basis, hidden)
    C: np.ndarray  # (n_basis, hidden)

    def __post_init__(self):
        if self.V.ndim != 3 or self.b.shape != self.V.shape[:2] or self.C.shape != self.b.shape:
            raise ValueError("inconsistent basis arrays")

    @staticmethod
    def create(d_in: int, n_basis: int, hidden: int, rng: np.random.Generator) -> "RandomBasis":
        V = rng.standard_normal((n_basis, hidden, d_in)) / np.sqrt(d_in)
        b = rng.standard_normal((n_basis, hidden))
        C = rng.standard_normal((n_basis, hidden)) / np.sqrt(hidden)
        return RandomBasis(V, b, C)

    @property
    def n_basis(self) -> int:
        return self.V.shape[0]

    @property
    def d_in(self) -> int:
        return self.V.shape[2]

    def flat_weights(self) -> tuple[np.ndarray, np.ndarray]:
        """(n_basis*hidden, d_in) weight matrix and matching bias vector."""
        n, h, d = self.V.shape
        return self.V.reshape(n * h, d), self.b.reshape(n * h)

    def eval(self, x: np.ndarray) -> np.ndarray:
        """Features for one input (n_basis,) or a batch (B, n_basis)."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        X = x[None, :] if single else x
        V2, b2 = self.flat_weights()
        act = softplus(X @ V2.T + b2)
        feats = np.einsum("bnh,nh->bn", act.reshape(X.shape[0], *self.b.shape), self.C)
        return feats[0] if single else feats

    def grad_x(self, x: np.ndarray, upstream: np.ndarray) -> np.ndarray:
        """Gradient of sum(upstream * features) w.r.t. a single input x."""
        x = np.asarray(x, dtype=float)
        V2, b2 = self.flat_weights()
        s = sigmoid(V2 @ x + b2)
        wc = (np.asarray(upstream, dtype=float)[:, None] * self.C).reshape(-1)
        return (wc * s) @ V2

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        """d(features)/dx for a single input, shape (n_basis, d_in)."""
        x = np.asarray(x, dtype=float)
        V2, b2 = self.flat_weights()
        s = sigmoid(V2 @ x + b2).reshape(self.b.shape)
        return np.einsum("nh,nhd->nd", self.C * s, self.V)

    def to_arrays(self, prefix: str) -> dict[str, np.ndarray]:
        return {f"{prefix}V": self.V, f"{prefix}b": self.b, f"{prefix}C": self.C}

    @staticmethod
    def from_arrays(prefix: str, arrays: dict[str, np.ndarray]) -> "RandomBasis":
        return RandomBasis(
            np.asarray(arrays[f"{prefix}V"], dtype=float),
            np.asarray(arrays[f"{prefix}b"], dtype=float),
            np.asarray(arrays[f"{prefix}C"], dtype=float),
        )


def check_gradient(f, x: np.ndarray, step: float = 1e-5) -> float:
    """Worst relative disagreement between f's gradient and central differences.

    ``f(x)`` must return ``(value, gradient)``.  Steps are scaled per
    component by max(1, |x_i|).
    """
    x = np.asarray(x, dtype=float)
    _, grad = f(x)
    grad = np.asarray(grad, dtype=float)
    num = np.empty_like(x)
    for i in range(x.size):
        h = step * max(1.0, abs(x[i]))
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        num[i] = (f(xp)[0] - f(xm)[0]) / (2.0 * h)
    denom = np.maximum(np.maximum(np.abs(grad), np.abs(num)), 1e-8)
    return float(np.max(np.abs(grad - num) / denom))


class Adam:
    """Adam on a flat parameter vector; used by the actor-critic trainer."""

    def __init__(self, n: int, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = np.zeros(n)
        self.v = np.zeros(n)
        self.t = 0

    def step(self, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
        self.t += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * grad**2
        mhat = self.m / (1.0 - self.beta1**self.t)
        vhat = self.v / (1.0 - self.beta2**self.t)
        return params - self.lr * mhat / (np.sqrt(vhat) + self.eps)
