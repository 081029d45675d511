# network.py
#
# The trial-function network: a small multilayer perceptron r -> f(r) with
# two softplus hidden layers and an affine output (no output activation, so
# the sign structure of excited states stays representable).  Two layouts:
#
#   fully_connected : one head, 1 -> h -> h -> 1
#   split_two_head  : two disjoint heads sharing only the input; head 0
#                     feeds the large component, head 1 the small one.
#
# Everything is plain numpy; all mesh points go through in one batch.

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ARCHITECTURES = ("fully_connected", "split_two_head")

# head = list of (W, b); params.heads = list of heads
Layer = tuple[np.ndarray, np.ndarray]


@dataclass
class NetParams:
    architecture: str
    heads: list[list[Layer]] = field(repr=False)

    def __post_init__(self):
        if self.architecture not in ARCHITECTURES:
            raise ValueError(f"unknown architecture {self.architecture!r}")

    def n_heads(self) -> int:
        return len(self.heads)

    def flat_arrays(self) -> list[np.ndarray]:
        """All parameter arrays in a fixed traversal order (shared with grads)."""
        out = []
        for head in self.heads:
            for W, b in head:
                out.append(W)
                out.append(b)
        return out

    def copy(self) -> "NetParams":
        return NetParams(self.architecture,
                         [[(W.copy(), b.copy()) for W, b in head] for head in self.heads])


def init_params(seed: int, architecture: str = "fully_connected",
                hidden: int = 16) -> NetParams:
    """Glorot-uniform weights, zero biases; deterministic for a given seed."""
    if architecture not in ARCHITECTURES:
        raise ValueError(f"unknown architecture {architecture!r}")
    rng = np.random.default_rng(seed)
    n_heads = 1 if architecture == "fully_connected" else 2
    heads = []
    for _ in range(n_heads):
        dims = [1, hidden, hidden, 1]
        layers = []
        for nin, nout in zip(dims[:-1], dims[1:]):
            scale = np.sqrt(6.0 / (nin + nout))
            W = rng.uniform(-scale, scale, size=(nout, nin))
            b = np.zeros(nout)
            layers.append((W, b))
        heads.append(layers)
    return NetParams(architecture, heads)


def softplus(z: np.ndarray) -> np.ndarray:
    # overflow-safe: max(z, 0) + log1p(exp(-|z|))
    return np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))


def logistic(z: np.ndarray) -> np.ndarray:
    """softplus'(z), computed without overflow on either tail."""
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _head_forward(layers: list[Layer], r: np.ndarray, keep_cache: bool):
    x = np.atleast_2d(np.asarray(r, dtype=float))     # (1, N)
    cache = []
    act = x
    last = len(layers) - 1
    for i, (W, b) in enumerate(layers):
        z = W @ act + b[:, None]
        if keep_cache:
            cache.append((act, z))
        act = z if i == last else softplus(z)
    return act.ravel(), cache


def forward(params: NetParams, r: np.ndarray) -> np.ndarray:
    """Network output at every mesh point, one batch.

    Returns shape (N,) for the fully connected layout and (2, N) for the
    split layout (row 0 the F-head, row 1 the G-head).
    """
    outs = [_head_forward(head, r, keep_cache=False)[0] for head in params.heads]
    return outs[0] if params.n_heads() == 1 else np.stack(outs)


def forward_with_cache(params: NetParams, r: np.ndarray):
    """Forward pass keeping the per-layer activations needed by backward()."""
    outs, caches = [], []
    for head in params.heads:
        out, cache = _head_forward(head, r, keep_cache=True)
        outs.append(out)
        caches.append(cache)
    return outs, caches


def backward(params: NetParams, caches, d_outs) -> list[np.ndarray]:
    """Gradients for every parameter array, ordered as flat_arrays().

    d_outs: one (N,) cotangent per head, d(loss)/d(head output).
    """
    grads: list[np.ndarray] = []
    for head, cache, dout in zip(params.heads, caches, d_outs):
        head_grads = [None] * (2 * len(head))
        delta = np.atleast_2d(dout)                  # (1, N)
        for i in range(len(head) - 1, -1, -1):
            W, _b = head[i]
            act_in, z = cache[i]
            if i != len(head) - 1:
                delta = delta * logistic(z)
            head_grads[2 * i] = delta @ act_in.T
            head_grads[2 * i + 1] = delta.sum(axis=1)
            if i > 0:
                delta = W.T @ delta
        grads.extend(head_grads)
    return grads


def save_params(params: NetParams, path) -> None:
    """Text checkpoint: architecture, head count, dims, row-major values."""
    with open(path, "w") as fh:
        fh.write(f"{params.architecture}\n{params.n_heads()}\n")
        for head in params.heads:
            dims = [head[0][0].shape[1]] + [W.shape[0] for W, _ in head]
            fh.write(" ".join(str(d) for d in dims) + "\n")
            for W, b in head:
                for v in np.concatenate([W.ravel(), b]):
                    fh.write(f"{v:.17g}\n")


def load_params(path) -> NetParams:
    with open(path) as fh:
        lines = iter(fh.read().split("\n"))
    architecture = next(lines).strip()
    n_heads = int(next(lines))
    heads = []
    for _ in range(n_heads):
        dims = [int(t) for t in next(lines).split()]
        layers = []
        for nin, nout in zip(dims[:-1], dims[1:]):
            vals = np.array([float(next(lines)) for _ in range(nout * nin + nout)])
            layers.append((vals[: nout * nin].reshape(nout, nin), vals[nout * nin:]))
        heads.append(layers)
    return NetParams(architecture, heads)
