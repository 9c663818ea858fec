"""Plain-numpy MLPs with manual backprop (tanh hidden layers, linear output)."""

from __future__ import annotations

import numpy as np


def orthogonal(rng: np.random.Generator, shape: tuple[int, int], gain: float):
    a = rng.standard_normal(shape)
    u, _, vt = np.linalg.svd(a, full_matrices=False)
    q = u if u.shape == shape else vt
    return gain * q


def init_mlp(rng, sizes, out_gain):
    """Orthogonal weights (sqrt(2) hidden, out_gain output), zero biases."""
    layers = []
    for i in range(len(sizes) - 1):
        gain = np.sqrt(2.0) if i < len(sizes) - 2 else out_gain
        W = orthogonal(rng, (sizes[i], sizes[i + 1]), gain)
        b = np.zeros(sizes[i + 1])
        layers.append((W, b))
    return layers


def mlp_forward(layers, x):
    """Returns (output, activations) with activations[i] the input to layer i."""
    acts = [x]
    h = x
    for i, (W, b) in enumerate(layers):
        z = h @ W + b
        h = np.tanh(z) if i < len(layers) - 1 else z
        acts.append(h)
    return h, acts


def mlp_backward(layers, acts, dout):
    """Gradients for each layer and the input, given dL/doutput.

    `acts` comes from mlp_forward on the same input batch. Hidden activations
    are tanh outputs, so dz = da * (1 - a^2).
    """
    grads = [None] * len(layers)
    delta = dout
    for i in range(len(layers) - 1, -1, -1):
        W, _ = layers[i]
        a_in = acts[i]
        gW = a_in.T @ delta
        gb = delta.sum(axis=0)
        grads[i] = (gW, gb)
        if i > 0:
            da = delta @ W.T
            delta = da * (1.0 - acts[i] ** 2)
    return grads
