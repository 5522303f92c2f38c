#!/usr/bin/env python3
"""Verify the hand-written gradients against central finite differences."""

import numpy as np

from atmarl.nn import (
    DenseLayer,
    GruCell,
    dense_backward,
    dense_forward,
    gru_sequence_backward,
    gru_sequence_forward,
)


def finite_difference(fn, arr, h=1e-5):
    grad = np.zeros_like(arr)
    it = np.nditer(arr, flags=["multi_index"])
    while not it.finished:
        idx = it.multi_index
        orig = arr[idx]
        arr[idx] = orig + h
        plus = fn()
        arr[idx] = orig - h
        minus = fn()
        arr[idx] = orig
        grad[idx] = (plus - minus) / (2 * h)
        it.iternext()
    return grad


def rel_err(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(a), np.linalg.norm(b), 1e-12)


def main():
    rng = np.random.default_rng(0)

    print("Dense layer, tanh, 3 -> 4:")
    layer = DenseLayer.create(rng, 3, 4)
    x = rng.normal(size=3)
    target = rng.normal(size=4)

    def dense_loss():
        out, _ = dense_forward(layer, x)
        return float(((out - target) ** 2).sum())

    out, cache = dense_forward(layer, x)
    grads, _ = dense_backward(layer, cache, 2 * (out - target))
    for name, param in layer.params().items():
        err = rel_err(grads[name], finite_difference(dense_loss, param))
        print(f"  {name}: relative error {err:.2e}")

    print("GRU cell, BPTT over a length-5 sequence:")
    cell = GruCell.create(rng, 3, 4)
    xs = [rng.normal(size=3) for _ in range(5)]
    targets = [rng.normal(size=4) for _ in range(5)]
    h0 = np.zeros(4)

    def gru_loss():
        hs, _ = gru_sequence_forward(cell, xs, h0)
        return float(sum(((h - t) ** 2).sum() for h, t in zip(hs, targets)))

    hs, caches = gru_sequence_forward(cell, xs, h0)
    dhs = [2 * (h - t) for h, t in zip(hs, targets)]
    grads, _, _ = gru_sequence_backward(cell, caches, dhs)
    for name, param in cell.params().items():
        err = rel_err(grads[name], finite_difference(gru_loss, param))
        print(f"  {name}: relative error {err:.2e}")

    print("All gradients agree with finite differences.")


if __name__ == "__main__":
    main()
