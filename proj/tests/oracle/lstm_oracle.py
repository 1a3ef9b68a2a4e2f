#!/usr/bin/env python3
# Copyright 2026 The gkt-lm Authors
# SPDX-License-Identifier: Apache-2.0
"""Independent NumPy reference for the golden values frozen in
tests/unit/test_golden.cpp. Run it to regenerate the constants."""

import numpy as np

SYMBOLS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ \n'."
V = 30


def encode(text):
    return [SYMBOLS.index(c) for c in text]


def pattern_params(cells, layers):
    """Parameters in flattened order, value k -> 0.3 * sin(0.7 k + 0.1)."""
    shapes = []
    for l in range(layers):
        fan_in = V if l == 0 else cells
        shapes += [(4 * cells, fan_in), (4 * cells, cells), (4 * cells,)]
    shapes += [(V, cells), (V,)]
    total = sum(int(np.prod(s)) for s in shapes)
    flat = 0.3 * np.sin(0.7 * np.arange(total) + 0.1)
    out, off = [], 0
    for s in shapes:
        n = int(np.prod(s))
        out.append(flat[off:off + n].reshape(s))
        off += n
    return out


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def run(params, cells, layers, seq):
    h = [np.zeros(cells) for _ in range(layers)]
    c = [np.zeros(cells) for _ in range(layers)]
    w_out, b_out = params[-2], params[-1]
    dists = []
    for sym in seq:
        x = np.zeros(V)
        x[sym] = 1.0
        for l in range(layers):
            wi, wr, b = params[3 * l:3 * l + 3]
            z = wi @ x + wr @ h[l] + b
            i = sigmoid(z[0:cells])
            f = sigmoid(z[cells:2 * cells])
            g = np.tanh(z[2 * cells:3 * cells])
            o = sigmoid(z[3 * cells:4 * cells])
            c[l] = f * c[l] + i * g
            h[l] = o * np.tanh(c[l])
            x = h[l]
        logits = w_out @ x + b_out
        e = np.exp(logits - logits.max())
        dists.append(e / e.sum())
    return dists


def adadelta_nesterov(grads, rho=0.95, eps=1e-6, mu=0.9, lr=1.0):
    eg2 = edx2 = v = 0.0
    theta = 0.0
    out = []
    for g in grads:
        eg2 = rho * eg2 + (1 - rho) * g * g
        d = -np.sqrt(edx2 + eps) / np.sqrt(eg2 + eps) * g
        edx2 = rho * edx2 + (1 - rho) * d * d
        step = lr * d
        v = mu * v + step
        theta += mu * v + step
        out.append(theta)
    return out


def main():
    text = "\nTHE CAT'S MAT.\nA DOG RAN.\n"
    seq = encode(text)
    for cells, layers in [(3, 2), (5, 1)]:
        p = pattern_params(cells, layers)
        d = run(p, cells, layers, seq)
        bpc = -np.mean([np.log2(d[t][seq[t + 1]]) for t in range(len(seq) - 1)])
        print(f"{cells}x{layers} bpc = {bpc:.17g}")
        print(f"{cells}x{layers} p_last = {', '.join(f'{x:.17g}' for x in d[-1][:5])}")
    print("adadelta_nesterov =", ", ".join(f"{x:.17g}" for x in adadelta_nesterov([0.5, -0.25, 1.0, 0.125])))


if __name__ == "__main__":
    main()
