"""Dot-product reservoir representation (DPRR).

Layout of the length ``N_x * (N_x + 1)`` feature vector (0-based)::

    r[(i-1)*N_x + (j-1)] = sum_k x(k)_i * x(k-1)_j     i, j = 1..N_x
    r[N_x**2 + (i-1)]    = sum_k x(k)_i
"""

from collections import defaultdict

import numpy as np


def n_features(n_nodes: int) -> int:
    return n_nodes * (n_nodes + 1)


def dprr_index(i: int, j, n_nodes: int) -> int:
    """Flat 0-based index of the lagged product (i, j) or, with ``j="sum"``,
    of the sum feature of node i. Node numbers are 1-based."""
    if not 1 <= i <= n_nodes:
        raise IndexError(f"node {i} out of range 1..{n_nodes}")
    if j == "sum":
        return n_nodes * n_nodes + i - 1
    if not 1 <= j <= n_nodes:
        raise IndexError(f"node {j} out of range 1..{n_nodes}")
    return (i - 1) * n_nodes + j - 1


class DprrAccumulator:
    """Streams the DPRR with one rank-1 update per input step.

    Works on a single state vector or a batch of shape (S, N_x).
    """

    def __init__(self, n_nodes: int, batch=None):
        shape = () if batch is None else (batch,)
        self.n_nodes = n_nodes
        self.dot = np.zeros(shape + (n_nodes, n_nodes))
        self.sum = np.zeros(shape + (n_nodes,))

    def update(self, x, x_prev):
        self.dot += x[..., :, None] * x_prev[..., None, :]
        self.sum += x

    def value(self) -> np.ndarray:
        lead = self.sum.shape[:-1]
        return np.concatenate([self.dot.reshape(lead + (-1,)), self.sum], axis=-1)


def accumulate_dprr(trace) -> np.ndarray:
    """DPRR of a reservoir trace.

    Full traces are reduced from their stored states; truncated traces carry
    the vector streamed during the forward pass.
    """
    if trace.mode == "full":
        xs = trace.states
        dot = xs[1:].T @ xs[:-1]
        return np.concatenate([dot.ravel(), xs[1:].sum(axis=0)])
    return trace.dprr.copy()


def reservoir_features(params, samples) -> np.ndarray:
    """DPRR rows for many samples, stepping equal-length samples together.

    Returns an (S, N_r) matrix in sample order.

    Raises:
        DivergenceError: if any state becomes non-finite.
    """
    from .reservoir import chain_operators, mask_input, step, _check_finite

    nx = params.n_nodes
    out = np.empty((len(samples), n_features(nx)))
    by_len = defaultdict(list)
    for idx, s in enumerate(samples):
        series = s.series if hasattr(s, "series") else np.asarray(s)
        by_len[series.shape[0]].append((idx, series))
    chain, carry = chain_operators(params.B, nx)
    with np.errstate(over="ignore", invalid="ignore"):
        for T, group in by_len.items():
            idx = [g[0] for g in group]
            U = np.stack([g[1] for g in group])  # (S, T, N_u)
            J = mask_input(params.mask, U)  # (S, T, N_x)
            acc = DprrAccumulator(nx, batch=len(group))
            x_prev = np.zeros((len(group), nx))
            for k in range(1, T + 1):
                x = step(params, chain, carry, J[:, k - 1], x_prev)
                _check_finite(x, k)
                acc.update(x, x_prev)
                x_prev = x
            out[idx] = acc.value()
    return out
