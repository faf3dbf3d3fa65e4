"""Gradients of the loss with respect to the reservoir scalars A and B.

Two routes are provided. :func:`full_bptt` walks the adjoint of every state
x(k)_n back through the DPRR and the recurrence. :func:`truncated_bp` keeps
only the last step, so it needs x(T-1), x(T) and the last input row, and its
cost does not depend on the series length. :func:`finite_diff_grads` is the
independent numerical check.

Adjoint recursion used by the full route (1-based nodes)::

    a(k, n) = bpv(k, n) + B * a(succ(k, n)) + f'(z(k+1)_n) * a(k+1, n)

with ``succ(k, n) = (k, n+1)`` for n < N_x and ``(k+1, 1)`` for the last
node, matching the wrap-around of the forward pass.
"""

from dataclasses import dataclass

import numpy as np

from .dprr import accumulate_dprr
from .head import forward_head, loss
from .reservoir import DivergenceError, chain_operators, masked_row, nonlinearity, run_reservoir


@dataclass(frozen=True)
class ReservoirGrads:
    dA: float
    dB: float


class OpCounter:
    """Tally of scalar multiply and add operations issued by a backward pass."""

    def __init__(self):
        self.ops = 0

    def matvec(self, rows, cols):
        self.ops += 2 * rows * cols

    def elementwise(self, n, per_element=1):
        self.ops += n * per_element


def _nonlinearity_cost(kind):
    # value, slope and g per element
    return 3 if kind.tag == "linear" else 12


def _split_dr(dr, nx):
    dr = np.asarray(dr, dtype=np.float64)
    return dr[: nx * nx].reshape(nx, nx), dr[nx * nx :]


def dprr_bp_value(k: int, n: int, states, dr) -> float:
    """Adjoint injected into x(k)_n by the DPRR layer (1-based k and n).

    `states` is a full trace's (T+1, N_x) state array.
    """
    nx = states.shape[1]
    T = states.shape[0] - 1
    dot, ds = _split_dr(dr, nx)
    value = states[k - 1] @ dot[n - 1] + ds[n - 1]
    if k < T:
        value += states[k + 1] @ dot[:, n - 1]
    return float(value)


def _bpv_vector(dot, ds, x_prev, x_next, counter=None):
    bpv = dot @ x_prev + ds
    if counter is not None:
        counter.matvec(*dot.shape)
        counter.elementwise(len(ds))
    if x_next is not None:
        bpv = bpv + dot.T @ x_next
        if counter is not None:
            counter.matvec(*dot.shape)
            counter.elementwise(len(ds))
    return bpv


def _check_trace(params, trace, mode):
    if trace.mode != mode:
        raise ValueError(f"expected a {mode} trace, got {trace.mode}")
    if trace.states.shape[1] != params.n_nodes:
        raise ValueError("trace node count does not match params")
    if trace.series.shape[1] != params.n_inputs:
        raise ValueError("trace input width does not match the mask")


def _finish(dA, dB):
    if not (np.isfinite(dA) and np.isfinite(dB)):
        raise DivergenceError("non-finite reservoir gradient")
    return ReservoirGrads(float(dA), float(dB))


def full_bptt(params, trace, dr, counter: OpCounter = None) -> ReservoirGrads:
    """Exact (dA, dB) by backpropagation through every time step."""
    _check_trace(params, trace, "full")
    nx = params.n_nodes
    xs = trace.states
    T = xs.shape[0] - 1
    dot, ds = _split_dr(dr, nx)
    chain, _ = chain_operators(params.B, nx)
    upper = chain.T  # upper[n, m] = B**(m - n), m >= n
    wrap = np.power(float(params.B), nx - np.arange(nx, dtype=np.float64))
    cost = _nonlinearity_cost(params.kind)

    dA = 0.0
    dB = 0.0
    a_next = None  # a(k+1, .)
    slope_next = None  # f'(z(k+1))
    for k in range(T, 0, -1):
        x_next = xs[k + 1] if k < T else None
        c = _bpv_vector(dot, ds, xs[k - 1], x_next, counter)
        if a_next is not None:
            c = c + slope_next * a_next
        a = upper @ c
        if a_next is not None:
            a = a + wrap * a_next[0]
        z = masked_row(params.mask, trace.series, k) + xs[k - 1]
        _, slope, g = nonlinearity(params.kind, params.A, z)
        pred = np.concatenate([xs[k - 1][-1:], xs[k][:-1]])
        dA += g @ a
        dB += pred @ a
        if counter is not None:
            counter.matvec(nx, nx)
            counter.elementwise(nx, 6 + cost)
        a_next, slope_next = a, slope
    return _finish(dA, dB)


def truncated_bp(params, trace, dr, counter: OpCounter = None) -> ReservoirGrads:
    """Approximate (dA, dB) from the last input step only.

    Uses x(T-1), x(T) and the last input row; the adjoint does not continue
    past node N_x.
    """
    _check_trace(params, trace, "truncated")
    nx = params.n_nodes
    x_prev, x_last = trace.states[0], trace.states[1]
    dot, ds = _split_dr(dr, nx)
    chain, _ = chain_operators(params.B, nx)
    upper = chain.T

    c = _bpv_vector(dot, ds, x_prev, None, counter)
    a = upper @ c
    z = masked_row(params.mask, trace.series, trace.length) + x_prev
    _, _, g = nonlinearity(params.kind, params.A, z)
    pred = np.concatenate([x_prev[-1:], x_last[:-1]])
    dA = 0.0
    dB = 0.0
    dA += g @ a
    dB += pred @ a
    if counter is not None:
        counter.matvec(nx, nx)
        counter.elementwise(nx, 6 + _nonlinearity_cost(params.kind))
        counter.matvec(nx, params.n_inputs)
    return _finish(dA, dB)


def pipeline_loss(params, series, label, head) -> float:
    """End-to-end loss: reservoir, DPRR, head, cross-entropy."""
    trace = run_reservoir(params, series, "full")
    return loss(forward_head(head, accumulate_dprr(trace)), label)


def finite_diff_grads(params, series, label, head, h: float = 1e-6) -> ReservoirGrads:
    """Central differences of :func:`pipeline_loss` in A and B.

    Raises:
        DivergenceError: if a perturbed forward pass diverges.
    """
    if h <= 0:
        raise ValueError("step must be positive")
    A, B = params.A, params.B
    dA = (
        pipeline_loss(params.with_ab(A + h, B), series, label, head)
        - pipeline_loss(params.with_ab(A - h, B), series, label, head)
    ) / (2 * h)
    dB = (
        pipeline_loss(params.with_ab(A, B + h), series, label, head)
        - pipeline_loss(params.with_ab(A, B - h), series, label, head)
    ) / (2 * h)
    return ReservoirGrads(dA, dB)
