"""Input masking and the modular DFR forward recurrence.

Node ``n`` at input step ``k`` is updated as::

    x(k)_n = A * g(j(k)_n + x(k-1)_n) + B * pred(k, n)

where ``pred(k, n)`` is the previous node of the same step, and for the first
node the last node of the previous step (the delay line wraps around).

Within one input step the B-chain is a linear first-order recurrence whose
inputs only depend on ``x(k-1)``, so the whole step is evaluated as a lower
triangular product ``x(k) = L @ c + carry * x(k-1)_{N_x}`` with
``L[n, m] = B**(n-m)`` and ``carry[n] = B**(n+1)``.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import rng
from .dprr import DprrAccumulator


class DivergenceError(FloatingPointError):
    """A reservoir state or gradient became non-finite."""

    def __init__(self, message, step=None, node=None):
        super().__init__(message)
        self.step = step
        self.node = node


@dataclass(frozen=True)
class Mask:
    entries: np.ndarray  # (N_x, N_u) of +-1
    seed: int

    @property
    def shape(self):
        return self.entries.shape


@dataclass(frozen=True)
class NonlinearityKind:
    tag: str = "linear"
    p: int = 2

    def __post_init__(self):
        if self.tag not in ("linear", "mackey-glass"):
            raise ValueError(f"unknown nonlinearity {self.tag!r}")
        if self.tag == "mackey-glass" and (self.p < 2 or self.p % 2):
            raise ValueError("mackey-glass exponent p must be an even integer >= 2")

    def to_dict(self):
        return {"tag": self.tag, "p": self.p} if self.tag == "mackey-glass" else {"tag": self.tag}

    @classmethod
    def from_dict(cls, d):
        return cls(d["tag"], int(d.get("p", 2)))


LINEAR = NonlinearityKind("linear")


@dataclass(frozen=True)
class ReservoirParams:
    A: float
    B: float
    mask: Mask
    kind: NonlinearityKind = LINEAR

    def __post_init__(self):
        if not (np.isfinite(self.A) and np.isfinite(self.B)):
            raise ValueError("A and B must be finite")

    @property
    def n_nodes(self) -> int:
        return self.mask.entries.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.mask.entries.shape[1]

    def with_ab(self, A, B) -> "ReservoirParams":
        return replace(self, A=float(A), B=float(B))


@dataclass
class ReservoirTrace:
    """Forward record of one sample.

    ``states`` holds x(0..T) in full mode and (x(T-1), x(T)) in truncated
    mode. ``dprr`` is accumulated while stepping, in both modes.
    """

    mode: str
    states: np.ndarray
    series: np.ndarray
    dprr: np.ndarray

    @property
    def length(self) -> int:
        return self.series.shape[0]

    @property
    def stored_states(self) -> int:
        return self.states.shape[0]


def generate_mask(seed: int, n_nodes: int, n_inputs: int) -> Mask:
    """Bipolar mask; entry (n, u) is set by bit 0 of stream output n*N_u + u."""
    if n_nodes < 1 or n_inputs < 1:
        raise ValueError("mask dimensions must be >= 1")
    bits = rng.splitmix64(seed, n_nodes * n_inputs) & np.uint64(1)
    entries = np.where(bits == 1, 1.0, -1.0).reshape(n_nodes, n_inputs)
    return Mask(entries=entries, seed=int(seed))


def mask_input(mask: Mask, u) -> np.ndarray:
    u = np.asarray(u, dtype=np.float64)
    if u.shape[-1] != mask.entries.shape[1]:
        raise ValueError(
            f"input has {u.shape[-1]} features, mask expects {mask.entries.shape[1]}"
        )
    return mask.entries @ u if u.ndim == 1 else u @ mask.entries.T


def masked_row(mask: Mask, series, k: int) -> np.ndarray:
    """j(k) for a 1-based step k of a (T, N_u) series.

    Every per-step consumer (both trace modes and both backward routes)
    goes through here so they see bit-identical drive values.
    """
    return mask_input(mask, series[k - 1 : k])[0]


def nonlinearity(kind: NonlinearityKind, A, z):
    """Block function ``f_A(z) = A * g(z)``.

    Returns ``(f_A(z), d f_A / dz, d f_A / dA)``; the last one is ``g(z)``.
    Works elementwise on arrays.
    """
    if kind.tag == "linear":
        g = z
        dg = np.ones_like(z) if isinstance(z, np.ndarray) else 1.0
    else:
        zp = z**kind.p
        den = 1.0 + zp
        g = z / den
        dg = (1.0 + (1.0 - kind.p) * zp) / (den * den)
    return A * g, A * dg, g


def chain_operators(B, n_nodes):
    """Lower-triangular B-chain matrix and the wrap-around carry vector."""
    idx = np.arange(n_nodes)
    diff = idx[:, None] - idx[None, :]
    chain = np.where(diff >= 0, np.power(float(B), np.maximum(diff, 0)), 0.0)
    carry = np.power(float(B), idx + 1.0)
    return chain, carry


def step(params, chain, carry, j, x_prev):
    """One input step for a batch of states, shapes (..., N_x)."""
    value, _, _ = nonlinearity(params.kind, params.A, j + x_prev)
    return value @ chain.T + x_prev[..., -1:] * carry


def _check_finite(x, k):
    if not np.all(np.isfinite(x)):
        bad = np.flatnonzero(~np.isfinite(np.atleast_2d(x)).all(axis=0))
        node = int(bad[0]) + 1 if bad.size else None
        raise DivergenceError(f"non-finite reservoir state at step {k}, node {node}", k, node)


def run_reservoir(params: ReservoirParams, series, mode: str = "full") -> ReservoirTrace:
    """Drive the reservoir with one (T, N_u) series.

    Raises:
        DivergenceError: carrying the 1-based (step, node) of the first
            non-finite state.
    """
    if mode not in ("full", "truncated"):
        raise ValueError(f"unknown trace mode {mode!r}")
    series = np.asarray(series, dtype=np.float64)
    T = series.shape[0]
    nx = params.n_nodes
    if series.ndim != 2 or series.shape[1] != params.n_inputs:
        raise ValueError("sample feature count does not match the mask width")
    chain, carry = chain_operators(params.B, nx)
    acc = DprrAccumulator(nx)

    x_prev = np.zeros(nx)
    if mode == "full":
        states = np.empty((T + 1, nx))
        states[0] = x_prev
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, T + 1):
            x = step(params, chain, carry, masked_row(params.mask, series, k), x_prev)
            _check_finite(x, k)
            acc.update(x, x_prev)
            if mode == "full":
                states[k] = x
            if k < T:
                x_prev = x
    if mode == "full":
        return ReservoirTrace(mode, states, series, acc.value())
    # x_prev is x(T-1) here (x(0) when T == 1)
    states = np.stack([x_prev, x])
    return ReservoirTrace(mode, states, series, acc.value())
