"""Randomized comparison of analytic gradients with central differences."""

from dataclasses import dataclass, field
from typing import List

import numpy as np

from .backprop import finite_diff_grads, full_bptt
from .dprr import accumulate_dprr
from .head import OutputHead, forward_head, head_gradients, loss
from .reservoir import LINEAR, NonlinearityKind, ReservoirParams, generate_mask, run_reservoir

REL_TOL = 1e-5
ABS_TOL = 1e-8
SMALL = 1e-6  # below this reference magnitude the absolute tolerance applies
MAX_FEATURE = 100.0


@dataclass
class Instance:
    params: ReservoirParams
    series: np.ndarray
    head: OutputHead
    label: int


@dataclass
class GradCheckResult:
    trials: int
    worst_relative: float = 0.0
    worst_absolute: float = 0.0
    failures: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def random_instance(seed, max_T=10, max_nx=5, max_nu=3, max_ny=4, kind: NonlinearityKind = LINEAR) -> Instance:
    """A small pipeline whose softmax is not saturated.

    Saturated heads make the loss flat and central differences meaningless,
    so the readout is rescaled to keep logits within [-2, 2]. Draws whose
    features exceed MAX_FEATURE are redrawn from the same stream: a step of
    h in W moves the logits by h*|r|, which would make the difference
    quotient itself the inaccurate side of the comparison.
    """
    rs = np.random.default_rng(seed)
    while True:
        T = int(rs.integers(1, max_T + 1))
        nx = int(rs.integers(1, max_nx + 1))
        nu = int(rs.integers(1, max_nu + 1))
        ny = int(rs.integers(2, max_ny + 1)) if max_ny >= 2 else 1
        A, B = (float(v) for v in rs.uniform(0.05, 0.8, size=2))
        params = ReservoirParams(A, B, generate_mask(seed, nx, nu), kind)
        series = rs.normal(size=(T, nu))
        r = accumulate_dprr(run_reservoir(params, series, "full"))
        if np.abs(r).max() <= MAX_FEATURE:
            break
    W = rs.normal(size=(ny, nx * (nx + 1)))
    W *= 2.0 / max(float(np.abs(W @ r).max()), 1e-12)
    return Instance(params, series, OutputHead(W, 0.5 * rs.normal(size=ny)), int(rs.integers(ny)))


def _head_fd(head, r, label, h):
    def f(W=head.W, b=head.b, rr=r):
        return loss(forward_head(OutputHead(W, b), rr), label)

    def central(x, fn):
        g = np.zeros_like(x)
        for idx in np.ndindex(x.shape):
            up, dn = x.copy(), x.copy()
            up[idx] += h
            dn[idx] -= h
            g[idx] = (fn(up) - fn(dn)) / (2 * h)
        return g

    return (
        central(head.W, lambda W: f(W=W)),
        central(head.b, lambda b: f(b=b)),
        central(r, lambda rr: f(rr=rr)),
    )


def _compare(name, got, ref, result):
    """Array-wise check: ||got - ref|| / ||ref|| in the 2-norm, or the
    absolute gap when ||ref|| is below SMALL. Per-entry ratios are dominated
    by difference-quotient rounding for entries near SMALL."""
    got = np.atleast_1d(np.asarray(got, dtype=np.float64))
    ref = np.atleast_1d(np.asarray(ref, dtype=np.float64))
    err = float(np.linalg.norm(got - ref))
    size = float(np.linalg.norm(ref))
    if size < SMALL:
        result.worst_absolute = max(result.worst_absolute, err)
        if err > ABS_TOL:
            result.failures.append(f"{name}: absolute error {err:.3e} > {ABS_TOL:g}")
    else:
        rel = err / size
        result.worst_relative = max(result.worst_relative, rel)
        if rel > REL_TOL:
            result.failures.append(f"{name}: relative error {rel:.3e} > {REL_TOL:g}")


def check_instance(inst: Instance, result: GradCheckResult, h=1e-6, tag=""):
    trace = run_reservoir(inst.params, inst.series, "full")
    r = accumulate_dprr(trace)
    dW, db, dr = head_gradients(forward_head(inst.head, r), inst.label, r, inst.head)
    grads = full_bptt(inst.params, trace, dr)
    ref = finite_diff_grads(inst.params, inst.series, inst.label, inst.head, h)
    _compare(f"{tag}dA", grads.dA, ref.dA, result)
    _compare(f"{tag}dB", grads.dB, ref.dB, result)
    fW, fb, fr = _head_fd(inst.head, r, inst.label, h)
    _compare(f"{tag}dW", dW, fW, result)
    _compare(f"{tag}db", db, fb, result)
    _compare(f"{tag}dr", dr, fr, result)


def gradcheck(trials=100, seed=0, kinds=(LINEAR, NonlinearityKind("mackey-glass", 2)), h=1e-6, **limits) -> GradCheckResult:
    """Run `trials` instances, cycling through `kinds`."""
    result = GradCheckResult(trials)
    for t in range(trials):
        kind = kinds[t % len(kinds)]
        inst = random_instance(seed + t, kind=kind, **limits)
        check_instance(inst, result, h, tag=f"trial {t} ({kind.tag}) ")
    return result
