"""SGD training of (A, B, W, b) followed by a ridge refit of the readout."""

import json
import logging
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import rng
from .dataset import NormStats
from .backprop import full_bptt, truncated_bp
from .dprr import n_features, reservoir_features
from .head import (
    DEFAULT_BETAS,
    OutputHead,
    forward_head,
    head_gradients,
    loss,
    mean_loss,
    ridge_fit,
    select_beta,
    softmax,
)
from .reservoir import (
    LINEAR,
    DivergenceError,
    NonlinearityKind,
    ReservoirParams,
    generate_mask,
    run_reservoir,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReservoirConfig:
    n_nodes: int = 30
    mask_seed: int = 0
    kind: NonlinearityKind = LINEAR


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 25
    init_A: float = 0.01
    init_B: float = 0.01
    lr: float = 1.0
    reservoir_drops: Tuple[int, ...] = (5, 10, 15, 20)
    output_drops: Tuple[int, ...] = (10, 15, 20)
    drop_factor: float = 0.1
    betas: Tuple[float, ...] = DEFAULT_BETAS
    bp_mode: str = "truncated"
    shuffle_seed: int = 0
    clamp: Tuple[float, float] = (1e-6, 0.99)
    beta_holdout: float = 0.0  # fraction of train rows used only to score betas

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.lr < 0:
            raise ValueError("learning rate must be non-negative")
        if not self.clamp[0] < self.clamp[1]:
            raise ValueError("clamp bounds must be ordered")
        if self.bp_mode not in ("truncated", "full"):
            raise ValueError(f"unknown bp mode {self.bp_mode!r}")
        if not self.betas:
            raise ValueError("betas must be non-empty")
        if not 0.0 <= self.beta_holdout < 1.0:
            raise ValueError("beta_holdout must lie in [0, 1)")


@dataclass
class EpochStats:
    loss: float
    accuracy: float
    skipped: int = 0
    clamped: int = 0
    peak_states: int = 0


@dataclass
class TrainedModel:
    params: ReservoirParams
    head: OutputHead
    beta: float
    history: List[EpochStats] = field(default_factory=list)
    norm: Optional[NormStats] = None  # input standardization applied before training

    def to_dict(self) -> dict:
        m = self.params.mask
        return {
            "A": self.params.A,
            "B": self.params.B,
            "kind": self.params.kind.to_dict(),
            "mask": {"seed": m.seed, "n_nodes": m.shape[0], "n_inputs": m.shape[1]},
            "W": self.head.W.tolist(),
            "b": self.head.b.tolist(),
            "beta": self.beta,
            "history": [asdict(h) for h in self.history],
            "norm": None
            if self.norm is None
            else {"mean": self.norm.mean.tolist(), "std": self.norm.std.tolist()},
        }

    @classmethod
    def from_dict(cls, d) -> "TrainedModel":
        m = d["mask"]
        params = ReservoirParams(
            float(d["A"]),
            float(d["B"]),
            generate_mask(int(m["seed"]), int(m["n_nodes"]), int(m["n_inputs"])),
            NonlinearityKind.from_dict(d["kind"]),
        )
        head = OutputHead(np.array(d["W"], dtype=np.float64), np.array(d["b"], dtype=np.float64))
        history = [EpochStats(**h) for h in d.get("history", [])]
        norm = d.get("norm")
        if norm is not None:
            norm = NormStats(np.array(norm["mean"], dtype=np.float64), np.array(norm["std"], dtype=np.float64))
        return cls(params, head, float(d["beta"]), history, norm)

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, allow_nan=False)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "TrainedModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def lr_schedule(config: TrainConfig, epoch: int) -> Tuple[float, float]:
    """(reservoir lr, output lr) for a 1-based epoch; drops apply from the
    start of the named epoch."""
    if not 1 <= epoch <= config.epochs:
        raise ValueError(f"epoch {epoch} outside 1..{config.epochs}")
    n_res = sum(1 for m in config.reservoir_drops if m <= epoch)
    n_out = sum(1 for m in config.output_drops if m <= epoch)
    return config.lr * config.drop_factor**n_res, config.lr * config.drop_factor**n_out


def _clamp(value, bounds):
    lo, hi = bounds
    clipped = min(max(value, lo), hi)
    return clipped, clipped != value


def train(dataset, reservoir: ReservoirConfig = ReservoirConfig(), config: TrainConfig = TrainConfig()) -> TrainedModel:
    """Per-sample SGD over A, B, W and b, then a ridge refit of the readout.

    A sample whose forward or backward pass goes non-finite is skipped and
    the reservoir learning rate is halved for the rest of that epoch.

    Raises:
        DivergenceError: if every sample of an epoch diverges.
    """
    mask = generate_mask(reservoir.mask_seed, reservoir.n_nodes, dataset.n_features)
    params = ReservoirParams(config.init_A, config.init_B, mask, reservoir.kind)
    head = OutputHead.zeros(dataset.n_classes, n_features(reservoir.n_nodes))
    backward = truncated_bp if config.bp_mode == "truncated" else full_bptt
    train_set = dataset.train
    history = []

    for epoch in range(1, config.epochs + 1):
        lr_res, lr_out = lr_schedule(config, epoch)
        order = rng.permutation(rng.derive_seed(config.shuffle_seed, epoch), len(train_set))
        stats = EpochStats(0.0, 0.0)
        total_loss = 0.0
        correct = 0
        for idx in order:
            sample = train_set[idx]
            try:
                with np.errstate(over="raise", invalid="raise"):
                    trace = run_reservoir(params, sample.series, config.bp_mode)
                    r = trace.dprr
                    pred = forward_head(head, r)
                    dW, db, dr = head_gradients(pred, sample.label, r, head)
                    grads = backward(params, trace, dr)
            except (DivergenceError, FloatingPointError):
                stats.skipped += 1
                lr_res *= 0.5
                continue
            stats.peak_states = max(stats.peak_states, trace.stored_states)
            total_loss += loss(pred, sample.label)
            correct += int(np.argmax(pred.probs) == sample.label)

            head.W -= lr_out * dW
            head.b -= lr_out * db
            A, ca = _clamp(params.A - lr_res * grads.dA, config.clamp)
            B, cb = _clamp(params.B - lr_res * grads.dB, config.clamp)
            stats.clamped += int(ca) + int(cb)
            params = params.with_ab(A, B)

        done = len(train_set) - stats.skipped
        if done == 0:
            raise DivergenceError(f"every sample diverged in epoch {epoch}")
        stats.loss = total_loss / done
        stats.accuracy = correct / done
        history.append(stats)
        log.info(
            "epoch %d: loss %.4f acc %.3f A=%.5g B=%.5g", epoch, stats.loss, stats.accuracy, params.A, params.B
        )
        if stats.skipped:
            log.warning("epoch %d: %d samples skipped after divergence", epoch, stats.skipped)

    R, keep = _finite_features(params, train_set)
    labels = np.array([s.label for s in train_set])
    beta, head = refit_readout(R[keep], labels[keep], dataset.n_classes, config)
    return TrainedModel(params, head, beta, history)


def _finite_features(params, samples):
    """Feature rows plus a mask of the rows that stayed finite.

    Samples that overflow are left out of the refit rather than poisoning
    the whole Gram matrix.
    """
    try:
        R = reservoir_features(params, samples)
    except DivergenceError:
        R = np.full((len(samples), n_features(params.n_nodes)), np.nan)
        for i, s in enumerate(samples):
            try:
                R[i] = reservoir_features(params, [s])[0]
            except DivergenceError:
                pass
    keep = np.all(np.isfinite(R), axis=1)
    if not keep.any():
        raise DivergenceError("no training sample yields finite features for the refit")
    if not keep.all():
        log.warning("refit skips %d sample(s) with non-finite features", int((~keep).sum()))
    return R, keep


def refit_readout(R, labels, n_classes, config: TrainConfig):
    """Ridge readout on all train rows. Beta is scored on the same rows, or,
    with ``beta_holdout > 0``, on a seeded held-out slice that is then folded
    back in for the final fit."""
    if config.beta_holdout == 0.0:
        beta, head, _ = select_beta(R, labels, n_classes, config.betas)
        return beta, head
    order = np.array(rng.permutation(rng.derive_seed(config.shuffle_seed, 0), len(labels)))
    n_eval = max(1, int(round(config.beta_holdout * len(labels))))
    if n_eval >= len(labels):
        raise ValueError("beta_holdout leaves no rows to fit")
    fit, held = order[n_eval:], order[:n_eval]
    beta, _, _ = select_beta(R[fit], labels[fit], n_classes, config.betas, R[held], labels[held])
    return beta, ridge_fit(R, labels, n_classes, beta)


def predict_logits(model: TrainedModel, samples: Sequence) -> np.ndarray:
    R = reservoir_features(model.params, samples)
    return R @ model.head.W.T + model.head.b


def evaluate(model: TrainedModel, samples: Sequence) -> Tuple[float, float]:
    """Accuracy and mean cross-entropy; argmax ties go to the lowest class."""
    if len(samples) == 0:
        raise ValueError("cannot evaluate an empty split")
    logits = predict_logits(model, samples)
    labels = np.array([s.label for s in samples])
    # np.argmax returns the first maximal index
    accuracy = float(np.mean(np.argmax(softmax(logits), axis=1) == labels))
    R_loss = mean_loss(OutputHead(np.eye(logits.shape[1]), np.zeros(logits.shape[1])), logits, labels)
    return accuracy, R_loss
