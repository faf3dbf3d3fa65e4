"""Output layer: affine readout, softmax cross-entropy, ridge refit."""

import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy import linalg

log = logging.getLogger(__name__)

# Cross-entropy never exceeds -log(smallest positive double).
MAX_LOSS = -np.log(np.finfo(np.float64).tiny)

DEFAULT_BETAS = (1e-6, 1e-4, 1e-2, 1e0)


class RidgeError(np.linalg.LinAlgError):
    pass


@dataclass
class OutputHead:
    W: np.ndarray  # (N_y, N_r)
    b: np.ndarray  # (N_y,)

    @classmethod
    def zeros(cls, n_classes, n_features):
        return cls(np.zeros((n_classes, n_features)), np.zeros(n_classes))

    def copy(self):
        return OutputHead(self.W.copy(), self.b.copy())


@dataclass(frozen=True)
class Prediction:
    logits: np.ndarray
    probs: np.ndarray


def softmax(logits):
    z = logits - np.max(logits, axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def forward_head(head: OutputHead, r) -> Prediction:
    logits = head.W @ r + head.b
    return Prediction(logits, softmax(logits))


def loss(pred: Prediction, label: int) -> float:
    """Cross-entropy against a one-hot target, evaluated in log space."""
    z = pred.logits - np.max(pred.logits)
    log_p = z[label] - np.log(np.sum(np.exp(z)))
    return float(min(-log_p, MAX_LOSS))


def head_gradients(pred: Prediction, label: int, r, head: OutputHead):
    """Gradients of the loss w.r.t. W, b and the DPRR input ``r``."""
    delta = pred.probs.copy()
    delta[label] -= 1.0
    return np.outer(delta, r), delta, head.W.T @ delta


def _augment(R):
    R = np.asarray(R, dtype=np.float64)
    return np.hstack([R, np.ones((R.shape[0], 1))])


def _one_hot(labels, n_classes):
    D = np.zeros((len(labels), n_classes))
    D[np.arange(len(labels)), labels] = 1.0
    return D


def ridge_system(R, labels, n_classes, beta):
    """Normal equations ``(Rt'Rt + beta I) theta = Rt'D`` of the ridge readout.

    ``Rt`` is R with a constant-one column appended; the penalty also covers
    the bias row.
    """
    Rt = _augment(R)
    gram = Rt.T @ Rt
    gram[np.diag_indices_from(gram)] += beta
    return gram, Rt.T @ _one_hot(labels, n_classes)


def ridge_residual(head: OutputHead, R, labels, beta) -> float:
    """Relative infinity-norm residual of `head` against the normal equations."""
    gram, rhs = ridge_system(R, labels, head.W.shape[0], beta)
    theta = np.vstack([head.W.T, head.b[None, :]])
    return float(np.max(np.abs(gram @ theta - rhs)) / max(1.0, np.max(np.abs(rhs))))


def _cholesky(matrix, beta):
    try:
        return linalg.cho_factor(matrix, lower=False, check_finite=True)
    except (linalg.LinAlgError, ValueError) as exc:
        raise RidgeError(f"ridge factorization failed at beta={beta:g}: {exc}") from None


def ridge_fit(R, labels, n_classes: int, beta: float, refine: int = 4) -> OutputHead:
    """Closed-form ridge readout against one-hot targets (Cholesky).

    With fewer samples than augmented features the equivalent sample-space
    system ``(Rt Rt' + beta I) alpha = D``, ``theta = Rt' alpha`` is factored
    instead; the primal Gram matrix is rank deficient there and its
    factorization breaks down at small beta.

    Either way the answer is polished by iterative refinement against the
    primal normal equations. In the sample-space case each correction uses
    ``(Rt'Rt + beta I)^-1 = (I - Rt' (Rt Rt' + beta I)^-1 Rt) / beta``, so the
    same factor serves both solves.

    Raises:
        RidgeError: if the regularized Gram matrix is not numerically
            positive definite.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    Rt = _augment(R)
    D = _one_hot(np.asarray(labels, dtype=int), n_classes)
    # overflow surfaces as a non-finite matrix, which the factorization rejects
    with np.errstate(over="ignore", invalid="ignore"):
        rhs = Rt.T @ D
        if Rt.shape[0] < Rt.shape[1]:
            kernel = Rt @ Rt.T
            kernel[np.diag_indices_from(kernel)] += beta
            factor = _cholesky(kernel, beta)

            def solve(v):
                return (v - Rt.T @ linalg.cho_solve(factor, Rt @ v)) / beta

            theta = Rt.T @ linalg.cho_solve(factor, D)
        else:
            gram = Rt.T @ Rt
            gram[np.diag_indices_from(gram)] += beta
            factor = _cholesky(gram, beta)

            def solve(v):
                return linalg.cho_solve(factor, v)

            theta = solve(rhs)
        scale = max(1.0, float(np.max(np.abs(rhs))))
        best, best_norm = theta, np.inf
        for _ in range(refine + 1):
            resid = rhs - (Rt.T @ (Rt @ theta) + beta * theta)
            norm = float(np.max(np.abs(resid)))
            if not norm < best_norm:
                break
            best, best_norm = theta, norm
            if norm <= 1e-14 * scale:
                break
            theta = theta + solve(resid)
    theta = best
    if not np.all(np.isfinite(theta)):
        raise RidgeError(f"non-finite ridge solution at beta={beta:g}")
    return OutputHead(W=theta[:-1].T.copy(), b=theta[-1].copy())


def mean_loss(head: OutputHead, R, labels) -> float:
    logits = np.asarray(R) @ head.W.T + head.b
    z = logits - logits.max(axis=1, keepdims=True)
    log_p = z[np.arange(len(labels)), labels] - np.log(np.exp(z).sum(axis=1))
    return float(np.mean(np.minimum(-log_p, MAX_LOSS)))


def select_beta(
    R, labels, n_classes: int, betas: Sequence[float] = DEFAULT_BETAS, eval_R=None, eval_labels=None
) -> Tuple[float, OutputHead, float]:
    """Fit one ridge head per beta; keep the one with the smallest mean loss.

    Loss is measured on the rows of `R` themselves unless a separate
    evaluation set (`eval_R`, `eval_labels`) is given. Ties go to the larger
    beta. Candidates whose factorization fails are skipped.

    Raises:
        RidgeError: if no candidate can be fitted.
    """
    if len(betas) == 0:
        raise ValueError("betas must be non-empty")
    labels = np.asarray(labels, dtype=int)
    if eval_R is None:
        eval_R, eval_labels = R, labels
    eval_labels = np.asarray(eval_labels, dtype=int)
    best = None
    failures = []
    for beta in betas:
        try:
            head = ridge_fit(R, labels, n_classes, beta)
        except RidgeError as exc:
            log.warning("%s", exc)
            failures.append(str(exc))
            continue
        L = mean_loss(head, eval_R, eval_labels)
        if best is None or L < best[2] or (L == best[2] and beta > best[0]):
            best = (float(beta), head, L)
    if best is None:
        raise RidgeError("; ".join(failures))
    return best
