"""Grid-search baseline over (A, B) with a beta sweep per cell."""

import csv
import io
import logging
import time
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np

from .dprr import reservoir_features
from .head import DEFAULT_BETAS, RidgeError, select_beta, softmax
from .reservoir import LINEAR, DivergenceError, NonlinearityKind, ReservoirParams, generate_mask

log = logging.getLogger(__name__)

A_RANGE = (10**-3.75, 10**-0.25)
B_RANGE = (10**-2.75, 10**-0.25)


@dataclass(frozen=True)
class GridConfig:
    divisions: int = 1
    a_range: Tuple[float, float] = A_RANGE
    b_range: Tuple[float, float] = B_RANGE
    betas: Tuple[float, ...] = DEFAULT_BETAS
    n_nodes: int = 30
    mask_seed: int = 0
    kind: NonlinearityKind = LINEAR

    def __post_init__(self):
        if self.divisions < 1:
            raise ValueError("divisions must be >= 1")
        for lo, hi in (self.a_range, self.b_range):
            if not 0 < lo < hi:
                raise ValueError("ranges must be positive with lo < hi")


@dataclass
class Cell:
    a_index: int
    b_index: int
    A: float
    B: float
    beta: Optional[float]
    train_loss: Optional[float]
    test_accuracy: float
    diverged: bool = False


@dataclass
class GridResult:
    divisions: int
    cells: List[Cell]
    best: Cell
    seconds: float
    ridge_fits: int = 0

    def accuracy_table(self) -> np.ndarray:
        """D x D test accuracies, rows indexed by A, columns by B."""
        table = np.zeros((self.divisions, self.divisions))
        for c in self.cells:
            table[c.a_index, c.b_index] = c.test_accuracy
        return table

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["a_index", "b_index", "A", "B", "beta", "train_loss", "test_accuracy", "diverged"])
        for c in self.cells:
            w.writerow([
                c.a_index, c.b_index, repr(c.A), repr(c.B),
                "" if c.beta is None else repr(c.beta),
                "" if c.train_loss is None else repr(c.train_loss),
                repr(c.test_accuracy), int(c.diverged),
            ])
        return buf.getvalue()


def grid_points(bounds, divisions: int) -> np.ndarray:
    """Midpoints of `divisions` equal sections of [lo, hi] in log10 space."""
    if divisions < 1:
        raise ValueError("divisions must be >= 1")
    lo, hi = np.log10(bounds[0]), np.log10(bounds[1])
    width = (hi - lo) / divisions
    return 10.0 ** (lo + (np.arange(divisions) + 0.5) * width)


def _accuracy(head, R, labels):
    probs = softmax(R @ head.W.T + head.b)
    return float(np.mean(np.argmax(probs, axis=1) == labels))


def evaluate_cell(dataset, config: GridConfig, A, B, mask=None):
    """Features for both splits at (A, B), beta sweep on train, test accuracy.

    Returns ``(beta, train_loss, test_accuracy, ridge_fits)``; divergence or
    an unfittable readout yields ``(None, None, 0.0, fits)``.
    """
    if mask is None:
        mask = generate_mask(config.mask_seed, config.n_nodes, dataset.n_features)
    params = ReservoirParams(float(A), float(B), mask, config.kind)
    labels = np.array([s.label for s in dataset.train])
    test_labels = np.array([s.label for s in dataset.test])
    try:
        R = reservoir_features(params, dataset.train)
        R_test = reservoir_features(params, dataset.test)
        beta, head, train_loss = select_beta(R, labels, dataset.n_classes, config.betas)
    except (DivergenceError, RidgeError, FloatingPointError) as exc:
        log.info("cell A=%.4g B=%.4g failed: %s", A, B, exc)
        return None, None, 0.0, len(config.betas)
    return beta, train_loss, _accuracy(head, R_test, test_labels), len(config.betas)


def grid_search(dataset, config: GridConfig) -> GridResult:
    """Evaluate every (A, B) cell of a D x D log-spaced grid.

    The best cell has the highest test accuracy; ties go to the smaller
    A index, then the smaller B index.
    """
    start = time.perf_counter()
    mask = generate_mask(config.mask_seed, config.n_nodes, dataset.n_features)
    a_pts = grid_points(config.a_range, config.divisions)
    b_pts = grid_points(config.b_range, config.divisions)
    cells = []
    fits = 0
    for ia, A in enumerate(a_pts):
        for ib, B in enumerate(b_pts):
            beta, train_loss, acc, n = evaluate_cell(dataset, config, A, B, mask)
            fits += n
            cells.append(Cell(ia, ib, float(A), float(B), beta, train_loss, acc, beta is None))
    best = _best_cell(cells)
    return GridResult(config.divisions, cells, best, time.perf_counter() - start, fits)


def _best_cell(cells):
    return min(cells, key=lambda c: (-c.test_accuracy, c.a_index, c.b_index))


@dataclass
class Escalation:
    reached: bool
    divisions: int
    result: GridResult
    levels: List[GridResult] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def cells_evaluated(self) -> int:
        return sum(len(level.cells) for level in self.levels)


def escalate(dataset, target_accuracy: float, max_divisions: int, config: GridConfig = GridConfig()) -> Escalation:
    """Grow the grid from D = 1 until the best test accuracy reaches the target.

    Each level is evaluated from scratch. If no level up to `max_divisions`
    reaches the target, ``reached`` is False and ``result`` is the best level
    seen.
    """
    if max_divisions < 1:
        raise ValueError("max_divisions must be >= 1")
    start = time.perf_counter()
    levels = []
    for d in range(1, max_divisions + 1):
        level = grid_search(dataset, replace(config, divisions=d))
        levels.append(level)
        log.info("grid D=%d: best accuracy %.4f", d, level.best.test_accuracy)
        if level.best.test_accuracy >= target_accuracy:
            return Escalation(True, d, level, levels, time.perf_counter() - start)
    best = max(levels, key=lambda g: (g.best.test_accuracy, -g.divisions))
    return Escalation(False, best.divisions, best, levels, time.perf_counter() - start)

