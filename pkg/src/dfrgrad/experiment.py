"""Backpropagation versus grid-search comparison on one dataset."""

import json
import platform
import time
from dataclasses import asdict, dataclass, field

from .gridsearch import GridConfig, escalate
from .memory import MemoryReport, memory_counts
from .trainer import ReservoirConfig, TrainConfig, evaluate, train

TIMING_FIELDS = ("bp_seconds", "grid_seconds", "speedup", "host")


@dataclass(frozen=True)
class ExperimentConfig:
    reservoir: ReservoirConfig = ReservoirConfig()
    train: TrainConfig = TrainConfig()
    max_divisions: int = 16


@dataclass
class ExperimentReport:
    dataset: str
    bp_accuracy: float
    bp_seconds: float
    grid_reached: bool
    grid_divisions: int
    grid_accuracy: float
    grid_seconds: float
    grid_cells: int
    memory: dict
    A: float
    B: float
    beta: float
    host: dict = field(default_factory=dict)

    @property
    def speedup(self) -> float:
        return self.grid_seconds / self.bp_seconds

    def to_dict(self) -> dict:
        d = asdict(self)
        d["speedup"] = self.speedup
        return d

    @classmethod
    def from_dict(cls, d) -> "ExperimentReport":
        d = dict(d)
        d.pop("speedup", None)
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False)

    @classmethod
    def from_json(cls, text) -> "ExperimentReport":
        return cls.from_dict(json.loads(text))

    def without_timing(self) -> dict:
        d = self.to_dict()
        for key in TIMING_FIELDS:
            d.pop(key, None)
        return d


def host_metadata() -> dict:
    return {
        "machine": platform.machine(),
        "processor": platform.processor(),
        "python": platform.python_version(),
        "system": platform.system(),
    }


def run_experiment(dataset, config: ExperimentConfig = ExperimentConfig()):
    """Train by backpropagation, then escalate a grid search to the same
    test accuracy. Both phases are timed with a monotonic clock.

    Returns ``(report, model, escalation)``.
    """
    start = time.perf_counter()
    model = train(dataset, config.reservoir, config.train)
    bp_accuracy, _ = evaluate(model, dataset.test)
    bp_seconds = time.perf_counter() - start

    grid = GridConfig(
        betas=config.train.betas,
        n_nodes=config.reservoir.n_nodes,
        mask_seed=config.reservoir.mask_seed,
        kind=config.reservoir.kind,
    )
    esc = escalate(dataset, bp_accuracy, config.max_divisions, grid)
    mem: MemoryReport = memory_counts(dataset.max_length, config.reservoir.n_nodes, dataset.n_classes)
    report = ExperimentReport(
        dataset=dataset.name,
        bp_accuracy=bp_accuracy,
        bp_seconds=bp_seconds,
        grid_reached=esc.reached,
        grid_divisions=esc.divisions,
        grid_accuracy=esc.result.best.test_accuracy,
        grid_seconds=esc.seconds,
        grid_cells=esc.cells_evaluated,
        memory=mem.to_dict(),
        A=model.params.A,
        B=model.params.B,
        beta=model.beta,
        host=host_metadata(),
    )
    return report, model, esc
