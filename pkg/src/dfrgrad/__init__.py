"""Gradient-based training of modular delayed-feedback reservoirs.

Typical use::

    from dfrgrad import SynthSpec, generate_synthetic, normalize, train, evaluate

    data, _ = normalize(generate_synthetic(SynthSpec(noise=0.05)))
    model = train(data)
    accuracy, loss = evaluate(model, data.test)
"""

from .backprop import OpCounter, ReservoirGrads, finite_diff_grads, full_bptt, truncated_bp
from .dataset import (
    Dataset,
    DatasetError,
    NormStats,
    Sample,
    SynthSpec,
    generate_synthetic,
    load_dataset,
    normalize,
    write_dataset,
)
from .dprr import DprrAccumulator, accumulate_dprr, dprr_index, reservoir_features
from .experiment import ExperimentConfig, ExperimentReport, run_experiment
from .gridsearch import GridConfig, GridResult, escalate, grid_points, grid_search
from .head import DEFAULT_BETAS, OutputHead, RidgeError, forward_head, head_gradients, loss, ridge_fit, select_beta
from .memory import MemoryReport, memory_counts
from .reservoir import (
    LINEAR,
    DivergenceError,
    Mask,
    NonlinearityKind,
    ReservoirParams,
    ReservoirTrace,
    generate_mask,
    run_reservoir,
)
from .trainer import ReservoirConfig, TrainConfig, TrainedModel, evaluate, lr_schedule, train

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
