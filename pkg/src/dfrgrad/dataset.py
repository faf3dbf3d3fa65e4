"""Dataset container, JSON I/O, synthetic generators and standardization."""

import json
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from . import rng


class DatasetError(ValueError):
    """Raised when a dataset file or object violates the container format."""


@dataclass(frozen=True)
class Sample:
    label: int
    series: np.ndarray  # (T, N_u)

    @property
    def length(self) -> int:
        return self.series.shape[0]


@dataclass(frozen=True)
class Dataset:
    name: str
    n_features: int
    n_classes: int
    train: Tuple[Sample, ...]
    test: Tuple[Sample, ...]

    def __post_init__(self):
        if self.n_classes < 2:
            raise DatasetError("n_classes must be >= 2")
        if self.n_features < 1:
            raise DatasetError("n_features must be >= 1")
        for split in ("train", "test"):
            samples = getattr(self, split)
            if not samples:
                raise DatasetError(f"{split} split is empty")
            for i, s in enumerate(samples):
                _check_sample(s, self.n_features, self.n_classes, split, i)

    @property
    def max_length(self) -> int:
        return max(s.length for s in self.train + self.test)


@dataclass(frozen=True)
class NormStats:
    mean: np.ndarray
    std: np.ndarray


@dataclass(frozen=True)
class SynthSpec:
    task: str = "frequency-pair"
    per_class: int = 50
    length: int = 64
    n_features: int = 1
    noise: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.task not in ("frequency-pair", "amplitude-pair"):
            raise ValueError(f"unknown task {self.task!r}")
        if self.length < 8:
            raise ValueError("series length must be >= 8")
        if self.noise < 0:
            raise ValueError("noise must be >= 0")
        if self.per_class < 1 or self.n_features < 1:
            raise ValueError("per_class and n_features must be >= 1")


def _check_sample(s, n_features, n_classes, split, i):
    where = f"{split} sample {i}"
    if not isinstance(s.label, (int, np.integer)) or isinstance(s.label, bool):
        raise DatasetError(f"{where}: label must be an integer")
    if not 0 <= s.label < n_classes:
        raise DatasetError(f"{where}: label out of range ({s.label} not in [0, {n_classes}))")
    if s.series.ndim != 2 or s.series.shape[0] < 1:
        raise DatasetError(f"{where}: series must be a non-empty T x N_u matrix")
    if s.series.shape[1] != n_features:
        raise DatasetError(f"{where}: ragged row, expected {n_features} features")
    if not np.all(np.isfinite(s.series)):
        raise DatasetError(f"{where}: non-finite value in series")


def _parse_sample(obj, split, i):
    where = f"{split} sample {i}"
    try:
        label = obj["label"]
        rows = obj["series"]
    except (TypeError, KeyError) as exc:
        raise DatasetError(f"{where}: missing key {exc}") from None
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise DatasetError(f"{where}: series must be a list of rows")
    widths = {len(r) for r in rows}
    if len(widths) > 1:
        raise DatasetError(f"{where}: ragged row")
    try:
        series = np.array(rows, dtype=np.float64)
    except (TypeError, ValueError):
        raise DatasetError(f"{where}: non-numeric entry") from None
    if series.ndim == 1:  # empty series
        series = series.reshape(0, 0)
    return Sample(label=label, series=series)


def from_dict(doc) -> Dataset:
    try:
        name = doc["name"]
        n_features = doc["n_features"]
        n_classes = doc["n_classes"]
        splits = doc["splits"]
        train_raw, test_raw = splits["train"], splits["test"]
    except (TypeError, KeyError) as exc:
        raise DatasetError(f"missing key {exc}") from None
    train = tuple(_parse_sample(o, "train", i) for i, o in enumerate(train_raw))
    test = tuple(_parse_sample(o, "test", i) for i, o in enumerate(test_raw))
    return Dataset(str(name), int(n_features), int(n_classes), train, test)


def to_dict(ds: Dataset) -> dict:
    def enc(s):
        return {"label": int(s.label), "series": s.series.tolist()}

    return {
        "name": ds.name,
        "n_features": ds.n_features,
        "n_classes": ds.n_classes,
        "splits": {"train": [enc(s) for s in ds.train], "test": [enc(s) for s in ds.test]},
    }


def _reject_constant(token):
    raise DatasetError(f"non-finite number {token} not permitted")


def load_dataset(path) -> Dataset:
    """Read a dataset from the JSON container format.

    Raises:
        DatasetError: on parse failure or any invariant violation; messages
            name the offending split and sample index.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise DatasetError(f"parse failure: {exc}") from None
    return from_dict(doc)


def dumps(ds: Dataset) -> str:
    """Canonical serialization (key order fixed, shortest round-trip floats)."""
    return json.dumps(to_dict(ds), allow_nan=False, separators=(",", ":")) + "\n"


def write_dataset(ds: Dataset, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(ds))


def generate_synthetic(spec: SynthSpec) -> Dataset:
    """Two-class sinusoid task, a pure function of `spec`.

    ``frequency-pair`` uses 2 and 5 cycles per series at unit amplitude;
    ``amplitude-pair`` uses 3 cycles at amplitudes 0.5 and 1.0. Every feature
    carries the same clean signal plus independent Gaussian noise.
    """
    T, nu = spec.length, spec.n_features
    k = np.arange(T, dtype=np.float64)
    if spec.task == "frequency-pair":
        clean = [np.sin(2.0 * np.pi * f * k / T) for f in (2.0, 5.0)]
    else:
        base = np.sin(2.0 * np.pi * 3.0 * k / T)
        clean = [0.5 * base, 1.0 * base]

    n_per_split = 2 * spec.per_class
    total = 2 * n_per_split * T * nu
    noise = rng.normal(spec.seed, total).reshape(2, n_per_split, T, nu) * spec.noise

    splits = []
    for s in range(2):
        samples = []
        for i in range(n_per_split):
            label = i % 2
            series = np.repeat(clean[label][:, None], nu, axis=1)
            if spec.noise > 0:
                series = series + noise[s, i]
            samples.append(Sample(label=label, series=series))
        splits.append(tuple(samples))
    name = f"synth-{spec.task}-s{spec.seed}"
    return Dataset(name, nu, 2, splits[0], splits[1])


def normalize(ds: Dataset) -> Tuple[Dataset, NormStats]:
    """Standardize each feature with train-split statistics.

    Constant features (std 0) are passed through untouched.
    """
    stacked = np.concatenate([s.series for s in ds.train], axis=0)
    mean = stacked.mean(axis=0)
    std = stacked.std(axis=0)
    active = std > 0
    shift = np.where(active, mean, 0.0)
    scale = np.where(active, std, 1.0)

    def apply(samples):
        return tuple(Sample(s.label, (s.series - shift) / scale) for s in samples)

    out = Dataset(ds.name, ds.n_features, ds.n_classes, apply(ds.train), apply(ds.test))
    return out, NormStats(mean=mean, std=std)


def apply_stats(samples: Sequence[Sample], stats: NormStats) -> List[Sample]:
    active = stats.std > 0
    shift = np.where(active, stats.mean, 0.0)
    scale = np.where(active, stats.std, 1.0)
    return [Sample(s.label, (s.series - shift) / scale) for s in samples]
