import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dfrgrad import dataset as D
from dfrgrad.dataset import Dataset, DatasetError, Sample, SynthSpec


def minimal_doc():
    return {
        "name": "tiny",
        "n_features": 1,
        "n_classes": 2,
        "splits": {
            "train": [{"label": 0, "series": [[0.5], [1.0]]}],
            "test": [{"label": 1, "series": [[2.0]]}],
        },
    }


def write(tmp_path, doc, name="d.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def test_load_minimal_file(tmp_path):
    ds = D.load_dataset(write(tmp_path, minimal_doc()))
    assert ds.n_classes == 2 and ds.n_features == 1
    assert len(ds.train) == 1 and len(ds.test) == 1
    np.testing.assert_array_equal(ds.train[0].series, [[0.5], [1.0]])
    assert ds.max_length == 2


def test_label_out_of_range_names_sample(tmp_path):
    doc = minimal_doc()
    doc["splits"]["test"].append({"label": 5, "series": [[1.0]]})
    with pytest.raises(DatasetError, match="label out of range") as err:
        D.load_dataset(write(tmp_path, doc))
    assert "test sample 1" in str(err.value)


def test_ragged_row_rejected(tmp_path):
    doc = minimal_doc()
    doc["n_features"] = 2
    doc["splits"]["train"][0]["series"] = [[1.0, 2.0], [3.0]]
    with pytest.raises(DatasetError, match="train sample 0: ragged row"):
        D.load_dataset(write(tmp_path, doc))


def test_wrong_width_rejected(tmp_path):
    doc = minimal_doc()
    doc["splits"]["train"][0]["series"] = [[1.0, 2.0]]
    with pytest.raises(DatasetError, match="ragged row"):
        D.load_dataset(write(tmp_path, doc))


@pytest.mark.parametrize("token", ["NaN", "Infinity", "-Infinity"])
def test_non_finite_numbers_rejected(tmp_path, token):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(minimal_doc()).replace("0.5", token))
    with pytest.raises(DatasetError):
        D.load_dataset(path)


@pytest.mark.parametrize(
    "mutate, message",
    [
        (lambda d: d.pop("n_classes"), "missing key"),
        (lambda d: d.update(n_classes=1), "n_classes"),
        (lambda d: d["splits"].update(train=[]), "train split is empty"),
        (lambda d: d["splits"]["train"][0].update(series=[]), "non-empty"),
        (lambda d: d["splits"]["train"][0].update(label=0.5), "integer"),
    ],
)
def test_invariant_violations(tmp_path, mutate, message):
    doc = minimal_doc()
    mutate(doc)
    with pytest.raises(DatasetError, match=message):
        D.load_dataset(write(tmp_path, doc))


def test_parse_failure(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{")
    with pytest.raises(DatasetError, match="parse failure"):
        D.load_dataset(path)


def test_write_load_round_trip_is_byte_identical(tmp_path):
    ds = D.generate_synthetic(SynthSpec(per_class=3, length=10, n_features=2, noise=0.3, seed=9))
    first = tmp_path / "a.json"
    D.write_dataset(ds, first)
    again = D.load_dataset(first)
    second = tmp_path / "b.json"
    D.write_dataset(again, second)
    assert first.read_bytes() == second.read_bytes()
    for a, b in zip(ds.train + ds.test, again.train + again.test):
        assert a.label == b.label
        np.testing.assert_array_equal(a.series, b.series)


def test_synthetic_is_deterministic():
    spec = SynthSpec(noise=0.1, seed=4)
    assert D.dumps(D.generate_synthetic(spec)) == D.dumps(D.generate_synthetic(spec))
    assert D.dumps(D.generate_synthetic(spec)) != D.dumps(D.generate_synthetic(SynthSpec(noise=0.1, seed=5)))


def test_noiseless_frequency_pair_is_exact():
    ds = D.generate_synthetic(SynthSpec(noise=0.0, length=64, n_features=2))
    k = np.arange(64)
    for s in ds.train + ds.test:
        f = 2 if s.label == 0 else 5
        expected = np.sin(2 * np.pi * f * k / 64)
        assert np.max(np.abs(s.series - expected[:, None])) == 0.0


def test_noiseless_amplitude_pair():
    ds = D.generate_synthetic(SynthSpec(task="amplitude-pair", noise=0.0, length=30))
    base = np.sin(2 * np.pi * 3 * np.arange(30) / 30)
    for s in ds.train + ds.test:
        amplitude = 0.5 if s.label == 0 else 1.0
        np.testing.assert_array_equal(s.series[:, 0], amplitude * base)


def test_shape_and_balance():
    ds = D.generate_synthetic(SynthSpec(per_class=50, length=64))
    assert len(ds.train) == len(ds.test) == 100
    assert sum(s.label for s in ds.train) == 50
    assert all(s.series.shape == (64, 1) for s in ds.train)


def test_nearest_centroid_oracle_reaches_095():
    ds = D.generate_synthetic(SynthSpec(per_class=50, length=64, noise=0.1))
    X = np.stack([s.series.ravel() for s in ds.train])
    y = np.array([s.label for s in ds.train])
    centroids = np.stack([X[y == c].mean(axis=0) for c in (0, 1)])
    Xt = np.stack([s.series.ravel() for s in ds.test])
    yt = np.array([s.label for s in ds.test])
    pred = np.argmin(((Xt[:, None, :] - centroids[None]) ** 2).sum(axis=2), axis=1)
    assert np.mean(pred == yt) >= 0.95


def test_synth_spec_validation():
    with pytest.raises(ValueError):
        SynthSpec(length=7)
    with pytest.raises(ValueError):
        SynthSpec(noise=-0.1)
    with pytest.raises(ValueError):
        SynthSpec(task="chirp")


def _dataset(train_values, test_values):
    def mk(values):
        return tuple(Sample(i % 2, np.asarray(v, dtype=float)) for i, v in enumerate(values))

    return Dataset("n", np.asarray(train_values[0]).shape[1], 2, mk(train_values), mk(test_values))


def test_normalize_hand_example():
    ds = _dataset([[[1.0]], [[3.0]]], [[[2.0]]])
    out, stats = D.normalize(ds)
    assert [s.series[0, 0] for s in out.train] == [-1.0, 1.0]
    assert out.test[0].series[0, 0] == 0.0
    assert stats.mean[0] == 2.0 and stats.std[0] == 1.0


def test_constant_feature_untouched():
    ds = _dataset([[[4.0, 1.0]], [[4.0, 3.0]]], [[[4.0, 7.0]]])
    out, stats = D.normalize(ds)
    assert [s.series[0, 0] for s in out.train + out.test] == [4.0, 4.0, 4.0]
    assert stats.std[0] == 0.0


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=10**6), st.integers(min_value=1, max_value=3))
def test_normalized_train_moments(seed, nu):
    rs = np.random.default_rng(seed)
    train = [rs.normal(3.0, 5.0, size=(int(rs.integers(1, 6)), nu)) for _ in range(6)]
    test = [rs.normal(size=(2, nu))]
    out, _ = D.normalize(_dataset(train, test))
    stacked = np.concatenate([s.series for s in out.train])
    np.testing.assert_allclose(stacked.mean(axis=0), 0.0, atol=1e-10)
    np.testing.assert_allclose(stacked.std(axis=0), 1.0, atol=1e-10)
    assert [s.label for s in out.train] == [i % 2 for i in range(6)]
    assert [s.series.shape for s in out.train] == [t.shape for t in train]


def test_apply_stats_matches_normalize():
    ds = D.generate_synthetic(SynthSpec(per_class=4, length=12, n_features=2, seed=1))
    out, stats = D.normalize(ds)
    again = D.apply_stats(ds.test, stats)
    for a, b in zip(out.test, again):
        np.testing.assert_array_equal(a.series, b.series)
