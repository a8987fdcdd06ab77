"""Paired-dataset generation, invariants, and the binary file format."""

import numpy as np
import pytest

from restune import (
    DatasetFormatError,
    DatasetSpec,
    generate_pairs,
    load_dataset,
    residual_histogram,
    save_dataset,
    scalar_space,
)
from restune.datasets import dataset_to_csv, sample_residuals


def _spec(**overrides):
    base = dict(
        scenario="ball",
        n_train=6,
        n_val=2,
        n_test=2,
        proposed_range=scalar_space(0.3, 0.7),
        target_range=scalar_space(0.3, 0.7),
        seed=42,
    )
    base.update(overrides)
    return DatasetSpec(**base)


@pytest.fixture(scope="module")
def small():
    return generate_pairs(_spec())


def test_sizes_and_dtype(small):
    assert (len(small.train), len(small.val), len(small.test)) == (6, 2, 2)
    s = small.train[0]
    assert s.zeta_p.dtype == np.float32
    assert s.zeta_t.dtype == np.float32
    assert s.delta.dtype == np.float32
    assert s.o_p.channels.dtype == np.float32
    assert s.o_t.channels.dtype == np.float32
    assert s.o_p.channels.shape == (3, 400)


def test_delta_invariant_exact(small):
    for s in small.samples:
        assert np.array_equal(s.delta, s.zeta_t - s.zeta_p)


def test_params_within_ranges(small):
    spec = small.spec
    for s in small.samples:
        assert spec.proposed_range.contains(s.zeta_p)
        assert spec.target_range.contains(s.zeta_t)


def test_generation_is_deterministic():
    a = generate_pairs(_spec())
    b = generate_pairs(_spec())
    for sa, sb in zip(a.samples, b.samples):
        assert np.array_equal(sa.zeta_p, sb.zeta_p)
        assert np.array_equal(sa.o_t.channels, sb.o_t.channels)


def test_split_draws_are_independent_of_other_split_sizes():
    # Growing the test split must not change the training pairs.
    base = generate_pairs(_spec())
    bigger = generate_pairs(_spec(n_test=5))
    for sa, sb in zip(base.train, bigger.train):
        assert np.array_equal(sa.zeta_p, sb.zeta_p)
        assert np.array_equal(sa.zeta_t, sb.zeta_t)


def test_seed_changes_data():
    a = generate_pairs(_spec())
    b = generate_pairs(_spec(seed=43))
    assert not np.array_equal(a.train[0].zeta_p, b.train[0].zeta_p)


def test_observers_configurable():
    ds = generate_pairs(_spec(n_train=2, n_val=0, n_test=0, observer_t="projected"))
    s = ds.train[0]
    assert s.o_p.channels.shape == (3, 400)  # identity stays 3-channel
    assert s.o_t.channels.shape == (1, 400)  # projected camera is 1-channel


def test_arm_scenario_rejects_projected_observer():
    with pytest.raises(ValueError):
        _spec(scenario="arm", observer_t="projected")


def test_unknown_scenario_rejected():
    with pytest.raises(ValueError):
        _spec(scenario="pendulum")


def test_residual_distribution_is_triangular():
    # |delta| between two uniforms on the same interval has density
    # f(x) = 2/w - 2x/w^2: linearly decreasing from 2/w to 0.
    d = sample_residuals(scalar_space(0.3, 0.7), scalar_space(0.3, 0.7), 40_000, seed=1)
    a = np.abs(np.asarray(d, dtype=np.float64)).ravel()
    assert a.max() <= 0.4
    lo_half = float(np.mean(a < 0.2))
    assert lo_half == pytest.approx(0.75, abs=0.02)


def test_residual_histogram_is_density(small):
    edges, density = residual_histogram(small, bins=10)
    widths = np.diff(edges)
    assert density.shape == (10,)
    assert float(np.sum(density * widths)) == pytest.approx(1.0)


def test_residual_histogram_accepts_arrays():
    edges, density = residual_histogram(np.array([0.1, 0.1, 0.3]), bins=2, value_range=(0.0, 0.4))
    assert np.allclose(edges, [0.0, 0.2, 0.4])
    assert density[0] > density[1]


def test_save_load_roundtrip_bit_exact(tmp_path, small):
    path = tmp_path / "ds.rtd"
    save_dataset(small, path)
    again = load_dataset(path)
    assert again.spec == small.spec
    for sa, sb in zip(small.samples, again.samples):
        assert np.array_equal(sa.zeta_p, sb.zeta_p)
        assert np.array_equal(sa.zeta_t, sb.zeta_t)
        assert np.array_equal(sa.delta, sb.delta)
        assert np.array_equal(sa.o_p.channels, sb.o_p.channels)
        assert np.array_equal(sa.o_t.channels, sb.o_t.channels)
        assert sa.o_t.sample_rate == sb.o_t.sample_rate


def test_save_is_byte_stable(tmp_path, small):
    p1 = tmp_path / "a.rtd"
    p2 = tmp_path / "b.rtd"
    save_dataset(small, p1)
    save_dataset(small, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_load_rejects_wrong_magic(tmp_path):
    path = tmp_path / "bad.rtd"
    path.write_bytes(b"NOTADSET" + b"\x00" * 64)
    with pytest.raises(DatasetFormatError):
        load_dataset(path)


def test_load_rejects_truncated_payload(tmp_path, small):
    path = tmp_path / "ds.rtd"
    save_dataset(small, path)
    blob = path.read_bytes()
    path.write_bytes(blob[: len(blob) - 100])
    with pytest.raises(DatasetFormatError):
        load_dataset(path)


def test_load_missing_file(tmp_path):
    from restune import MissingArtifactError

    with pytest.raises(MissingArtifactError):
        load_dataset(tmp_path / "absent.rtd")


def test_csv_export(tmp_path, small):
    path = tmp_path / "ds.csv"
    dataset_to_csv(small, path)
    lines = path.read_text().strip().splitlines()
    assert len(lines) == 1 + len(small.samples)
    assert lines[0].startswith("split,index")
