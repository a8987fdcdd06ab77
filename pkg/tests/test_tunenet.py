"""Residual estimator construction, prediction, and the tuning loop."""

import numpy as np
import pytest

from restune import (
    DimensionError,
    MissingArtifactError,
    Observation,
    ParameterDomainError,
    SimulationError,
    predict_residual,
    resample,
    scalar_space,
    tune,
)
from restune.tunenet import (
    ChannelNorm,
    build_tunenet,
    load_tunenet,
    save_tunenet,
)


def _obs(channels, rate=60.0):
    return Observation(np.asarray(channels, dtype=np.float64), rate)


@pytest.fixture()
def small_model():
    return build_tunenet(obs_p_dim=8, obs_t_dim=8, param_dim=1, seed=0, obs_p_channels=2, obs_t_channels=2)


def test_build_shapes(small_model):
    net = small_model.net
    assert net.input_dim == 16
    assert net.layers[0].out_dim == 64
    assert net.output_dim == 1
    assert net.activations == ["relu", "relu", "tanh"]


def test_first_layer_mask_is_block_diagonal(small_model):
    mask = small_model.net.layers[0].mask
    assert mask is not None
    assert np.all(mask[:32, :8] == 1.0)
    assert np.all(mask[:32, 8:] == 0.0)
    assert np.all(mask[32:, :8] == 0.0)
    assert np.all(mask[32:, 8:] == 1.0)
    # Initial weights respect the mask structurally.
    w = small_model.net.layers[0].weights
    assert np.all(w[mask == 0.0] == 0.0)


def test_predict_residual_bounded_by_scale(small_model):
    rng = np.random.default_rng(0)
    o_p = _obs(rng.normal(size=(2, 4)))
    o_t = _obs(rng.normal(size=(2, 4)))
    delta = predict_residual(small_model, o_p, o_t)
    assert delta.shape == (1,)
    assert np.all(np.abs(delta) <= small_model.output_scale)


def test_predict_residual_zero_network(small_model):
    for layer in small_model.net.layers:
        layer.weights[:] = 0.0
        layer.biases[:] = 0.0
    o = _obs(np.random.default_rng(1).normal(size=(2, 4)))
    assert np.array_equal(predict_residual(small_model, o, o), [0.0])


def test_predict_residual_validates_shapes(small_model):
    o_ok = _obs(np.zeros((2, 4)))
    o_bad = _obs(np.zeros((2, 5)))
    with pytest.raises(DimensionError):
        predict_residual(small_model, o_ok, o_bad)


def test_channel_norm_no_clipping():
    norm = ChannelNorm(mins=np.array([0.0]), widths=np.array([2.0]))
    inside = norm.apply(_obs([[0.0, 1.0, 2.0]]))
    assert np.allclose(inside, [0.0, 0.5, 1.0])
    outside = norm.apply(_obs([[-2.0, 4.0, 2.0]]))
    # Out-of-range values extend linearly instead of saturating.
    assert outside[0] == pytest.approx(-1.0)
    assert outside[1] == pytest.approx(2.0)


def test_channel_norm_fit_bounds_training_data():
    obs = [_obs([[1.0, 3.0], [10.0, 30.0]]), _obs([[2.0, 5.0], [20.0, 0.0]])]
    norm = ChannelNorm.fit(obs)
    for o in obs:
        v = norm.apply(o)
        assert np.all(v >= -1e-12)
        assert np.all(v <= 1.0 + 1e-12)


def test_resample_identity():
    obs = _obs([[1.0, 2.0, 3.0]])
    out = resample(obs, 3)
    assert np.array_equal(out.channels, obs.channels)
    assert out.sample_rate == obs.sample_rate


def test_resample_linear_upsample():
    out = resample(_obs([[0.0, 1.0]], rate=10.0), 3)
    assert np.allclose(out.channels, [[0.0, 0.5, 1.0]])
    # Same time span covered by more samples -> higher sample rate.
    assert out.sample_rate == pytest.approx(20.0)


def test_resample_downsample_endpoints_kept():
    out = resample(_obs([[0.0, 1.0, 2.0, 3.0, 4.0]]), 3)
    assert np.allclose(out.channels, [[0.0, 2.0, 4.0]])


def test_resample_sine_accuracy():
    t = np.linspace(0.0, 1.0, 400)
    obs = _obs([np.sin(2 * np.pi * 3 * t)], rate=400.0)
    out = resample(obs, 150)
    t2 = np.linspace(0.0, 1.0, 150)
    assert np.max(np.abs(out.channels[0] - np.sin(2 * np.pi * 3 * t2))) < 2e-3


def test_resample_rejects_degenerate_length():
    with pytest.raises(DimensionError):
        resample(_obs([[0.0, 1.0]]), 1)


class _CountingSim:
    def __init__(self, make_obs):
        self.calls = 0
        self.make_obs = make_obs

    def __call__(self, values):
        self.calls += 1
        return self.make_obs(values)


def test_tune_loop_counts_and_clamps(tiny_ball_model, tiny_ball):
    sample = tiny_ball.test[0]
    bounds = scalar_space(0.0, 1.0)
    simlike = _CountingSim(lambda v: sample.o_p)
    result = tune(sample.o_t, simlike, sample.zeta_p, tiny_ball_model, K=4, bounds=bounds)
    assert simlike.calls == 4
    assert result.rollouts_used == 4
    assert result.estimates.shape == (5, 1)
    assert np.allclose(result.estimates[0], np.asarray(sample.zeta_p, dtype=float))
    assert np.array_equal(result.final, result.estimates[-1])
    for est in result.estimates:
        assert bounds.contains(est)
    # Each step applies the predicted residual, then clamps.
    for k in range(4):
        expected = bounds.clamp(result.estimates[k] + result.deltas[k])
        assert np.allclose(result.estimates[k + 1], expected)


def test_tune_rejects_out_of_bounds_start(tiny_ball_model, tiny_ball):
    sample = tiny_ball.test[0]
    with pytest.raises(ParameterDomainError):
        tune(
            sample.o_t,
            lambda v: sample.o_p,
            np.array([1.5]),
            tiny_ball_model,
            K=2,
            bounds=scalar_space(0.0, 1.0),
        )


def test_tune_requires_positive_iterations(tiny_ball_model, tiny_ball):
    sample = tiny_ball.test[0]
    with pytest.raises(ValueError):
        tune(
            sample.o_t,
            lambda v: sample.o_p,
            sample.zeta_p,
            tiny_ball_model,
            K=0,
            bounds=scalar_space(0.0, 1.0),
        )


def test_tune_wraps_simulator_failures(tiny_ball_model, tiny_ball):
    sample = tiny_ball.test[0]

    def exploding(_values):
        raise RuntimeError("backend crashed")

    with pytest.raises(SimulationError) as err:
        tune(
            sample.o_t,
            exploding,
            sample.zeta_p,
            tiny_ball_model,
            K=3,
            bounds=scalar_space(0.0, 1.0),
        )
    assert err.value.index == 0


def test_tune_resamples_target_each_iteration(tiny_ball_model, tiny_ball):
    # A target observed at a different length than the proposal must still
    # tune without shape errors.
    sample = tiny_ball.test[0]
    short_target = resample(sample.o_t, 123)
    sim_obs = _CountingSim(lambda v: sample.o_p)
    result = tune(
        short_target, sim_obs, sample.zeta_p, tiny_ball_model, K=2, bounds=scalar_space(0.0, 1.0)
    )
    assert sim_obs.calls == 2
    assert result.estimates.shape == (3, 1)


def test_save_load_roundtrip(tmp_path, tiny_ball_model, tiny_ball):
    path = tmp_path / "model.json"
    save_tunenet(tiny_ball_model, path)
    loaded = load_tunenet(path)
    s = tiny_ball.test[0]
    assert np.array_equal(
        predict_residual(tiny_ball_model, s.o_p, s.o_t),
        predict_residual(loaded, s.o_p, s.o_t),
    )
    assert np.array_equal(loaded.output_scale, tiny_ball_model.output_scale)


def test_load_missing_sidecar(tmp_path, tiny_ball_model):
    path = tmp_path / "model.json"
    save_tunenet(tiny_ball_model, path)
    (tmp_path / "model.json.meta").unlink()
    with pytest.raises(MissingArtifactError):
        load_tunenet(path)


def test_load_missing_model(tmp_path):
    with pytest.raises(MissingArtifactError):
        load_tunenet(tmp_path / "nope.json")
