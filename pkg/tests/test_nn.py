"""Dense-network library: gradients, training dynamics, persistence."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from restune import (
    DimensionError,
    MlpModel,
    ModelFormatError,
    TrainConfig,
    TrainingDivergenceError,
    forward,
    gradient,
    init_model,
)
from restune.nn import (
    Layer,
    flatten_params,
    forward_batch,
    load_model,
    model_from_doc,
    model_to_doc,
    save_model,
    set_flat_params,
    train_sgd,
)


def _loss(model, x, y, lam):
    pred = forward(model, x)
    reg = sum(
        float(np.sum(l.weights**2) + np.sum(l.biases**2)) for l in model.layers
    )
    return float(np.sum((pred - y) ** 2)) + lam * reg


def _fd_gradient(model, x, y, lam, eps=1e-6):
    theta = flatten_params(model)
    out = np.empty_like(theta)
    for i in range(theta.size):
        t_plus = theta.copy()
        t_plus[i] += eps
        set_flat_params(model, t_plus)
        f_plus = _loss(model, x, y, lam)
        t_minus = theta.copy()
        t_minus[i] -= eps
        set_flat_params(model, t_minus)
        f_minus = _loss(model, x, y, lam)
        out[i] = (f_plus - f_minus) / (2 * eps)
    set_flat_params(model, theta)
    return out


@settings(max_examples=25)
@given(st.integers(0, 10_000), st.floats(0.0, 0.1))
def test_gradient_matches_finite_differences(seed, lam):
    rng = np.random.default_rng(seed)
    depth = int(rng.integers(1, 4))
    dims = [int(rng.integers(1, 6)) for _ in range(depth + 1)]
    acts = [str(rng.choice(["relu", "tanh", "identity"])) for _ in range(depth)]
    model = init_model(dims, acts, seed=seed)
    # Randomize every parameter: the zero-bias init can land a relu
    # pre-activation exactly on its kink, where finite differences and the
    # subgradient convention legitimately disagree.
    set_flat_params(model, 0.5 * rng.normal(size=model.n_params()))
    x = rng.normal(size=dims[0])
    y = rng.normal(size=dims[-1])
    g = gradient(model, x, y, l2_lambda=lam)
    fd = _fd_gradient(model, x, y, lam)
    denom = np.maximum(np.abs(fd), 1e-3)
    assert np.max(np.abs(g - fd) / denom) < 1e-4


def test_init_distribution_and_dims():
    model = init_model([10, 7, 2], ["relu", "tanh"], seed=0)
    assert model.dims == [10, 7, 2]
    assert model.activations == ["relu", "tanh"]
    first = model.layers[0]
    bound = 1.0 / np.sqrt(10)
    assert np.all(np.abs(first.weights) <= bound)
    assert np.all(first.biases == 0.0)
    assert model.n_params() == 10 * 7 + 7 + 7 * 2 + 2


def test_init_is_seeded():
    a = init_model([5, 4, 1], ["relu", "tanh"], seed=3)
    b = init_model([5, 4, 1], ["relu", "tanh"], seed=3)
    c = init_model([5, 4, 1], ["relu", "tanh"], seed=4)
    assert np.array_equal(a.layers[0].weights, b.layers[0].weights)
    assert not np.array_equal(a.layers[0].weights, c.layers[0].weights)


def test_forward_batch_matches_single():
    model = init_model([3, 5, 2], ["relu", "tanh"], seed=1)
    xs = np.random.default_rng(2).normal(size=(6, 3))
    batched = forward_batch(model, xs)
    assert batched.shape == (6, 2)
    for i in range(6):
        assert np.allclose(batched[i], forward(model, xs[i]))


def test_unknown_activation_rejected():
    with pytest.raises(ValueError):
        init_model([2, 2], ["softplus"], seed=0)


def test_layer_shape_validation():
    with pytest.raises(DimensionError):
        Layer(weights=np.zeros((2, 3)), biases=np.zeros(5), activation="relu")


def test_train_sgd_fits_linear_map():
    rng = np.random.default_rng(7)
    w_true = np.array([[1.5, -2.0]])
    x = rng.normal(size=(200, 2))
    y = x @ w_true.T
    model = init_model([2, 1], ["identity"], seed=0)
    cfg = TrainConfig(epochs=60, batch_size=20, learning_rate=0.05, seed=0)
    trained = train_sgd(model, (x, y), cfg=cfg)
    assert model.loss_history == []  # training returns a copy, input untouched
    assert len(trained.loss_history) == 60
    assert trained.loss_history[-1] < 1e-3
    assert np.allclose(trained.layers[0].weights, w_true, atol=0.05)


def test_loss_history_decreases_overall():
    rng = np.random.default_rng(8)
    x = rng.normal(size=(100, 4))
    y = np.tanh(x @ rng.normal(size=(4, 2)))
    model = init_model([4, 8, 2], ["relu", "tanh"], seed=1)
    cfg = TrainConfig(epochs=30, batch_size=25, learning_rate=0.02, seed=1)
    trained = train_sgd(model, (x, y), cfg=cfg)
    assert trained.loss_history[-1] < trained.loss_history[0]


def test_strong_l2_shrinks_weights():
    rng = np.random.default_rng(9)
    x = rng.normal(size=(50, 3))
    y = rng.normal(size=(50, 1))
    model = init_model([3, 1], ["identity"], seed=2)
    cfg = TrainConfig(epochs=200, batch_size=50, learning_rate=0.05, l2_lambda=5.0, seed=0)
    trained = train_sgd(model, (x, y), cfg=cfg)
    assert np.max(np.abs(trained.layers[0].weights)) < 0.05


def test_lr_decay_schedule_changes_result():
    rng = np.random.default_rng(10)
    x = rng.normal(size=(60, 2))
    y = rng.normal(size=(60, 1))
    base = {"epochs": 20, "batch_size": 20, "learning_rate": 0.05, "seed": 3}
    t1 = train_sgd(init_model([2, 1], ["identity"], seed=5), (x, y), cfg=TrainConfig(**base))
    t2 = train_sgd(
        init_model([2, 1], ["identity"], seed=5),
        (x, y),
        cfg=TrainConfig(**base, lr_decay_fraction=0.5, lr_decay_period_epochs=2),
    )
    assert not np.array_equal(t1.layers[0].weights, t2.layers[0].weights)


def test_masked_entries_never_update():
    mask = np.array([[1.0, 0.0], [0.0, 1.0]])
    layer = Layer(
        weights=np.array([[0.3, 0.0], [0.0, -0.2]]),
        biases=np.zeros(2),
        activation="identity",
        mask=mask,
    )
    model = MlpModel(layers=[layer])
    frozen = model.layers[0].weights.copy()
    rng = np.random.default_rng(11)
    x = rng.normal(size=(40, 2))
    y = rng.normal(size=(40, 2))
    cfg = TrainConfig(epochs=10, batch_size=10, learning_rate=0.05, seed=0)
    trained = train_sgd(model, (x, y), cfg=cfg)
    w = trained.layers[0].weights
    assert w[0, 1] == frozen[0, 1] == 0.0
    assert w[1, 0] == frozen[1, 0] == 0.0
    assert w[0, 0] != frozen[0, 0]
    assert w[1, 1] != frozen[1, 1]


def test_mask_does_not_alter_forward_or_gradient():
    # The mask constrains updates only; forward and gradient treat weights
    # as-is, which keeps gradient checking uniform.
    layer = Layer(
        weights=np.array([[0.5, 0.25]]),
        biases=np.zeros(1),
        activation="identity",
        mask=np.array([[1.0, 0.0]]),
    )
    model = MlpModel(layers=[layer])
    assert forward(model, [1.0, 1.0])[0] == pytest.approx(0.75)
    g = gradient(model, [1.0, 1.0], [0.0])
    assert g[1] != 0.0  # masked weight still has a well-defined gradient


@pytest.mark.filterwarnings("ignore:overflow encountered")
def test_training_divergence_detected():
    rng = np.random.default_rng(12)
    x = rng.normal(size=(50, 2)) * 10
    y = rng.normal(size=(50, 1)) * 10
    model = init_model([2, 1], ["identity"], seed=6)
    cfg = TrainConfig(epochs=200, batch_size=50, learning_rate=50.0, seed=0)
    with pytest.raises(TrainingDivergenceError) as err:
        train_sgd(model, (x, y), cfg=cfg)
    assert err.value.epoch >= 0


def test_unknown_loss_rejected():
    model = init_model([2, 1], ["identity"], seed=0)
    cfg = TrainConfig(epochs=1, batch_size=1, learning_rate=0.01, seed=0)
    with pytest.raises(ValueError):
        train_sgd(model, (np.zeros((2, 2)), np.zeros((2, 1))), loss="huber", cfg=cfg)


def test_train_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(epochs=0, batch_size=1, learning_rate=0.1)
    with pytest.raises(ValueError):
        TrainConfig(epochs=1, batch_size=0, learning_rate=0.1)
    with pytest.raises(ValueError):
        TrainConfig(epochs=1, batch_size=1, learning_rate=-0.1)


def test_same_seed_same_training():
    rng = np.random.default_rng(13)
    x = rng.normal(size=(30, 3))
    y = rng.normal(size=(30, 1))
    cfg = TrainConfig(epochs=5, batch_size=10, learning_rate=0.05, seed=9)
    m1 = init_model([3, 4, 1], ["relu", "identity"], seed=4)
    m2 = init_model([3, 4, 1], ["relu", "identity"], seed=4)
    train_sgd(m1, (x, y), cfg=cfg)
    train_sgd(m2, (x, y), cfg=cfg)
    for l1, l2 in zip(m1.layers, m2.layers):
        assert np.array_equal(l1.weights, l2.weights)
        assert np.array_equal(l1.biases, l2.biases)


def test_save_load_roundtrip(tmp_path):
    model = init_model([3, 5, 2], ["relu", "tanh"], seed=7)
    model.layers[0].mask = np.ones_like(model.layers[0].weights)
    path = tmp_path / "model.json"
    save_model(model, path)
    loaded = load_model(path)
    x = np.array([0.3, -1.2, 0.8])
    assert np.array_equal(forward(model, x), forward(loaded, x))
    assert loaded.layers[0].mask is not None


def test_model_doc_rejects_bad_format():
    model = init_model([2, 1], ["identity"], seed=0)
    doc = model_to_doc(model)
    doc["format"] = "something-else"
    with pytest.raises(ModelFormatError):
        model_from_doc(doc)
