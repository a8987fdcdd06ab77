"""Minimal dense neural-network engine.

Forward pass, exact backpropagation, and mini-batch SGD with L2
regularization and stepped learning-rate decay — everything the residual
estimator and the direct-prediction baseline need, and nothing more.

Weight layout conventions:

* a layer computes ``act(W @ x + b)`` with ``W`` of shape (out, in);
* the flat parameter vector used by :func:`gradient` concatenates, layer by
  layer, the row-major weight matrix followed by the bias vector.

A layer may carry a 0/1 structural mask over its weight matrix.  The mask
constrains *updates* only: entries where the mask is zero receive no gradient
step during training, so weights initialized to zero there stay zero.  The
forward pass and :func:`gradient` ignore the mask.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ModelFormatError, TrainingDivergenceError

ACTIVATIONS = ("relu", "tanh", "identity")

MODEL_FORMAT = "restune-mlp"
MODEL_VERSION = 1


@dataclass
class Layer:
    """One dense layer: weights (out, in), biases (out,), activation tag."""

    weights: np.ndarray
    biases: np.ndarray
    activation: str
    mask: np.ndarray | None = None

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.biases = np.asarray(self.biases, dtype=np.float64)
        if self.weights.ndim != 2 or self.biases.ndim != 1:
            raise DimensionError("weights must be 2-D and biases 1-D")
        if self.weights.shape[0] != self.biases.shape[0]:
            raise DimensionError("bias length must equal weight row count")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.biases))):
            raise ValueError("layer parameters must be finite")
        if self.mask is not None:
            self.mask = np.asarray(self.mask, dtype=np.float64)
            if self.mask.shape != self.weights.shape:
                raise DimensionError("mask shape must equal weights shape")

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]

    def copy(self) -> "Layer":
        return Layer(
            self.weights.copy(),
            self.biases.copy(),
            self.activation,
            None if self.mask is None else self.mask.copy(),
        )


@dataclass
class MlpModel:
    """A stack of dense layers; a plain value type."""

    layers: list[Layer]
    loss_history: list[float] = field(default_factory=list)

    def __post_init__(self):
        if not self.layers:
            raise DimensionError("a model needs at least one layer")
        for a, b in zip(self.layers, self.layers[1:]):
            if a.out_dim != b.in_dim:
                raise DimensionError(
                    f"layer dimension mismatch: {a.out_dim} -> {b.in_dim}"
                )

    @property
    def input_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_dim

    @property
    def dims(self) -> list[int]:
        return [self.input_dim] + [layer.out_dim for layer in self.layers]

    @property
    def activations(self) -> list[str]:
        return [layer.activation for layer in self.layers]

    def n_params(self) -> int:
        return sum(l.weights.size + l.biases.size for l in self.layers)

    def copy(self) -> "MlpModel":
        return MlpModel([l.copy() for l in self.layers], list(self.loss_history))


def _apply_activation(name: str, z: np.ndarray) -> np.ndarray:
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "tanh":
        return np.tanh(z)
    return z


def _activation_grad(name: str, z: np.ndarray, a: np.ndarray) -> np.ndarray:
    if name == "relu":
        return (z > 0.0).astype(np.float64)
    if name == "tanh":
        return 1.0 - a * a
    return np.ones_like(z)


def init_layer(rng: np.random.Generator, in_dim: int, out_dim: int, activation: str) -> Layer:
    """Dense layer with uniform +-1/sqrt(fan_in) weights and zero biases."""
    bound = 1.0 / np.sqrt(in_dim)
    w = rng.uniform(-bound, bound, size=(out_dim, in_dim))
    b = np.zeros(out_dim)
    return Layer(w, b, activation)


def init_model(layer_dims, activations, seed: int) -> MlpModel:
    """Build a model with the given layer sizes and activation tags.

    ``layer_dims`` lists the input size followed by each layer's output size;
    ``activations`` must supply one tag per layer.  Deterministic under seed.
    """
    layer_dims = list(layer_dims)
    activations = list(activations)
    if len(layer_dims) < 2:
        raise DimensionError("layer_dims must list input size plus at least one layer")
    if len(activations) != len(layer_dims) - 1:
        raise DimensionError(
            f"need {len(layer_dims) - 1} activation tags, got {len(activations)}"
        )
    rng = np.random.default_rng(seed)
    layers = [
        init_layer(rng, d_in, d_out, act)
        for d_in, d_out, act in zip(layer_dims, layer_dims[1:], activations)
    ]
    return MlpModel(layers)


def forward_batch(model: MlpModel, x: np.ndarray) -> np.ndarray:
    """Forward pass for a batch: rows of ``x`` are samples."""
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 2 or a.shape[1] != model.input_dim:
        raise DimensionError(
            f"expected input of shape (n, {model.input_dim}), got {a.shape}"
        )
    for layer in model.layers:
        z = a @ layer.weights.T + layer.biases
        a = _apply_activation(layer.activation, z)
    return a


def forward(model: MlpModel, x) -> np.ndarray:
    """Forward pass for a single input vector."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionError("forward expects a 1-D input vector")
    return forward_batch(model, v[np.newaxis, :])[0]


def _backprop(model: MlpModel, x: np.ndarray, y: np.ndarray, l2_lambda: float):
    """Mean-over-batch gradients of sum-of-squares loss + l2 * ||theta||^2.

    Returns (loss, [(dW, db), ...]) where loss is the mean per-sample loss
    including the regularization term.
    """
    n = x.shape[0]
    acts = [x]
    zs = []
    a = x
    for layer in model.layers:
        z = a @ layer.weights.T + layer.biases
        a = _apply_activation(layer.activation, z)
        zs.append(z)
        acts.append(a)

    err = acts[-1] - y
    data_loss = float(np.sum(err * err) / n)
    reg = 0.0
    if l2_lambda:
        reg = l2_lambda * sum(
            float(np.sum(l.weights**2)) + float(np.sum(l.biases**2))
            for l in model.layers
        )
    loss = data_loss + reg

    grads = [None] * len(model.layers)
    delta = 2.0 * err  # d(sum of squares)/d(output)
    for i in range(len(model.layers) - 1, -1, -1):
        layer = model.layers[i]
        delta = delta * _activation_grad(layer.activation, zs[i], acts[i + 1])
        dw = delta.T @ acts[i] / n
        db = delta.sum(axis=0) / n
        if l2_lambda:
            dw = dw + 2.0 * l2_lambda * layer.weights
            db = db + 2.0 * l2_lambda * layer.biases
        grads[i] = (dw, db)
        if i > 0:
            delta = delta @ layer.weights
    return loss, grads


def gradient(model: MlpModel, x, y, l2_lambda: float = 0.0) -> np.ndarray:
    """Exact per-sample loss gradient, flattened layer by layer.

    The per-sample loss is ``||f(x) - y||^2 + l2_lambda * ||theta||^2``; the
    regularizer contributes ``2 * l2_lambda * theta`` exactly.
    """
    xv = np.asarray(x, dtype=np.float64)[np.newaxis, :]
    yv = np.asarray(y, dtype=np.float64)[np.newaxis, :]
    if xv.shape[1] != model.input_dim or yv.shape[1] != model.output_dim:
        raise DimensionError("input/target dimensions do not match the model")
    _, grads = _backprop(model, xv, yv, l2_lambda)
    return np.concatenate([np.concatenate([dw.ravel(), db]) for dw, db in grads])


def flatten_params(model: MlpModel) -> np.ndarray:
    """Model parameters in the same flat order :func:`gradient` uses."""
    return np.concatenate(
        [np.concatenate([l.weights.ravel(), l.biases]) for l in model.layers]
    )


def set_flat_params(model: MlpModel, flat: np.ndarray) -> None:
    """Write a flat parameter vector back into the model, in place."""
    flat = np.asarray(flat, dtype=np.float64)
    if flat.size != model.n_params():
        raise DimensionError("flat parameter vector has the wrong length")
    pos = 0
    for layer in model.layers:
        nw = layer.weights.size
        layer.weights = flat[pos : pos + nw].reshape(layer.weights.shape)
        pos += nw
        nb = layer.biases.size
        layer.biases = flat[pos : pos + nb]
        pos += nb


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for :func:`train_sgd`."""

    epochs: int
    batch_size: int = 50
    learning_rate: float = 1e-2
    l2_lambda: float = 0.0
    lr_decay_fraction: float = 0.0
    lr_decay_period_epochs: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not 0.0 <= self.lr_decay_fraction < 1.0:
            raise ValueError("lr_decay_fraction must lie in [0, 1)")
        if self.lr_decay_period_epochs < 1:
            raise ValueError("lr_decay_period_epochs must be >= 1")
        if self.l2_lambda < 0:
            raise ValueError("l2_lambda must be >= 0")


def train_sgd(model: MlpModel, dataset, loss: str = "mse_with_l2", cfg: TrainConfig = None) -> MlpModel:
    """Mini-batch SGD on mean ``||f(x) - y||^2 + l2 * ||theta||^2``.

    ``dataset`` is an ``(inputs, targets)`` pair of 2-D arrays with samples
    as rows.  Epochs are shuffled with a seeded RNG; the learning rate is
    multiplied by ``(1 - lr_decay_fraction)`` every ``lr_decay_period_epochs``
    epochs; the final incomplete mini-batch is used.  Returns a trained copy
    whose ``loss_history`` holds one mean loss value per epoch.  Raises
    :class:`TrainingDivergenceError` on a non-finite loss.
    """
    if loss != "mse_with_l2":
        raise ValueError(f"unknown loss tag {loss!r}")
    if cfg is None:
        raise ValueError("cfg is required")
    x, y = dataset
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 2 or x.shape[0] != y.shape[0]:
        raise DimensionError("dataset arrays must be 2-D with matching row counts")
    if x.shape[0] == 0:
        raise DimensionError("dataset must be non-empty")
    if x.shape[1] != model.input_dim or y.shape[1] != model.output_dim:
        raise DimensionError("dataset dimensions do not match the model")

    out = model.copy()
    out.loss_history = []
    rng = np.random.default_rng(cfg.seed)
    n = x.shape[0]
    for epoch in range(cfg.epochs):
        lr = cfg.learning_rate * (1.0 - cfg.lr_decay_fraction) ** (
            epoch // cfg.lr_decay_period_epochs
        )
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            batch_loss, grads = _backprop(out, x[idx], y[idx], cfg.l2_lambda)
            if not np.isfinite(batch_loss):
                raise TrainingDivergenceError(epoch, batch_loss)
            epoch_loss += batch_loss * idx.size
            for layer, (dw, db) in zip(out.layers, grads):
                if layer.mask is not None:
                    dw = dw * layer.mask
                layer.weights = layer.weights - lr * dw
                layer.biases = layer.biases - lr * db
        out.loss_history.append(epoch_loss / n)
    return out


def model_to_doc(model: MlpModel) -> dict:
    """JSON-serializable record of architecture and weights.

    Floats survive a JSON round trip bit-exactly (repr precision).
    """
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "dims": model.dims,
        "activations": model.activations,
        "layers": [
            {
                "weights": l.weights.tolist(),
                "biases": l.biases.tolist(),
                **({"mask": l.mask.astype(int).tolist()} if l.mask is not None else {}),
            }
            for l in model.layers
        ],
    }


def model_from_doc(doc: dict) -> MlpModel:
    """Inverse of :func:`model_to_doc`."""
    if doc.get("format") != MODEL_FORMAT:
        raise ModelFormatError(f"not a {MODEL_FORMAT} record")
    if doc.get("version") != MODEL_VERSION:
        raise ModelFormatError(f"unsupported model version {doc.get('version')!r}")
    layers = []
    for spec, act in zip(doc["layers"], doc["activations"]):
        mask = np.asarray(spec["mask"], dtype=float) if "mask" in spec else None
        layers.append(Layer(np.asarray(spec["weights"]), np.asarray(spec["biases"]), act, mask))
    model = MlpModel(layers)
    if model.dims != doc["dims"]:
        raise ModelFormatError("layer shapes disagree with recorded dims")
    return model


def save_model(model: MlpModel, path) -> None:
    """Write the model as versioned JSON; round trips are bit-exact."""
    with open(path, "w") as f:
        json.dump(model_to_doc(model), f)


def load_model(path) -> MlpModel:
    """Inverse of :func:`save_model`."""
    with open(path) as f:
        doc = json.load(f)
    try:
        return model_from_doc(doc)
    except ModelFormatError as e:
        raise ModelFormatError(f"{e} ({path})") from None
