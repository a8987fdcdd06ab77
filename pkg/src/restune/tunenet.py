"""Residual parameter estimator and the iterative tuning loop.

The estimator is a twin-input network: one dense ReLU feature extractor per
observation (proposed and target, 32 features each), concatenation to a
64-vector, then a two-layer head (32 ReLU, tanh output).  It regresses the
*difference* between the target's and the proposed model's physical
parameters from one observation of each.

Internally both extractors live in a single first layer whose weight matrix
is block-diagonal — the proposed-side block sees only the proposed
observation and the target-side block only the target observation.  A
structural mask keeps the off-diagonal blocks at exactly zero through
training, so the whole network trains through the plain SGD engine while
remaining two independent extractors.

Tuning repeats a fixed small loop: simulate the proposed model once, predict
the parameter residual from (proposed, target) observations, add it to the
current estimate, clamp to bounds.  The target is observed once, up front;
each iteration costs exactly one simulator rollout and one forward pass.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import nn
from .errors import (
    DimensionError,
    MissingArtifactError,
    ModelFormatError,
    ParameterDomainError,
    SimulationError,
)
from .params import ParamSpace, as_values
from .sim import Observation

EXTRACTOR_WIDTH = 32
ESTIMATOR_HIDDEN = 32

TUNENET_FORMAT = "restune-tunenet-meta"
TUNENET_VERSION = 1


@dataclass(frozen=True)
class ChannelNorm:
    """Per-channel affine map to [0, 1] over a reference set of observations.

    Values outside the reference range extend linearly past [0, 1]; no
    clipping, so out-of-range signals keep their ordering and spacing.
    """

    mins: np.ndarray
    widths: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mins", np.asarray(self.mins, dtype=np.float64))
        object.__setattr__(self, "widths", np.asarray(self.widths, dtype=np.float64))
        if self.mins.shape != self.widths.shape or self.mins.ndim != 1:
            raise DimensionError("mins and widths must be 1-D arrays of equal length")
        if np.any(self.widths <= 0):
            raise ValueError("channel widths must be positive")

    @property
    def n_channels(self) -> int:
        return self.mins.size

    @classmethod
    def identity(cls, n_channels: int) -> "ChannelNorm":
        return cls(np.zeros(n_channels), np.ones(n_channels))

    @classmethod
    def fit(cls, observations) -> "ChannelNorm":
        """Per-channel min/max over every frame of every observation.

        Constant channels get unit width so they normalize to exactly 0.
        """
        observations = list(observations)
        if not observations:
            raise DimensionError("cannot fit normalization to an empty set")
        stacked = np.stack([o.channels for o in observations])
        mins = stacked.min(axis=(0, 2))
        widths = stacked.max(axis=(0, 2)) - mins
        widths = np.where(widths < 1e-12, 1.0, widths)
        return cls(mins, widths)

    def apply(self, obs: Observation) -> np.ndarray:
        """Normalize and flatten channel-major to a 1-D input vector."""
        if obs.n_channels != self.n_channels:
            raise DimensionError(
                f"expected {self.n_channels} channels, got {obs.n_channels}"
            )
        scaled = (obs.channels - self.mins[:, None]) / self.widths[:, None]
        return scaled.ravel()


@dataclass
class TuneNetModel:
    """Twin-extractor residual estimator plus its frozen I/O transforms."""

    net: nn.MlpModel
    norm_p: ChannelNorm
    norm_t: ChannelNorm
    output_scale: np.ndarray
    obs_p_shape: tuple[int, int]
    obs_t_shape: tuple[int, int]

    def __post_init__(self):
        self.output_scale = np.atleast_1d(np.asarray(self.output_scale, dtype=np.float64))
        p_dim = self.obs_p_shape[0] * self.obs_p_shape[1]
        t_dim = self.obs_t_shape[0] * self.obs_t_shape[1]
        if self.net.input_dim != p_dim + t_dim:
            raise DimensionError("network input dim must equal combined observation size")
        if self.net.layers[0].out_dim != 2 * EXTRACTOR_WIDTH:
            raise DimensionError("combined extractor layer must output 64 features")
        if self.net.output_dim != self.output_scale.size:
            raise DimensionError("output scale length must equal parameter dimension")
        if np.any(self.output_scale <= 0):
            raise ValueError("output scale must be positive")

    @property
    def param_dim(self) -> int:
        return self.net.output_dim

    @property
    def obs_p_dim(self) -> int:
        return self.obs_p_shape[0] * self.obs_p_shape[1]

    @property
    def obs_t_dim(self) -> int:
        return self.obs_t_shape[0] * self.obs_t_shape[1]


@dataclass
class TuneResult:
    """Full trace of one tuning run."""

    estimates: np.ndarray
    deltas: np.ndarray
    rollouts_used: int

    def __post_init__(self):
        self.estimates = np.atleast_2d(np.asarray(self.estimates, dtype=np.float64))
        self.deltas = np.atleast_2d(np.asarray(self.deltas, dtype=np.float64))
        if self.estimates.shape[0] != self.rollouts_used + 1:
            raise DimensionError("estimates must hold one row per iteration plus the start")

    @property
    def final(self) -> np.ndarray:
        return self.estimates[-1]


def _blockdiag_extractor(rng: np.random.Generator, obs_p_dim: int, obs_t_dim: int) -> nn.Layer:
    """Two independent ReLU extractors fused into one masked layer."""
    p = nn.init_layer(rng, obs_p_dim, EXTRACTOR_WIDTH, "relu")
    t = nn.init_layer(rng, obs_t_dim, EXTRACTOR_WIDTH, "relu")
    w = np.zeros((2 * EXTRACTOR_WIDTH, obs_p_dim + obs_t_dim))
    mask = np.zeros_like(w)
    w[:EXTRACTOR_WIDTH, :obs_p_dim] = p.weights
    w[EXTRACTOR_WIDTH:, obs_p_dim:] = t.weights
    mask[:EXTRACTOR_WIDTH, :obs_p_dim] = 1.0
    mask[EXTRACTOR_WIDTH:, obs_p_dim:] = 1.0
    return nn.Layer(w, np.zeros(2 * EXTRACTOR_WIDTH), "relu", mask)


def build_tunenet(
    obs_p_dim: int,
    obs_t_dim: int,
    param_dim: int,
    seed: int,
    obs_p_channels: int = 1,
    obs_t_channels: int = 1,
) -> TuneNetModel:
    """Fresh estimator with identity normalization and unit output scale.

    ``obs_*_dim`` are flattened observation sizes; ``obs_*_channels`` record
    the channel structure used by per-channel normalization (the flat size
    must divide evenly).
    """
    if min(obs_p_dim, obs_t_dim, param_dim) < 1:
        raise DimensionError("all dimensions must be >= 1")
    if obs_p_dim % obs_p_channels or obs_t_dim % obs_t_channels:
        raise DimensionError("flat observation size must be a multiple of channel count")
    rng = np.random.default_rng(seed)
    layers = [
        _blockdiag_extractor(rng, obs_p_dim, obs_t_dim),
        nn.init_layer(rng, 2 * EXTRACTOR_WIDTH, ESTIMATOR_HIDDEN, "relu"),
        nn.init_layer(rng, ESTIMATOR_HIDDEN, param_dim, "tanh"),
    ]
    return TuneNetModel(
        net=nn.MlpModel(layers),
        norm_p=ChannelNorm.identity(obs_p_channels),
        norm_t=ChannelNorm.identity(obs_t_channels),
        output_scale=np.ones(param_dim),
        obs_p_shape=(obs_p_channels, obs_p_dim // obs_p_channels),
        obs_t_shape=(obs_t_channels, obs_t_dim // obs_t_channels),
    )


def predict_residual(model: TuneNetModel, o_p: Observation, o_t: Observation) -> np.ndarray:
    """Estimated parameter residual (target minus proposed), physical units.

    The tanh head bounds each component strictly inside +-output_scale.
    """
    if (o_p.n_channels, o_p.length) != model.obs_p_shape:
        raise DimensionError(
            f"proposed observation shape {(o_p.n_channels, o_p.length)} does not "
            f"match model {model.obs_p_shape}"
        )
    if (o_t.n_channels, o_t.length) != model.obs_t_shape:
        raise DimensionError(
            f"target observation shape {(o_t.n_channels, o_t.length)} does not "
            f"match model {model.obs_t_shape}"
        )
    x = np.concatenate([model.norm_p.apply(o_p), model.norm_t.apply(o_t)])
    return nn.forward(model.net, x) * model.output_scale


def train_tunenet(pairs, cfg: nn.TrainConfig) -> TuneNetModel:
    """Supervised training of the residual estimator on paired rollouts.

    ``pairs`` is a dataset of paired samples (a ``datasets.Dataset`` or any
    iterable of samples with ``zeta_p``/``zeta_t``/``o_p``/``o_t``/``delta``).
    The network head regresses the normalized residual ``delta /
    output_scale``; since the starting parameters are known exactly, fitting
    the corrected parameter is the same problem as fitting the residual.

    Input normalization ranges are computed from this training set and frozen
    into the returned model.  The output scale is the width of the target
    parameter range (taken from the dataset spec when present, otherwise from
    the observed spread of target parameters).
    """
    samples = list(getattr(pairs, "samples", pairs))
    if not samples:
        raise DimensionError("training requires at least one pair")
    first = samples[0]
    p_shape = (first.o_p.n_channels, first.o_p.length)
    t_shape = (first.o_t.n_channels, first.o_t.length)
    param_dim = as_values(first.delta).size
    for s in samples:
        if (s.o_p.n_channels, s.o_p.length) != p_shape or (
            s.o_t.n_channels,
            s.o_t.length,
        ) != t_shape:
            raise DimensionError("all pairs must share observation dimensions")

    norm_p = ChannelNorm.fit(s.o_p for s in samples)
    norm_t = ChannelNorm.fit(s.o_t for s in samples)

    spec = getattr(pairs, "spec", None)
    if spec is not None:
        scale = np.asarray(spec.target_range.width, dtype=np.float64)
    else:
        targets = np.stack([as_values(s.zeta_t) for s in samples])
        scale = targets.max(axis=0) - targets.min(axis=0)
    scale = np.where(scale < 1e-12, 1.0, np.atleast_1d(scale))

    model = build_tunenet(
        p_shape[0] * p_shape[1],
        t_shape[0] * t_shape[1],
        param_dim,
        seed=cfg.seed,
        obs_p_channels=p_shape[0],
        obs_t_channels=t_shape[0],
    )
    model.norm_p = norm_p
    model.norm_t = norm_t
    model.output_scale = scale

    x = np.stack(
        [np.concatenate([norm_p.apply(s.o_p), norm_t.apply(s.o_t)]) for s in samples]
    )
    y = np.stack([as_values(s.delta) / scale for s in samples])
    model.net = nn.train_sgd(model.net, (x, y), "mse_with_l2", cfg)
    return model


def resample(obs: Observation, length: int) -> Observation:
    """Linearly interpolate every channel onto ``length`` uniform samples.

    The resampled signal spans the original time extent, endpoints preserved
    exactly; the sample rate is rescaled accordingly.
    """
    if length < 2:
        raise DimensionError("resample length must be >= 2")
    if length == obs.length:
        return Observation(obs.channels.copy(), obs.sample_rate)
    old_idx = np.arange(obs.length, dtype=np.float64)
    new_idx = np.linspace(0.0, obs.length - 1.0, length)
    channels = np.stack([np.interp(new_idx, old_idx, ch) for ch in obs.channels])
    new_rate = obs.sample_rate * (length - 1) / (obs.length - 1)
    return Observation(channels, new_rate)


def tune(
    o_t: Observation,
    simulator,
    initial,
    model: TuneNetModel,
    K: int,
    bounds: ParamSpace,
) -> TuneResult:
    """Iteratively correct a parameter estimate toward the observed target.

    ``simulator`` maps a parameter vector to an Observation of the proposed
    model.  Each of the K iterations performs exactly one simulator call:
    observe the proposed model at the current estimate, resample the (single,
    fixed) target observation to the model's expected length, predict the
    residual, and clamp the updated estimate into ``bounds``.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    zeta = as_values(initial)
    if not bounds.contains(zeta):
        raise ParameterDomainError(f"initial estimate {zeta} outside bounds")
    estimates = [zeta.copy()]
    deltas = []
    for k in range(K):
        try:
            o_p = simulator(zeta)
        except Exception as e:  # noqa: BLE001 - annotate with iteration index
            raise SimulationError(k, e) from e
        o_t_k = resample(o_t, model.obs_t_shape[1])
        delta = predict_residual(model, o_p, o_t_k)
        zeta = bounds.clamp(zeta + delta)
        deltas.append(delta)
        estimates.append(zeta.copy())
    return TuneResult(
        estimates=np.stack(estimates),
        deltas=np.stack(deltas),
        rollouts_used=K,
    )


def _meta_path(path) -> str:
    return f"{path}.meta"


def save_tunenet(model: TuneNetModel, path) -> None:
    """Persist weights at ``path`` and a metadata sidecar at ``path + '.meta'``."""
    nn.save_model(model.net, path)
    meta = {
        "format": TUNENET_FORMAT,
        "version": TUNENET_VERSION,
        "obs_p_shape": list(model.obs_p_shape),
        "obs_t_shape": list(model.obs_t_shape),
        "norm_p": {"mins": model.norm_p.mins.tolist(), "widths": model.norm_p.widths.tolist()},
        "norm_t": {"mins": model.norm_t.mins.tolist(), "widths": model.norm_t.widths.tolist()},
        "output_scale": model.output_scale.tolist(),
    }
    with open(_meta_path(path), "w") as f:
        json.dump(meta, f)


def load_tunenet(path) -> TuneNetModel:
    """Inverse of :func:`save_tunenet`."""
    meta_path = _meta_path(path)
    if not os.path.exists(path) or not os.path.exists(meta_path):
        raise MissingArtifactError(f"missing model file or sidecar for {path}")
    net = nn.load_model(path)
    with open(meta_path) as f:
        meta = json.load(f)
    if meta.get("format") != TUNENET_FORMAT:
        raise ModelFormatError(f"not a {TUNENET_FORMAT} sidecar: {meta_path}")
    if meta.get("version") != TUNENET_VERSION:
        raise ModelFormatError(f"unsupported sidecar version {meta.get('version')!r}")
    return TuneNetModel(
        net=net,
        norm_p=ChannelNorm(np.asarray(meta["norm_p"]["mins"]), np.asarray(meta["norm_p"]["widths"])),
        norm_t=ChannelNorm(np.asarray(meta["norm_t"]["mins"]), np.asarray(meta["norm_t"]["widths"])),
        output_scale=np.asarray(meta["output_scale"]),
        obs_p_shape=tuple(meta["obs_p_shape"]),
        obs_t_shape=tuple(meta["obs_t_shape"]),
    )
