"""One-shot direct parameter prediction from the target observation alone.

Architecturally this is the target-side half of the residual estimator — the
same dense ReLU feature extractor followed by the same two-layer head — but
it regresses the target's absolute parameter value instead of a residual,
and never touches the simulator at prediction time.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .. import nn
from ..errors import DimensionError, MissingArtifactError, ModelFormatError
from ..params import as_values
from ..sim import Observation
from ..tunenet import ChannelNorm, ESTIMATOR_HIDDEN, EXTRACTOR_WIDTH, resample

DIRECT_FORMAT = "restune-direct-meta"
DIRECT_VERSION = 1


@dataclass
class DirectModel:
    """Trained one-shot predictor plus its frozen I/O transforms."""

    net: nn.MlpModel
    norm_t: ChannelNorm
    out_lo: np.ndarray
    out_width: np.ndarray
    obs_t_shape: tuple[int, int]

    def __post_init__(self):
        self.out_lo = np.atleast_1d(np.asarray(self.out_lo, dtype=np.float64))
        self.out_width = np.atleast_1d(np.asarray(self.out_width, dtype=np.float64))
        if self.net.input_dim != self.obs_t_shape[0] * self.obs_t_shape[1]:
            raise DimensionError("network input dim must equal flattened observation size")
        if np.any(self.out_width <= 0):
            raise ValueError("output width must be positive")

    @property
    def param_dim(self) -> int:
        return self.net.output_dim


def direct_predict_train(pairs, cfg: nn.TrainConfig) -> DirectModel:
    """Train the one-shot predictor on the target side of a paired dataset.

    Targets are normalized to [0, 1] over the training parameter range
    (dataset-spec range when present, otherwise the observed min/max), which
    places them comfortably inside the tanh output's span.
    """
    samples = list(getattr(pairs, "samples", pairs))
    if not samples:
        raise DimensionError("training requires at least one sample")
    t_shape = (samples[0].o_t.n_channels, samples[0].o_t.length)
    for s in samples:
        if (s.o_t.n_channels, s.o_t.length) != t_shape:
            raise DimensionError("all samples must share target-observation dimensions")
    norm_t = ChannelNorm.fit(s.o_t for s in samples)

    targets = np.stack([as_values(s.zeta_t) for s in samples])
    spec = getattr(pairs, "spec", None)
    if spec is not None:
        out_lo = np.asarray(spec.target_range.lo, dtype=np.float64)
        out_width = np.asarray(spec.target_range.width, dtype=np.float64)
    else:
        out_lo = targets.min(axis=0)
        out_width = targets.max(axis=0) - out_lo
    out_width = np.where(out_width < 1e-12, 1.0, out_width)

    obs_dim = t_shape[0] * t_shape[1]
    param_dim = targets.shape[1]
    net = nn.init_model(
        [obs_dim, EXTRACTOR_WIDTH, ESTIMATOR_HIDDEN, param_dim],
        ["relu", "relu", "tanh"],
        seed=cfg.seed,
    )
    x = np.stack([norm_t.apply(s.o_t) for s in samples])
    y = (targets - out_lo) / out_width
    net = nn.train_sgd(net, (x, y), "mse_with_l2", cfg)
    return DirectModel(net, norm_t, out_lo, out_width, t_shape)


def direct_predict(model: DirectModel, o_t: Observation) -> np.ndarray:
    """Predict the target's parameters; costs zero simulator rollouts."""
    if o_t.n_channels != model.obs_t_shape[0]:
        raise DimensionError(
            f"expected {model.obs_t_shape[0]} channels, got {o_t.n_channels}"
        )
    if o_t.length != model.obs_t_shape[1]:
        o_t = resample(o_t, model.obs_t_shape[1])
    out = nn.forward(model.net, model.norm_t.apply(o_t))
    return model.out_lo + out * model.out_width


def _meta_path(path) -> str:
    return f"{path}.meta"


def save_direct(model: DirectModel, path) -> None:
    """Persist weights at ``path`` and a metadata sidecar at ``path + '.meta'``."""
    nn.save_model(model.net, path)
    meta = {
        "format": DIRECT_FORMAT,
        "version": DIRECT_VERSION,
        "obs_t_shape": list(model.obs_t_shape),
        "norm_t": {"mins": model.norm_t.mins.tolist(), "widths": model.norm_t.widths.tolist()},
        "out_lo": model.out_lo.tolist(),
        "out_width": model.out_width.tolist(),
    }
    with open(_meta_path(path), "w") as f:
        json.dump(meta, f)


def load_direct(path) -> DirectModel:
    """Inverse of :func:`save_direct`."""
    meta_path = _meta_path(path)
    if not os.path.exists(path) or not os.path.exists(meta_path):
        raise MissingArtifactError(f"missing model file or sidecar for {path}")
    net = nn.load_model(path)
    with open(meta_path) as f:
        meta = json.load(f)
    if meta.get("format") != DIRECT_FORMAT:
        raise ModelFormatError(f"not a {DIRECT_FORMAT} sidecar: {meta_path}")
    if meta.get("version") != DIRECT_VERSION:
        raise ModelFormatError(f"unsupported sidecar version {meta.get('version')!r}")
    return DirectModel(
        net=net,
        norm_t=ChannelNorm(np.asarray(meta["norm_t"]["mins"]), np.asarray(meta["norm_t"]["widths"])),
        out_lo=np.asarray(meta["out_lo"]),
        out_width=np.asarray(meta["out_width"]),
        obs_t_shape=tuple(meta["obs_t_shape"]),
    )
