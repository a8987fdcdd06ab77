"""Paired-simulation dataset generation, persistence, and inspection.

A sample is a pair of rollouts of the same scenario that differ only in the
physical parameter: the proposed side at ``zeta_p``, the target side at
``zeta_t``, with the exactly-known residual ``delta = zeta_t - zeta_p`` as
the supervised label.  Nuisance variables (the ball's drop height) are drawn
once per pair and shared by both rollouts, so the parameter difference is
the only source of disagreement between the two observations.

Parameters and observation channels are stored in float32 — the file
payload's precision — from the moment they are drawn, which makes save/load
round trips bit-identical and keeps the residual invariant exact.

File format (``save_dataset``): magic ``RTDSET01``, a little-endian uint32
header length, a JSON header (spec, dims, split sizes), then all samples as
little-endian float32: ``zeta_p, zeta_t, delta, o_p channels, o_t channels``
per sample, train then val then test.
"""

from __future__ import annotations

import csv
import json
import struct
from dataclasses import dataclass, field

import numpy as np

from . import sim
from .errors import (
    DatasetFormatError,
    DimensionError,
    MissingArtifactError,
    SimulationError,
)
from .params import ParamSpace
from .sim import Observation

MAGIC = b"RTDSET01"

SCENARIOS = ("ball", "arm")
OBSERVERS = ("identity", "projected")


@dataclass
class PairSample:
    """One training record: paired parameters, observations, and residual."""

    zeta_p: np.ndarray
    zeta_t: np.ndarray
    o_p: Observation
    o_t: Observation
    delta: np.ndarray

    def __post_init__(self):
        self.zeta_p = np.atleast_1d(np.asarray(self.zeta_p, dtype=np.float32))
        self.zeta_t = np.atleast_1d(np.asarray(self.zeta_t, dtype=np.float32))
        self.delta = np.atleast_1d(np.asarray(self.delta, dtype=np.float32))
        if not (self.zeta_p.shape == self.zeta_t.shape == self.delta.shape):
            raise DimensionError("zeta_p, zeta_t, delta must share a shape")
        if not np.array_equal(self.delta, self.zeta_t - self.zeta_p):
            raise ValueError("delta must equal zeta_t - zeta_p exactly")

    @property
    def param_dim(self) -> int:
        return self.zeta_p.size


@dataclass(frozen=True)
class DatasetSpec:
    """Everything needed to regenerate a dataset deterministically."""

    scenario: str
    n_train: int
    n_val: int
    n_test: int
    proposed_range: ParamSpace
    target_range: ParamSpace
    seed: int
    frames: int = sim.BALL_FRAMES
    rate: float = sim.BALL_RATE
    height_range: tuple[float, float] = (4.0, 5.0)
    observer_p: str = "identity"
    observer_t: str = "identity"

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")
        if min(self.n_train, self.n_val, self.n_test) < 0:
            raise ValueError("split sizes must be >= 0")
        if self.proposed_range.dim != self.target_range.dim:
            raise DimensionError("proposed and target ranges must share dimensions")
        if self.frames < 2 or self.rate <= 0:
            raise ValueError("frames must be >= 2 and rate positive")
        if self.observer_p not in OBSERVERS or self.observer_t not in OBSERVERS:
            raise ValueError(f"observers must be one of {OBSERVERS}")
        if self.scenario == "arm" and "projected" in (self.observer_p, self.observer_t):
            raise ValueError("the projected observer applies to ball rollouts only")

    @property
    def param_dim(self) -> int:
        return self.proposed_range.dim


@dataclass
class DatasetSplit:
    """One split's samples plus the spec they were generated from."""

    spec: DatasetSpec
    samples: list[PairSample] = field(default_factory=list)

    def __iter__(self):
        return iter(self.samples)

    def __len__(self):
        return len(self.samples)

    def __getitem__(self, i):
        return self.samples[i]

    def targets(self) -> np.ndarray:
        return np.stack([s.zeta_t for s in self.samples]).astype(np.float64)

    def deltas(self) -> np.ndarray:
        return np.stack([s.delta for s in self.samples]).astype(np.float64)


@dataclass
class Dataset:
    """Train/val/test splits generated from one spec."""

    spec: DatasetSpec
    train: DatasetSplit
    val: DatasetSplit
    test: DatasetSplit

    @property
    def samples(self) -> list[PairSample]:
        return self.train.samples + self.val.samples + self.test.samples

    def __len__(self):
        return len(self.train) + len(self.val) + len(self.test)


def _draw_params(rng: np.random.Generator, spec: DatasetSpec):
    """Per-pair parameter draw; float32 from the start."""
    zeta_p = spec.proposed_range.sample(rng).astype(np.float32)
    zeta_t = spec.target_range.sample(rng).astype(np.float32)
    return zeta_p, zeta_t


def _observe(rollout: sim.Rollout, observer: str, rng: np.random.Generator) -> Observation:
    if observer == "identity":
        obs = sim.observe_identity(rollout)
    else:
        camera_seed = int(rng.integers(0, 2**31))
        obs = sim.observe_projected(rollout, camera_seed)
    return Observation(obs.channels.astype(np.float32), obs.sample_rate)


def _simulate_pair(spec: DatasetSpec, rng: np.random.Generator) -> PairSample:
    zeta_p, zeta_t = _draw_params(rng, spec)
    dt = 1.0 / spec.rate
    if spec.scenario == "ball":
        height = rng.uniform(*spec.height_range)
        roll_p = sim.simulate_ball(
            sim.BallParams(float(zeta_p[0]), height), dt=dt, n_frames=spec.frames
        )
        roll_t = sim.simulate_ball(
            sim.BallParams(float(zeta_t[0]), height), dt=dt, n_frames=spec.frames
        )
    else:
        traj = sim.TrajectorySpec(duration=spec.frames * dt)
        roll_p = sim.simulate_arm(sim.ArmParams(float(zeta_p[0])), traj, dt=dt)
        roll_t = sim.simulate_arm(sim.ArmParams(float(zeta_t[0])), traj, dt=dt)
    o_p = _observe(roll_p, spec.observer_p, rng)
    o_t = _observe(roll_t, spec.observer_t, rng)
    return PairSample(zeta_p, zeta_t, o_p, o_t, zeta_t - zeta_p)


def generate_pairs(spec: DatasetSpec) -> Dataset:
    """Generate all splits of a paired dataset, deterministically.

    Each pair gets an independent child RNG stream spawned from the spec
    seed, so results are identical no matter how pairs are scheduled.
    """
    root = np.random.SeedSequence(spec.seed)
    split_seeds = root.spawn(3)
    dataset = Dataset(spec, DatasetSplit(spec), DatasetSplit(spec), DatasetSplit(spec))
    splits = (dataset.train, dataset.val, dataset.test)
    sizes = (spec.n_train, spec.n_val, spec.n_test)
    for split, size, split_seed in zip(splits, sizes, split_seeds):
        for i, child in enumerate(split_seed.spawn(size)):
            try:
                split.samples.append(_simulate_pair(spec, np.random.default_rng(child)))
            except Exception as e:  # noqa: BLE001 - annotate with pair index
                raise SimulationError(i, e) from e
    return dataset


def sample_residuals(
    proposed_range: ParamSpace, target_range: ParamSpace, n: int, seed: int
) -> np.ndarray:
    """Draw ``n`` parameter residuals without running any simulations.

    Uses the same uniform-draw and float32-cast scheme as
    :func:`generate_pairs`, vectorized for large-n distribution checks.
    Returns an (n, param_dim) float32 array of ``zeta_t - zeta_p``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    p = rng.uniform(proposed_range.lo, proposed_range.hi, size=(n, proposed_range.dim))
    t = rng.uniform(target_range.lo, target_range.hi, size=(n, target_range.dim))
    return t.astype(np.float32) - p.astype(np.float32)


def residual_histogram(dataset, bins: int = 20, value_range=None, absolute: bool = True):
    """Empirical density of the (scalar) parameter residual.

    Accepts a Dataset, a split, any iterable of samples, or a raw array of
    residuals.  With ``absolute=True`` (default) the density is over
    ``|delta|``, which for independent uniform draws on a shared interval of
    width w follows the triangular law ``f(x) = 2/w - 2x/w^2`` on [0, w].
    Returns ``(bin_edges, density)``.
    """
    if isinstance(dataset, np.ndarray):
        deltas = dataset.astype(np.float64)
    else:
        samples = list(getattr(dataset, "samples", dataset))
        if not samples:
            raise DimensionError("no samples to histogram")
        deltas = np.stack([s.delta for s in samples]).astype(np.float64)
    deltas = np.atleast_1d(deltas)
    if deltas.ndim == 1:
        deltas = deltas[:, np.newaxis]
    if deltas.shape[1] != 1:
        raise DimensionError("residual_histogram requires a scalar parameter")
    values = np.abs(deltas[:, 0]) if absolute else deltas[:, 0]
    density, edges = np.histogram(values, bins=bins, range=value_range, density=True)
    return edges, density


def _obs_doc(obs: Observation) -> dict:
    return {"channels": obs.n_channels, "length": obs.length, "rate": obs.sample_rate}


def _space_doc(space: ParamSpace) -> dict:
    return {"lo": space.lo.tolist(), "hi": space.hi.tolist()}


def _spec_to_doc(spec: DatasetSpec) -> dict:
    return {
        "scenario": spec.scenario,
        "n_train": spec.n_train,
        "n_val": spec.n_val,
        "n_test": spec.n_test,
        "proposed_range": _space_doc(spec.proposed_range),
        "target_range": _space_doc(spec.target_range),
        "seed": spec.seed,
        "frames": spec.frames,
        "rate": spec.rate,
        "height_range": list(spec.height_range),
        "observer_p": spec.observer_p,
        "observer_t": spec.observer_t,
    }


def _spec_from_doc(doc: dict) -> DatasetSpec:
    return DatasetSpec(
        scenario=doc["scenario"],
        n_train=doc["n_train"],
        n_val=doc["n_val"],
        n_test=doc["n_test"],
        proposed_range=ParamSpace(
            np.asarray(doc["proposed_range"]["lo"]), np.asarray(doc["proposed_range"]["hi"])
        ),
        target_range=ParamSpace(
            np.asarray(doc["target_range"]["lo"]), np.asarray(doc["target_range"]["hi"])
        ),
        seed=doc["seed"],
        frames=doc["frames"],
        rate=doc["rate"],
        height_range=tuple(doc["height_range"]),
        observer_p=doc["observer_p"],
        observer_t=doc["observer_t"],
    )


def save_dataset(dataset: Dataset, path) -> None:
    """Write the versioned binary dataset file described in the module docs."""
    samples = dataset.samples
    if samples:
        p_doc = _obs_doc(samples[0].o_p)
        t_doc = _obs_doc(samples[0].o_t)
        param_dim = samples[0].param_dim
    else:
        p_doc = t_doc = {"channels": 0, "length": 0, "rate": dataset.spec.rate}
        param_dim = dataset.spec.param_dim
    header = {
        "version": 1,
        "spec": _spec_to_doc(dataset.spec),
        "param_dim": param_dim,
        "o_p": p_doc,
        "o_t": t_doc,
        "splits": [len(dataset.train), len(dataset.val), len(dataset.test)],
    }
    header_bytes = json.dumps(header).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", len(header_bytes)))
        f.write(header_bytes)
        for s in samples:
            f.write(s.zeta_p.astype("<f4").tobytes())
            f.write(s.zeta_t.astype("<f4").tobytes())
            f.write(s.delta.astype("<f4").tobytes())
            f.write(s.o_p.channels.astype("<f4").tobytes())
            f.write(s.o_t.channels.astype("<f4").tobytes())


def load_dataset(path) -> Dataset:
    """Inverse of :func:`save_dataset`; round trips are bit-identical."""
    try:
        with open(path, "rb") as f:
            raw = f.read()
    except FileNotFoundError:
        raise MissingArtifactError(f"dataset file not found: {path}") from None
    if raw[: len(MAGIC)] != MAGIC:
        raise DatasetFormatError(f"not a dataset file (bad magic): {path}")
    offset = len(MAGIC)
    (header_len,) = struct.unpack_from("<I", raw, offset)
    offset += 4
    try:
        header = json.loads(raw[offset : offset + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise DatasetFormatError(f"corrupt header in {path}: {e}") from None
    offset += header_len
    if header.get("version") != 1:
        raise DatasetFormatError(f"unsupported dataset version {header.get('version')!r}")

    spec = _spec_from_doc(header["spec"])
    param_dim = header["param_dim"]
    p_doc, t_doc = header["o_p"], header["o_t"]
    per_sample = 3 * param_dim + p_doc["channels"] * p_doc["length"] + t_doc["channels"] * t_doc["length"]
    n_total = sum(header["splits"])
    payload = np.frombuffer(raw, dtype="<f4", offset=offset)
    if payload.size != per_sample * n_total:
        raise DatasetFormatError(
            f"payload size {payload.size} does not match header ({per_sample * n_total})"
        )

    dataset = Dataset(spec, DatasetSplit(spec), DatasetSplit(spec), DatasetSplit(spec))
    splits = (dataset.train, dataset.val, dataset.test)
    pos = 0
    for split, size in zip(splits, header["splits"]):
        for _ in range(size):
            row = payload[pos : pos + per_sample]
            pos += per_sample
            zp = row[:param_dim]
            zt = row[param_dim : 2 * param_dim]
            dl = row[2 * param_dim : 3 * param_dim]
            cursor = 3 * param_dim
            np_p = p_doc["channels"] * p_doc["length"]
            o_p = Observation(
                row[cursor : cursor + np_p].reshape(p_doc["channels"], p_doc["length"]).copy(),
                p_doc["rate"],
            )
            cursor += np_p
            o_t = Observation(
                row[cursor:].reshape(t_doc["channels"], t_doc["length"]).copy(), t_doc["rate"]
            )
            split.samples.append(PairSample(zp.copy(), zt.copy(), o_p, o_t, dl.copy()))
    return dataset


def dataset_to_csv(dataset: Dataset, path) -> None:
    """Parameter-level CSV export (split, index, zeta_p, zeta_t, delta)."""
    param_dim = dataset.spec.param_dim
    cols = ["split", "index"]
    for tag in ("zeta_p", "zeta_t", "delta"):
        cols += [f"{tag}_{i}" for i in range(param_dim)]
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(cols)
        for name, split in (("train", dataset.train), ("val", dataset.val), ("test", dataset.test)):
            for i, s in enumerate(split):
                row = [name, i]
                for arr in (s.zeta_p, s.zeta_t, s.delta):
                    row += [f"{float(v):.9g}" for v in arr]
                writer.writerow(row)
