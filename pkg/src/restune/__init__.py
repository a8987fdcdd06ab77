"""Simulator parameter identification by iteratively predicting bounded
residual updates from pairs of simulated and observed trajectories.

The package is organized around the tuning loop:

- :mod:`restune.sim` — deterministic bouncing-ball and two-link-arm
  simulators plus observation models.
- :mod:`restune.nn` — a small dense-network library (plain SGD, JSON
  persistence) used by every learned component.
- :mod:`restune.tunenet` — the twin-trajectory residual estimator and the
  iterative ``tune`` loop (one simulator rollout per iteration).
- :mod:`restune.datasets` — paired-parameter trajectory dataset generation
  and a binary on-disk format.
- :mod:`restune.baselines` — mean predictor, direct regression, CMA-ES, and
  entropy-search alternatives that consume the same observations.
- :mod:`restune.eval` — metrics, result tables, and the sim-to-sim
  bounce-shot planning task.
"""

from .errors import (
    ConfigError,
    DatasetFormatError,
    DimensionError,
    MissingArtifactError,
    ModelFormatError,
    ParameterDomainError,
    RestuneError,
    SimulationError,
    TrainingDivergenceError,
    TrajectoryInfeasibleError,
)
from .params import ParamSpace, ParamVector, as_values, scalar_space
from .sim import (
    ArmParams,
    BallParams,
    Observation,
    Rollout,
    TrajectorySpec,
    observe_identity,
    observe_projected,
    simulate_arm,
    simulate_ball,
)
from .nn import MlpModel, TrainConfig, forward, gradient, init_model, train_sgd
from .tunenet import (
    TuneNetModel,
    TuneResult,
    build_tunenet,
    load_tunenet,
    predict_residual,
    resample,
    save_tunenet,
    train_tunenet,
    tune,
)
from .datasets import (
    Dataset,
    DatasetSpec,
    DatasetSplit,
    PairSample,
    generate_pairs,
    load_dataset,
    residual_histogram,
    save_dataset,
)

__version__ = "0.1.0"

__all__ = [
    "ArmParams",
    "BallParams",
    "ConfigError",
    "Dataset",
    "DatasetFormatError",
    "DatasetSpec",
    "DatasetSplit",
    "DimensionError",
    "MissingArtifactError",
    "MlpModel",
    "ModelFormatError",
    "Observation",
    "PairSample",
    "ParamSpace",
    "ParamVector",
    "ParameterDomainError",
    "RestuneError",
    "Rollout",
    "SimulationError",
    "TrainConfig",
    "TrainingDivergenceError",
    "TrajectoryInfeasibleError",
    "TrajectorySpec",
    "TuneNetModel",
    "TuneResult",
    "as_values",
    "build_tunenet",
    "forward",
    "generate_pairs",
    "gradient",
    "init_model",
    "load_dataset",
    "load_tunenet",
    "observe_identity",
    "observe_projected",
    "predict_residual",
    "resample",
    "residual_histogram",
    "save_dataset",
    "save_tunenet",
    "scalar_space",
    "simulate_arm",
    "simulate_ball",
    "train_sgd",
    "train_tunenet",
    "tune",
    "__version__",
]
