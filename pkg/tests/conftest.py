"""Shared fixtures: the full-scale datasets and trained models used by the
acceptance tests are expensive, so they are built once per session."""

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from restune import DatasetSpec, TrainConfig, generate_pairs, scalar_space
from restune.baselines import direct_predict_train
from restune.tunenet import train_tunenet

settings.register_profile(
    "restune",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("restune")

# Frozen experiment configuration shared by the acceptance tests: a model is
# trained once on the "easy" ball dataset (targets inside the training range)
# and reused everywhere, mirroring how the CLI pipeline runs.
BALL_EASY_SPEC = DatasetSpec(
    scenario="ball",
    n_train=800,
    n_val=80,
    n_test=100,
    proposed_range=scalar_space(0.3, 0.7),
    target_range=scalar_space(0.3, 0.7),
    seed=101,
)
BALL_HARD_SPEC = DatasetSpec(
    scenario="ball",
    n_train=0,
    n_val=0,
    n_test=100,
    proposed_range=scalar_space(0.3, 0.7),
    target_range=scalar_space(0.0, 1.0),
    seed=102,
)
BALL_TRAIN_CFG = TrainConfig(
    epochs=200,
    batch_size=50,
    learning_rate=0.01,
    l2_lambda=0.01,
    lr_decay_fraction=0.01,
    lr_decay_period_epochs=5,
    seed=7,
)
ARM_TRAIN_SPEC = DatasetSpec(
    scenario="arm",
    n_train=1000,
    n_val=300,
    n_test=0,
    proposed_range=scalar_space(0.0, 1.0),
    target_range=scalar_space(0.0, 1.0),
    seed=201,
    frames=300,
)
ARM_TEST_SPEC = DatasetSpec(
    scenario="arm",
    n_train=0,
    n_val=0,
    n_test=300,
    proposed_range=scalar_space(0.0, 1.0),
    target_range=scalar_space(1.0, 2.0),
    seed=202,
    frames=300,
)
ARM_TRAIN_CFG = TrainConfig(
    epochs=1000,
    batch_size=50,
    learning_rate=0.01,
    l2_lambda=1e-3,
    lr_decay_fraction=0.01,
    lr_decay_period_epochs=50,
    seed=17,
)


@pytest.fixture(scope="session")
def ball_easy():
    return generate_pairs(BALL_EASY_SPEC)


@pytest.fixture(scope="session")
def ball_hard():
    return generate_pairs(BALL_HARD_SPEC)


@pytest.fixture(scope="session")
def ball_model(ball_easy):
    return train_tunenet(ball_easy.train, BALL_TRAIN_CFG)


@pytest.fixture(scope="session")
def ball_direct(ball_easy):
    cfg_doc = {**BALL_TRAIN_CFG.__dict__, "seed": 8}
    return direct_predict_train(ball_easy.train, TrainConfig(**cfg_doc))


@pytest.fixture(scope="session")
def arm_data():
    return generate_pairs(ARM_TRAIN_SPEC), generate_pairs(ARM_TEST_SPEC)


@pytest.fixture(scope="session")
def arm_model(arm_data):
    train, _ = arm_data
    return train_tunenet(train.train, ARM_TRAIN_CFG)


@pytest.fixture(scope="session")
def tiny_ball():
    """A small ball dataset for unit tests that only need plumbing."""
    spec = DatasetSpec(
        scenario="ball",
        n_train=24,
        n_val=4,
        n_test=6,
        proposed_range=scalar_space(0.3, 0.7),
        target_range=scalar_space(0.3, 0.7),
        seed=5,
    )
    return generate_pairs(spec)


@pytest.fixture(scope="session")
def tiny_ball_model(tiny_ball):
    cfg = TrainConfig(epochs=4, batch_size=8, learning_rate=0.01, l2_lambda=0.01, seed=1)
    return train_tunenet(tiny_ball.train, cfg)


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
