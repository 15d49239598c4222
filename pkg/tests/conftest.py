import numpy as np
import pytest

from mostnet.data import gen_synthetic_pairs
from mostnet.networks import GeneratorConfig
from mostnet.training import TrainConfig

TINY_GENERATOR = dict(
    base_channels=4,
    feature_channels=8,
    style_hidden_channels=8,
    encoder_blocks=1,
    decoder_blocks=1,
    si_blocks=1,
)


def tiny_config(**overrides) -> TrainConfig:
    """Small but complete training configuration for 32x32 pairs."""
    values = dict(
        batch_size=2,
        steps=4,
        memory_size=16,
        alpha=0.9,
        generator=GeneratorConfig(**TINY_GENERATOR),
        discriminator_channels=4,
        log_every=0,
        sample_every=0,
        checkpoint_every=0,
    )
    values.update(overrides)
    return TrainConfig(**values)


@pytest.fixture
def config() -> TrainConfig:
    return tiny_config()


@pytest.fixture(scope="session")
def pairs():
    return gen_synthetic_pairs(4, 32, seed=3)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def make_config():
    return tiny_config
