"""Everything that changes during training."""
import logging
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from ..losses import PerceptualExtractor
from ..memory import MemoryDictionary, init_memory
from ..networks import MOSTGenerator, PatchDiscriminator
from .config import TrainConfig
from .optim import Adam

LOGGER = logging.getLogger(__name__)


@dataclass
class TrainState:
    """Networks, optimizers, memory dictionary and progress of a training run.

    Parameters
    ----------
    config : TrainConfig
    generator : MOSTGenerator
    discriminator : PatchDiscriminator
    memory : MemoryDictionary
    opt_g, opt_d : Adam
    extractor : PerceptualExtractor
        Frozen, rebuilt from the config on load.
    step : int
        Number of completed training steps.
    metrics : list of dict
        One entry per completed step.
    """

    config: TrainConfig
    generator: MOSTGenerator
    discriminator: PatchDiscriminator
    memory: MemoryDictionary
    opt_g: Adam
    opt_d: Adam
    extractor: PerceptualExtractor
    step: int = 0
    metrics: List[Dict[str, float]] = field(default_factory=list)


def create_state(config: TrainConfig) -> TrainState:
    """Initialize a fresh run, all randomness is drawn from ``config.seed``."""
    rng = np.random.default_rng(config.seed)
    generator = MOSTGenerator(config.generator, rng)
    discriminator = PatchDiscriminator(rng, base_channels=config.discriminator_channels)
    memory = init_memory(
        config.memory_size, config.generator.feature_channels, config.seed, config.alpha
    )

    LOGGER.info(
        "Generator has %i parameters, discriminator %i, memory holds %i entries of dimension %i",
        generator.num_parameters(),
        discriminator.num_parameters(),
        memory.size,
        memory.dim,
    )

    return TrainState(
        config=config,
        generator=generator,
        discriminator=discriminator,
        memory=memory,
        opt_g=Adam(generator.parameters(), config.lr_g, config.betas),
        opt_d=Adam(discriminator.parameters(), config.lr_d, config.betas),
        extractor=PerceptualExtractor(config.perceptual_seed, config.perceptual_weights),
    )
