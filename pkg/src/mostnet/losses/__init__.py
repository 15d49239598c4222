"""Objective terms of the generator and the discriminator."""
from .adversarial import (
    SCORE_EPS,
    adversarial_loss,
    discriminator_loss,
    generator_adversarial_loss,
)
from .objective import (
    COMPONENTS,
    LossComponents,
    LossWeights,
    reconstruction_loss,
    total_loss,
)
from .perceptual import (
    PerceptualExtractor,
    content_loss,
    perceptual_features,
    style_loss,
)
