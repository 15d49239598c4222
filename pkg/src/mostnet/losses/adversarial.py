"""Conditional adversarial objective over patch scores."""
from typing import Tuple

from ..core import Tensor, clip, log
from ..networks import PatchDiscriminator

SCORE_EPS = 1.0e-7


def _log_score(scores: Tensor) -> Tensor:
    return log(clip(scores, SCORE_EPS, 1.0 - SCORE_EPS))


def discriminator_loss(real_scores: Tensor, fake_scores: Tensor) -> Tensor:
    """``-mean(log D(x, y)) - mean(log(1 - D(x, G(x))))``, minimized by the discriminator."""
    return -_log_score(real_scores).mean() - _log_score(1.0 - fake_scores).mean()


def generator_adversarial_loss(fake_scores: Tensor) -> Tensor:
    """Non-saturating generator loss ``-mean(log D(x, G(x)))``."""
    return -_log_score(fake_scores).mean()


def adversarial_loss(
    discriminator: PatchDiscriminator,
    photo: Tensor,
    real_sketch: Tensor,
    fake_sketch: Tensor,
) -> Tuple[Tensor, Tensor]:
    """Score real and generated pairs and return ``(loss_D, loss_G)``.

    Both losses share the scores of the generated pair. To keep generator gradients out
    of the discriminator update, pass a detached ``fake_sketch`` for ``loss_D``.
    """
    real_scores = discriminator(photo, real_sketch)
    fake_scores = discriminator(photo, fake_sketch)
    return discriminator_loss(real_scores, fake_scores), generator_adversarial_loss(fake_scores)
