"""Memory oriented generator: encoders, memory dictionary, style injection and decoder."""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..core import Tensor
from ..errors import ConfigError
from ..memory import (
    MemoryDictionary,
    ReadStrategy,
    SlotSet,
    attentive_read,
    map_from_slots,
    slots_from_map,
    update_memory,
)
from ..nn import Module
from ..style_injection import SIResBlock
from .decoder import Decoder
from .encoder import Encoder

LOGGER = logging.getLogger(__name__)


@dataclass
class GeneratorConfig:
    """Widths and depths of the generator.

    Parameters
    ----------
    base_channels : int, default = 16
    feature_channels : int, default = 64
        Slot dimension c, must equal the memory dimension.
    style_hidden_channels : int, default = 64
    encoder_blocks : int, default = 2
        Residual blocks per downsampling stage.
    decoder_blocks : int, default = 3
    si_blocks : int, default = 3
    read_strategy : {"attentive", "nearest"}, default = "attentive"
    """

    base_channels: int = 16
    feature_channels: int = 64
    style_hidden_channels: int = 64
    encoder_blocks: int = 2
    decoder_blocks: int = 3
    si_blocks: int = 3
    read_strategy: ReadStrategy = "attentive"

    def __post_init__(self: "GeneratorConfig") -> None:
        for name in ("base_channels", "feature_channels", "style_hidden_channels"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")

        if self.read_strategy not in ("attentive", "nearest"):
            raise ConfigError(
                f"read_strategy must be 'attentive' or 'nearest', got {self.read_strategy!r}"
            )


@dataclass
class GeneratorOutput:
    """Tensors produced by the training path.

    Parameters
    ----------
    fake_sketch : Tensor
        Values in [-1, 1].
    photo_features, sketch_features : Tensor
        Encoder outputs F_p and F_s.
    retrieved_features : Tensor
        Sketch features read from memory with the photo features as queries.
    photo_slots, sketch_slots : SlotSet
        F_p and F_s split into slots, used by the memory refinement loss.
    """

    fake_sketch: Tensor
    photo_features: Tensor
    sketch_features: Tensor
    retrieved_features: Tensor
    photo_slots: SlotSet
    sketch_slots: SlotSet


class MOSTGenerator(Module):
    """Generator of sketches from photos, augmented by an external memory dictionary.

    Parameters
    ----------
    config : GeneratorConfig
    rng : np.random.Generator
        Source of initial weights.
    """

    def __init__(self: "MOSTGenerator", config: GeneratorConfig, rng: np.random.Generator) -> None:
        c = config.feature_channels
        self.config = config
        self.photo_encoder = Encoder(3, rng, config.base_channels, c, config.encoder_blocks)
        self.sketch_encoder = Encoder(1, rng, config.base_channels, c, config.encoder_blocks)
        self.si_blocks = [
            SIResBlock(c, c, c, rng, config.style_hidden_channels) for _ in range(config.si_blocks)
        ]
        self.decoder = Decoder(c, rng, config.base_channels, config.decoder_blocks)

    def photo_encode(self: "MOSTGenerator", photo: Tensor) -> Tensor:
        return self.photo_encoder(photo)

    def sketch_encode(self: "MOSTGenerator", sketch: Tensor) -> Tensor:
        return self.sketch_encoder(sketch)

    def retrieve(self: "MOSTGenerator", photo_slots: SlotSet, memory: MemoryDictionary) -> Tensor:
        """Read sketch features for photo slots and reassemble them into a feature map."""
        return map_from_slots(attentive_read(memory, photo_slots, self.config.read_strategy))

    def synthesize(self: "MOSTGenerator", photo_features: Tensor, style: Tensor) -> Tensor:
        """Inject the retrieved style into the photo features and decode."""
        z = photo_features
        for block in self.si_blocks:
            z = block(z, style)
        return self.decoder(z)

    def forward_train(
        self: "MOSTGenerator",
        photo: Tensor,
        sketch: Tensor,
        memory: MemoryDictionary,
    ) -> GeneratorOutput:
        """Training path.

        Encodes both images, updates the memory with the slot pairs, reads the updated
        memory with the photo slots and decodes the style-injected photo features.

        Parameters
        ----------
        photo : Tensor of shape (3, H, W) or (N, 3, H, W)
        sketch : Tensor of shape (1, H, W) or (N, 1, H, W)
        memory : MemoryDictionary
            Updated in place.

        Returns
        -------
        GeneratorOutput
        """
        photo_features = self.photo_encode(photo)
        sketch_features = self.sketch_encode(sketch)

        photo_slots = slots_from_map(photo_features)
        sketch_slots = slots_from_map(sketch_features)

        update_memory(memory, photo_slots, sketch_slots)
        retrieved = self.retrieve(photo_slots, memory)

        return GeneratorOutput(
            fake_sketch=self.synthesize(photo_features, retrieved),
            photo_features=photo_features,
            sketch_features=sketch_features,
            retrieved_features=retrieved,
            photo_slots=photo_slots,
            sketch_slots=sketch_slots,
        )

    def forward_infer(self: "MOSTGenerator", photo: Tensor, memory: MemoryDictionary) -> Tensor:
        """Inference path: photo features are the only queries, the memory is read only."""
        photo_features = self.photo_encode(photo)
        retrieved = self.retrieve(slots_from_map(photo_features), memory)
        return self.synthesize(photo_features, retrieved)

    def forward(
        self: "MOSTGenerator",
        photo: Tensor,
        memory: MemoryDictionary,
        sketch: Optional[Tensor] = None,
    ) -> Tensor:
        if sketch is None:
            return self.forward_infer(photo, memory)
        return self.forward_train(photo, sketch, memory).fake_sketch


def generator_forward_train(
    generator: MOSTGenerator, photo: Tensor, sketch: Tensor, memory: MemoryDictionary
) -> GeneratorOutput:
    return generator.forward_train(photo, sketch, memory)


def generator_forward_infer(
    generator: MOSTGenerator, photo: Tensor, memory: MemoryDictionary
) -> Tensor:
    return generator.forward_infer(photo, memory)
