from .decoder import Decoder
from .discriminator import PatchDiscriminator, discriminate
from .encoder import Encoder
from .generator import (
    GeneratorConfig,
    GeneratorOutput,
    MOSTGenerator,
    generator_forward_infer,
    generator_forward_train,
)
