"""Memory oriented style transfer from photos to sketches."""
from .errors import (
    CheckpointError,
    ConfigError,
    DatasetError,
    GradientError,
    ImageCodecError,
    MemoryDictionaryError,
    MostNetError,
    NonFiniteLossError,
    ReportError,
    ShapeMismatchError,
)
from .memory import (
    MemoryDictionary,
    attentive_read,
    cosine_similarity,
    init_memory,
    mr_loss,
    nearest_key,
    update_memory,
)
from .networks import GeneratorConfig, MOSTGenerator, PatchDiscriminator
