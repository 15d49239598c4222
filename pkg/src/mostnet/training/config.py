"""Training hyperparameters."""
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, Literal, Optional, Tuple

from ..errors import ConfigError
from ..losses import LossWeights
from ..networks import GeneratorConfig

ContentTarget = Literal["photo", "sketch"]


@dataclass
class TrainConfig:
    """Everything a training run depends on.

    Parameters
    ----------
    lr_g : float, default = 4e-4
        Generator learning rate.
    lr_d : float, default = 1e-3
        Discriminator learning rate.
    betas : (float, float), default = (0.9, 0.999)
        Adam moment decay rates.
    batch_size : int, default = 4
    steps : int, default = 2000
        Total number of training steps, ignored if ``epochs`` is set.
    epochs : int, optional
        Train for this many passes over the dataset instead.
    alpha : float, default = 0.999
        Memory decay rate, 1 freezes the memory and 0 overwrites entries.
    tau : float, default = 0.1
        Temperature of the soft memory refinement loss.
    memory_size : int, default = 512
        Number of memory entries K.
    seed : int, default = 0
    mr_loss_enabled : bool, default = True
    content_target : {"photo", "sketch"}, default = "photo"
        Image whose deep features the generated sketch is compared with.
    weights : LossWeights
    generator : GeneratorConfig
    discriminator_channels : int, default = 32
    perceptual_seed : int, default = 0
    perceptual_weights : str, optional
        Container file overriding the random perceptual extractor.
    log_every, sample_every, checkpoint_every : int
        Periods in steps, 0 disables.
    """

    lr_g: float = 4.0e-4
    lr_d: float = 1.0e-3
    betas: Tuple[float, float] = (0.9, 0.999)
    batch_size: int = 4
    steps: int = 2000
    epochs: Optional[int] = None
    alpha: float = 0.999
    tau: float = 0.1
    memory_size: int = 512
    seed: int = 0
    mr_loss_enabled: bool = True
    content_target: ContentTarget = "photo"
    weights: LossWeights = field(default_factory=LossWeights)
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    discriminator_channels: int = 32
    perceptual_seed: int = 0
    perceptual_weights: Optional[str] = None
    log_every: int = 50
    sample_every: int = 500
    checkpoint_every: int = 500

    def __post_init__(self: "TrainConfig") -> None:
        self.betas = tuple(self.betas)

        if self.lr_g <= 0 or self.lr_d <= 0:
            raise ConfigError(f"Learning rates must be > 0, got {self.lr_g} and {self.lr_d}")

        if not all(0.0 <= beta < 1.0 for beta in self.betas) or len(self.betas) != 2:
            raise ConfigError(f"Adam betas must be two values in [0, 1), got {self.betas}")

        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"Memory decay rate alpha must be in [0, 1], got {self.alpha}")

        if self.tau <= 0:
            raise ConfigError(f"Temperature tau must be > 0, got {self.tau}")

        for name in ("batch_size", "steps", "memory_size", "discriminator_channels"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")

        if self.epochs is not None and self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")

        for name in ("log_every", "sample_every", "checkpoint_every"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0, got {getattr(self, name)}")

        if self.content_target not in ("photo", "sketch"):
            raise ConfigError(
                f"content_target must be 'photo' or 'sketch', got {self.content_target!r}"
            )

    @property
    def effective_weights(self: "TrainConfig") -> LossWeights:
        """Loss weights with the memory refinement term removed when it is disabled."""
        if self.mr_loss_enabled:
            return self.weights
        return LossWeights(**{**self.weights.to_dict(), "memory_refinement": 0.0})

    def steps_per_epoch(self: "TrainConfig", dataset_size: int) -> int:
        return -(-dataset_size // self.batch_size)

    def total_steps(self: "TrainConfig", dataset_size: int) -> int:
        if self.epochs is not None:
            return self.epochs * self.steps_per_epoch(dataset_size)
        return self.steps

    def to_dict(self: "TrainConfig") -> Dict[str, Any]:
        values = asdict(self)
        values["betas"] = list(self.betas)
        return values

    @classmethod
    def from_dict(cls: "TrainConfig", values: Dict[str, Any]) -> "TrainConfig":
        known = {item.name for item in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ConfigError(f"Unknown configuration keys {sorted(unknown)}")

        values = dict(values)
        if "weights" in values:
            values["weights"] = LossWeights(**values["weights"])
        if "generator" in values:
            values["generator"] = GeneratorConfig(**values["generator"])
        return cls(**values)
