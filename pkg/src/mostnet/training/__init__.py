"""Adversarial training of the memory oriented generator."""
from .checkpoint import CHECKPOINT_NAME, load_checkpoint, save_checkpoint
from .config import TrainConfig
from .optim import Adam
from .samples import sample_grid, save_sample_grid
from .state import TrainState, create_state
from .trainer import (
    METRIC_NAMES,
    batch_indices,
    generate,
    infer,
    read_metrics,
    resume,
    train,
    train_from_dir,
    train_step,
    write_metrics,
)
