"""Alternating adversarial training, inference and the metric log."""
import csv
import logging
import math
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np
from tqdm import tqdm

from ..core import Tensor, backward, no_grad
from ..data import Dataset, load_dataset, read_png, to_signed, to_unit, write_png
from ..data.loader import list_images
from ..errors import ConfigError, DatasetError, NonFiniteLossError, ReportError
from ..losses import (
    LossComponents,
    content_loss,
    discriminator_loss,
    generator_adversarial_loss,
    reconstruction_loss,
    style_loss,
    total_loss,
)
from ..memory import memory_usage, mr_loss, slots_from_map
from .checkpoint import CHECKPOINT_NAME, load_checkpoint, save_checkpoint
from .config import TrainConfig
from .samples import save_sample_grid
from .state import TrainState, create_state

LOGGER = logging.getLogger(__name__)

PathLike = Union[str, Path]

METRIC_NAMES = (
    "step",
    "loss_d",
    "adversarial",
    "reconstruction",
    "style",
    "content",
    "memory_refinement",
    "mr_hard",
    "total",
)
METRICS_FILE = "metrics.csv"
SAMPLE_COUNT = 4


def _check_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise NonFiniteLossError(name, value)


def _evaluate(term: Callable[[], Tensor], weight: float) -> Union[Tensor, float]:
    """Value of a loss term, kept out of the graph and only reported if its weight is zero."""
    if weight != 0:
        return term()
    with no_grad():
        return float(term().data)


def batch_indices(config: TrainConfig, dataset_size: int, step: int) -> np.ndarray:
    """Indices of the pairs used at ``step``.

    Every epoch visits the dataset in a permutation drawn from ``(seed, epoch)``, so the
    order does not depend on where a run was resumed.
    """
    per_epoch = config.steps_per_epoch(dataset_size)
    epoch, position = divmod(step, per_epoch)
    order = np.random.default_rng([config.seed, epoch]).permutation(dataset_size)
    return order[position * config.batch_size : (position + 1) * config.batch_size]


def train_step(state: TrainState, photos: np.ndarray, sketches: np.ndarray) -> Dict[str, float]:
    """Run one generator forward pass, one discriminator update and one generator update.

    Parameters
    ----------
    state : TrainState
        Networks, optimizers and memory are updated in place and ``step`` is advanced.
    photos : np.ndarray of shape (N, 3, H, W)
    sketches : np.ndarray of shape (N, 1, H, W)
        Values in [0, 1].

    Returns
    -------
    dict(str, float)
        Every loss component, the soft and hard memory refinement losses and the total.
        Terms with zero weight are evaluated without recording a graph and reported only,
        the total is the weighted sum of the reported components in 64-bit floats.
    """
    config = state.config
    photo = Tensor(to_signed(photos))
    real = Tensor(to_signed(sketches))

    out = state.generator.forward_train(photo, real, state.memory)
    fake = out.fake_sketch

    state.opt_d.zero_grad()
    loss_d = discriminator_loss(
        state.discriminator(photo, real), state.discriminator(photo, fake.detach())
    )
    _check_finite("discriminator", float(loss_d.data))
    backward(loss_d)
    state.opt_d.step()

    state.opt_g.zero_grad()
    weights = config.effective_weights
    reference = photo if config.content_target == "photo" else real
    terms: Dict[str, Callable[[], Tensor]] = {
        "adversarial": lambda: generator_adversarial_loss(state.discriminator(photo, fake)),
        "reconstruction": lambda: reconstruction_loss(fake, real),
        "style": lambda: style_loss(state.extractor, fake, real),
        "content": lambda: content_loss(state.extractor, reference, fake),
        "memory_refinement": lambda: mr_loss(
            out.photo_slots, out.sketch_slots, state.memory, "soft", config.tau
        ),
    }
    components = LossComponents(
        **{name: _evaluate(term, getattr(weights, name)) for name, term in terms.items()}
    )

    with no_grad():
        mr_hard = float(mr_loss(out.photo_slots, out.sketch_slots, state.memory, "hard").data)

    values = components.values()
    for name, value in values.items():
        _check_finite(name, value)

    loss_g = total_loss(components, weights)
    if isinstance(loss_g, Tensor) and loss_g.requires_grad:
        backward(loss_g)
        state.opt_g.step()

    # D received gradients from loss_g, they are cleared before its next update
    state.discriminator.zero_grad()
    state.step += 1

    metrics = {"step": float(state.step), "loss_d": float(loss_d.data), **values}
    metrics["mr_hard"] = mr_hard
    metrics["total"] = components.weighted_sum(weights)
    return {name: metrics[name] for name in METRIC_NAMES}


def generate(state: TrainState, photos: np.ndarray) -> np.ndarray:
    """Photo-only inference, memory untouched.

    Parameters
    ----------
    photos : np.ndarray of shape (N, 3, H, W)
        Values in [0, 1].

    Returns
    -------
    np.ndarray of shape (N, 1, H, W)
        Values in [0, 1].
    """
    with no_grad():
        fake = state.generator.forward_infer(Tensor(to_signed(photos)), state.memory)
    return to_unit(fake.data.astype(np.float64))


def log_memory_usage(state: TrainState, dataset: Dataset) -> None:
    photos, _ = dataset.stack()
    with no_grad():
        features = state.generator.photo_encode(Tensor(to_signed(photos)))
    usage = memory_usage(state.memory, slots_from_map(features))

    LOGGER.info(
        "Memory usage: %i of %i keys assigned, %i never assigned",
        usage.hit_count,
        state.memory.size,
        usage.dead_indices.size,
    )


def write_metrics(metrics: Sequence[Dict[str, float]], path: PathLike) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, mode="w", encoding="utf-8", newline="") as file:
            writer = csv.DictWriter(file, fieldnames=METRIC_NAMES)
            writer.writeheader()
            for row in metrics:
                writer.writerow({name: repr(row[name]) for name in METRIC_NAMES})
    except OSError as error:
        raise ReportError(f"Cannot write {path}: {error}") from error


def read_metrics(path: PathLike) -> List[Dict[str, float]]:
    try:
        with open(path, mode="r", encoding="utf-8", newline="") as file:
            rows = list(csv.DictReader(file))
    except OSError as error:
        raise ReportError(f"Cannot read {path}: {error}") from error
    return [{name: float(value) for name, value in row.items()} for row in rows]


def _save_outputs(state: TrainState, out_dir: Optional[Path]) -> None:
    if out_dir is None:
        return
    save_checkpoint(state, out_dir / CHECKPOINT_NAME)
    write_metrics(state.metrics, out_dir / METRICS_FILE)


def train(
    config: TrainConfig,
    dataset: Dataset,
    out_dir: Optional[PathLike] = None,
    state: Optional[TrainState] = None,
    progress: bool = False,
) -> TrainState:
    """Train until the configured number of steps is reached.

    Parameters
    ----------
    config : TrainConfig
    dataset : Dataset
        Pairs of equal size, H and W divisible by 4.
    out_dir : str or Path, optional
        Receives checkpoints, ``metrics.csv`` and sample grids under ``samples/``.
    state : TrainState, optional
        Resume from this state instead of a fresh one.
    progress : bool, default = False
        Show a progress bar.

    Returns
    -------
    TrainState
    """
    if not dataset:
        raise DatasetError("Cannot train on an empty dataset")

    state = create_state(config) if state is None else state
    out_dir = Path(out_dir) if out_dir is not None else None
    total = config.total_steps(len(dataset))
    per_epoch = config.steps_per_epoch(len(dataset))
    sample_photos, sample_sketches = dataset.stack(range(min(SAMPLE_COUNT, len(dataset))))

    LOGGER.info(
        "Training from step %i to %i on %i pairs, %i steps per epoch",
        state.step,
        total,
        len(dataset),
        per_epoch,
    )

    try:
        steps = range(state.step, total)
        for step in tqdm(steps, initial=state.step, total=total, disable=not progress):
            photos, sketches = dataset.stack(batch_indices(config, len(dataset), step))
            metrics = train_step(state, photos, sketches)
            state.metrics.append(metrics)

            if config.log_every and state.step % config.log_every == 0:
                LOGGER.info(
                    "step %i: loss_d %.4f, total %.4f, rec %.4f, mr %.4f (hard %.3f)",
                    state.step,
                    metrics["loss_d"],
                    metrics["total"],
                    metrics["reconstruction"],
                    metrics["memory_refinement"],
                    metrics["mr_hard"],
                )

            if state.step % per_epoch == 0:
                log_memory_usage(state, dataset)

            sample_due = config.sample_every and state.step % config.sample_every == 0
            if out_dir is not None and sample_due:
                save_sample_grid(
                    sample_photos,
                    generate(state, sample_photos),
                    sample_sketches,
                    out_dir / "samples" / f"step_{state.step:06d}.png",
                )

            if config.checkpoint_every and state.step % config.checkpoint_every == 0:
                _save_outputs(state, out_dir)

    except KeyboardInterrupt:
        LOGGER.warning("Interrupted at step %i", state.step)
        _save_outputs(state, out_dir)
        raise

    _save_outputs(state, out_dir)
    return state


def resume(
    checkpoint: PathLike,
    dataset: Dataset,
    out_dir: Optional[PathLike] = None,
    progress: bool = False,
) -> TrainState:
    """Continue a run from a checkpoint with the configuration stored in it."""
    state = load_checkpoint(checkpoint)
    return train(state.config, dataset, out_dir=out_dir, state=state, progress=progress)


def train_from_dir(
    config: Optional[TrainConfig],
    data_dir: PathLike,
    out_dir: PathLike,
    checkpoint: Optional[PathLike] = None,
    progress: bool = True,
) -> TrainState:
    """Train on the pairs under ``data_dir/photos`` and ``data_dir/sketches``.

    Parameters
    ----------
    config : TrainConfig, optional
        Required for a fresh run. Ignored when resuming, the checkpoint's own configuration
        is used.
    data_dir : str or Path
    out_dir : str or Path
    checkpoint : str or Path, optional
        Resume from this checkpoint.
    progress : bool, default = True

    Returns
    -------
    TrainState
    """
    dataset = load_dataset(data_dir)
    if checkpoint is not None:
        return resume(checkpoint, dataset, out_dir=out_dir, progress=progress)
    if config is None:
        raise ConfigError("A training configuration or a checkpoint to resume from is required")
    return train(config, dataset, out_dir=out_dir, progress=progress)


def infer(checkpoint: PathLike, photo_dir: PathLike, out_dir: PathLike) -> List[Path]:
    """Write one sketch per photo, file names are preserved.

    Returns
    -------
    list of Path
        Written files in lexicographic order.
    """
    state = load_checkpoint(checkpoint)
    photos = list_images(photo_dir)
    if not photos:
        raise DatasetError(f"No PNG files in {photo_dir}")

    out_dir = Path(out_dir)
    written = []
    for path in photos.values():
        photo = read_png(path, channels=3)[np.newaxis]
        target = out_dir / path.name
        write_png(target, generate(state, photo)[0])
        written.append(target)

    LOGGER.info("Wrote %i sketches to %s", len(written), out_dir)
    return written
