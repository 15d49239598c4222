"""Save and restore a TrainState in a single container file."""
import json
import logging
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np

from ..container import read_container, write_container
from ..errors import CheckpointError
from .config import TrainConfig
from .state import TrainState, create_state

LOGGER = logging.getLogger(__name__)

PathLike = Union[str, Path]
CHECKPOINT_NAME = "checkpoint.mnet"

_META = "meta"
_METRICS = "metrics"
_KEYS = "memory.keys"
_VALUES = "memory.values"


def _prefixed(prefix: str, records: Dict[str, np.ndarray]) -> Dict[str, np.ndarray]:
    return {f"{prefix}.{name}": value for name, value in records.items()}


def _section(prefix: str, records: Dict[str, np.ndarray]) -> Dict[str, np.ndarray]:
    start = len(prefix) + 1
    marker = prefix + "."
    return {name[start:]: value for name, value in records.items() if name.startswith(marker)}


def save_checkpoint(state: TrainState, path: PathLike) -> None:
    """Write networks, optimizer moments, memory, config, step and metric log."""
    metric_names = list(state.metrics[0]) if state.metrics else []
    meta = {
        "config": state.config.to_dict(),
        "step": state.step,
        "metric_names": metric_names,
    }

    records: Dict[str, np.ndarray] = {
        _META: np.frombuffer(json.dumps(meta).encode("utf-8"), dtype=np.uint8),
        _KEYS: state.memory.keys,
        _VALUES: state.memory.values,
        _METRICS: np.array(
            [[row[name] for name in metric_names] for row in state.metrics], dtype=np.float64
        ).reshape(len(state.metrics), len(metric_names)),
    }
    records.update(_prefixed("generator", state.generator.state_dict()))
    records.update(_prefixed("discriminator", state.discriminator.state_dict()))
    records.update(_prefixed("opt_g", state.opt_g.state_dict()))
    records.update(_prefixed("opt_d", state.opt_d.state_dict()))

    write_container(path, records)
    LOGGER.info("Saved checkpoint of step %i to %s", state.step, path)


def load_checkpoint(path: PathLike, config: Optional[TrainConfig] = None) -> TrainState:
    """Restore a TrainState.

    Parameters
    ----------
    path : str or Path
    config : TrainConfig, optional
        Target configuration, defaults to the one stored in the checkpoint. Stored arrays
        have to fit it exactly.

    Returns
    -------
    TrainState
    """
    records = read_container(path)

    try:
        meta = json.loads(records[_META].tobytes().decode("utf-8"))
        if config is None:
            config = TrainConfig.from_dict(meta["config"])
        keys, values = records[_KEYS], records[_VALUES]
        metrics = records[_METRICS]
        step = int(meta["step"])
        metric_names = meta["metric_names"]
    except (KeyError, ValueError) as error:
        raise CheckpointError(f"{path} is not a valid checkpoint: {error}") from error

    expected = (config.memory_size, config.generator.feature_channels)
    if keys.shape != expected:
        raise CheckpointError(
            f"{path} holds a memory of shape {keys.shape}, the configuration expects {expected}"
        )

    state = create_state(config)

    try:
        state.generator.load_state_dict(_section("generator", records))
        state.discriminator.load_state_dict(_section("discriminator", records))
    except (KeyError, ValueError) as error:
        raise CheckpointError(f"{path} does not match the networks: {error}") from error

    state.opt_g.load_state_dict(_section("opt_g", records))
    state.opt_d.load_state_dict(_section("opt_d", records))

    state.memory.keys = keys.copy()
    state.memory.values = values.copy()
    state.step = step
    state.metrics = [dict(zip(metric_names, map(float, row))) for row in metrics]

    LOGGER.info("Loaded checkpoint of step %i from %s", state.step, path)
    return state
