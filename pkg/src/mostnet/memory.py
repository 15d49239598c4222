"""Key-value memory dictionary mapping photo feature slots to sketch feature slots.

Keys hold photo-domain prototypes and values hold sketch-domain prototypes. The dictionary
is updated without gradients by an exponential moving average towards the slots assigned to
each entry, and read by softmax attention over query-key cosine similarities.
"""
import logging
from dataclasses import dataclass
from typing import Literal, Optional, Union

import numpy as np

from .core import Tensor, absolute, matmul, no_grad, reshape, softmax, sqrt, transpose
from .core.tensor import get_default_dtype
from .errors import MemoryDictionaryError

LOGGER = logging.getLogger(__name__)

EPS = 1.0e-8

AssignmentMode = Literal["hard", "soft"]
ReadStrategy = Literal["attentive", "nearest"]
Vector = Union[Tensor, np.ndarray]


class MemoryDictionary:
    """K pairs of (key, value) vectors of dimension c and a decay rate.

    Parameters
    ----------
    keys : np.ndarray of shape (K, c)
    values : np.ndarray of shape (K, c)
    alpha : float
        Decay rate in [0, 1], the fraction of an entry kept per update.
    """

    def __init__(
        self: "MemoryDictionary", keys: np.ndarray, values: np.ndarray, alpha: float
    ) -> None:
        keys = np.array(keys)
        values = np.array(values)

        if keys.ndim != 2 or keys.shape != values.shape:
            raise MemoryDictionaryError(
                f"keys and values must both have shape (K, c), got {keys.shape} and {values.shape}"
            )

        if not 0.0 <= alpha <= 1.0:
            raise MemoryDictionaryError(f"Decay rate alpha must be in [0, 1], got {alpha}")

        self.keys = keys
        self.values = values
        self.alpha = float(alpha)

    def __repr__(self: "MemoryDictionary") -> str:
        return f"MemoryDictionary(size={self.size}, dim={self.dim}, alpha={self.alpha})"

    @property
    def size(self: "MemoryDictionary") -> int:
        """Number of items K."""
        return self.keys.shape[0]

    @property
    def dim(self: "MemoryDictionary") -> int:
        """Slot dimension c."""
        return self.keys.shape[1]

    def copy(self: "MemoryDictionary") -> "MemoryDictionary":
        return MemoryDictionary(self.keys.copy(), self.values.copy(), self.alpha)

    def equals(self: "MemoryDictionary", other: "MemoryDictionary") -> bool:
        """Bitwise comparison of the stored entries."""
        return (
            self.alpha == other.alpha
            and np.array_equal(self.keys, other.keys)
            and np.array_equal(self.values, other.values)
        )


@dataclass
class SlotSet:
    """Feature map flattened into N = batch * h * w vectors of dimension c.

    Slots are ordered row-major over (sample, row, column).

    Parameters
    ----------
    slots : Tensor of shape (N, c)
    h, w : int
        Spatial extents of the source feature map.
    batch : int, default = 1
    batched : bool, default = False
        The source map had a batch axis.
    """

    slots: Tensor
    h: int
    w: int
    batch: int = 1
    batched: bool = False

    @property
    def count(self: "SlotSet") -> int:
        return self.slots.shape[0]

    @property
    def dim(self: "SlotSet") -> int:
        return self.slots.shape[1]


@dataclass
class AssignmentMatrix:
    """Rows of distributions over memory entries, one row per slot.

    Parameters
    ----------
    rows : Tensor of shape (N, K)
    mode : {"hard", "soft"}
    tau : float, optional
        Temperature of soft rows.
    """

    rows: Tensor
    mode: AssignmentMode
    tau: Optional[float] = None


@dataclass
class MemoryUsage:
    """Which entries a set of slots is assigned to."""

    hit_count: int
    dead_indices: np.ndarray


def init_memory(size: int, dim: int, seed: int, alpha: float = 0.999) -> MemoryDictionary:
    """Create a dictionary with standard normal keys and values.

    Parameters
    ----------
    size : int
        Number of items K.
    dim : int
        Slot dimension c.
    seed : int
    alpha : float, default = 0.999

    Returns
    -------
    MemoryDictionary
    """
    if size < 1 or dim < 1:
        raise MemoryDictionaryError(
            f"Memory size and dimension must be >= 1, got {size} and {dim}"
        )

    rng = np.random.default_rng(seed)
    dtype = get_default_dtype()
    keys = rng.standard_normal((size, dim)).astype(dtype)
    values = rng.standard_normal((size, dim)).astype(dtype)
    return MemoryDictionary(keys, values, alpha)


def slots_from_map(feature_map: Tensor) -> SlotSet:
    """Split a (c, h, w) or (B, c, h, w) feature map into per-position slots."""
    if feature_map.ndim == 3:
        c, h, w = feature_map.shape
        slots = reshape(transpose(feature_map, (1, 2, 0)), (h * w, c))
        return SlotSet(slots, h, w)

    if feature_map.ndim != 4:
        raise MemoryDictionaryError(
            f"Expected a (c, h, w) or (B, c, h, w) map, got {feature_map.shape}"
        )

    b, c, h, w = feature_map.shape
    slots = reshape(transpose(feature_map, (0, 2, 3, 1)), (b * h * w, c))
    return SlotSet(slots, h, w, batch=b, batched=True)


def map_from_slots(slot_set: SlotSet) -> Tensor:
    """Reassemble the feature map a SlotSet was taken from."""
    n, c = slot_set.slots.shape
    expected = slot_set.batch * slot_set.h * slot_set.w

    if n != expected:
        raise MemoryDictionaryError(
            f"{n} slots do not fill {slot_set.batch} map(s) of {slot_set.h}x{slot_set.w}"
        )

    grid = reshape(slot_set.slots, (slot_set.batch, slot_set.h, slot_set.w, c))
    feature_map = transpose(grid, (0, 3, 1, 2))

    if not slot_set.batched:
        return reshape(feature_map, (c, slot_set.h, slot_set.w))
    return feature_map


def _norms(vectors: np.ndarray, what: str) -> np.ndarray:
    norms = np.sqrt((vectors.astype(np.float64) ** 2).sum(axis=-1))
    flat = np.atleast_1d(norms)
    if np.any(flat <= EPS):
        index = int(np.argmax(flat <= EPS))
        raise MemoryDictionaryError(
            f"Cosine similarity is undefined: {what} {index} has norm {flat[index]:.3e}"
        )
    return norms


def cosine_similarity(a: Vector, b: Vector) -> Union[Tensor, float]:
    """Cosine similarity of two vectors.

    Returns a scalar Tensor (differentiable) if either input is a Tensor, a float otherwise.
    """
    if not isinstance(a, Tensor) and not isinstance(b, Tensor):
        a = np.asarray(a, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        norm_a = _norms(a, "vector a")
        norm_b = _norms(b, "vector b")
        return float(a @ b / (norm_a * norm_b))

    a = a if isinstance(a, Tensor) else Tensor(a, dtype=b.dtype)
    b = b if isinstance(b, Tensor) else Tensor(b, dtype=a.dtype)
    _norms(a.data, "vector a")
    _norms(b.data, "vector b")

    dot = (a * b).sum()
    return dot / (sqrt((a * a).sum()) * sqrt((b * b).sum()))


def _normalized(entries: np.ndarray, what: str) -> np.ndarray:
    return entries / _norms(entries, what)[:, None].astype(entries.dtype)


def similarity_matrix(queries: Tensor, entries: np.ndarray, what: str = "entry") -> Tensor:
    """Cosine similarities between N query slots and K constant entries.

    Parameters
    ----------
    queries : Tensor of shape (N, c)
    entries : np.ndarray of shape (K, c)
    what : str
        Entry label used in error messages.

    Returns
    -------
    Tensor of shape (N, K)
        Differentiable with respect to the queries only.
    """
    if queries.ndim != 2 or queries.shape[1] != entries.shape[1]:
        raise MemoryDictionaryError(
            f"Query slots of shape {queries.shape} do not match entries of shape {entries.shape}"
        )

    _norms(queries.data, "query slot")
    query_norms = sqrt((queries * queries).sum(axis=1, keepdims=True))
    unit_entries = _normalized(entries, what).astype(queries.dtype)
    return matmul(queries / query_norms, unit_entries.T)


def _nearest(queries: np.ndarray, entries: np.ndarray, what: str) -> np.ndarray:
    sims = (queries / _norms(queries, "query slot")[:, None]) @ _normalized(entries, what).T
    # np.argmax returns the lowest index among ties
    return np.argmax(sims, axis=1)


def nearest_key(query: Vector, memory: MemoryDictionary) -> int:
    """Index of the key with the highest cosine similarity to the query."""
    query = query.data if isinstance(query, Tensor) else np.asarray(query)
    return int(_nearest(query.reshape(1, -1), memory.keys, "key")[0])


def _check_slots(memory: MemoryDictionary, *slot_sets: SlotSet) -> None:
    for slot_set in slot_sets:
        if slot_set.dim != memory.dim:
            raise MemoryDictionaryError(
                f"Slot dimension {slot_set.dim} does not match memory dimension {memory.dim}"
            )

    counts = {s.count for s in slot_sets}
    if len(counts) > 1:
        raise MemoryDictionaryError(f"Slot sets have different slot counts: {sorted(counts)}")


def _ema_update(
    entries: np.ndarray, slots: np.ndarray, assignment: np.ndarray, alpha: float
) -> None:
    size = entries.shape[0]
    counts = np.bincount(assignment, minlength=size)
    sums = np.zeros_like(entries, dtype=np.float64)
    np.add.at(sums, assignment, slots.astype(np.float64))

    hit = counts > 0
    means = (sums[hit] / counts[hit, None]).astype(entries.dtype)
    entries[hit] = alpha * entries[hit] + (1.0 - alpha) * means


def update_memory(
    memory: MemoryDictionary, photo_slots: SlotSet, sketch_slots: SlotSet
) -> MemoryDictionary:
    """Move keys towards photo slots and values towards sketch slots.

    Each key is replaced by ``alpha * key + (1 - alpha) * mean`` of the photo slots whose
    nearest key it is, values likewise with the sketch slots whose nearest value it is.
    Entries nothing is assigned to are left unchanged. No gradients are recorded.

    Parameters
    ----------
    memory : MemoryDictionary
        Updated in place.
    photo_slots, sketch_slots : SlotSet

    Returns
    -------
    MemoryDictionary
        The same instance.
    """
    _check_slots(memory, photo_slots, sketch_slots)

    if memory.alpha == 1.0:
        return memory

    with no_grad():
        photo = photo_slots.slots.data
        sketch = sketch_slots.slots.data
        key_assignment = _nearest(photo, memory.keys, "key")
        value_assignment = _nearest(sketch, memory.values, "value")
        _ema_update(memory.keys, photo, key_assignment, memory.alpha)
        _ema_update(memory.values, sketch, value_assignment, memory.alpha)

    LOGGER.debug(
        "Memory update touched %i keys and %i values",
        np.unique(key_assignment).size,
        np.unique(value_assignment).size,
    )
    return memory


def attention_weights(memory: MemoryDictionary, photo_slots: SlotSet) -> Tensor:
    """Softmax over keys of the query-key cosine similarities, shape (N, K)."""
    _check_slots(memory, photo_slots)
    return softmax(similarity_matrix(photo_slots.slots, memory.keys, "key"), axis=1)


def attentive_read(
    memory: MemoryDictionary,
    photo_slots: SlotSet,
    strategy: ReadStrategy = "attentive",
) -> SlotSet:
    """Retrieve sketch slots for photo slots.

    Parameters
    ----------
    memory : MemoryDictionary
        Keys and values are constants, gradients flow into the queries only.
    photo_slots : SlotSet
    strategy : {"attentive", "nearest"}, default = "attentive"
        "attentive" averages all values weighted by the attention over keys,
        "nearest" returns the value of the most similar key.

    Returns
    -------
    SlotSet
        Same layout as ``photo_slots``.
    """
    values = Tensor(memory.values, dtype=photo_slots.slots.dtype)

    if strategy == "attentive":
        weights = attention_weights(memory, photo_slots)
    elif strategy == "nearest":
        _check_slots(memory, photo_slots)
        index = _nearest(photo_slots.slots.data, memory.keys, "key")
        onehot = np.zeros((photo_slots.count, memory.size), dtype=values.dtype)
        onehot[np.arange(photo_slots.count), index] = 1.0
        weights = Tensor(onehot, dtype=values.dtype)
    else:
        raise ValueError(
            f"Unknown read strategy '{strategy}', try one of ('attentive', 'nearest')"
        )

    return SlotSet(
        matmul(weights, values),
        photo_slots.h,
        photo_slots.w,
        batch=photo_slots.batch,
        batched=photo_slots.batched,
    )


def assignment_matrix(
    slot_set: SlotSet,
    entries: np.ndarray,
    mode: AssignmentMode = "soft",
    tau: float = 0.1,
) -> AssignmentMatrix:
    """Distribute every slot over memory entries.

    Parameters
    ----------
    slot_set : SlotSet
    entries : np.ndarray of shape (K, c)
        Keys or values of a MemoryDictionary.
    mode : {"hard", "soft"}, default = "soft"
        "hard" rows are one-hot at the most similar entry, "soft" rows are the softmax of
        similarities divided by ``tau``.
    tau : float, default = 0.1

    Returns
    -------
    AssignmentMatrix
    """
    if slot_set.dim != entries.shape[1]:
        raise MemoryDictionaryError(
            f"Slot dimension {slot_set.dim} does not match entry dimension {entries.shape[1]}"
        )

    if mode == "hard":
        index = _nearest(slot_set.slots.data, entries, "entry")
        rows = np.zeros((slot_set.count, entries.shape[0]), dtype=slot_set.slots.dtype)
        rows[np.arange(slot_set.count), index] = 1.0
        return AssignmentMatrix(Tensor(rows, dtype=rows.dtype), "hard")

    if mode != "soft":
        raise ValueError(f"Unknown assignment mode '{mode}', try one of ('hard', 'soft')")

    if tau <= 0:
        raise MemoryDictionaryError(f"Temperature tau must be > 0 in soft mode, got {tau}")

    sims = similarity_matrix(slot_set.slots, entries)
    return AssignmentMatrix(softmax(sims * (1.0 / tau), axis=1), "soft", tau)


def mr_loss(
    photo_slots: SlotSet,
    sketch_slots: SlotSet,
    memory: MemoryDictionary,
    mode: AssignmentMode = "soft",
    tau: float = 0.1,
) -> Tensor:
    """Disagreement between key assignments of photo slots and value assignments of sketch slots.

    ``sum_i |SIM_f(i, .) - SIM_s(i, .)|_1 / (2 N)``. In hard mode this is the fraction of
    slots whose nearest key and nearest value differ.

    Returns
    -------
    Tensor
        Scalar in [0, 1].
    """
    _check_slots(memory, photo_slots, sketch_slots)

    photo_rows = assignment_matrix(photo_slots, memory.keys, mode, tau).rows
    sketch_rows = assignment_matrix(sketch_slots, memory.values, mode, tau).rows
    return absolute(photo_rows - sketch_rows).sum() * (1.0 / (2 * photo_slots.count))


def memory_usage(memory: MemoryDictionary, photo_slots: SlotSet) -> MemoryUsage:
    """Count the keys a set of photo slots is assigned to and list the unused ones."""
    _check_slots(memory, photo_slots)
    assignment = _nearest(photo_slots.slots.data, memory.keys, "key")
    hit = np.zeros(memory.size, dtype=bool)
    hit[assignment] = True
    return MemoryUsage(int(hit.sum()), np.flatnonzero(~hit))

