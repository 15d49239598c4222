"""Paired photo/sketch samples."""
from collections import UserList
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import DatasetError, ShapeMismatchError


@dataclass
class ImagePair:
    """Spatially aligned photo and sketch.

    Parameters
    ----------
    photo : np.ndarray of shape (3, H, W)
        Values in [0, 1].
    sketch : np.ndarray of shape (1, H, W)
        Values in [0, 1].
    name : str
        Unique identifier, used as the file stem on disk.
    """

    photo: np.ndarray
    sketch: np.ndarray
    name: str

    def __post_init__(self: "ImagePair") -> None:
        if self.photo.ndim != 3 or self.photo.shape[0] != 3:
            raise ShapeMismatchError(
                f"Photo '{self.name}' must be (3, H, W), got {self.photo.shape}"
            )
        if self.sketch.ndim != 3 or self.sketch.shape[0] != 1:
            raise ShapeMismatchError(
                f"Sketch '{self.name}' must be (1, H, W), got {self.sketch.shape}"
            )
        if self.photo.shape[1:] != self.sketch.shape[1:]:
            raise ShapeMismatchError(
                f"Pair '{self.name}' is not aligned: photo {self.photo.shape}"
                f", sketch {self.sketch.shape}"
            )

    @property
    def size(self: "ImagePair") -> Tuple[int, int]:
        return self.photo.shape[1], self.photo.shape[2]


class Dataset(UserList):
    """Ordered list of ImagePair with unique names.

    Parameters
    ----------
    iterable : iterable of ImagePair
        Items of other types are ignored.
    seed : int, optional
        Seed the pairs were generated with, if synthetic.
    """

    def __init__(
        self: "Dataset", iterable: Iterable[ImagePair] = (), seed: Optional[int] = None
    ) -> None:
        super().__init__()
        self.seed = seed
        for item in iterable:
            self.append(item)

    def _check_name(self: "Dataset", item: ImagePair, skip: Optional[int] = None) -> None:
        for i, other in enumerate(self.data):
            if i != skip and other.name == item.name:
                raise DatasetError(f"Dataset already holds a pair named '{item.name}'")

    def __setitem__(self: "Dataset", index: int, item: ImagePair) -> None:
        if isinstance(item, ImagePair):
            self._check_name(item, skip=index % len(self.data))
            self.data[index] = item

    def append(self: "Dataset", item: ImagePair) -> None:
        if isinstance(item, ImagePair):
            self._check_name(item)
            self.data.append(item)

    @property
    def names(self: "Dataset") -> List[str]:
        return [pair.name for pair in self.data]

    def stack(
        self: "Dataset", indices: Optional[Sequence[int]] = None
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Batch the selected pairs.

        Returns
        -------
        photos : np.ndarray of shape (N, 3, H, W)
        sketches : np.ndarray of shape (N, 1, H, W)
        """
        if not self.data:
            raise DatasetError("Cannot stack an empty dataset")

        indices = range(len(self.data)) if indices is None else indices
        pairs = [self.data[i] for i in indices]

        sizes = {pair.size for pair in pairs}
        if len(sizes) > 1:
            raise ShapeMismatchError(f"Cannot stack pairs of different sizes {sorted(sizes)}")

        return np.stack([p.photo for p in pairs]), np.stack([p.sketch for p in pairs])


def to_signed(image: np.ndarray) -> np.ndarray:
    """Map [0, 1] to the generator range [-1, 1]."""
    return image * 2.0 - 1.0


def to_unit(image: np.ndarray) -> np.ndarray:
    """Map [-1, 1] back to [0, 1], clipping overshoot."""
    return np.clip((image + 1.0) * 0.5, 0.0, 1.0)
