"""Read and write paired directories of PNG files.

Layout::

    <root>/photos/<name>.png
    <root>/sketches/<name>.png
"""
import logging
from pathlib import Path
from typing import Dict, List, Union

from ..errors import DatasetError
from .dataset import Dataset, ImagePair
from .png import read_png, write_png

LOGGER = logging.getLogger(__name__)

PHOTO_DIR = "photos"
SKETCH_DIR = "sketches"
SUFFIX = ".png"

PathLike = Union[str, Path]


def list_images(directory: PathLike) -> Dict[str, Path]:
    """Map file stems to PNG paths, sorted lexicographically by stem."""
    directory = Path(directory)
    if not directory.is_dir():
        raise DatasetError(f"Directory {directory} does not exist")

    try:
        paths = [p for p in directory.iterdir() if p.is_file() and p.suffix.lower() == SUFFIX]
    except OSError as error:
        raise DatasetError(f"Cannot list {directory}: {error}") from error
    return dict(sorted((p.stem, p) for p in paths))


class PairedDirReader:
    """Reader class for paired photo and sketch directories."""

    def matched_stems(
        self: "PairedDirReader", photos: Dict[str, Path], sketches: Dict[str, Path]
    ) -> List[str]:
        """Stems present in both directories, the others are reported and skipped."""
        for stem in sorted(set(photos) - set(sketches)):
            LOGGER.warning("Photo %s has no matching sketch, skipped", photos[stem])
        for stem in sorted(set(sketches) - set(photos)):
            LOGGER.warning("Sketch %s has no matching photo, skipped", sketches[stem])
        return sorted(set(photos) & set(sketches))

    def read(self: "PairedDirReader", photo_dir: PathLike, sketch_dir: PathLike) -> Dataset:
        """Decode all matched pairs.

        Parameters
        ----------
        photo_dir, sketch_dir : str or Path

        Returns
        -------
        Dataset
            Photos with 3 channels and sketches with 1 channel, values in [0, 1].
        """
        photo_dir = Path(photo_dir).absolute()
        sketch_dir = Path(sketch_dir).absolute()
        LOGGER.debug("Reading pairs from %s and %s", photo_dir, sketch_dir)

        photos = list_images(photo_dir)
        sketches = list_images(sketch_dir)

        self.dataset = Dataset()
        for stem in self.matched_stems(photos, sketches):
            pair = ImagePair(
                photo=read_png(photos[stem], channels=3),
                sketch=read_png(sketches[stem], channels=1),
                name=stem,
            )
            self.dataset.append(pair)

        LOGGER.info("Loaded %i pairs", len(self.dataset))
        return self.dataset


def load_paired_dir(photo_dir: PathLike, sketch_dir: PathLike) -> Dataset:
    return PairedDirReader().read(photo_dir, sketch_dir)


def load_dataset(root: PathLike) -> Dataset:
    """Load ``<root>/photos`` and ``<root>/sketches``."""
    root = Path(root)
    dataset = load_paired_dir(root / PHOTO_DIR, root / SKETCH_DIR)
    if not dataset:
        raise DatasetError(f"No matched pairs under {root}")
    return dataset


def save_dataset(dataset: Dataset, root: PathLike) -> None:
    root = Path(root)
    for pair in dataset:
        write_png(root / PHOTO_DIR / f"{pair.name}{SUFFIX}", pair.photo)
        write_png(root / SKETCH_DIR / f"{pair.name}{SUFFIX}", pair.sketch)
    LOGGER.info("Saved %i pairs to %s", len(dataset), root)
