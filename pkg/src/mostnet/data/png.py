"""8-bit PNG encoding and decoding of float images in [0, 1]."""
import io
import logging
import struct
import zlib
from pathlib import Path
from typing import Optional, Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from ..errors import ImageCodecError

LOGGER = logging.getLogger(__name__)

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
LUMA = np.array([0.299, 0.587, 0.114])
RANGE_TOLERANCE = 1.0e-6

_CHUNK_HEAD = struct.Struct(">I4s")


def check_chunks(data: bytes) -> None:
    """Walk the chunk sequence and verify lengths and CRCs.

    Raises
    ------
    ImageCodecError
        Naming the byte offset of the first defect.
    """
    if not data.startswith(PNG_SIGNATURE):
        raise ImageCodecError("Not a PNG stream: bad signature at byte offset 0")

    offset = len(PNG_SIGNATURE)
    while True:
        if offset + _CHUNK_HEAD.size > len(data):
            raise ImageCodecError(f"Truncated chunk header at byte offset {offset}")

        length, kind = _CHUNK_HEAD.unpack_from(data, offset)
        end = offset + _CHUNK_HEAD.size + length + 4
        if end > len(data):
            raise ImageCodecError(
                f"Chunk {kind!r} at byte offset {offset} declares {length} bytes past the end"
            )

        body = data[offset + 4 : end - 4]
        (crc,) = struct.unpack_from(">I", data, end - 4)
        if zlib.crc32(body) & 0xFFFFFFFF != crc:
            raise ImageCodecError(f"CRC mismatch in chunk {kind!r} at byte offset {offset}")

        if kind == b"IEND":
            return
        offset = end


def to_gray(image: np.ndarray) -> np.ndarray:
    """Luma of a 3-channel image, shape (1, H, W)."""
    if image.shape[0] == 1:
        return image
    return np.tensordot(LUMA, image[:3], axes=(0, 0))[np.newaxis]


def to_rgb(image: np.ndarray) -> np.ndarray:
    if image.shape[0] == 3:
        return image
    return np.repeat(image[:1], 3, axis=0)


def png_decode(data: bytes, channels: Optional[int] = None) -> np.ndarray:
    """Decode a PNG stream.

    Parameters
    ----------
    data : bytes
    channels : {1, 3}, optional
        Convert to this many channels, luma is used for 3 -> 1.

    Returns
    -------
    np.ndarray of shape (C, H, W)
        float64 values in [0, 1]. 16-bit samples are scaled by 1/65535.
    """
    check_chunks(data)

    try:
        with Image.open(io.BytesIO(data)) as image:
            image.load()
            mode = image.mode
            if mode in ("I;16", "I;16B", "I;16L", "I"):
                array = np.asarray(image, dtype=np.float64) / 65535.0
            elif mode in ("L", "RGB"):
                array = np.asarray(image, dtype=np.float64) / 255.0
            elif mode in ("1", "LA"):
                array = np.asarray(image.convert("L"), dtype=np.float64) / 255.0
            else:
                array = np.asarray(image.convert("RGB"), dtype=np.float64) / 255.0
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as error:
        raise ImageCodecError(f"Cannot decode PNG stream: {error}") from error

    planes = array[np.newaxis] if array.ndim == 2 else np.moveaxis(array, -1, 0)
    planes = np.clip(planes, 0.0, 1.0)

    if channels == 1:
        return to_gray(planes)
    if channels == 3:
        return to_rgb(planes)
    if channels is not None:
        raise ValueError(f"channels must be 1, 3 or None, got {channels}")
    return planes


def png_encode(image: np.ndarray) -> bytes:
    """Quantize an image of shape (C, H, W) or (H, W), C in {1, 3}, to an 8-bit PNG."""
    image = np.asarray(image, dtype=np.float64)
    if image.ndim == 2:
        image = image[np.newaxis]

    if image.ndim != 3 or image.shape[0] not in (1, 3):
        raise ImageCodecError(f"Cannot encode an image of shape {image.shape}")

    if not np.all(np.isfinite(image)):
        raise ImageCodecError("Cannot encode an image with NaN or infinite values")

    low, high = float(image.min()), float(image.max())
    if low < -RANGE_TOLERANCE or high > 1.0 + RANGE_TOLERANCE:
        raise ImageCodecError(f"Image values must lie in [0, 1], got [{low}, {high}]")

    pixels = np.round(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8)
    pil_image = (
        Image.fromarray(pixels[0])
        if pixels.shape[0] == 1
        else Image.fromarray(np.ascontiguousarray(np.moveaxis(pixels, 0, -1)))
    )

    buffer = io.BytesIO()
    pil_image.save(buffer, format="PNG")
    return buffer.getvalue()


def read_png(path: Union[str, Path], channels: Optional[int] = None) -> np.ndarray:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as error:
        raise ImageCodecError(f"Cannot read {path}: {error}") from error

    try:
        return png_decode(data, channels)
    except ImageCodecError as error:
        raise ImageCodecError(f"{path}: {error}") from error


def write_png(path: Union[str, Path], image: np.ndarray) -> None:
    path = Path(path)
    data = png_encode(image)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
    except OSError as error:
        raise ImageCodecError(f"Cannot write {path}: {error}") from error
    LOGGER.debug("Wrote %s", path)
