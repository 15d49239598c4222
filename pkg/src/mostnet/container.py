"""Single-file container of named arrays.

Layout, all integers little-endian::

    magic       8 bytes   b"MOSTNET\\x00"
    version     uint32
    count       uint32    number of records
    record * count:
        name_len    uint16
        name        utf-8 bytes
        dtype       uint8     index into DTYPES
        ndim        uint8
        dims        uint64 * ndim
        nbytes      uint64
        payload     raw little-endian array data

Arrays are stored bit-exactly.
"""
import logging
import os
import struct
from collections import OrderedDict
from pathlib import Path
from typing import Dict, Tuple, Union

import numpy as np

from .errors import CheckpointError

LOGGER = logging.getLogger(__name__)

PathLike = Union[str, Path]

MAGIC = b"MOSTNET\x00"
FORMAT_VERSION = 1
DTYPES = ("<f4", "<f8", "<i8", "|u1")

_HEADER = struct.Struct("<8sII")
_NAME_LEN = struct.Struct("<H")
_DESCR = struct.Struct("<BB")
_U64 = struct.Struct("<Q")


def encode_records(records: Dict[str, np.ndarray], version: int = FORMAT_VERSION) -> bytes:
    """Serialize named arrays into container bytes."""
    chunks = [_HEADER.pack(MAGIC, version, len(records))]

    for name, array in records.items():
        array = np.asarray(array)
        dtype = array.dtype.newbyteorder("<") if array.dtype.byteorder == ">" else array.dtype
        code = dtype.str if dtype.str in DTYPES else None
        if code is None:
            raise CheckpointError(f"Record '{name}' has unsupported dtype {array.dtype}")

        encoded_name = name.encode("utf-8")
        payload = np.ascontiguousarray(array, dtype=dtype).tobytes()

        chunks.append(_NAME_LEN.pack(len(encoded_name)))
        chunks.append(encoded_name)
        chunks.append(_DESCR.pack(DTYPES.index(code), array.ndim))
        chunks.extend(_U64.pack(d) for d in array.shape)
        chunks.append(_U64.pack(len(payload)))
        chunks.append(payload)

    return b"".join(chunks)


class _Cursor:
    def __init__(self: "_Cursor", buffer: bytes, source: str) -> None:
        self.buffer = buffer
        self.offset = 0
        self.source = source

    def take(self: "_Cursor", size: int, what: str) -> bytes:
        end = self.offset + size
        if end > len(self.buffer):
            raise CheckpointError(
                f"{self.source} is truncated: {what} needs bytes {self.offset}..{end}"
                f", only {len(self.buffer)} available"
            )
        chunk = self.buffer[self.offset : end]
        self.offset = end
        return chunk

    def unpack(self: "_Cursor", fmt: struct.Struct, what: str) -> Tuple:
        return fmt.unpack(self.take(fmt.size, what))


def decode_records(
    buffer: bytes, expected_version: int = FORMAT_VERSION, source: str = "container"
) -> Dict[str, np.ndarray]:
    """Parse container bytes, nothing is returned unless the whole buffer is valid."""
    cursor = _Cursor(buffer, source)
    magic, version, count = cursor.unpack(_HEADER, "header")

    if magic != MAGIC:
        raise CheckpointError(f"{source} is not a mostnet container (magic {magic!r})")

    if version != expected_version:
        raise CheckpointError(
            f"{source} has format version {version}, this build reads version {expected_version}"
        )

    records: Dict[str, np.ndarray] = OrderedDict()
    for i in range(count):
        (name_len,) = cursor.unpack(_NAME_LEN, f"record {i} name length")
        name = cursor.take(name_len, f"record {i} name").decode("utf-8")
        code, ndim = cursor.unpack(_DESCR, f"record '{name}' descriptor")

        if code >= len(DTYPES):
            raise CheckpointError(f"{source}: record '{name}' has unknown dtype code {code}")

        shape = tuple(cursor.unpack(_U64, f"record '{name}' shape")[0] for _ in range(ndim))
        (nbytes,) = cursor.unpack(_U64, f"record '{name}' size")
        dtype = np.dtype(DTYPES[code])

        if nbytes != int(np.prod(shape, dtype=np.int64)) * dtype.itemsize:
            raise CheckpointError(
                f"{source}: record '{name}' declares {nbytes} bytes for shape {shape} of {dtype}"
            )

        payload = cursor.take(nbytes, f"record '{name}' payload")
        records[name] = np.frombuffer(payload, dtype=dtype).reshape(shape).copy()

    if cursor.offset != len(buffer):
        raise CheckpointError(
            f"{source} has {len(buffer) - cursor.offset} unexpected trailing bytes"
        )

    return records


def write_container(path: PathLike, records: Dict[str, np.ndarray]) -> None:
    """Write records atomically: a temporary file is renamed over the target."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    buffer = encode_records(records)

    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(tmp, mode="wb") as file:
            file.write(buffer)
        os.replace(tmp, path)
    except OSError as error:
        raise CheckpointError(f"Cannot write {path}: {error}") from error

    LOGGER.debug("Wrote %i records to %s", len(records), path)


def read_container(path: PathLike) -> Dict[str, np.ndarray]:
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"File {path} does not exist")

    try:
        with open(path, mode="rb") as file:
            buffer = file.read()
    except OSError as error:
        raise CheckpointError(f"Cannot read {path}: {error}") from error

    return decode_records(buffer, source=str(path))
