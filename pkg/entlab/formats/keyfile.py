"""Binary entanglement key files.

Layout (little-endian): magic ``ENTK``, version u16, reserved u16, then
ell, n, k, t as u32 and the master seed as u64 (32 bytes in all),
followed by t blocks of k ascending u32 row indices.
"""

import logging
import struct
from pathlib import Path
from typing import Union

import numpy as np

from entlab.core.constants import (
    KEY_HEADER_FORMAT,
    KEY_HEADER_SIZE,
    KEY_INDEX_SIZE,
    KEY_MAGIC,
    KEY_VERSION,
)
from entlab.core.entangler import EntanglementKey
from entlab.core.errors import InputValidationError, KeyFormatError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def key_to_bytes(key: EntanglementKey) -> bytes:
    """Serialize a key."""
    header = struct.pack(
        KEY_HEADER_FORMAT,
        KEY_MAGIC,
        KEY_VERSION,
        0,
        key.ell,
        key.n,
        key.k,
        key.t,
        key.master_seed,
    )
    indices = np.asarray(key.selections, dtype="<u4")
    return header + indices.tobytes()


def key_from_bytes(data: bytes) -> EntanglementKey:
    """Parse a key; raises KeyFormatError without returning partial keys."""
    if len(data) < KEY_HEADER_SIZE:
        raise KeyFormatError("truncated key header", f"{len(data)} bytes")
    magic, version, _reserved, ell, n, k, t, seed = struct.unpack_from(
        KEY_HEADER_FORMAT, data
    )
    if magic != KEY_MAGIC:
        raise KeyFormatError(f"bad magic {magic!r}", "offset 0")
    if version != KEY_VERSION:
        raise KeyFormatError(f"unsupported key version {version}", "offset 4")
    if t < 1 or k < 1:
        raise KeyFormatError(f"empty key (t={t}, k={k})", "offset 8")

    expected = KEY_HEADER_SIZE + t * k * KEY_INDEX_SIZE
    if len(data) != expected:
        raise KeyFormatError(
            f"key body has wrong size: expected {expected} bytes, got {len(data)}"
        )
    indices = np.frombuffer(data, dtype="<u4", offset=KEY_HEADER_SIZE).reshape(t, k)
    if indices.size and int(indices.max()) >= n:
        raise KeyFormatError(f"row index out of range for n={n}")

    try:
        return EntanglementKey(
            master_seed=seed,
            ell=ell,
            n=n,
            k=k,
            selections=tuple(tuple(int(i) for i in row) for row in indices),
        )
    except InputValidationError as e:
        raise KeyFormatError(str(e)) from e


def save_key(key: EntanglementKey, path: PathLike) -> int:
    """Write ``key`` to ``path``; returns the number of bytes written."""
    payload = key_to_bytes(key)
    Path(path).write_bytes(payload)
    logger.debug("Wrote key t=%d k=%d to %s (%d bytes)", key.t, key.k, path, len(payload))
    return len(payload)


def load_key(path: PathLike) -> EntanglementKey:
    """Read a key file."""
    return key_from_bytes(Path(path).read_bytes())
