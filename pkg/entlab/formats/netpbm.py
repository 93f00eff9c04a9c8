"""Netpbm image I/O for reconciliation messages.

PBM (P1 plain, P4 raw) maps to BitMessage with 1 = black; PGM (P2 plain,
P5 raw) maps to GrayMessage with levels value / maxval. Pixels flatten
row-major.
"""

import logging
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from entlab.config import settings
from entlab.core.constants import NETPBM_DEFAULT_MAXVAL, NETPBM_MAX_MAXVAL
from entlab.core.errors import ImageFormatError, InputValidationError
from entlab.core.reconciler import BitMessage, GrayMessage, Message

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

_WHITESPACE = b" \t\r\n\v\f"
_MAGICS = (b"P1", b"P2", b"P4", b"P5")


def _read_header(data: bytes, count: int) -> Tuple[List[int], int]:
    """Read ``count`` integer header fields after the magic number.

    Returns the values and the offset just past the last field.
    """
    values: List[int] = []
    pos = 2
    while len(values) < count:
        if pos >= len(data):
            raise ImageFormatError("truncated header", f"offset {pos}")
        byte = data[pos : pos + 1]
        if byte in _WHITESPACE:
            pos += 1
        elif byte == b"#":
            end = data.find(b"\n", pos)
            pos = len(data) if end < 0 else end + 1
        elif byte.isdigit():
            start = pos
            while pos < len(data) and data[pos : pos + 1].isdigit():
                pos += 1
            if pos - start > 9:
                raise ImageFormatError("header field too large", f"offset {start}")
            values.append(int(data[start:pos]))
        else:
            raise ImageFormatError(f"unexpected byte {byte!r} in header", f"offset {pos}")
    return values, pos


def _strip_comments(body: bytes) -> bytes:
    lines = [line.split(b"#", 1)[0] for line in body.split(b"\n")]
    return b"\n".join(lines)


def _raw_body(data: bytes, pos: int, size: int) -> bytes:
    if pos >= len(data) or data[pos : pos + 1] not in _WHITESPACE:
        raise ImageFormatError("missing separator before raster", f"offset {pos}")
    body = data[pos + 1 : pos + 1 + size]
    if len(body) < size:
        raise ImageFormatError(
            f"raster too short: expected {size} bytes, got {len(body)}", f"offset {pos + 1}"
        )
    return body


def parse_image(data: bytes, max_pixels: Optional[int] = None) -> Message:
    """Parse PBM/PGM bytes into a message."""
    magic = data[:2]
    if magic not in _MAGICS:
        raise ImageFormatError(f"unsupported magic {magic!r}", "offset 0")
    is_bitmap = magic in (b"P1", b"P4")
    fields, pos = _read_header(data, 2 if is_bitmap else 3)
    width, height = fields[0], fields[1]
    if width < 1 or height < 1:
        raise ImageFormatError(f"invalid size {width}x{height}")
    limit = max_pixels if max_pixels is not None else settings.max_image_pixels
    if width * height > limit:
        raise ImageFormatError(f"image of {width}x{height} exceeds {limit} pixels")
    pixels = width * height

    if is_bitmap:
        if magic == b"P4":
            row_bytes = (width + 7) // 8
            body = _raw_body(data, pos, row_bytes * height)
            packed = np.frombuffer(body, dtype=np.uint8).reshape(height, row_bytes)
            bits = np.unpackbits(packed, axis=1)[:, :width]
        else:
            digits = bytes(b for b in _strip_comments(data[pos:]) if b not in _WHITESPACE)
            if len(digits) != pixels or digits.strip(b"01"):
                raise ImageFormatError(
                    f"plain bitmap needs {pixels} digits of 0/1, got {len(digits)} characters"
                )
            bits = np.frombuffer(digits, dtype=np.uint8) - ord("0")
        return BitMessage(bits.reshape(-1), width, height)

    maxval = fields[2]
    if not 0 < maxval <= NETPBM_MAX_MAXVAL:
        raise ImageFormatError(f"unsupported maxval {maxval}")
    if magic == b"P5":
        sample = np.dtype(np.uint8) if maxval < 256 else np.dtype(">u2")
        body = _raw_body(data, pos, pixels * sample.itemsize)
        raw = np.frombuffer(body, dtype=sample).astype(np.int64)
    else:
        tokens = _strip_comments(data[pos:]).split()
        if len(tokens) != pixels:
            raise ImageFormatError(f"plain graymap needs {pixels} samples, got {len(tokens)}")
        try:
            raw = np.array([int(token) for token in tokens], dtype=np.int64)
        except (ValueError, OverflowError) as e:
            raise ImageFormatError(f"bad sample: {e}") from e
    if np.any(raw > maxval) or np.any(raw < 0):
        raise ImageFormatError(f"sample exceeds maxval {maxval}")
    return GrayMessage(raw / maxval, width, height, maxval=maxval)


def render_image(
    msg: Message, plain: bool = False, maxval: Optional[int] = None
) -> bytes:
    """Encode a message as PBM (bits) or PGM (gray levels).

    Gray samples use ``maxval`` if given, else the depth the message was
    read at, else 65535.
    """
    if isinstance(msg, BitMessage):
        grid = msg.bits.reshape(msg.height, msg.width)
        if plain:
            rows = [" ".join(str(int(b)) for b in row) for row in grid]
            return f"P1\n{msg.width} {msg.height}\n".encode() + "\n".join(rows).encode() + b"\n"
        return f"P4\n{msg.width} {msg.height}\n".encode() + np.packbits(grid, axis=1).tobytes()

    if maxval is None:
        maxval = msg.maxval or NETPBM_DEFAULT_MAXVAL
    if not 0 < maxval <= NETPBM_MAX_MAXVAL:
        raise InputValidationError(f"maxval must lie in [1, {NETPBM_MAX_MAXVAL}]")
    samples = np.rint(msg.levels * maxval).astype(np.int64).reshape(msg.height, msg.width)
    if plain:
        rows = [" ".join(str(int(v)) for v in row) for row in samples]
        header = f"P2\n{msg.width} {msg.height}\n{maxval}\n".encode()
        return header + "\n".join(rows).encode() + b"\n"
    sample = np.dtype(np.uint8) if maxval < 256 else np.dtype(">u2")
    header = f"P5\n{msg.width} {msg.height}\n{maxval}\n".encode()
    return header + samples.astype(sample).tobytes()


def load_image(path: PathLike, max_pixels: Optional[int] = None) -> Message:
    """Read a PBM/PGM file."""
    message = parse_image(Path(path).read_bytes(), max_pixels)
    logger.debug("Loaded %dx%d image from %s", message.width, message.height, path)
    return message


def save_image(
    msg: Message,
    path: PathLike,
    plain: bool = False,
    maxval: Optional[int] = None,
) -> int:
    """Write a PBM/PGM file; returns the number of bytes written."""
    payload = render_image(msg, plain=plain, maxval=maxval)
    Path(path).write_bytes(payload)
    return len(payload)
