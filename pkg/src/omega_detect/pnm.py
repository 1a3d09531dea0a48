"""Minimal Netpbm reader/writer for the bilevel and grayscale flavours.

Supported on read: P1/P4 (PBM) and P2/P5 (PGM, 8 or 16 bit). PNG is read
through Pillow when it is installed. Only P5 is written.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import MaskFormatError

_WHITESPACE = b" \t\r\n\v\f"


def _read_header(data: bytes, count: int) -> tuple[list[int], int]:
    """Parse ``count`` integer header fields after the 2-byte magic.

    Returns the fields and the offset of the single whitespace byte that
    terminates the last field.
    """
    fields: list[int] = []
    pos = 2
    n = len(data)
    while len(fields) < count:
        while pos < n and data[pos] in _WHITESPACE:
            pos += 1
        if pos < n and data[pos] == ord("#"):
            while pos < n and data[pos] not in b"\r\n":
                pos += 1
            continue
        start = pos
        while pos < n and data[pos] not in _WHITESPACE and data[pos] != ord("#"):
            pos += 1
        token = data[start:pos]
        if not token:
            raise MaskFormatError("truncated Netpbm header")
        try:
            fields.append(int(token))
        except ValueError:
            raise MaskFormatError(f"bad Netpbm header token {token!r}") from None
    return fields, pos


def _plain_tokens(body: bytes) -> list[bytes]:
    out = []
    for line in body.splitlines():
        line = line.split(b"#", 1)[0]
        out.extend(line.split())
    return out


def read_pnm(data: bytes) -> tuple[np.ndarray, int | None]:
    """Decode a PBM/PGM byte string.

    Returns ``(array, maxval)``. For bitmaps the array is boolean with
    ``True`` where the file stores 1 (ink) and ``maxval`` is ``None``.
    """
    magic = data[:2]
    if magic not in (b"P1", b"P2", b"P4", b"P5"):
        raise MaskFormatError(f"unsupported magic {magic!r}")
    bitmap = magic in (b"P1", b"P4")
    fields, pos = _read_header(data, 2 if bitmap else 3)
    width, height = fields[0], fields[1]
    if width < 1 or height < 1:
        raise MaskFormatError(f"zero-dimension image {width}x{height}")
    maxval = None if bitmap else fields[2]
    if maxval is not None and not 0 < maxval < 65536:
        raise MaskFormatError(f"bad maxval {maxval}")

    if magic == b"P1":
        # plain PBM digits may be packed without separators
        digits = b"".join(_plain_tokens(data[pos:]))
        if len(digits) < width * height:
            raise MaskFormatError("truncated P1 raster")
        arr = np.frombuffer(digits[: width * height], dtype=np.uint8) == ord("1")
        return arr.reshape(height, width), None
    if magic == b"P2":
        tokens = _plain_tokens(data[pos:])
        if len(tokens) < width * height:
            raise MaskFormatError("truncated P2 raster")
        arr = np.array([int(t) for t in tokens[: width * height]], dtype=np.int64)
        return arr.reshape(height, width), maxval

    raster = data[pos + 1 :]
    if magic == b"P4":
        row_bytes = (width + 7) // 8
        if len(raster) < row_bytes * height:
            raise MaskFormatError("truncated P4 raster")
        packed = np.frombuffer(raster[: row_bytes * height], dtype=np.uint8)
        bits = np.unpackbits(packed.reshape(height, row_bytes), axis=1)
        return bits[:, :width].astype(bool), None
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
    need = width * height * dtype.itemsize
    if len(raster) < need:
        raise MaskFormatError("truncated P5 raster")
    arr = np.frombuffer(raster[:need], dtype=dtype).astype(np.int64)
    return arr.reshape(height, width), maxval


def read_image(path: str | os.PathLike) -> tuple[np.ndarray, int | None]:
    """Read a PBM/PGM file, or a PNG via Pillow, as in :func:`read_pnm`."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise MaskFormatError(f"cannot read {path}: {exc}") from exc
    if data[:8] == b"\x89PNG\r\n\x1a\n":
        return _read_png(path)
    return read_pnm(data)


def _read_png(path) -> tuple[np.ndarray, int]:
    try:
        from PIL import Image
    except ImportError as exc:  # pragma: no cover - optional dependency
        raise MaskFormatError("PNG input needs Pillow") from exc
    with Image.open(path) as img:
        gray = np.asarray(img.convert("L"), dtype=np.int64)
    if gray.size == 0:
        raise MaskFormatError("zero-dimension image")
    return gray, 255


def encode_pgm(gray: np.ndarray) -> bytes:
    """Encode a 2-D uint8 array as binary PGM (P5)."""
    gray = np.asarray(gray, dtype=np.uint8)
    height, width = gray.shape
    return b"P5\n%d %d\n255\n" % (width, height) + gray.tobytes()


def write_pgm(path: str | os.PathLike, gray: np.ndarray) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_pgm(gray))
