"""Minimal PGM/PPM reader and writer (P2, P3, P5, P6)."""
import numpy as np

_CHANNELS = {b"P2": 1, b"P5": 1, b"P3": 3, b"P6": 3}


def _tokens(data, count, pos):
    out = []
    while len(out) < count:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise ValueError("truncated netpbm header")
        out.append(data[start:pos])
    return out, pos


def read_image(path):
    """Read a PGM/PPM file.

    Returns ``(pixels, maxval)`` with ``pixels`` an integer array of shape
    ``(height, width, channels)``.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    magic = data[:2]
    if magic not in _CHANNELS:
        raise ValueError(f"{path}: not a PGM/PPM file (magic {magic!r})")
    ch = _CHANNELS[magic]
    (w, h, maxval), pos = _tokens(data, 3, 2)
    w, h, maxval = int(w), int(h), int(maxval)
    if not 0 < maxval < 65536:
        raise ValueError(f"{path}: bad maxval {maxval}")
    count = w * h * ch
    if magic in (b"P5", b"P6"):
        pos += 1  # single whitespace byte after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.uint8
        raw = np.frombuffer(data, dtype=dtype, count=count, offset=pos)
    else:
        vals, _ = _tokens(data, count, pos)
        raw = np.array([int(v) for v in vals])
    return raw.astype(np.int64).reshape(h, w, ch), maxval


def write_image(path, pixels, maxval=255):
    """Write a binary PGM (1 channel) or PPM (3 channels)."""
    px = np.asarray(pixels)
    if px.ndim == 2:
        px = px[:, :, None]
    h, w, ch = px.shape
    if ch not in (1, 3):
        raise ValueError("images need 1 or 3 channels")
    magic = b"P5" if ch == 1 else b"P6"
    dtype = np.dtype(">u2") if maxval > 255 else np.uint8
    with open(path, "wb") as fh:
        fh.write(magic + b"\n%d %d\n%d\n" % (w, h, maxval))
        fh.write(np.clip(px, 0, maxval).astype(dtype).tobytes())


def to_unit(pixels, maxval):
    return pixels.astype(np.float64) / maxval


def from_unit(values, maxval=255):
    return np.rint(np.clip(values, 0.0, 1.0) * maxval).astype(np.int64)
