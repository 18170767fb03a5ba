"""Grayscale image I/O (PGM/PPM) and the two image recipes.

Images are ``uint8`` numpy arrays of shape ``(height, width)`` (or
``(height, width, 3)`` for PPM colour images).  Frame stacks are sequences
of equally sized grayscale images.
"""

import numpy as np

from .base import McProblem, RpcaProblem, SolverConfig
from .completion import MC_SOLVERS, solve_mc
from .rpca import pcp_ialm

__all__ = [
    "PnmError",
    "read_pgm",
    "write_pgm",
    "read_ppm",
    "write_ppm",
    "read_pnm",
    "psnr",
    "inpaint",
    "background_subtract",
    "frames_to_matrix",
    "matrix_to_frames",
]

_WS = b" \t\n\r\v\f"


class PnmError(ValueError):
    """Malformed PGM/PPM data; ``offset`` is the byte position of the problem."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


class _Reader:
    def __init__(self, data):
        self.data = bytes(data)
        self.pos = 0

    def skip_space(self):
        d = self.data
        while self.pos < len(d):
            c = d[self.pos : self.pos + 1]
            if c in _WS:
                self.pos += 1
            elif c == b"#":
                while self.pos < len(d) and d[self.pos : self.pos + 1] not in (b"\n", b"\r"):
                    self.pos += 1
            else:
                break

    def token(self, what):
        self.skip_space()
        start = self.pos
        d = self.data
        while self.pos < len(d) and d[self.pos : self.pos + 1] not in _WS and d[self.pos : self.pos + 1] != b"#":
            self.pos += 1
        if self.pos == start:
            raise PnmError(f"expected {what}, found end of data", start)
        return d[start : self.pos], start

    def integer(self, what, lo, hi):
        tok, at = self.token(what)
        if not tok.isdigit():
            raise PnmError(f"expected {what}, found {tok[:16]!r}", at)
        v = int(tok)
        if not lo <= v <= hi:
            raise PnmError(f"{what} {v} outside [{lo}, {hi}]", at)
        return v


def _read_pnm(data, magics):
    rd = _Reader(data)
    if len(rd.data) < 2 or rd.data[:2] not in magics:
        raise PnmError(f"expected magic number {' or '.join(m.decode() for m in magics)}", 0)
    magic = rd.data[:2]
    rd.pos = 2
    channels = 3 if magic in (b"P3", b"P6") else 1
    width = rd.integer("width", 1, 1 << 31)
    height = rd.integer("height", 1, 1 << 31)
    maxval = rd.integer("maxval", 1, 255)
    count = width * height * channels
    if magic in (b"P5", b"P6"):
        if rd.pos >= len(rd.data) or rd.data[rd.pos : rd.pos + 1] not in _WS:
            raise PnmError("expected a single whitespace byte after maxval", rd.pos)
        start = rd.pos + 1
        payload = rd.data[start : start + count]
        if len(payload) < count:
            raise PnmError(
                f"truncated payload: expected {count} bytes, got {len(payload)}", start + len(payload)
            )
        pix = np.frombuffer(payload, dtype=np.uint8).copy()
        over = np.flatnonzero(pix > maxval)
        if over.size:
            raise PnmError(f"sample {pix[over[0]]} exceeds maxval {maxval}", start + int(over[0]))
    else:
        pix = np.empty(count, dtype=np.uint8)
        for i in range(count):
            try:
                pix[i] = rd.integer("sample", 0, maxval)
            except PnmError as err:
                if "end of data" in str(err):
                    raise PnmError(f"truncated payload: {i} of {count} samples", err.offset) from None
                raise
    shape = (height, width, 3) if channels == 3 else (height, width)
    return pix.reshape(shape)


def read_pgm(data):
    """Decode a P2 (ASCII) or P5 (binary) PGM with maxval <= 255."""
    return _read_pnm(data, (b"P2", b"P5"))


def read_ppm(data):
    """Decode a P3 or P6 PPM colour image into ``(height, width, 3)`` uint8."""
    return _read_pnm(data, (b"P3", b"P6"))


def read_pnm(data):
    return _read_pnm(data, (b"P2", b"P5", b"P3", b"P6"))


def _as_image(image, channels):
    img = np.asarray(image)
    if np.issubdtype(img.dtype, np.floating):
        if not np.all(np.isfinite(img)):
            raise ValueError("image contains NaN or Inf")
    if img.size and (img.min() < 0 or img.max() > 255):
        raise ValueError("pixel values must lie in [0, 255]")
    if channels == 1 and img.ndim != 2:
        raise ValueError(f"grayscale image must be 2-D, got shape {img.shape}")
    if channels == 3 and (img.ndim != 3 or img.shape[2] != 3):
        raise ValueError(f"colour image must have shape (h, w, 3), got {img.shape}")
    return img.astype(np.uint8)


def write_pgm(image):
    """Binary P5 encoding: ``P5\\n<w> <h>\\n255\\n`` followed by row-major bytes."""
    img = _as_image(image, 1)
    h, w = img.shape
    return b"P5\n%d %d\n255\n" % (w, h) + img.tobytes()


def write_ppm(image):
    img = _as_image(image, 3)
    h, w, _ = img.shape
    return b"P6\n%d %d\n255\n" % (w, h) + img.tobytes()


def psnr(estimate, reference, peak=255.0):
    """Peak signal-to-noise ratio in dB (``inf`` for identical images)."""
    a = np.asarray(estimate, dtype=float)
    b = np.asarray(reference, dtype=float)
    mse = np.mean((a - b) ** 2)
    if mse == 0:
        return float("inf")
    return float(10 * np.log10(peak * peak / mse))


def _to_uint8(X):
    return np.clip(np.rint(X), 0, 255).astype(np.uint8)


def _inpaint_channel(img, observed, solver, config):
    # intensities scaled to [0, 1] so solver defaults see unit-scale data
    problem = McProblem(img.astype(float) / 255.0, observed)
    X, _ = solve_mc(solver, problem, config)
    return _to_uint8(255.0 * X)


def inpaint(image, mask, solver="soft-impute", config=None):
    """Fill the missing pixels of `image` by matrix completion.

    `mask` is a same-sized image with 255 for observed pixels and 0 for
    missing ones.  Colour images ``(h, w, 3)`` are completed channel by
    channel with the same mask.  The result is clamped to [0, 255] and
    rounded.
    """
    img = np.asarray(image)
    msk = np.asarray(mask)
    if msk.shape != img.shape[:2]:
        raise ValueError(f"mask shape {msk.shape} does not match image shape {img.shape[:2]}")
    if not np.all((msk == 0) | (msk == 255)):
        raise ValueError("mask must be binary (0 = missing, 255 = observed)")
    if solver not in MC_SOLVERS:
        raise ValueError(f"unknown completion solver {solver!r}")
    observed = msk == 255
    if np.count_nonzero(observed) < 2:
        raise ValueError("need at least two observed pixels to inpaint")
    config = config or SolverConfig()
    if img.ndim == 3:
        _as_image(img, 3)
        return np.stack(
            [_inpaint_channel(img[:, :, c], observed, solver, config) for c in range(img.shape[2])],
            axis=2,
        )
    _as_image(img, 1)
    return _inpaint_channel(img, observed, solver, config)


def frames_to_matrix(frames):
    """Stack frames as columns: pixel ``(y, x)`` of frame ``j`` goes to row ``y * w + x``, column ``j``."""
    fr = [np.asarray(f) for f in frames]
    if not fr:
        raise ValueError("frame stack is empty")
    shape = fr[0].shape
    if len(shape) != 2:
        raise ValueError(f"frames must be 2-D grayscale images, got shape {shape}")
    for j, f in enumerate(fr):
        if f.shape != shape:
            raise ValueError(f"frame {j} has shape {f.shape}, expected {shape}")
    return np.stack([f.astype(float).ravel() for f in fr], axis=1), shape


def matrix_to_frames(M, shape):
    return np.stack([M[:, j].reshape(shape) for j in range(M.shape[1])])


def background_subtract(frames, config=None, fg_floor=1.0):
    """Split a static-camera frame stack into background and foreground by PCP.

    Returns ``(background, foreground)``, each a ``(n_frames, h, w)`` uint8
    array.  The background is the low-rank part clamped to [0, 255].  The
    foreground is ``|E|`` rescaled per frame so its maximum maps to 255; a
    frame whose largest ``|E|`` is below `fg_floor` grey levels is scaled by
    ``255 / fg_floor`` instead, so numerically zero residue stays dark.
    """
    D, shape = frames_to_matrix(frames)
    if D.shape[1] < 2:
        raise ValueError("background subtraction needs at least two frames")
    sol = pcp_ialm(RpcaProblem(D), config or SolverConfig())
    background = matrix_to_frames(_to_uint8(sol.low_rank), shape)
    mag = np.abs(sol.sparse)
    scale = 255.0 / np.maximum(mag.max(axis=0), fg_floor)
    foreground = matrix_to_frames(_to_uint8(mag * scale), shape)
    return background, foreground
