"""Background/foreground separation for grayscale frame sequences.

Each pixel is a data point whose features are its intensities over the
frames, so a video of ``f`` frames of ``m x n`` pixels becomes an
``(m*n, f)`` matrix with pixels in row-major scan order.  The background is
the projection of every pixel onto the fitted affine subspace; the object
map is the L1 norm of each pixel's residual.
"""

import re
from pathlib import Path

import numpy as np

from .core import fit, reconstruct
from .errors import ParseError, ShapeMismatch


def as_frames(frames):
    """Validate a frame stack ``(f, m, n)``; uint8 is kept, floats must lie in [0, 1]."""
    if isinstance(frames, (list, tuple)):
        shapes = {np.shape(f) for f in frames}
        if len(shapes) > 1:
            raise ShapeMismatch(f"frames have differing shapes: {sorted(shapes)}")
    arr = np.asarray(frames)
    if arr.ndim != 3:
        raise ShapeMismatch(f"expected frames of shape (f, m, n), got {arr.shape}")
    if arr.shape[0] < 2:
        raise ShapeMismatch("need at least two frames")
    if arr.dtype != np.uint8:
        arr = arr.astype(np.float64)
        if not np.all(np.isfinite(arr)) or arr.min() < 0 or arr.max() > 1:
            raise ShapeMismatch("real-valued frames must lie in [0, 1]")
    return arr


def frames_to_matrix(frames):
    frames = as_frames(frames)
    f = frames.shape[0]
    X = frames.reshape(f, -1).T
    if frames.dtype == np.uint8:
        return X.astype(np.float64) / 255.0
    return np.array(X, dtype=np.float64)


def matrix_to_frames(X, shape, quantize=True):
    """Inverse of ``frames_to_matrix``; ``quantize`` rounds to uint8."""
    X = np.asarray(X, dtype=np.float64)
    m, n = shape
    if X.shape[0] != m * n:
        raise ShapeMismatch(f"{X.shape[0]} pixel rows do not fit a {m}x{n} frame")
    frames = X.T.reshape(X.shape[1], m, n)
    if quantize:
        return np.rint(np.clip(frames, 0.0, 1.0) * 255.0).astype(np.uint8)
    return frames


def separate(frames, config):
    """Fit on the pixel matrix and split into background and object map.

    Returns
    -------
    background : (f, m, n) float array in [0, 1]
    object_map : (m, n) float array, L1 residual per pixel
    model : fitted MompcaModel
    """
    frames = as_frames(frames)
    shape = frames.shape[1:]
    X = frames_to_matrix(frames)
    model = fit(X, config)
    R = reconstruct(model, X)
    object_map = np.abs(X - R).sum(axis=1).reshape(shape)
    background = matrix_to_frames(np.clip(R, 0.0, 1.0), shape, quantize=False)
    return background, object_map, model


_PGM_HEADER = re.compile(rb"P5\s+(?:#[^\n]*\n\s*)*(\d+)\s+(?:#[^\n]*\n\s*)*(\d+)\s+(?:#[^\n]*\n\s*)*(\d+)\s")


def read_pgm(path):
    data = Path(path).read_bytes()
    match = _PGM_HEADER.match(data)
    if not match:
        raise ParseError(f"{path}: not a binary (P5) PGM file")
    width, height, maxval = (int(g) for g in match.groups())
    if maxval != 255:
        raise ParseError(f"{path}: only maxval 255 is supported, got {maxval}")
    body = data[match.end():match.end() + width * height]
    if len(body) != width * height:
        raise ParseError(f"{path}: truncated pixel data")
    return np.frombuffer(body, dtype=np.uint8).reshape(height, width).copy()


def pgm_bytes(image):
    image = np.asarray(image)
    if image.dtype != np.uint8 or image.ndim != 2:
        raise ShapeMismatch("PGM output needs a 2-D uint8 image")
    h, w = image.shape
    return b"P5\n%d %d\n255\n" % (w, h) + image.tobytes()


def heat_image(values):
    """Scale a non-negative map to uint8 with its maximum at 255."""
    values = np.asarray(values, dtype=np.float64)
    top = values.max()
    if top <= 0:
        return np.zeros(values.shape, dtype=np.uint8)
    return np.rint(values / top * 255.0).astype(np.uint8)
