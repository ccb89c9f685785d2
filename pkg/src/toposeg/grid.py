"""Dense 2D containers, 3x3 pooling, and connected-component labeling.

All containers are immutable after construction (backing arrays are marked
read-only) and every operation here is a pure function, so instances can be
shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import ndimage

from .errors import CategoryError, LabelRangeError, ShapeError, ValueRangeError


class PixelCoord(NamedTuple):
    row: int
    col: int


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class LikelihoodMap:
    """Per-category prediction probabilities, shape (categories, height, width).

    Values are float64 in [0, 1]. Category l (1-based) lives in plane l - 1.
    """

    data: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.data, dtype=np.float64)
        if a.ndim != 3:
            raise ShapeError(f"likelihood map must be 3-d (categories, height, width), got shape {a.shape}")
        if min(a.shape) < 1:
            raise ShapeError(f"likelihood map dimensions must be >= 1, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueRangeError("likelihood map contains non-finite values")
        if a.min() < 0.0 or a.max() > 1.0:
            raise ValueRangeError(
                f"likelihood values must lie in [0, 1], found range [{a.min()}, {a.max()}]"
            )
        object.__setattr__(self, "data", _freeze(a))

    @property
    def categories(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    def channel(self, category: int) -> np.ndarray:
        """Plane for 1-based category index."""
        if not 1 <= category <= self.categories:
            raise CategoryError(f"category {category} outside 1..{self.categories}")
        return self.data[category - 1]


@dataclass(frozen=True)
class LabelMask:
    """Integer ground-truth labels, shape (height, width), values 0..categories."""

    data: np.ndarray
    categories: int

    def __post_init__(self):
        a = np.asarray(self.data)
        if a.ndim != 2:
            raise ShapeError(f"label mask must be 2-d, got shape {a.shape}")
        if min(a.shape) < 1:
            raise ShapeError(f"label mask dimensions must be >= 1, got shape {a.shape}")
        if not np.issubdtype(a.dtype, np.integer):
            raise ValueRangeError(f"label mask must be integer-typed, got {a.dtype}")
        if self.categories < 1:
            raise CategoryError(f"category count must be >= 1, got {self.categories}")
        if a.min() < 0 or a.max() > self.categories:
            raise LabelRangeError(
                f"labels must lie in 0..{self.categories}, found range [{a.min()}, {a.max()}]"
            )
        object.__setattr__(self, "data", _freeze(a.astype(np.uint8)))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    def indicator(self, category: int) -> np.ndarray:
        """Float 0/1 plane marking pixels of a 1-based category."""
        if not 1 <= category <= self.categories:
            raise CategoryError(f"category {category} outside 1..{self.categories}")
        return (self.data == category).astype(np.float64)


@dataclass(frozen=True)
class FeatureMap:
    """Real-valued feature planes, shape (channels, height, width), finite values."""

    data: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.data, dtype=np.float64)
        if a.ndim != 3:
            raise ShapeError(f"feature map must be 3-d (channels, height, width), got shape {a.shape}")
        if min(a.shape) < 1:
            raise ShapeError(f"feature map dimensions must be >= 1, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueRangeError("feature map contains non-finite values")
        object.__setattr__(self, "data", _freeze(a))

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]


_STRUCTURE_4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)
_STRUCTURE_8 = np.ones((3, 3), dtype=bool)


def connected_components(indicator: np.ndarray, connectivity: int = 4) -> tuple[np.ndarray, int]:
    """Label foreground components of a 0/1 grid.

    Labels are 1..K in first-encounter order of a row-major scan; background
    stays 0. Returns (labels, K).
    """
    a = np.asarray(indicator)
    if a.ndim != 2:
        raise ShapeError(f"indicator must be 2-d, got shape {a.shape}")
    if connectivity not in (4, 8):
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    vals = np.unique(a)
    if not np.isin(vals, (0, 1)).all():
        raise ValueError("indicator must be 0/1 valued")
    structure = _STRUCTURE_4 if connectivity == 4 else _STRUCTURE_8
    raw, count = ndimage.label(a != 0, structure=structure)
    if count == 0:
        return raw.astype(np.int32), 0
    # Renumber so labels follow the first row-major occurrence of each component.
    flat = raw.ravel()
    fg = flat > 0
    first = np.full(count + 1, flat.size, dtype=np.int64)
    idx = np.nonzero(fg)[0]
    np.minimum.at(first, flat[idx], idx)
    order = np.argsort(first[1:], kind="stable")
    remap = np.zeros(count + 1, dtype=np.int32)
    remap[1:][order] = np.arange(1, count + 1, dtype=np.int32)
    return remap[raw], count


def _pooled_windows(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeError(f"pooling expects a 2-d map, got shape {a.shape}")
    if min(a.shape) < 1:
        raise ShapeError("pooling expects a non-empty map")
    padded = np.pad(a, 1, mode="edge")
    return sliding_window_view(padded, (3, 3))


def avg_pool_3x3(a: np.ndarray) -> np.ndarray:
    """Mean over the 3x3 neighborhood with replicate (edge-clamp) padding."""
    return _pooled_windows(a).mean(axis=(2, 3))


def max_pool_3x3(a: np.ndarray) -> np.ndarray:
    """Max over the 3x3 neighborhood with replicate padding."""
    return _pooled_windows(a).max(axis=(2, 3))


def min_pool_3x3(a: np.ndarray) -> np.ndarray:
    """Min over the 3x3 neighborhood with replicate padding."""
    return _pooled_windows(a).min(axis=(2, 3))
