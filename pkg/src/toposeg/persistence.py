"""0-dimensional persistence of single-category maps, superlevel filtration.

Thresholds sweep downward from 1, so a high-confidence blob is born early
and survives long. Components merge through 4-adjacency; the elder rule
keeps the component with the larger birth alive (ties broken toward the
smaller row-major birth pixel). A component that never merges and is still
alive at value 0 becomes an essential bar with death 0. Zero-valued pixels
never activate, so each positive-support component yields exactly one
essential bar. Zero-persistence bars are dropped.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import _kernels
from .errors import ShapeError, ValueRangeError
from .grid import LabelMask, PixelCoord, _freeze


@dataclass(frozen=True)
class Bar:
    birth: float
    death: float
    birth_pixel: PixelCoord
    death_pixel: PixelCoord | None
    essential: bool

    def __post_init__(self):
        if not self.birth > self.death:
            raise ValueRangeError(f"bar must satisfy birth > death, got ({self.birth}, {self.death})")
        if self.essential != (self.death_pixel is None):
            raise ValueRangeError("essential bars carry no death pixel, finite bars must")
        if self.essential and self.death != 0.0:
            raise ValueRangeError(f"essential bar must die at 0, got {self.death}")

    @property
    def persistence(self) -> float:
        return self.birth - self.death

    def to_obj(self) -> dict:
        return {
            "birth": float(self.birth),
            "death": float(self.death),
            "birth_pixel": [int(self.birth_pixel.row), int(self.birth_pixel.col)],
            "death_pixel": None if self.death_pixel is None else [int(self.death_pixel.row), int(self.death_pixel.col)],
            "essential": bool(self.essential),
        }


@dataclass(frozen=True)
class Barcode:
    """Array-backed bar list, sorted by (birth desc, persistence desc, birth pixel).

    ``death_pixels`` rows are (-1, -1) for essential bars. The arrays are the
    canonical storage; ``bars`` materializes Bar objects on demand.
    """

    births: np.ndarray
    deaths: np.ndarray
    birth_pixels: np.ndarray
    death_pixels: np.ndarray
    essential: np.ndarray

    def __post_init__(self):
        n = self.births.shape[0]
        for name in ("births", "deaths", "birth_pixels", "death_pixels", "essential"):
            a = getattr(self, name)
            if a.shape[0] != n:
                raise ShapeError("barcode arrays disagree on bar count")
            object.__setattr__(self, name, _freeze(a))

    def __len__(self) -> int:
        return self.births.shape[0]

    def __iter__(self) -> Iterator[Bar]:
        return iter(self.bars())

    @property
    def persistences(self) -> np.ndarray:
        return self.births - self.deaths

    def bar(self, i: int) -> Bar:
        ess = bool(self.essential[i])
        return Bar(
            birth=float(self.births[i]),
            death=float(self.deaths[i]),
            birth_pixel=PixelCoord(int(self.birth_pixels[i, 0]), int(self.birth_pixels[i, 1])),
            death_pixel=None if ess else PixelCoord(int(self.death_pixels[i, 0]), int(self.death_pixels[i, 1])),
            essential=ess,
        )

    def bars(self) -> tuple[Bar, ...]:
        return tuple(self.bar(i) for i in range(len(self)))

    def to_obj(self) -> list[dict]:
        return [self.bar(i).to_obj() for i in range(len(self))]

    def pairs(self) -> list[tuple[float, float]]:
        """(birth, death) tuples, handy for multiset comparison in tests."""
        return [(float(b), float(d)) for b, d in zip(self.births, self.deaths)]


def _empty_barcode() -> Barcode:
    return Barcode(
        births=np.empty(0, np.float64),
        deaths=np.empty(0, np.float64),
        birth_pixels=np.empty((0, 2), np.int64),
        death_pixels=np.empty((0, 2), np.int64),
        essential=np.empty(0, bool),
    )


def _assemble(vals: np.ndarray, width: int, mb, md, eb) -> Barcode:
    flat = vals.ravel()
    births = np.concatenate([flat[mb], flat[eb]])
    deaths = np.concatenate([flat[md], np.zeros(eb.size)])
    birth_idx = np.concatenate([mb, eb])
    death_idx = np.concatenate([md, np.full(eb.size, -1, np.int64)])
    ess = np.concatenate([np.zeros(mb.size, bool), np.ones(eb.size, bool)])
    order = np.lexsort((birth_idx, -(births - deaths), -births))
    births, deaths = births[order], deaths[order]
    birth_idx, death_idx, ess = birth_idx[order], death_idx[order], ess[order]
    birth_px = np.stack([birth_idx // width, birth_idx % width], axis=1)
    death_px = np.where(
        death_idx[:, None] < 0, -1, np.stack([death_idx // width, death_idx % width], axis=1)
    )
    return Barcode(births=births, deaths=deaths, birth_pixels=birth_px, death_pixels=death_px, essential=ess)


def _checked_channel(channel: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(channel, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeError(f"expected a single-category 2-d grid, got shape {a.shape}")
    if min(a.shape) < 1:
        raise ShapeError("grid dimensions must be >= 1")
    if not np.all(np.isfinite(a)):
        raise ValueRangeError("grid contains non-finite values")
    if a.min() < 0.0 or a.max() > 1.0:
        raise ValueRangeError(f"grid values must lie in [0, 1], found range [{a.min()}, {a.max()}]")
    return a


def _sweep(vals: np.ndarray, q_px: np.ndarray, q_thr: np.ndarray):
    h, w = vals.shape
    flat = vals.ravel()
    active = np.flatnonzero(flat > 0.0)
    order = active[np.lexsort((active, -flat[active]))]
    rank = np.full(flat.size, -1, np.int64)
    rank[order] = np.arange(order.size)
    return _kernels.sweep_barcode(order, rank, flat, h, w, q_px, q_thr)


def superlevel_barcode(channel: np.ndarray) -> Barcode:
    """Barcode of the superlevel filtration {v >= t} of one channel."""
    vals = _checked_channel(channel)
    mb, md, eb, _ = _sweep(vals, np.empty(0, np.int64), np.empty(0, np.float64))
    if mb.size == 0 and eb.size == 0:
        return _empty_barcode()
    return _assemble(vals, vals.shape[1], mb, md, eb)


def _checked_queries(vals: np.ndarray, pixels: np.ndarray, thresholds: np.ndarray):
    px = np.asarray(pixels, np.int64)
    thr = np.asarray(thresholds, np.float64)
    if px.shape != thr.shape or px.ndim != 1:
        raise ShapeError("queries must be parallel 1-d arrays")
    if px.size and (px.min() < 0 or px.max() >= vals.size):
        raise ShapeError("query pixel out of bounds")
    if px.size and np.any(thr <= 0.0):
        raise ValueRangeError("query thresholds must be positive")
    if px.size and np.any(vals.ravel()[px] < thr):
        raise ValueRangeError("query pixel inactive at its threshold")
    return px, thr


def superlevel_barcode_with_roots(
    channel: np.ndarray, pixels: np.ndarray, thresholds: np.ndarray
) -> tuple[Barcode, np.ndarray]:
    """One sweep yielding both the barcode and per-query component roots.

    Query i asks about flat pixel ``pixels[i]`` in the superlevel set at
    ``thresholds[i]``; that pixel must be active there (value >= threshold > 0).
    Answers are the flat birth pixels of the components' elder
    representatives, ready to be looked up in the returned barcode.
    """
    vals = _checked_channel(channel)
    px, thr = _checked_queries(vals, pixels, thresholds)
    order = np.argsort(-thr, kind="stable")
    mb, md, eb, answers = _sweep(vals, px[order], thr[order])
    roots = np.empty(px.size, np.int64)
    roots[order] = answers
    if mb.size == 0 and eb.size == 0:
        return _empty_barcode(), roots
    return _assemble(vals, vals.shape[1], mb, md, eb), roots


def component_roots(channel: np.ndarray, pixels: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    """Elder birth pixel (flat index) of the component containing each query."""
    _, roots = superlevel_barcode_with_roots(channel, pixels, thresholds)
    return roots


def gt_barcode(mask: LabelMask, category: int) -> Barcode:
    """Barcode of a ground-truth category: one essential (1, 0) bar per component."""
    return superlevel_barcode(mask.indicator(category))
