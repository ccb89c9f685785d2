"""One-to-one matching of prediction and ground-truth barcodes.

The construction goes through the comparison image Z = min(Y, G). Every
component of a superlevel set of Z sits inside one component of the same
superlevel set of Y and of G, so each Z-bar picks out a bar on either side
by looking up the component containing its birth pixel at its birth
threshold. When several Z-bars land on the same target bar, the most
persistent one keeps it. A prediction bar and a ground-truth bar are matched
when some Z-bar selects both.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError, ValueRangeError
from .grid import LabelMask, _freeze
from .persistence import (
    Bar,
    Barcode,
    component_roots,
    superlevel_barcode,
    superlevel_barcode_with_roots,
)


@dataclass(frozen=True)
class Matching:
    pred: Barcode
    gt: Barcode
    matched_pred_idx: np.ndarray
    matched_gt_idx: np.ndarray

    def __post_init__(self):
        mp = np.asarray(self.matched_pred_idx, np.int64)
        mg = np.asarray(self.matched_gt_idx, np.int64)
        if mp.shape != mg.shape or mp.ndim != 1:
            raise ShapeError("matched index arrays must be parallel 1-d arrays")
        if mp.size != np.unique(mp).size or mg.size != np.unique(mg).size:
            raise ValueRangeError("matching must be injective on both sides")
        object.__setattr__(self, "matched_pred_idx", _freeze(mp))
        object.__setattr__(self, "matched_gt_idx", _freeze(mg))

    @property
    def n_matched(self) -> int:
        return self.matched_pred_idx.size

    @property
    def n_unmatched(self) -> int:
        return len(self.pred) - self.n_matched

    @property
    def unmatched_pred_idx(self) -> np.ndarray:
        mask = np.ones(len(self.pred), bool)
        mask[self.matched_pred_idx] = False
        return np.flatnonzero(mask)

    @property
    def unmatched_gt_idx(self) -> np.ndarray:
        mask = np.ones(len(self.gt), bool)
        mask[self.matched_gt_idx] = False
        return np.flatnonzero(mask)

    def matched_pairs(self) -> list[tuple[Bar, Bar]]:
        return [
            (self.pred.bar(int(i)), self.gt.bar(int(j)))
            for i, j in zip(self.matched_pred_idx, self.matched_gt_idx)
        ]

    def to_obj(self) -> dict:
        return {
            "matched": [[p.to_obj(), g.to_obj()] for p, g in self.matched_pairs()],
            "unmatched_pred": [self.pred.bar(int(i)).to_obj() for i in self.unmatched_pred_idx],
            "unmatched_gt": [self.gt.bar(int(j)).to_obj() for j in self.unmatched_gt_idx],
        }


def comparison_map(pred_channel: np.ndarray, gt_indicator: np.ndarray) -> np.ndarray:
    y = np.asarray(pred_channel, np.float64)
    g = np.asarray(gt_indicator, np.float64)
    if y.shape != g.shape:
        raise ShapeError(f"shape mismatch: {y.shape} vs {g.shape}")
    return np.minimum(y, g)


def _assign_from_roots(
    z_barcode: Barcode, roots: np.ndarray, target_barcode: Barcode, width: int
) -> np.ndarray:
    n = len(z_barcode)
    if n == 0:
        return np.empty(0, np.int64)
    z_flat = z_barcode.birth_pixels[:, 0] * width + z_barcode.birth_pixels[:, 1]
    t_flat = target_barcode.birth_pixels[:, 0] * width + target_barcode.birth_pixels[:, 1]
    if len(t_flat) == 0:
        raise ValueRangeError("component root is not the birth pixel of any target bar")
    t_order = np.argsort(t_flat)
    t_sorted = t_flat[t_order]
    pos = np.searchsorted(t_sorted, roots)
    bad = (pos >= len(t_sorted)) | (t_sorted[np.minimum(pos, len(t_sorted) - 1)] != roots)
    if bad.any():
        raise ValueRangeError("component root is not the birth pixel of any target bar")
    assign = t_order[pos]
    # Injectivity repair: within each collision group the winner is the first
    # under (persistence desc, birth pixel row-major).
    order = np.lexsort((z_flat, -z_barcode.persistences, assign))
    ranked = assign[order]
    first = np.empty(n, bool)
    first[0] = True
    first[1:] = ranked[1:] != ranked[:-1]
    keep = np.zeros(n, bool)
    keep[order] = first
    return np.where(keep, assign, -1)


def induced_assignment(z_barcode: Barcode, target_map: np.ndarray, target_barcode: Barcode) -> np.ndarray:
    """Assign each Z-bar to a target bar; -1 where the assignment was lost.

    Bar i goes to the bar of the elder representative of the target component
    containing its birth pixel in the superlevel set at birth(i). Collisions
    keep the Z-bar with the largest persistence (ties: row-major birth pixel).
    """
    target = np.asarray(target_map, np.float64)
    n = len(z_barcode)
    if n == 0:
        return np.empty(0, np.int64)
    if target.ndim != 2:
        raise ShapeError(f"target map must be 2-d, got shape {target.shape}")
    width = target.shape[1]
    z_flat = z_barcode.birth_pixels[:, 0] * width + z_barcode.birth_pixels[:, 1]
    if np.any(target.ravel()[z_flat] < z_barcode.births):
        raise ValueRangeError("comparison barcode exceeds target map at a birth pixel")
    roots = component_roots(target, z_flat, z_barcode.births)
    return _assign_from_roots(z_barcode, roots, target_barcode, width)


def _match_indicator(pred_channel: np.ndarray, gt_indicator: np.ndarray) -> Matching:
    y = np.ascontiguousarray(pred_channel, np.float64)
    g = np.ascontiguousarray(gt_indicator, np.float64)
    z = comparison_map(y, g)
    z_bar = superlevel_barcode(z)
    width = y.shape[1]
    if len(z_bar) == 0:
        return Matching(
            pred=superlevel_barcode(y),
            gt=superlevel_barcode(g),
            matched_pred_idx=np.empty(0, np.int64),
            matched_gt_idx=np.empty(0, np.int64),
        )
    q_px = z_bar.birth_pixels[:, 0] * width + z_bar.birth_pixels[:, 1]
    y_bar, y_roots = superlevel_barcode_with_roots(y, q_px, z_bar.births)
    g_bar, g_roots = superlevel_barcode_with_roots(g, q_px, z_bar.births)
    a_y = _assign_from_roots(z_bar, y_roots, y_bar, width)
    a_g = _assign_from_roots(z_bar, g_roots, g_bar, width)
    both = (a_y >= 0) & (a_g >= 0)
    mp, mg = a_y[both], a_g[both]
    order = np.argsort(mp, kind="stable")
    return Matching(pred=y_bar, gt=g_bar, matched_pred_idx=mp[order], matched_gt_idx=mg[order])


def betti_match(pred_channel: np.ndarray, mask: LabelMask, category: int) -> Matching:
    """Match the barcode of one prediction channel against a mask category."""
    return _match_indicator(pred_channel, mask.indicator(category))
