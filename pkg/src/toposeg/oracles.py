"""Brute-force reference computations.

These are the slow second route the fast implementations are checked
against: a threshold-enumeration barcode, an all-pairs surface distance,
and a component-overlap matcher for spatially unambiguous instances. They
share as little machinery with the fast paths as possible on purpose.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeError
from .grid import connected_components


def threshold_barcode(channel: np.ndarray) -> list[tuple[float, float, int]]:
    """Barcode by enumerating all distinct positive values descending.

    At each threshold the superlevel set is relabeled from scratch; a fresh
    component is born (birth pixel = its first row-major pixel), and when a
    component absorbs several older ones, all but the elder die at the
    current value. Returns (birth, death, birth_pixel_flat) tuples, unsorted.
    """
    vals = np.asarray(channel, np.float64)
    if vals.ndim != 2:
        raise ShapeError(f"expected a 2-d grid, got shape {vals.shape}")
    flat = vals.ravel()
    thresholds = np.unique(flat[flat > 0.0])[::-1]
    bars: list[tuple[float, float, int]] = []
    alive: dict[int, tuple[float, int]] = {}
    prev_labels = np.zeros_like(vals, dtype=np.int32)
    for t in thresholds:
        labels, count = connected_components((vals >= t).astype(np.float64))
        lab_flat = labels.ravel()
        new_alive: dict[int, tuple[float, int]] = {}
        for lbl in range(1, count + 1):
            pix = np.flatnonzero(lab_flat == lbl)
            olds = np.unique(prev_labels.ravel()[pix])
            olds = [int(o) for o in olds if o != 0]
            if not olds:
                new_alive[lbl] = (float(t), int(pix.min()))
                continue
            members = [alive[o] for o in olds]
            # Elder: largest birth, ties to the smaller row-major birth pixel.
            elder = min(members, key=lambda m: (-m[0], m[1]))
            for m in members:
                if m is not elder:
                    bars.append((m[0], float(t), m[1]))
            new_alive[lbl] = elder
        alive = new_alive
        prev_labels = labels
    for birth, bpix in alive.values():
        bars.append((birth, 0.0, bpix))
    return bars


def allpairs_assd(pred_ind: np.ndarray, gt_ind: np.ndarray) -> float:
    """Symmetric mean nearest-foreground distance by explicit enumeration.

    Returns NaN when either side has no foreground.
    """
    p = np.argwhere(np.asarray(pred_ind) != 0).astype(np.float64)
    g = np.argwhere(np.asarray(gt_ind) != 0).astype(np.float64)
    if p.shape[0] == 0 or g.shape[0] == 0:
        return float("nan")
    d = np.sqrt(((p[:, None, :] - g[None, :, :]) ** 2).sum(axis=2))
    return float((d.min(axis=1).sum() + d.min(axis=0).sum()) / (p.shape[0] + g.shape[0]))


def overlap_pairs(pred_support: np.ndarray, gt_ind: np.ndarray) -> set[tuple[int, int]]:
    """Spatially overlapping (pred component, gt component) label pairs.

    Labels follow first-encounter row-major order on each side. Only
    meaningful as a matching oracle when every overlap is a coincidence
    (prediction components equal to or disjoint from ground-truth ones).
    """
    p_labels, _ = connected_components(np.asarray(pred_support, np.float64))
    g_labels, _ = connected_components(np.asarray(gt_ind, np.float64))
    both = (p_labels > 0) & (g_labels > 0)
    return {(int(a), int(b)) for a, b in zip(p_labels[both], g_labels[both])}
