"""Per-category overlap and surface-distance metrics plus corpus evaluation.

Surface distance is the symmetric mean of exact Euclidean nearest-foreground
distances over the full foreground pixel sets. When either side of a
category is empty the distance is undefined; such cells carry a NaN
sentinel and are excluded from aggregate means, with the exclusion count
reported so averages stay auditable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import CorpusError, ShapeError
from .grid import LabelMask
from .io import read_mask


@dataclass(frozen=True)
class CategoryMetrics:
    dsc: float
    iou: float
    assd: float

    @property
    def assd_defined(self) -> bool:
        return not math.isnan(self.assd)

    def to_obj(self) -> dict:
        return {
            "dsc": self.dsc,
            "iou": self.iou,
            "assd": None if not self.assd_defined else self.assd,
            "assd_defined": self.assd_defined,
        }


@dataclass(frozen=True)
class ImageReport:
    stem: str
    per_category: list[CategoryMetrics]

    @property
    def mean_dsc(self) -> float:
        return float(np.mean([m.dsc for m in self.per_category]))

    @property
    def mean_iou(self) -> float:
        return float(np.mean([m.iou for m in self.per_category]))

    @property
    def mean_assd(self) -> float:
        """Mean over defined cells; NaN when none are defined."""
        vals = [m.assd for m in self.per_category if m.assd_defined]
        return float(np.mean(vals)) if vals else float("nan")

    def to_obj(self) -> dict:
        return {
            "stem": self.stem,
            "per_category": [m.to_obj() for m in self.per_category],
            "mean_dsc": self.mean_dsc,
            "mean_iou": self.mean_iou,
            "mean_assd": None if math.isnan(self.mean_assd) else self.mean_assd,
        }


@dataclass(frozen=True)
class MetricReport:
    images: list[ImageReport]
    categories: int

    def _cells(self, category: int | None = None) -> list[CategoryMetrics]:
        if category is None:
            return [m for img in self.images for m in img.per_category]
        return [img.per_category[category - 1] for img in self.images]

    def mean_dsc(self, category: int | None = None) -> float:
        return float(np.mean([m.dsc for m in self._cells(category)]))

    def mean_iou(self, category: int | None = None) -> float:
        return float(np.mean([m.iou for m in self._cells(category)]))

    def mean_assd(self, category: int | None = None) -> float:
        vals = [m.assd for m in self._cells(category) if m.assd_defined]
        return float(np.mean(vals)) if vals else float("nan")

    def assd_excluded(self, category: int | None = None) -> int:
        return sum(1 for m in self._cells(category) if not m.assd_defined)

    def to_obj(self) -> dict:
        def triple(cat):
            ma = self.mean_assd(cat)
            return {
                "dsc": self.mean_dsc(cat),
                "iou": self.mean_iou(cat),
                "assd": None if math.isnan(ma) else ma,
                "assd_excluded": self.assd_excluded(cat),
            }

        return {
            "categories": self.categories,
            "images": [img.to_obj() for img in self.images],
            "per_category_means": [triple(c) for c in range(1, self.categories + 1)],
            "means": triple(None),
        }


def _indicators(pred_mask: LabelMask, gt_mask: LabelMask, category: int):
    if (pred_mask.height, pred_mask.width) != (gt_mask.height, gt_mask.width):
        raise ShapeError(
            f"mask shapes differ: {pred_mask.height}x{pred_mask.width}"
            f" vs {gt_mask.height}x{gt_mask.width}"
        )
    return pred_mask.indicator(category) != 0, gt_mask.indicator(category) != 0


def dsc(pred_mask: LabelMask, gt_mask: LabelMask, category: int) -> float:
    """Dice overlap of one category; 1 when both sides empty, 0 when one is."""
    p, g = _indicators(pred_mask, gt_mask, category)
    np_, ng = int(p.sum()), int(g.sum())
    if np_ + ng == 0:
        return 1.0
    return 2.0 * int((p & g).sum()) / (np_ + ng)


def iou(pred_mask: LabelMask, gt_mask: LabelMask, category: int) -> float:
    """Intersection over union of one category; same empty conventions as dsc."""
    p, g = _indicators(pred_mask, gt_mask, category)
    union = int((p | g).sum())
    if union == 0:
        return 1.0
    return int((p & g).sum()) / union


def assd(pred_mask: LabelMask, gt_mask: LabelMask, category: int) -> float:
    """Average symmetric surface distance in pixels; NaN when a side is empty."""
    p, g = _indicators(pred_mask, gt_mask, category)
    np_, ng = int(p.sum()), int(g.sum())
    if np_ == 0 or ng == 0:
        return float("nan")
    to_g = ndimage.distance_transform_edt(~g)
    to_p = ndimage.distance_transform_edt(~p)
    return float((to_g[p].sum() + to_p[g].sum()) / (np_ + ng))


def evaluate_pair(pred_mask: LabelMask, gt_mask: LabelMask) -> list[CategoryMetrics]:
    if pred_mask.categories != gt_mask.categories:
        raise ShapeError(
            f"masks declare different category counts:"
            f" {pred_mask.categories} vs {gt_mask.categories}"
        )
    return [
        CategoryMetrics(
            dsc=dsc(pred_mask, gt_mask, c),
            iou=iou(pred_mask, gt_mask, c),
            assd=assd(pred_mask, gt_mask, c),
        )
        for c in range(1, pred_mask.categories + 1)
    ]


def evaluate_corpus(pred_dir: str | Path, gt_dir: str | Path) -> MetricReport:
    """Evaluate paired .pgm masks across two directories, ordered by stem.

    The category count is the largest label seen anywhere in the corpus, so
    every image reports the same category list.
    """
    pred_dir, gt_dir = Path(pred_dir), Path(gt_dir)
    pred_files = {p.stem: p for p in pred_dir.glob("*.pgm")}
    gt_files = {p.stem: p for p in gt_dir.glob("*.pgm")}
    only_pred = sorted(set(pred_files) - set(gt_files))
    only_gt = sorted(set(gt_files) - set(pred_files))
    if only_pred or only_gt:
        raise CorpusError(
            "unpaired stems: "
            + ", ".join([f"{s} (prediction only)" for s in only_pred] + [f"{s} (ground truth only)" for s in only_gt])
        )
    stems = sorted(pred_files)
    if not stems:
        raise CorpusError(f"no paired .pgm files between {pred_dir} and {gt_dir}")
    raw: list[tuple[str, LabelMask, LabelMask]] = []
    top = 1
    for stem in stems:
        pm = read_mask(pred_files[stem])
        gm = read_mask(gt_files[stem])
        top = max(top, int(pm.data.max()), int(gm.data.max()))
        raw.append((stem, pm, gm))
    images = [
        ImageReport(
            stem=stem,
            per_category=evaluate_pair(
                LabelMask(pm.data, categories=top), LabelMask(gm.data, categories=top)
            ),
        )
        for stem, pm, gm in raw
    ]
    return MetricReport(images=images, categories=top)


def corpus_csv(report: MetricReport) -> str:
    """One row per image per category: stem,category,dsc,iou,assd,assd_defined."""
    lines = ["stem,category,dsc,iou,assd,assd_defined"]
    for img in report.images:
        for c, m in enumerate(img.per_category, start=1):
            assd_field = repr(m.assd) if m.assd_defined else "nan"
            lines.append(
                f"{img.stem},{c},{m.dsc!r},{m.iou!r},{assd_field},{str(m.assd_defined).lower()}"
            )
    return "\n".join(lines) + "\n"
