"""Loss stack: soft Dice, center-line (clDice) constraint, persistence loss.

Every loss returns its scalar together with an analytic per-pixel gradient
of the same shape as the prediction. The clDice gradient backpropagates
through the soft-skeleton recursion using recorded pooling selections and
relu masks; the persistence gradient places signed weights at critical
pixels while treating the matching and the critical-pixel locations as
locally constant. Central-difference verification lives here too and knows
how to reject probes where that local-constancy assumption breaks.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ProbeTieError, ShapeError, ValueRangeError
from .grid import LabelMask, LikelihoodMap
from .matching import Matching, _match_indicator

SMOOTH = 1e-5

# Per-pixel, per-category d(total)/d(pred), shaped like the prediction planes.
GradMap = np.ndarray


@dataclass(frozen=True)
class LossParams:
    lambda_d: float = 0.4
    lambda_cl: float = 0.4
    lambda_per: float = 0.2
    epoch: int | None = None
    warmup_epochs: int = 10
    skel_iters: int = 10

    def __post_init__(self):
        if min(self.lambda_d, self.lambda_cl, self.lambda_per) < 0:
            raise ValueRangeError("loss weights must be >= 0")
        if self.warmup_epochs < 1:
            raise ValueRangeError("warmup must span at least one epoch")
        if self.epoch is not None and self.epoch < 0:
            raise ValueRangeError("epoch must be >= 0")
        if self.skel_iters < 1:
            raise ValueRangeError("skeleton iteration count must be >= 1")


@dataclass(frozen=True)
class LossReport:
    dice: float
    cl: float
    per: float
    per_matched_by_category: list[float]
    per_unmatched_by_category: list[float]
    total: float
    weights_used: tuple[float, float, float]

    def to_obj(self) -> dict:
        return {
            "dice": self.dice,
            "cl": self.cl,
            "per": self.per,
            "per_matched_by_category": list(self.per_matched_by_category),
            "per_unmatched_by_category": list(self.per_unmatched_by_category),
            "total": self.total,
            "weights_used": list(self.weights_used),
        }


def _check_pair(pred: LikelihoodMap, mask: LabelMask) -> None:
    if (pred.height, pred.width) != (mask.height, mask.width):
        raise ShapeError(
            f"prediction {pred.height}x{pred.width} vs mask {mask.height}x{mask.width}"
        )
    if pred.categories != mask.categories:
        raise ShapeError(
            f"prediction has {pred.categories} categories, mask declares {mask.categories}"
        )


@dataclass
class _SkelStage:
    erode_arg: np.ndarray | None
    open_min_arg: np.ndarray
    open_max_arg: np.ndarray
    relu_mask: np.ndarray
    delta: np.ndarray
    skel_before: np.ndarray
    gate_mask: np.ndarray


@dataclass
class _SkelTape:
    stages: list[_SkelStage] = field(default_factory=list)

    def digest(self, h: "hashlib._Hash") -> None:
        for st in self.stages:
            if st.erode_arg is not None:
                h.update(st.erode_arg.tobytes())
            h.update(st.open_min_arg.tobytes())
            h.update(st.open_max_arg.tobytes())
            h.update(st.relu_mask.tobytes())
            h.update(st.gate_mask.tobytes())


def _soft_skeleton_taped(prob: np.ndarray, iterations: int) -> tuple[np.ndarray, _SkelTape]:
    cur = np.ascontiguousarray(prob, np.float64)
    skel = np.zeros_like(cur)
    tape = _SkelTape()
    for j in range(iterations + 1):
        erode_arg = None
        if j > 0:
            cur, erode_arg = _kernels.pool3_arg(cur, False)
        eroded, min_arg = _kernels.pool3_arg(cur, False)
        opened, max_arg = _kernels.pool3_arg(eroded, True)
        pre = cur - opened
        relu_mask = pre > 0
        delta = np.where(relu_mask, pre, 0.0)
        gate = delta * (1.0 - skel)
        gate_mask = gate > 0
        tape.stages.append(
            _SkelStage(erode_arg, min_arg, max_arg, relu_mask, delta, skel, gate_mask)
        )
        skel = skel + np.where(gate_mask, gate, 0.0)
    return skel, tape


def _soft_skeleton_plain(prob: np.ndarray, iterations: int) -> np.ndarray:
    cur = np.ascontiguousarray(prob, np.float64)
    skel = np.zeros_like(cur)
    for j in range(iterations + 1):
        if j > 0:
            cur = _kernels.pool3(cur, False)
        opened = _kernels.pool3(_kernels.pool3(cur, False), True)
        pre = cur - opened
        delta = np.where(pre > 0, pre, 0.0)
        gate = delta * (1.0 - skel)
        skel = skel + np.where(gate > 0, gate, 0.0)
    return skel


def soft_skeleton(prob: np.ndarray, iterations: int = 10) -> np.ndarray:
    """Iterative morphological soft skeleton of a [0,1] map.

    Each round peels one erosion and adds the ridge (map minus opening) of
    the current iterate, gated so already-claimed skeleton mass is not
    counted twice.
    """
    a = np.asarray(prob, np.float64)
    if a.ndim != 2:
        raise ShapeError(f"expected a 2-d grid, got shape {a.shape}")
    if not np.all(np.isfinite(a)) or a.min() < 0 or a.max() > 1:
        raise ValueRangeError("skeleton input must lie in [0, 1]")
    if iterations < 1:
        raise ValueRangeError("iteration count must be >= 1")
    return _soft_skeleton_plain(a, iterations)


def _skeleton_backward(tape: _SkelTape, grad_skel: np.ndarray) -> np.ndarray:
    gskel = grad_skel.copy()
    gcarry = None
    for j in range(len(tape.stages) - 1, -1, -1):
        st = tape.stages[j]
        if gcarry is not None:
            gin = _kernels.scatter_add(gcarry, tape.stages[j + 1].erode_arg)
        else:
            gin = np.zeros_like(gskel)
        ggate = np.where(st.gate_mask, gskel, 0.0)
        gdelta = ggate * (1.0 - st.skel_before)
        gskel = gskel - ggate * st.delta
        gpre = np.where(st.relu_mask, gdelta, 0.0)
        gin += gpre
        geroded = _kernels.scatter_add(-gpre, st.open_max_arg)
        gin += _kernels.scatter_add(geroded, st.open_min_arg)
        gcarry = gin
    return gcarry


def dice_loss(pred: LikelihoodMap, mask: LabelMask) -> tuple[float, GradMap]:
    """Soft Dice averaged over categories, with gradient."""
    _check_pair(pred, mask)
    n_cat = pred.categories
    grad = np.zeros_like(pred.data)
    total = 0.0
    for cat in range(1, n_cat + 1):
        p = pred.channel(cat)
        g = mask.indicator(cat)
        inter = float((p * g).sum())
        denom = float(p.sum() + g.sum()) + SMOOTH
        score = (2.0 * inter + SMOOTH) / denom
        total += score
        grad[cat - 1] = -(2.0 * g * denom - (2.0 * inter + SMOOTH)) / (denom * denom) / n_cat
    return 1.0 - total / n_cat, grad


def _cl_category(p: np.ndarray, g: np.ndarray, iterations: int):
    s_p, tape = _soft_skeleton_taped(p, iterations)
    s_g = _soft_skeleton_plain(g, iterations)
    a = float((s_p * g).sum())
    b = float(s_p.sum()) + SMOOTH
    c = float((s_g * p).sum())
    d = float(s_g.sum()) + SMOOTH
    t_prec = (a + SMOOTH) / b
    t_sens = (c + SMOOTH) / d
    denom = t_prec + t_sens + SMOOTH
    score = 2.0 * t_prec * t_sens / denom
    d_prec = 2.0 * t_sens * (t_sens + SMOOTH) / (denom * denom)
    d_sens = 2.0 * t_prec * (t_prec + SMOOTH) / (denom * denom)
    grad_sp = d_prec * (g * b - (a + SMOOTH)) / (b * b)
    grad_p = _skeleton_backward(tape, grad_sp) + d_sens * s_g / d
    return score, grad_p, tape


def cl_loss(pred: LikelihoodMap, mask: LabelMask, iterations: int = 10) -> tuple[float, GradMap]:
    """Center-line constraint: one minus the mean soft-clDice, with gradient."""
    _check_pair(pred, mask)
    n_cat = pred.categories
    grad = np.zeros_like(pred.data)
    total = 0.0
    for cat in range(1, n_cat + 1):
        score, grad_p, _ = _cl_category(pred.channel(cat), mask.indicator(cat), iterations)
        total += score
        grad[cat - 1] = -grad_p / n_cat
    return 1.0 - total / n_cat, grad


def per_category_terms(matching: Matching) -> tuple[float, float]:
    """(matched term L_m, unmatched term L_u) of one category's matching."""
    n_m = matching.n_matched
    n_u = matching.n_unmatched
    pb = matching.pred.births[matching.matched_pred_idx]
    pd = matching.pred.deaths[matching.matched_pred_idx]
    gb = matching.gt.births[matching.matched_gt_idx]
    gd = matching.gt.deaths[matching.matched_gt_idx]
    l_m = float((np.abs(pb - gb) + np.abs(pd - gd)).sum()) / (n_m + SMOOTH)
    ui = matching.unmatched_pred_idx
    l_u = float(np.abs(matching.pred.births[ui] - matching.pred.deaths[ui]).sum()) / (n_u + SMOOTH)
    return l_m, l_u


def _per_category_grad(matching: Matching, plane: np.ndarray, n_cat: int) -> None:
    n_m = matching.n_matched
    n_u = matching.n_unmatched
    if n_m + n_u == 0:
        return
    w_m = (n_m / (n_m + n_u)) / (n_m + SMOOTH) / n_cat
    w_u = (n_u / (n_m + n_u)) / (n_u + SMOOTH) / n_cat
    pred = matching.pred
    mi = matching.matched_pred_idx
    gj = matching.matched_gt_idx
    if n_m:
        bp = pred.birth_pixels[mi]
        s_b = np.sign(pred.births[mi] - matching.gt.births[gj])
        np.add.at(plane, (bp[:, 0], bp[:, 1]), w_m * s_b)
        fin = ~pred.essential[mi]
        if fin.any():
            dp = pred.death_pixels[mi[fin]]
            s_d = np.sign(pred.deaths[mi[fin]] - matching.gt.deaths[gj[fin]])
            np.add.at(plane, (dp[:, 0], dp[:, 1]), w_m * s_d)
    ui = matching.unmatched_pred_idx
    if n_u:
        bp = pred.birth_pixels[ui]
        np.add.at(plane, (bp[:, 0], bp[:, 1]), w_u)
        fin = ~pred.essential[ui]
        if fin.any():
            dp = pred.death_pixels[ui[fin]]
            np.add.at(plane, (dp[:, 0], dp[:, 1]), -w_u)


def per_loss(pred: LikelihoodMap, mask: LabelMask) -> tuple[float, GradMap, list[Matching]]:
    """Persistence loss over matched and unmatched bars, with gradient.

    Matched pairs pay the coordinate gap to their ground-truth bar, unmatched
    prediction bars pay their own persistence; the two averages are mixed by
    their counts. Categories where nothing was born on the prediction side
    contribute zero. Also returns the per-category matchings.
    """
    _check_pair(pred, mask)
    n_cat = pred.categories
    grad = np.zeros_like(pred.data)
    matchings: list[Matching] = []
    total = 0.0
    for cat in range(1, n_cat + 1):
        m = _match_indicator(pred.channel(cat), mask.indicator(cat))
        matchings.append(m)
        n_m, n_u = m.n_matched, m.n_unmatched
        if n_m + n_u:
            l_m, l_u = per_category_terms(m)
            total += (n_m * l_m + n_u * l_u) / (n_m + n_u)
        _per_category_grad(m, grad[cat - 1], n_cat)
    return total / n_cat, grad, matchings


def warmup_scale(epoch: int, warmup_epochs: int) -> float:
    """Linear ramp from 0 to 1 over the first ``warmup_epochs`` epochs."""
    if epoch < 0:
        raise ValueRangeError("epoch must be >= 0")
    if warmup_epochs < 1:
        raise ValueRangeError("warmup must span at least one epoch")
    return min(1.0, epoch / warmup_epochs)


def total_loss(
    pred: LikelihoodMap, mask: LabelMask, params: LossParams = LossParams()
) -> tuple[LossReport, GradMap]:
    """Weighted sum of the three losses; topology weights ramp with warmup."""
    _check_pair(pred, mask)
    epoch = params.warmup_epochs if params.epoch is None else params.epoch
    w = warmup_scale(epoch, params.warmup_epochs)
    l_dice, g_dice = dice_loss(pred, mask)
    l_cl, g_cl = cl_loss(pred, mask, params.skel_iters)
    l_per, g_per, matchings = per_loss(pred, mask)
    weights = (params.lambda_d, w * params.lambda_cl, w * params.lambda_per)
    total = weights[0] * l_dice + weights[1] * l_cl + weights[2] * l_per
    grad = weights[0] * g_dice + weights[1] * g_cl + weights[2] * g_per
    terms = [per_category_terms(m) for m in matchings]
    report = LossReport(
        dice=l_dice,
        cl=l_cl,
        per=l_per,
        per_matched_by_category=[t[0] for t in terms],
        per_unmatched_by_category=[t[1] for t in terms],
        total=total,
        weights_used=weights,
    )
    return report, grad


def _structure_digest(pred: LikelihoodMap, mask: LabelMask, category: int, iterations: int) -> bytes:
    """Fingerprint of every discrete choice behind the gradient of one plane.

    Pool selections and relu gates pin down the clDice piece; barcode
    critical pixels, the matching, and the sign pattern pin down the
    persistence piece. Probes where this changes within the step are invalid.
    """
    h = hashlib.blake2b(digest_size=16)
    p = pred.channel(category)
    g = mask.indicator(category)
    _, tape = _soft_skeleton_taped(p, iterations)
    tape.digest(h)
    m = _match_indicator(p, g)
    for bc in (m.pred, m.gt):
        h.update(bc.birth_pixels.tobytes())
        h.update(bc.death_pixels.tobytes())
        h.update(bc.essential.tobytes())
    h.update(m.matched_pred_idx.tobytes())
    h.update(m.matched_gt_idx.tobytes())
    pb = m.pred.births[m.matched_pred_idx]
    pd = m.pred.deaths[m.matched_pred_idx]
    h.update(np.sign(pb - m.gt.births[m.matched_gt_idx]).tobytes())
    h.update(np.sign(pd - m.gt.deaths[m.matched_gt_idx]).tobytes())
    return h.digest()


@dataclass(frozen=True)
class FdProbe:
    category: int
    row: int
    col: int
    analytic: float
    numeric: float
    rel_err: float


@dataclass(frozen=True)
class FdReport:
    probes: list[FdProbe]
    rejected: list[tuple[int, int, int]]
    max_rel_err: float

    def to_obj(self) -> dict:
        return {
            "probes": [
                {
                    "category": p.category,
                    "row": p.row,
                    "col": p.col,
                    "analytic": p.analytic,
                    "numeric": p.numeric,
                    "rel_err": p.rel_err,
                }
                for p in self.probes
            ],
            "rejected": [list(r) for r in self.rejected],
            "max_rel_err": self.max_rel_err,
        }


def _rel_err(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-6)


def finite_difference_check(
    pred: LikelihoodMap,
    mask: LabelMask,
    params: LossParams,
    probe_pixels: list[tuple[int, int, int]],
    h: float = 1e-4,
    reject_tied: bool = True,
) -> FdReport:
    """Central differences of total_loss against the analytic gradient.

    Probes are (category, row, col). A probe is rejected when perturbing it
    by +-h leaves [0,1], or when the discrete structure behind the gradient
    (pool selections, relu gates, barcode pixels, matching, sign pattern)
    differs between the three evaluation points; with ``reject_tied`` off
    that case raises instead.
    """
    _check_pair(pred, mask)
    _, grad = total_loss(pred, mask, params)
    probes: list[FdProbe] = []
    rejected: list[tuple[int, int, int]] = []
    for cat, row, col in probe_pixels:
        if not 1 <= cat <= pred.categories:
            raise ValueRangeError(f"probe category {cat} outside 1..{pred.categories}")
        base = pred.data[cat - 1, row, col]
        if base - h < 0.0 or base + h > 1.0:
            rejected.append((cat, row, col))
            continue
        data_plus = pred.data.copy()
        data_plus[cat - 1, row, col] = base + h
        data_minus = pred.data.copy()
        data_minus[cat - 1, row, col] = base - h
        pred_plus = LikelihoodMap(data_plus)
        pred_minus = LikelihoodMap(data_minus)
        sig = _structure_digest(pred, mask, cat, params.skel_iters)
        if sig != _structure_digest(pred_plus, mask, cat, params.skel_iters) or sig != _structure_digest(
            pred_minus, mask, cat, params.skel_iters
        ):
            if not reject_tied:
                raise ProbeTieError(f"probe ({cat}, {row}, {col}) sits at a structural tie")
            rejected.append((cat, row, col))
            continue
        lp, _ = total_loss(pred_plus, mask, params)
        lm, _ = total_loss(pred_minus, mask, params)
        numeric = (lp.total - lm.total) / (2.0 * h)
        analytic = float(grad[cat - 1, row, col])
        probes.append(FdProbe(cat, row, col, analytic, numeric, _rel_err(analytic, numeric)))
    max_err = max((p.rel_err for p in probes), default=0.0)
    return FdReport(probes=probes, rejected=rejected, max_rel_err=max_err)
