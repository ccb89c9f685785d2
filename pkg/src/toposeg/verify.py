"""Self-verification: every fast path against its independent slow route.

Five suites: the union-find barcode against threshold enumeration, the
distance-transform surface distance against all-pairs enumeration, barcode
matching against spatial overlap on unambiguous instances, analytic
gradients against central differences, and a battery of worked fixtures
with hand-computed expectations. All randomness is seeded; summaries are
deterministic so runs can be diffed byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .btf import BtfWeights, boundary_map, btf_forward, fused_attention, primary_fusion
from .grid import FeatureMap, LabelMask, LikelihoodMap, avg_pool_3x3, connected_components
from .losses import (
    LossParams,
    cl_loss,
    dice_loss,
    finite_difference_check,
    per_loss,
    soft_skeleton,
    total_loss,
)
from .matching import betti_match
from .metrics import assd, dsc, iou
from .oracles import allpairs_assd, overlap_pairs, threshold_barcode
from .persistence import gt_barcode, superlevel_barcode


@dataclass(frozen=True)
class SuiteResult:
    name: str
    cases: int
    failures: int
    extra: str | None = None
    counterexample: dict | None = None

    @property
    def passed(self) -> bool:
        return self.failures == 0


def _bar_triples(barcode, width: int) -> list[tuple[float, float, int]]:
    return sorted(
        (float(b), float(d), int(r) * width + int(c))
        for b, d, (r, c) in zip(barcode.births, barcode.deaths, barcode.birth_pixels)
    )


def suite_persistence(rng: np.random.Generator, cases: int) -> SuiteResult:
    failures = 0
    counterexample = None
    for _ in range(cases):
        grid = rng.integers(0, 8, (8, 8)).astype(np.float64) / 7.0
        impl = _bar_triples(superlevel_barcode(grid), 8)
        oracle = sorted(threshold_barcode(grid))
        if impl != oracle:
            failures += 1
            if counterexample is None:
                counterexample = {
                    "map": grid.tolist(),
                    "implementation": impl,
                    "oracle": oracle,
                }
    return SuiteResult("persistence-oracle", cases, failures, counterexample=counterexample)


def _random_masks(rng: np.random.Generator, shape, categories: int):
    a = rng.integers(0, categories + 1, shape).astype(np.uint8)
    # Occasionally blank a category so empty-side conventions get exercised.
    for cat in range(1, categories + 1):
        if rng.random() < 0.2:
            a[a == cat] = 0
    return LabelMask(a, categories=categories)


def suite_assd(rng: np.random.Generator, cases: int) -> SuiteResult:
    failures = 0
    counterexample = None
    for _ in range(cases):
        categories = int(rng.integers(1, 4))
        pred = _random_masks(rng, (16, 16), categories)
        gt = _random_masks(rng, (16, 16), categories)
        for cat in range(1, categories + 1):
            fast = assd(pred, gt, cat)
            slow = allpairs_assd(pred.indicator(cat), gt.indicator(cat))
            bad = (np.isnan(fast) != np.isnan(slow)) or (
                not np.isnan(fast) and abs(fast - slow) > 1e-9
            )
            if not bad and dsc(pred, gt, cat) < iou(pred, gt, cat):
                bad = True
            if bad:
                failures += 1
                if counterexample is None:
                    counterexample = {
                        "pred": pred.data.tolist(),
                        "gt": gt.data.tolist(),
                        "category": cat,
                        "fast": fast,
                        "slow": slow,
                    }
                break
    return SuiteResult("assd-oracle", cases, failures, counterexample=counterexample)


def build_separated_instance(rng: np.random.Generator):
    """16x16 instance of 2x2 blobs on a 4x4 cell grid, blobs never adjacent.

    Each cell is empty, coincident (both sides), ground-truth only, or
    prediction only. Prediction blobs carry one constant value in [0.5, 1),
    so every component is exactly one bar and the 0.5-threshold components
    equal the supports.
    """
    y = np.zeros((16, 16))
    g = np.zeros((16, 16), np.uint8)
    states = rng.integers(0, 4, 16)
    counts = {"both": 0, "gt_only": 0, "pred_only": 0}
    for cell in range(16):
        r0 = (cell // 4) * 4 + 1
        c0 = (cell % 4) * 4 + 1
        state = int(states[cell])
        if state == 1:
            g[r0 : r0 + 2, c0 : c0 + 2] = 1
            y[r0 : r0 + 2, c0 : c0 + 2] = rng.uniform(0.5, 1.0)
            counts["both"] += 1
        elif state == 2:
            g[r0 : r0 + 2, c0 : c0 + 2] = 1
            counts["gt_only"] += 1
        elif state == 3:
            y[r0 : r0 + 2, c0 : c0 + 2] = rng.uniform(0.5, 1.0)
            counts["pred_only"] += 1
    return y, g, counts


def suite_matching(rng: np.random.Generator, cases: int) -> SuiteResult:
    failures = 0
    counterexample = None
    for _ in range(cases):
        y, g, counts = build_separated_instance(rng)
        mask = LabelMask(g, categories=1)
        m = betti_match(y, mask, 1)
        p_labels, _ = connected_components((y > 0).astype(np.float64))
        g_labels, _ = connected_components(g.astype(np.float64))
        got = {
            (
                int(p_labels[tuple(m.pred.birth_pixels[i])]),
                int(g_labels[tuple(m.gt.birth_pixels[j])]),
            )
            for i, j in zip(m.matched_pred_idx, m.matched_gt_idx)
        }
        want = overlap_pairs((y > 0).astype(np.float64), g.astype(np.float64))
        ok = (
            got == want
            and m.unmatched_pred_idx.size == counts["pred_only"]
            and m.unmatched_gt_idx.size == counts["gt_only"]
        )
        if ok:
            perfect = betti_match(g.astype(np.float64), mask, 1)
            ok = (
                perfect.n_unmatched == 0
                and perfect.unmatched_gt_idx.size == 0
                and perfect.n_matched == len(perfect.pred)
            )
        if not ok:
            failures += 1
            if counterexample is None:
                counterexample = {
                    "pred": y.tolist(),
                    "gt": g.tolist(),
                    "matched_pairs": sorted(got),
                    "overlap_pairs": sorted(want),
                    "counts": counts,
                }
    return SuiteResult("matching-overlap", cases, failures, counterexample=counterexample)


def suite_gradients(rng: np.random.Generator, cases: int) -> SuiteResult:
    failures = 0
    counterexample = None
    accepted = rejected = 0
    for _ in range(cases):
        categories = int(rng.integers(1, 3))
        pred = LikelihoodMap(rng.uniform(0.02, 0.98, (categories, 8, 8)))
        mask = _random_masks(rng, (8, 8), categories)
        probes = [
            (int(rng.integers(1, categories + 1)), int(rng.integers(0, 8)), int(rng.integers(0, 8)))
            for _ in range(4)
        ]
        report = finite_difference_check(pred, mask, LossParams(), probes, h=1e-4)
        accepted += len(report.probes)
        rejected += len(report.rejected)
        if report.max_rel_err >= 1e-3:
            failures += 1
            if counterexample is None:
                worst = max(report.probes, key=lambda p: p.rel_err)
                counterexample = {
                    "pred": pred.data.tolist(),
                    "mask": mask.data.tolist(),
                    "probe": [worst.category, worst.row, worst.col],
                    "analytic": worst.analytic,
                    "numeric": worst.numeric,
                    "rel_err": worst.rel_err,
                }
    extra = f"probes={accepted + rejected} accepted={accepted} rejected={rejected}"
    return SuiteResult("fd-gradients", cases, failures, extra=extra, counterexample=counterexample)


def _fixture_barcode_two_plateaus():
    bc = superlevel_barcode(np.array([[0.0, 0.9, 0.9, 0.0, 0.6]]))
    assert bc.pairs() == [(0.9, 0.0), (0.6, 0.0)]
    assert bool(bc.essential.all())
    assert [tuple(p) for p in bc.birth_pixels] == [(0, 1), (0, 4)]


def _fixture_barcode_merge():
    bc = superlevel_barcode(np.array([[0.2, 1.0, 0.4, 0.8, 0.2]]))
    assert bc.pairs() == [(1.0, 0.0), (0.8, 0.4)]
    assert [bool(e) for e in bc.essential] == [True, False]
    assert tuple(bc.death_pixels[1]) == (0, 2)


def _fixture_barcode_constants():
    assert len(superlevel_barcode(np.zeros((4, 4)))) == 0
    bc = superlevel_barcode(np.ones((4, 4)))
    assert bc.pairs() == [(1.0, 0.0)] and bool(bc.essential[0])


def _fixture_gt_barcode():
    mask = LabelMask(np.array([[0, 1, 1, 0, 1]], np.uint8), categories=1)
    bc = gt_barcode(mask, 1)
    assert bc.pairs() == [(1.0, 0.0), (1.0, 0.0)]
    assert [tuple(p) for p in bc.birth_pixels] == [(0, 1), (0, 4)]


def _fixture_matching_1x5():
    y = np.array([[0.0, 0.9, 0.9, 0.0, 0.6]])
    mask = LabelMask(np.array([[0, 1, 1, 0, 0]], np.uint8), categories=1)
    m = betti_match(y, mask, 1)
    assert m.n_matched == 1 and m.n_unmatched == 1
    pred_bar, gt_bar = m.matched_pairs()[0]
    assert (pred_bar.birth, pred_bar.death) == (0.9, 0.0)
    assert (gt_bar.birth, gt_bar.death) == (1.0, 0.0)
    unmatched = m.pred.bar(int(m.unmatched_pred_idx[0]))
    assert (unmatched.birth, unmatched.death) == (0.6, 0.0)
    assert m.unmatched_gt_idx.size == 0


def _fixture_per_1x5():
    pred = LikelihoodMap(np.array([[[0.0, 0.9, 0.9, 0.0, 0.6]]]))
    mask = LabelMask(np.array([[0, 1, 1, 0, 0]], np.uint8), categories=1)
    value, grad, _ = per_loss(pred, mask)
    expect = (0.5 * 0.1 + 0.5 * 0.6) / (1 + 1e-5)
    assert abs(value - expect) < 1e-12
    assert abs(value - 0.35) < 1e-5
    assert abs(grad[0, 0, 1] - (-0.5 / (1 + 1e-5))) < 1e-12
    assert abs(grad[0, 0, 4] - 0.5 / (1 + 1e-5)) < 1e-12


def _fixture_per_monotone():
    mask = LabelMask(np.array([[0, 1, 1, 0, 0]], np.uint8), categories=1)
    last = -1.0
    for peak in np.arange(0.1, 0.95, 0.1):
        pred = LikelihoodMap(np.array([[[0.0, 0.9, 0.9, 0.0, peak]]]))
        value, _, _ = per_loss(pred, mask)
        assert value > last
        last = value


def _fixture_dice():
    pred = LikelihoodMap(np.full((1, 1, 4), 0.5))
    mask = LabelMask(np.array([[1, 1, 0, 0]], np.uint8), categories=1)
    value, _ = dice_loss(pred, mask)
    assert abs(value - 0.5) < 1e-4


def _fixture_cl_absent_category():
    pred = LikelihoodMap(np.zeros((2, 8, 8)))
    data = np.zeros((8, 8), np.uint8)
    data[2:6, 2:6] = 1
    mask = LabelMask(data, categories=2)
    value, _ = cl_loss(pred, mask)
    assert abs(value - 0.5) < 1e-3


def _fixture_cl_tube():
    g = np.array([[0, 1, 1, 1, 1, 1, 0]], np.float64)
    pred = LikelihoodMap((0.5 * g)[None])
    mask = LabelMask(g.astype(np.uint8), categories=1)
    value, _ = cl_loss(pred, mask, iterations=3)
    assert abs((1.0 - value) - 2.0 / 3.0) < 1e-3


def _fixture_skeleton():
    assert not soft_skeleton(np.zeros((5, 5))).any()
    spike = np.zeros((5, 5))
    spike[2, 2] = 1.0
    assert soft_skeleton(spike)[2, 2] == 1.0


def _fixture_pooling():
    row = np.array([[0.0, 3.0, 6.0]])
    assert np.array_equal(avg_pool_3x3(row), np.array([[1.0, 3.0, 5.0]]))


def _fixture_zero_optimum():
    data = np.zeros((6, 6), np.uint8)
    data[1:3, 1:3] = 1
    data[4:6, 0:2] = 2
    mask = LabelMask(data, categories=2)
    onehot = np.stack([mask.indicator(1), mask.indicator(2)])
    report, _ = total_loss(LikelihoodMap(onehot), mask)
    assert report.dice < 1e-3 and report.cl < 1e-3 and report.per < 1e-3
    assert report.total < 1e-3


def _fixture_btf_attention():
    r = FeatureMap(np.zeros((1, 1, 1)))
    w = BtfWeights.identity(1)
    att = fused_attention(r, r, w)
    assert float(att[0]) == 0.5
    ln3 = BtfWeights(
        fusion_kernels=np.zeros((1, 2, 3, 3)),
        fusion_bias=np.array([np.log(3.0)]),
        fusion_scale=np.ones(1),
        fusion_shift=np.zeros(1),
        agg_kernels=np.zeros((1, 2, 3, 3)),
        agg_bias=np.zeros(1),
        agg_scale=np.ones(2),
        agg_shift=np.zeros(2),
    )
    assert abs(float(fused_attention(r, r, ln3)[0]) - 0.75) < 1e-12


def _fixture_btf_residual():
    rng = np.random.default_rng(7)
    r = FeatureMap(rng.normal(size=(2, 4, 4)))
    d = FeatureMap(rng.normal(size=(2, 4, 4)))
    f_prev = FeatureMap(rng.normal(size=(2, 4, 4)))
    w = BtfWeights.identity(2)
    att = fused_attention(r, d, w)
    fhat = primary_fusion(r, d, att)
    out = btf_forward(r, d, f_prev, w)
    assert np.array_equal(out.data, fhat.data)


def _fixture_btf_boundary():
    for c in (0.5, 1.0, 2.5):
        flat = boundary_map(FeatureMap(np.full((1, 4, 5), c)))
        assert not flat.data.any()
    step = boundary_map(FeatureMap(np.array([[[0.0, 0.0, 1.0, 1.0]]])))
    assert np.allclose(step.data[0, 0], [0.0, -1.0 / 3.0, 1.0 / 3.0, 0.0], atol=1e-12)


_FIXTURES = [
    ("barcode-two-plateaus", _fixture_barcode_two_plateaus),
    ("barcode-merge", _fixture_barcode_merge),
    ("barcode-constants", _fixture_barcode_constants),
    ("gt-barcode", _fixture_gt_barcode),
    ("matching-1x5", _fixture_matching_1x5),
    ("per-1x5", _fixture_per_1x5),
    ("per-monotone", _fixture_per_monotone),
    ("dice-half", _fixture_dice),
    ("cl-absent-category", _fixture_cl_absent_category),
    ("cl-tube", _fixture_cl_tube),
    ("skeleton-basics", _fixture_skeleton),
    ("pooling-row", _fixture_pooling),
    ("zero-at-optimum", _fixture_zero_optimum),
    ("btf-attention", _fixture_btf_attention),
    ("btf-residual", _fixture_btf_residual),
    ("btf-boundary", _fixture_btf_boundary),
]


def suite_fixtures(rng: np.random.Generator, cases: int) -> SuiteResult:
    if cases == 0:
        return SuiteResult("worked-fixtures", 0, 0)
    failures = 0
    counterexample = None
    for name, fn in _FIXTURES:
        try:
            fn()
        except AssertionError as exc:
            failures += 1
            if counterexample is None:
                counterexample = {"fixture": name, "error": str(exc) or "assertion failed"}
    return SuiteResult("worked-fixtures", len(_FIXTURES), failures, counterexample=counterexample)


_SUITES = [
    ("persistence-oracle", suite_persistence),
    ("assd-oracle", suite_assd),
    ("matching-overlap", suite_matching),
    ("fd-gradients", suite_gradients),
    ("worked-fixtures", suite_fixtures),
]


def run_verify(seed: int, cases: int) -> list[SuiteResult]:
    results = []
    for index, (_, fn) in enumerate(_SUITES):
        rng = np.random.default_rng([seed, index])
        results.append(fn(rng, cases))
    return results


def summary_lines(results: list[SuiteResult], cases: int) -> list[str]:
    lines = []
    if cases == 0:
        lines.append("warning: 0 cases requested; randomized suites pass vacuously")
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        line = f"{r.name}: {status} cases={r.cases} failures={r.failures}"
        if r.extra:
            line += f" {r.extra}"
        lines.append(line)
    overall = "PASS" if all(r.passed for r in results) else "FAIL"
    lines.append(f"overall: {overall}")
    return lines
