import numpy as np
import pytest

from toposeg import (
    LabelMask,
    Matching,
    PixelCoord,
    ShapeError,
    ValueRangeError,
    betti_match,
    comparison_map,
    induced_assignment,
    superlevel_barcode,
)


def test_comparison_map_is_pointwise_min():
    y = np.array([[0.3, 0.8]])
    g = np.array([[1.0, 0.0]])
    np.testing.assert_array_equal(comparison_map(y, g), [[0.3, 0.0]])
    with pytest.raises(ShapeError):
        comparison_map(y, np.zeros((2, 2)))


def test_matching_validates_injectivity():
    bc = superlevel_barcode(np.array([[0.9, 0.0, 0.5]]))
    with pytest.raises(ValueRangeError):
        Matching(bc, bc, np.array([0, 0]), np.array([0, 1]))
    with pytest.raises(ValueRangeError):
        Matching(bc, bc, np.array([0, 1]), np.array([1, 1]))
    with pytest.raises(ShapeError):
        Matching(bc, bc, np.array([0]), np.array([0, 1]))


def test_one_row_fixture():
    y = np.array([[0.0, 0.9, 0.9, 0.0, 0.6]])
    mask = LabelMask(np.array([[0, 1, 1, 0, 0]]), categories=1)
    m = betti_match(y, mask, 1)
    assert m.n_matched == 1
    assert m.n_unmatched == 1
    (pred_bar, gt_bar), = m.matched_pairs()
    assert (pred_bar.birth, pred_bar.death) == (0.9, 0.0)
    assert pred_bar.birth_pixel == PixelCoord(0, 1)
    assert (gt_bar.birth, gt_bar.death) == (1.0, 0.0)
    stray = m.pred.bar(int(m.unmatched_pred_idx[0]))
    assert stray.birth == 0.6
    assert m.unmatched_gt_idx.size == 0


def test_extra_gt_component_stays_unmatched():
    y = np.array([[0.0, 0.9, 0.0, 0.0, 0.0]])
    mask = LabelMask(np.array([[0, 1, 0, 1, 1]]), categories=1)
    m = betti_match(y, mask, 1)
    assert m.n_matched == 1
    assert m.n_unmatched == 0
    assert m.unmatched_gt_idx.tolist() == [1]
    assert m.gt.bar(1).birth_pixel == PixelCoord(0, 3)


def test_collision_keeps_larger_persistence():
    # Both prediction peaks fall inside one ground-truth component, so their
    # comparison bars claim the same target bar; the taller peak wins.
    y = np.array([[0.9, 0.0, 0.7, 0.0, 0.0]])
    mask = LabelMask(np.array([[1, 1, 1, 1, 0]]), categories=1)
    m = betti_match(y, mask, 1)
    assert m.n_matched == 1
    (pred_bar, gt_bar), = m.matched_pairs()
    assert pred_bar.birth == 0.9
    assert gt_bar.birth_pixel == PixelCoord(0, 0)
    assert m.n_unmatched == 1


def test_collision_tie_prefers_row_major_birth_pixel():
    y = np.array([[0.7, 0.0, 0.7, 0.0, 0.0]])
    mask = LabelMask(np.array([[1, 1, 1, 1, 0]]), categories=1)
    m = betti_match(y, mask, 1)
    assert m.n_matched == 1
    (pred_bar, _), = m.matched_pairs()
    assert pred_bar.birth_pixel == PixelCoord(0, 0)


def test_induced_assignment_fixture():
    y = np.array([[0.0, 0.9, 0.9, 0.0, 0.6]])
    g = np.array([[0.0, 1.0, 1.0, 0.0, 0.0]])
    z_bar = superlevel_barcode(comparison_map(y, g))
    assert len(z_bar) == 1
    a_y = induced_assignment(z_bar, y, superlevel_barcode(y))
    a_g = induced_assignment(z_bar, g, superlevel_barcode(g))
    assert a_y.tolist() == [0]
    assert a_g.tolist() == [0]


def test_induced_assignment_checks_dominance():
    z_bar = superlevel_barcode(np.array([[0.9, 0.0]]))
    low = np.array([[0.5, 0.0]])
    with pytest.raises(ValueRangeError):
        induced_assignment(z_bar, low, superlevel_barcode(low))


def test_perfect_prediction_matches_everything(rng):
    for _ in range(30):
        labels = (rng.random((10, 10)) < 0.3).astype(np.uint8)
        mask = LabelMask(labels, categories=1)
        m = betti_match(mask.indicator(1), mask, 1)
        assert m.n_matched == len(m.pred) == len(m.gt)
        assert m.n_unmatched == 0
        assert m.unmatched_gt_idx.size == 0
        for pred_bar, gt_bar in m.matched_pairs():
            assert pred_bar.birth_pixel == gt_bar.birth_pixel


def test_matched_indices_sorted_and_in_range(rng):
    for _ in range(30):
        y = rng.random((9, 9)) * (rng.random((9, 9)) < 0.6)
        mask = LabelMask((rng.random((9, 9)) < 0.35).astype(np.uint8), categories=1)
        m = betti_match(y, mask, 1)
        mp = m.matched_pred_idx
        assert (np.diff(mp) > 0).all() if mp.size > 1 else True
        if mp.size:
            assert mp.min() >= 0 and mp.max() < len(m.pred)
            assert m.matched_gt_idx.min() >= 0
            assert m.matched_gt_idx.max() < len(m.gt)


def test_to_obj_shape():
    y = np.array([[0.0, 0.9, 0.9, 0.0, 0.6]])
    mask = LabelMask(np.array([[0, 1, 1, 0, 0]]), categories=1)
    obj = betti_match(y, mask, 1).to_obj()
    assert set(obj) == {"matched", "unmatched_pred", "unmatched_gt"}
    assert len(obj["matched"]) == 1
    assert obj["matched"][0][0]["birth"] == 0.9
    assert obj["matched"][0][1]["birth"] == 1.0
    assert len(obj["unmatched_pred"]) == 1
    assert obj["unmatched_gt"] == []
