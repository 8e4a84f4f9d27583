import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bytemot.geometry import (
    BBox,
    Detection,
    from_cxcyah,
    iou,
    iou_matrix,
    to_cxcyah,
)
from oracles import rasterized_iou


def tlwh(l, t, w, h):
    return BBox(l, t, w, h)


boxes = st.builds(
    BBox,
    left=st.floats(-500, 500),
    top=st.floats(-500, 500),
    width=st.floats(0.5, 300),
    height=st.floats(0.5, 300),
)


class TestBBox:
    def test_rejects_non_positive_sizes(self):
        with pytest.raises(ValueError):
            BBox(0, 0, 0, 10)
        with pytest.raises(ValueError):
            BBox(0, 0, 10, -1)

    def test_views(self):
        b = tlwh(3, 4, 8, 8)
        assert b.tlbr() == (3, 4, 11, 12)
        assert b.cxcyah() == (7, 8, 1.0, 8)
        assert b.area == 64

    def test_cxcyah_example(self):
        assert tlwh(0, 0, 10, 20).cxcyah() == (5, 10, 0.5, 20)

    @given(boxes)
    def test_tlbr_round_trip(self, b):
        back = BBox.from_tlbr(*b.tlbr())
        assert math.isclose(back.left, b.left, abs_tol=1e-9)
        assert math.isclose(back.top, b.top, abs_tol=1e-9)
        assert math.isclose(back.width, b.width, abs_tol=1e-9)
        assert math.isclose(back.height, b.height, abs_tol=1e-9)

    @given(boxes)
    def test_cxcyah_round_trip(self, b):
        back = from_cxcyah(to_cxcyah(b))
        for got, want in zip(back.tlwh(), b.tlwh()):
            assert math.isclose(got, want, rel_tol=1e-12, abs_tol=1e-9)


class TestDetection:
    def test_score_bounds(self):
        with pytest.raises(ValueError):
            Detection(1, tlwh(0, 0, 1, 1), 1.5)
        with pytest.raises(ValueError):
            Detection(0, tlwh(0, 0, 1, 1), 0.5)


class TestIou:
    def test_identity(self):
        b = tlwh(12.5, -3.0, 17.0, 40.0)
        assert iou(b, b) == 1.0

    def test_disjoint(self):
        assert iou(tlwh(0, 0, 1, 1), tlwh(5, 5, 1, 1)) == 0.0

    def test_partial_overlap(self):
        # intersection 1, union 4 + 4 - 1 = 7
        assert math.isclose(iou(tlwh(0, 0, 2, 2), tlwh(1, 1, 2, 2)), 1 / 7)

    def test_touching_edges_is_zero(self):
        assert iou(tlwh(0, 0, 1, 1), tlwh(1, 0, 1, 1)) == 0.0

    @given(boxes, boxes)
    def test_symmetric_and_bounded(self, a, b):
        v = iou(a, b)
        assert v == iou(b, a)
        assert 0.0 <= v <= 1.0

    @given(boxes, boxes, st.floats(-200, 200), st.floats(-200, 200))
    def test_translation_invariance(self, a, b, dx, dy):
        shifted_a = BBox(a.left + dx, a.top + dy, a.width, a.height)
        shifted_b = BBox(b.left + dx, b.top + dy, b.width, b.height)
        assert math.isclose(
            iou(shifted_a, shifted_b), iou(a, b), rel_tol=1e-9, abs_tol=1e-9
        )

    def test_one_only_for_equal_boxes(self):
        a = tlwh(0, 0, 10, 10)
        b = tlwh(0, 0, 10, 10.0001)
        assert iou(a, b) < 1.0

    def test_against_rasterization_oracle(self):
        # boxes on an eighth-pixel lattice so cell counting is exact
        rng = np.random.default_rng(12345)
        for _ in range(100):
            l1, t1, l2, t2 = rng.integers(0, 400, size=4)
            w1, h1, w2, h2 = rng.integers(1, 120, size=4)
            a = BBox(l1 / 8, t1 / 8, w1 / 8, h1 / 8)
            b = BBox(l2 / 8, t2 / 8, w2 / 8, h2 / 8)
            expected = rasterized_iou(
                (l1, t1, l1 + w1, t1 + h1), (l2, t2, l2 + w2, t2 + h2)
            )
            assert math.isclose(iou(a, b), expected, rel_tol=1e-6, abs_tol=1e-9)


class TestIouMatrix:
    def test_empty_rows(self):
        m = iou_matrix([], [tlwh(0, 0, 1, 1)])
        assert m.shape == (0, 1)

    def test_empty_cols(self):
        m = iou_matrix([tlwh(0, 0, 1, 1)], [])
        assert m.shape == (1, 0)

    def test_identity_cell(self):
        b = tlwh(2, 3, 4, 5)
        assert iou_matrix([b], [b]).tolist() == [[1.0]]

    def test_entries_match_pairwise_iou(self):
        tracks = [tlwh(0, 0, 2, 2)]
        dets = [tlwh(1, 1, 2, 2), tlwh(10, 10, 2, 2)]
        m = iou_matrix(tracks, dets)
        assert m.shape == (1, 2)
        assert math.isclose(m[0, 0], 1 / 7)
        assert m[0, 1] == 0.0

    @settings(max_examples=30)
    @given(st.lists(boxes, max_size=4), st.lists(boxes, max_size=4))
    def test_matches_scalar_iou(self, tracks, dets):
        m = iou_matrix(tracks, dets)
        assert m.shape == (len(tracks), len(dets))
        for i, a in enumerate(tracks):
            for j, b in enumerate(dets):
                assert math.isclose(m[i, j], iou(a, b), rel_tol=1e-12, abs_tol=1e-12)
