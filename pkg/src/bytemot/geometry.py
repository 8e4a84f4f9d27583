"""Axis-aligned box geometry: representations, conversions and IoU similarity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "BBox",
    "Detection",
    "iou",
    "iou_matrix",
    "iou_matrix_tlbr",
    "to_cxcyah",
    "from_cxcyah",
]


@dataclass(frozen=True, slots=True)
class BBox:
    """Axis-aligned box stored as top-left corner plus size, in pixels.

    Coordinates are real-valued and deliberately unclipped: boxes may extend
    past image borders, which is legitimate for partially visible objects.
    Width and height must be strictly positive. The tlbr (corner pair) and
    cxcyah (center-x, center-y, aspect w/h, height) encodings are derived
    views of the same box.
    """

    left: float
    top: float
    width: float
    height: float

    def __post_init__(self):
        object.__setattr__(self, "left", float(self.left))
        object.__setattr__(self, "top", float(self.top))
        object.__setattr__(self, "width", float(self.width))
        object.__setattr__(self, "height", float(self.height))
        if not (self.width > 0.0 and self.height > 0.0):
            raise ValueError(
                f"box size must be positive, got {self.width} x {self.height}"
            )

    @classmethod
    def from_tlbr(cls, left: float, top: float, right: float, bottom: float) -> "BBox":
        return cls(left, top, right - left, bottom - top)

    @classmethod
    def from_cxcyah(cls, cx: float, cy: float, aspect: float, height: float) -> "BBox":
        width = aspect * height
        return cls(cx - width / 2.0, cy - height / 2.0, width, height)

    @property
    def right(self) -> float:
        return self.left + self.width

    @property
    def bottom(self) -> float:
        return self.top + self.height

    @property
    def area(self) -> float:
        return self.width * self.height

    def tlwh(self) -> tuple[float, float, float, float]:
        return (self.left, self.top, self.width, self.height)

    def tlbr(self) -> tuple[float, float, float, float]:
        return (self.left, self.top, self.right, self.bottom)

    def cxcyah(self) -> tuple[float, float, float, float]:
        return (
            self.left + self.width / 2.0,
            self.top + self.height / 2.0,
            self.width / self.height,
            self.height,
        )


@dataclass(frozen=True, slots=True)
class Detection:
    """One detector output: a scored box on a given frame (frames are 1-based)."""

    frame: int
    box: BBox
    score: float

    def __post_init__(self):
        if self.frame < 1:
            raise ValueError(f"frame index must be >= 1, got {self.frame}")
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score must be in [0, 1], got {self.score}")


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union of two boxes, in [0, 1].

    Continuous geometry (no inclusive-pixel +1 convention); symmetric, zero
    for disjoint boxes and exactly 1.0 for identical ones.
    """
    ar, ab = a.right, a.bottom
    br, bb = b.right, b.bottom
    iw = min(ar, br) - max(a.left, b.left)
    ih = min(ab, bb) - max(a.top, b.top)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    # areas from the same corner values as the intersection, so rounding can
    # never push the ratio past 1
    area_a = (ar - a.left) * (ab - a.top)
    area_b = (br - b.left) * (bb - b.top)
    return inter / (area_a + area_b - inter)


def as_tlbr_array(boxes) -> np.ndarray:
    """Stack boxes into an (N, 4) tlbr array; empty input yields (0, 4)."""
    if len(boxes) == 0:
        return np.zeros((0, 4), dtype=float)
    return np.array([b.tlbr() for b in boxes], dtype=float)


def iou_matrix_tlbr(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise IoU between two (N, 4) / (M, 4) tlbr arrays.

    Degenerate rows (non-positive extent) get zero similarity instead of an
    error; this lets callers feed raw motion predictions without pre-filtering.
    """
    a = np.asarray(a, dtype=float).reshape(-1, 4)
    b = np.asarray(b, dtype=float).reshape(-1, 4)
    if a.shape[0] == 0 or b.shape[0] == 0:
        return np.zeros((a.shape[0], b.shape[0]), dtype=float)
    lt = np.maximum(a[:, None, :2], b[None, :, :2])
    rb = np.minimum(a[:, None, 2:], b[None, :, 2:])
    wh = np.clip(rb - lt, 0.0, None)
    inter = wh[..., 0] * wh[..., 1]
    area_a = np.clip(a[:, 2] - a[:, 0], 0.0, None) * np.clip(a[:, 3] - a[:, 1], 0.0, None)
    area_b = np.clip(b[:, 2] - b[:, 0], 0.0, None) * np.clip(b[:, 3] - b[:, 1], 0.0, None)
    union = area_a[:, None] + area_b[None, :] - inter
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(union > 0.0, inter / union, 0.0)
    return out


def iou_matrix(tracks, dets) -> np.ndarray:
    """IoU similarity matrix with one row per track box and one column per
    detection box. Either list may be empty."""
    return iou_matrix_tlbr(as_tlbr_array(tracks), as_tlbr_array(dets))


def to_cxcyah(box: BBox) -> np.ndarray:
    """Measurement vector (center-x, center-y, aspect w/h, height) for one box."""
    return np.array(box.cxcyah(), dtype=float)


def from_cxcyah(vec) -> BBox:
    """Inverse of :func:`to_cxcyah`; exact round trip for valid boxes."""
    cx, cy, aspect, height = (float(v) for v in vec)
    return BBox.from_cxcyah(cx, cy, aspect, height)
