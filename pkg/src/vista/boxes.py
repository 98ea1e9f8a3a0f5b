"""Axis-aligned box geometry in continuous pixel coordinates.

Boxes use corner coordinates with no +1 pixel convention:
area = (x2 - x1) * (y2 - y1). Zero-area boxes are representable but
match nothing (their IoU against anything is defined as 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ValidationError


@dataclass(frozen=True)
class Box2D:
    """Axis-aligned box: (x1, y1) top-left, (x2, y2) bottom-right, pixels."""

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self):
        coords = (self.x1, self.y1, self.x2, self.y2)
        problems = []
        if not all(math.isfinite(c) for c in coords):
            problems.append(f"box coordinates must be finite, got {coords}")
        else:
            if self.x1 > self.x2:
                problems.append(f"box has x1 > x2: {coords}")
            if self.y1 > self.y2:
                problems.append(f"box has y1 > y2: {coords}")
        if problems:
            raise ValidationError(problems)

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> tuple[float, float]:
        return (0.5 * (self.x1 + self.x2), 0.5 * (self.y1 + self.y2))

    def corners(self) -> tuple[float, float, float, float]:
        return (self.x1, self.y1, self.x2, self.y2)


def iou(a: Box2D, b: Box2D) -> float:
    """Intersection over union of two boxes, in [0, 1].

    Two boxes whose union has zero area (both degenerate) score 0.
    """
    ix = min(a.x2, b.x2) - max(a.x1, b.x1)
    iy = min(a.y2, b.y2) - max(a.y1, b.y1)
    if ix <= 0.0 or iy <= 0.0:
        return 0.0
    inter = ix * iy
    union = a.area + b.area - inter
    if union <= 0.0:
        return 0.0
    return inter / union


def clip_box(b: Box2D, width: float, height: float) -> tuple[Box2D, bool]:
    """Clamp a box into [0, width] x [0, height].

    Returns (clipped_box, degenerate) where degenerate is True when the
    clipped box has zero area (the original box lay entirely outside, or
    collapsed onto the border). The caller decides whether to drop it.
    """
    if not (width > 0 and height > 0):
        raise ValidationError(f"image size must be positive, got {width}x{height}")
    clipped = Box2D(
        min(max(b.x1, 0.0), width),
        min(max(b.y1, 0.0), height),
        min(max(b.x2, 0.0), width),
        min(max(b.y2, 0.0), height),
    )
    return clipped, clipped.area == 0.0
