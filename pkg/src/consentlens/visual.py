"""Raster and geometry heuristics: luma contrast, viewport coverage, corner badges."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .model import DomNode, Position, RenderBox, Screenshot

# BT.601 luma weights scaled by 1000 so integer gray pixels map to themselves exactly.
_LUMA = (299, 587, 114)


def grayscale(r: int, g: int, b: int) -> float:
    for c in (r, g, b):
        if not (0 <= c <= 255):
            raise ValueError(f"channel value {c} outside [0, 255]")
    return (_LUMA[0] * r + _LUMA[1] * g + _LUMA[2] * b) / 1000


@dataclass(frozen=True)
class GrayscaleSample:
    mean: float
    pixel_count: int
    region: RenderBox


BORDER_PX = 2


def _pixel_bounds(region: RenderBox, width: int, height: int) -> Tuple[int, int, int, int]:
    x0 = max(0, math.floor(region.x))
    y0 = max(0, math.floor(region.y))
    x1 = min(width, math.ceil(region.right))
    y1 = min(height, math.ceil(region.bottom))
    return x0, y0, x1, y1


def region_mean_gray(shot: Screenshot, region: RenderBox) -> GrayscaleSample:
    """Mean luma over the clipped region, ignoring a 2-px border when the region is large enough."""
    x0, y0, x1, y1 = _pixel_bounds(region, shot.width, shot.height)
    if x1 <= x0 or y1 <= y0:
        raise ValueError(f"region {region} does not intersect the {shot.width}x{shot.height} screenshot")
    if x1 - x0 > 2 * BORDER_PX:
        x0, x1 = x0 + BORDER_PX, x1 - BORDER_PX
    if y1 - y0 > 2 * BORDER_PX:
        y0, y1 = y0 + BORDER_PX, y1 - BORDER_PX
    px = shot.array()[y0:y1, x0:x1].astype(np.int64)
    weighted = px[..., 0] * _LUMA[0] + px[..., 1] * _LUMA[1] + px[..., 2] * _LUMA[2]
    count = int(weighted.size)
    mean = int(weighted.sum()) / (1000 * count)
    return GrayscaleSample(mean, count, RenderBox(x0, y0, x1 - x0, y1 - y0))


def contrast_delta(a: RenderBox, b: RenderBox, shot: Screenshot) -> float:
    return abs(region_mean_gray(shot, a).mean - region_mean_gray(shot, b).mean)


def button_contrast(a, b, shot: Screenshot) -> float:
    """Absolute luma difference between two clickables' boxes."""
    return contrast_delta(a.box, b.box, shot)


def _clip(box: RenderBox, vp: RenderBox) -> Optional[Tuple[float, float, float, float]]:
    x0, y0 = max(box.x, vp.x), max(box.y, vp.y)
    x1, y1 = min(box.right, vp.right), min(box.bottom, vp.bottom)
    if x1 <= x0 or y1 <= y0:
        return None
    return x0, y0, x1, y1


def union_area(boxes: Iterable[RenderBox], viewport: RenderBox) -> float:
    """Exact area of the union of boxes clipped to the viewport (coordinate compression)."""
    rects = [r for r in (_clip(b, viewport) for b in boxes) if r is not None]
    if not rects:
        return 0.0
    xs = sorted({v for r in rects for v in (r[0], r[2])})
    ys = sorted({v for r in rects for v in (r[1], r[3])})
    area = 0.0
    for i in range(len(xs) - 1):
        cx = (xs[i] + xs[i + 1]) / 2
        active = [r for r in rects if r[0] <= cx < r[2]]
        if not active:
            continue
        covered = 0.0
        for j in range(len(ys) - 1):
            cy = (ys[j] + ys[j + 1]) / 2
            if any(r[1] <= cy < r[3] for r in active):
                covered += ys[j + 1] - ys[j]
        area += covered * (xs[i + 1] - xs[i])
    return area


def viewport_coverage(dialog_boxes: Sequence[RenderBox], viewport: RenderBox) -> float:
    if viewport.area <= 0:
        raise ValueError("viewport area must be > 0")
    return min(1.0, union_area(dialog_boxes, viewport) / viewport.area)


# -- corner badges --------------------------------------------------------------


class Corner(str, Enum):
    BOTTOM_LEFT = "bottom_left"
    BOTTOM_RIGHT = "bottom_right"


class BadgeSource(str, Enum):
    DOM = "dom_fixed_element"
    RASTER = "raster_blob"


@dataclass(frozen=True)
class BadgeCandidate:
    region: RenderBox
    corner: Corner
    source: BadgeSource
    node: Optional[DomNode] = None


@dataclass(frozen=True)
class BadgeConfig:
    zone_fraction: float = 0.15
    max_side: float = 120.0
    min_aspect: float = 0.5
    max_aspect: float = 2.0
    min_blob_area: int = 100
    max_blob_area: int = 14_400
    color_tolerance: int = 16


def corner_zones(viewport: RenderBox, cfg: BadgeConfig = BadgeConfig()) -> List[Tuple[Corner, RenderBox]]:
    zw = viewport.width * cfg.zone_fraction
    zh = viewport.height * cfg.zone_fraction
    top = viewport.bottom - zh
    return [
        (Corner.BOTTOM_LEFT, RenderBox(viewport.x, top, zw, zh)),
        (Corner.BOTTOM_RIGHT, RenderBox(viewport.right - zw, top, zw, zh)),
    ]


def _badge_shape_ok(box: RenderBox, cfg: BadgeConfig) -> bool:
    if box.width <= 0 or box.height <= 0:
        return False
    if box.width > cfg.max_side or box.height > cfg.max_side:
        return False
    aspect = box.width / box.height
    return cfg.min_aspect <= aspect <= cfg.max_aspect


def _contains(zone: RenderBox, box: RenderBox) -> bool:
    return zone.x <= box.x and zone.y <= box.y and box.right <= zone.right and box.bottom <= zone.bottom


def _dom_badges(forest: Sequence[DomNode], viewport: RenderBox, cfg: BadgeConfig) -> List[BadgeCandidate]:
    zones = corner_zones(viewport, cfg)
    out: List[BadgeCandidate] = []
    for root in forest:
        stack = [root]
        while stack:
            n = stack.pop()
            if n.style.hidden:
                continue
            stack.extend(reversed(n.children))
            if n.style.position not in (Position.FIXED, Position.STICKY) or n.box is None:
                continue
            if not _badge_shape_ok(n.box, cfg):
                continue
            for corner, zone in zones:
                if _contains(zone, n.box):
                    out.append(BadgeCandidate(n.box, corner, BadgeSource.DOM, n))
                    break
    return out


def _raster_badges(shot: Screenshot, viewport: RenderBox, cfg: BadgeConfig) -> List[BadgeCandidate]:
    arr = shot.array().astype(np.int16)
    out: List[BadgeCandidate] = []
    for corner, zone in corner_zones(viewport, cfg):
        x0, y0, x1, y1 = _pixel_bounds(zone, shot.width, shot.height)
        if x1 <= x0 or y1 <= y0:
            continue
        patch = arr[y0:y1, x0:x1]
        flat = patch.reshape(-1, 3)
        colors, counts = np.unique(flat, axis=0, return_counts=True)
        background = colors[int(np.argmax(counts))]
        mask = np.abs(patch - background).max(axis=2) > cfg.color_tolerance
        seen = np.zeros_like(mask)
        h, w = mask.shape
        for sy, sx in zip(*np.nonzero(mask)):
            if seen[sy, sx]:
                continue
            seen[sy, sx] = True
            queue = deque([(sy, sx)])
            area, min_x, max_x, min_y, max_y = 0, sx, sx, sy, sy
            while queue:
                y, x = queue.popleft()
                area += 1
                min_x, max_x = min(min_x, x), max(max_x, x)
                min_y, max_y = min(min_y, y), max(max_y, y)
                for ny, nx in ((y - 1, x), (y + 1, x), (y, x - 1), (y, x + 1)):
                    if 0 <= ny < h and 0 <= nx < w and mask[ny, nx] and not seen[ny, nx]:
                        seen[ny, nx] = True
                        queue.append((ny, nx))
            box = RenderBox(x0 + min_x, y0 + min_y, max_x - min_x + 1, max_y - min_y + 1)
            touches_edge = min_x == 0 or min_y == 0 or max_x == w - 1 or max_y == h - 1
            # a blob cut by the zone edge is part of something larger than a badge
            inner_edge = (min_y == 0) or (corner is Corner.BOTTOM_LEFT and max_x == w - 1) or (
                corner is Corner.BOTTOM_RIGHT and min_x == 0
            )
            if inner_edge and touches_edge:
                continue
            if cfg.min_blob_area <= area <= cfg.max_blob_area and _badge_shape_ok(box, cfg):
                out.append(BadgeCandidate(box, corner, BadgeSource.RASTER))
    return out


def detect_corner_badge(
    forest: Sequence[DomNode],
    shot: Optional[Screenshot],
    viewport: RenderBox,
    cfg: BadgeConfig = BadgeConfig(),
) -> List[BadgeCandidate]:
    """DOM pass first; the raster pass runs only when the DOM yields nothing."""
    found = _dom_badges(forest, viewport, cfg)
    if found or shot is None:
        return found
    return _raster_badges(shot, viewport, cfg)
