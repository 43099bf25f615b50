"""Convex polygon overlap, used for IoU between rotated text quads.

Intersection is Sutherland-Hodgman clipping (clip polygon must be convex,
which rotated rectangles are) and areas come from the shoelace formula.
Kept dependency-free on purpose: the test suite cross-checks these against
a separately implemented geometry library, and sharing code with the
checker would make that comparison meaningless.
"""

from __future__ import annotations

from typing import Sequence

Point = tuple[float, float]

_EPS = 1e-12


def polygon_area(vertices: Sequence[Sequence[float]]) -> float:
    """Unsigned area via the shoelace formula; < 3 vertices -> 0."""
    n = len(vertices)
    if n < 3:
        return 0.0
    acc = 0.0
    for i in range(n):
        x1, y1 = vertices[i]
        x2, y2 = vertices[(i + 1) % n]
        acc += x1 * y2 - x2 * y1
    return abs(acc) * 0.5


def _signed_area(vertices: Sequence[Sequence[float]]) -> float:
    acc = 0.0
    n = len(vertices)
    for i in range(n):
        x1, y1 = vertices[i]
        x2, y2 = vertices[(i + 1) % n]
        acc += x1 * y2 - x2 * y1
    return acc * 0.5


def clip_polygon(
    subject: Sequence[Sequence[float]], clip: Sequence[Sequence[float]]
) -> list[Point]:
    """Clip `subject` against convex `clip`; returns intersection vertices.

    Either winding order is accepted; the clip ring is normalized internally.
    """
    clip_pts: list[Point] = [(float(x), float(y)) for x, y in clip]
    if _signed_area(clip_pts) < 0:
        clip_pts.reverse()
    output: list[Point] = [(float(x), float(y)) for x, y in subject]
    for i in range(len(clip_pts)):
        if not output:
            return []
        ax, ay = clip_pts[i]
        bx, by = clip_pts[(i + 1) % len(clip_pts)]
        ex, ey = bx - ax, by - ay
        current = output
        output = []
        for j in range(len(current)):
            px, py = current[j - 1]
            cx, cy = current[j]
            p_side = ex * (py - ay) - ey * (px - ax)
            c_side = ex * (cy - ay) - ey * (cx - ax)
            p_in = p_side >= -_EPS
            c_in = c_side >= -_EPS
            if c_in:
                if not p_in:
                    output.append(_edge_hit(px, py, cx, cy, ax, ay, ex, ey))
                output.append((cx, cy))
            elif p_in:
                output.append(_edge_hit(px, py, cx, cy, ax, ay, ex, ey))
    return output


def _edge_hit(
    px: float, py: float, cx: float, cy: float, ax: float, ay: float, ex: float, ey: float
) -> Point:
    """Intersection of segment p->c with the infinite clip edge through a."""
    num = ex * (py - ay) - ey * (px - ax)
    den = ex * (cy - py) - ey * (cx - px)
    if abs(den) < _EPS:
        return (cx, cy)  # segment parallel to the edge; endpoint is on it
    t = -num / den
    return (px + t * (cx - px), py + t * (cy - py))


def quad_iou(a: Sequence[Sequence[float]], b: Sequence[Sequence[float]]) -> float:
    """Intersection over union of two convex quads; degenerate quads -> 0."""
    area_a = polygon_area(a)
    area_b = polygon_area(b)
    if area_a <= _EPS or area_b <= _EPS:
        return 0.0
    hit = clip_polygon(a, b)
    inter = polygon_area(hit) if len(hit) >= 3 else 0.0
    union = area_a + area_b - inter
    if union <= _EPS:
        return 0.0
    return inter / union
