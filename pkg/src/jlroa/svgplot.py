"""Minimal deterministic SVG scatter plots for experiment reports.

Output is a standalone SVG string whose bytes depend only on the input:
no timestamps, no library-version markers.  Rows with non-finite
coordinates are skipped and counted in the embedded metadata element.
"""

from __future__ import annotations

import json
import math

WIDTH = 640
HEIGHT = 480
MARGIN_LEFT = 70
MARGIN_RIGHT = 20
MARGIN_TOP = 20
MARGIN_BOTTOM = 50
DEFAULT_COLOR = "#4682b4"


def _fmt(v: float) -> str:
    s = f"{v:.6g}"
    return "0" if s == "-0" else s


def _scale(values: list[float]) -> tuple[float, float]:
    lo, hi = min(values), max(values)
    if lo == hi:
        pad = 1.0 if lo == 0 else abs(lo) * 0.5
        return lo - pad, hi + pad
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def emit_svg_scatter(rows, xlabel: str, ylabel: str, highlight=None, title: str | None = None) -> str:
    """Render (x, y[, color]) rows as an SVG scatter plot.

    ``highlight`` maps (x, y) to a CSS color and overrides per-row colors;
    rows may be (x, y) or (x, y, color) tuples.
    """
    points = []
    skipped = 0
    for row in rows:
        x, y = float(row[0]), float(row[1])
        if not (math.isfinite(x) and math.isfinite(y)):
            skipped += 1
            continue
        color = row[2] if len(row) > 2 and row[2] else DEFAULT_COLOR
        if highlight is not None:
            color = highlight(x, y) or color
        points.append((x, y, color))

    x0, x1 = _scale([p[0] for p in points]) if points else (0.0, 1.0)
    y0, y1 = _scale([p[1] for p in points]) if points else (0.0, 1.0)
    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def px(x: float) -> float:
        return MARGIN_LEFT + (x - x0) / (x1 - x0) * plot_w

    def py(y: float) -> float:
        return MARGIN_TOP + (y1 - y) / (y1 - y0) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f"<metadata>{json.dumps({'skipped': skipped})}</metadata>",
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        parts.append(
            f'<text x="{WIDTH / 2:.1f}" y="14" text-anchor="middle" '
            f'font-family="sans-serif" font-size="13">{title}</text>'
        )
    ax_y = HEIGHT - MARGIN_BOTTOM
    parts.append(
        f'<line x1="{MARGIN_LEFT}" y1="{ax_y}" x2="{WIDTH - MARGIN_RIGHT}" y2="{ax_y}" '
        f'stroke="black"/>'
    )
    parts.append(
        f'<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP}" x2="{MARGIN_LEFT}" y2="{ax_y}" '
        f'stroke="black"/>'
    )
    for k in range(5):
        fx = x0 + (x1 - x0) * k / 4
        cx = px(fx)
        parts.append(f'<line x1="{cx:.2f}" y1="{ax_y}" x2="{cx:.2f}" y2="{ax_y + 5}" stroke="black"/>')
        parts.append(
            f'<text x="{cx:.2f}" y="{ax_y + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{_fmt(fx)}</text>'
        )
        fy = y0 + (y1 - y0) * k / 4
        cy = py(fy)
        parts.append(
            f'<line x1="{MARGIN_LEFT - 5}" y1="{cy:.2f}" x2="{MARGIN_LEFT}" y2="{cy:.2f}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{MARGIN_LEFT - 8}" y="{cy + 4:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{_fmt(fy)}</text>'
        )
    parts.append(
        f'<text x="{MARGIN_LEFT + plot_w / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{xlabel}</text>'
    )
    parts.append(
        f'<text x="16" y="{MARGIN_TOP + plot_h / 2:.1f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 16 {MARGIN_TOP + plot_h / 2:.1f})">{ylabel}</text>'
    )
    for x, y, color in points:
        parts.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="3" fill="{color}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
