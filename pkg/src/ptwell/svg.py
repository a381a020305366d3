"""Minimal SVG writer for eigenvalue scatter panels and curve plots."""

from __future__ import annotations

import html
import math
from dataclasses import dataclass

PANEL_W, PANEL_H = 260, 200
MARGIN = 36


@dataclass
class Panel:
    title: str
    points: list[complex]
    lines: list[list[complex]] | None = None
    markers: list[complex] | None = None

    def bounds(self) -> tuple[float, float, float, float]:
        zs = list(self.points) + [z for line in (self.lines or []) for z in line] + list(self.markers or [])
        if not zs:
            return -1.0, 1.0, -1.0, 1.0
        xs = [z.real for z in zs]
        ys = [z.imag for z in zs]
        x0, x1 = min(xs), max(xs)
        y0, y1 = min(ys), max(ys)
        # pad and avoid degenerate ranges
        dx = max(x1 - x0, 1e-12 * max(1.0, abs(x0)), 1e-9)
        dy = max(y1 - y0, 1e-3 * dx, 1e-12)
        return x0 - 0.05 * dx, x1 + 0.05 * dx, y0 - 0.05 * dy, y1 + 0.05 * dy


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _panel_svg(panel: Panel, ox: float, oy: float, index: int) -> list[str]:
    x0, x1, y0, y1 = panel.bounds()
    w, h = PANEL_W - 2 * MARGIN, PANEL_H - 2 * MARGIN

    def tx(z: complex) -> tuple[float, float]:
        return ox + MARGIN + (z.real - x0) / (x1 - x0) * w, oy + MARGIN + (y1 - z.imag) / (y1 - y0) * h

    out = [
        f'<g class="panel" id="panel-{index}" data-title="{html.escape(panel.title)}" '
        f'data-re-range="{_fmt(x0)},{_fmt(x1)}" data-im-range="{_fmt(y0)},{_fmt(y1)}">',
        f'<rect x="{ox + MARGIN}" y="{oy + MARGIN}" width="{w}" height="{h}" fill="none" stroke="#444"/>',
        f'<text x="{ox + PANEL_W / 2}" y="{oy + MARGIN - 8}" text-anchor="middle" font-size="11">{html.escape(panel.title)}</text>',
        f'<text x="{ox + MARGIN}" y="{oy + PANEL_H - 10}" font-size="9">{_fmt(x0)}</text>',
        f'<text x="{ox + PANEL_W - MARGIN}" y="{oy + PANEL_H - 10}" font-size="9" text-anchor="end">{_fmt(x1)}</text>',
        f'<text x="{ox + 4}" y="{oy + MARGIN + 8}" font-size="9">{_fmt(y1)}</text>',
        f'<text x="{ox + 4}" y="{oy + PANEL_H - MARGIN}" font-size="9">{_fmt(y0)}</text>',
    ]
    if y0 < 0 < y1:
        _, yz = tx(complex(x0, 0.0))
        out.append(f'<line x1="{ox + MARGIN}" y1="{yz:.2f}" x2="{ox + MARGIN + w}" y2="{yz:.2f}" stroke="#bbb" stroke-dasharray="3,3"/>')
    for line in panel.lines or []:
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in map(tx, line))
        out.append(f'<polyline class="curve" points="{pts}" fill="none" stroke="#1f5fa8" stroke-width="1"/>')
    for z in panel.points:
        a, b = tx(z)
        out.append(f'<circle class="pt" cx="{a:.2f}" cy="{b:.2f}" r="2" fill="#c0392b"/>')
    for z in panel.markers or []:
        a, b = tx(z)
        out.append(f'<rect class="marker" x="{a - 3:.2f}" y="{b - 3:.2f}" width="6" height="6" fill="#222"/>')
    out.append("</g>")
    return out


def render_panels(panels: list[Panel], title: str, columns: int = 5, metadata: dict | None = None) -> str:
    rows = max(1, math.ceil(len(panels) / columns))
    cols = min(columns, max(1, len(panels)))
    width, height = cols * PANEL_W, rows * PANEL_H + 30
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f"<title>{html.escape(title)}</title>",
    ]
    if metadata:
        items = " ".join(f'data-{html.escape(k)}="{html.escape(str(v))}"' for k, v in sorted(metadata.items()))
        parts.append(f"<metadata><run {items}/></metadata>")
    parts.append(f'<text x="10" y="20" font-size="14">{html.escape(title)}</text>')
    for i, panel in enumerate(panels):
        ox = (i % cols) * PANEL_W
        oy = 30 + (i // cols) * PANEL_H
        parts.extend(_panel_svg(panel, ox, oy, i))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
