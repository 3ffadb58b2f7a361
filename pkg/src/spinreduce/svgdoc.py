"""Minimal deterministic SVG writer.

Hand-rolled so that repeated runs emit byte-identical documents: fixed
float formatting, fixed element order, no timestamps, no generator ids.
Only the primitives the portrait and curve plots need.
"""

from __future__ import annotations

from dataclasses import dataclass, field


def _fmt(x: float) -> str:
    s = f"{x:.3f}"
    return "0.000" if s == "-0.000" else s


@dataclass
class SvgCanvas:
    """Fixed-size canvas mapping a world window to pixel coordinates."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    width: int = 840
    height: int = 600
    margin: int = 56
    elements: list[str] = field(default_factory=list)

    def x_px(self, x: float) -> float:
        span = self.x_max - self.x_min or 1.0
        return self.margin + (x - self.x_min) / span * (self.width - 2 * self.margin)

    def y_px(self, y: float) -> float:
        span = self.y_max - self.y_min or 1.0
        return self.height - self.margin - (y - self.y_min) / span * (
            self.height - 2 * self.margin
        )

    def polyline(
        self,
        points,
        stroke: str = "#000000",
        stroke_width: float = 1.0,
        dasharray: str | None = None,
        closed: bool = False,
    ) -> None:
        if len(points) < 2:
            return
        coords = " ".join(f"{_fmt(self.x_px(x))},{_fmt(self.y_px(y))}" for x, y in points)
        dash = f' stroke-dasharray="{dasharray}"' if dasharray else ""
        tag = "polygon" if closed else "polyline"
        self.elements.append(
            f'<{tag} points="{coords}" fill="none" stroke="{stroke}" '
            f'stroke-width="{_fmt(stroke_width)}"{dash}/>'
        )

    def circle(self, x: float, y: float, r_px: float, fill: str = "#000000") -> None:
        self.elements.append(
            f'<circle cx="{_fmt(self.x_px(x))}" cy="{_fmt(self.y_px(y))}" '
            f'r="{_fmt(r_px)}" fill="{fill}"/>'
        )

    def cross(self, x: float, y: float, r_px: float, stroke: str = "#000000") -> None:
        cx, cy = self.x_px(x), self.y_px(y)
        for dx, dy in ((r_px, r_px), (r_px, -r_px)):
            self.elements.append(
                f'<line x1="{_fmt(cx - dx)}" y1="{_fmt(cy - dy)}" '
                f'x2="{_fmt(cx + dx)}" y2="{_fmt(cy + dy)}" '
                f'stroke="{stroke}" stroke-width="1.6"/>'
            )

    def text(
        self, x_px: float, y_px: float, s: str, size: int = 13, anchor: str = "middle"
    ) -> None:
        self.elements.append(
            f'<text x="{_fmt(x_px)}" y="{_fmt(y_px)}" font-size="{size}" '
            f'font-family="sans-serif" text-anchor="{anchor}">{s}</text>'
        )

    def axes(self, x_label: str, y_label: str, n_ticks: int = 5) -> None:
        m = self.margin
        w, h = self.width, self.height
        self.elements.append(
            f'<rect x="{m}" y="{m}" width="{w - 2 * m}" height="{h - 2 * m}" '
            f'fill="none" stroke="#333333" stroke-width="1"/>'
        )
        for i in range(n_ticks):
            fx = self.x_min + (self.x_max - self.x_min) * i / (n_ticks - 1)
            fy = self.y_min + (self.y_max - self.y_min) * i / (n_ticks - 1)
            self.text(self.x_px(fx), h - m + 18, f"{fx:.3g}", size=11)
            self.text(m - 8, self.y_px(fy) + 4, f"{fy:.3g}", size=11, anchor="end")
        self.text(w / 2, h - m + 38, x_label)
        self.elements.append(
            f'<text x="16" y="{h / 2:.3f}" font-size="13" font-family="sans-serif" '
            f'text-anchor="middle" transform="rotate(-90 16 {h / 2:.3f})">{y_label}</text>'
        )

    def clipped_group_start(self) -> None:
        m = self.margin
        self.elements.append(
            f'<clipPath id="frame"><rect x="{m}" y="{m}" '
            f'width="{self.width - 2 * m}" height="{self.height - 2 * m}"/></clipPath>'
        )
        self.elements.append('<g clip-path="url(#frame)">')

    def group_end(self) -> None:
        self.elements.append("</g>")

    def render(self) -> str:
        head = (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" '
            f'height="{self.height}" viewBox="0 0 {self.width} {self.height}">\n'
            '<rect width="100%" height="100%" fill="#ffffff"/>\n'
        )
        return head + "\n".join(self.elements) + "\n</svg>\n"
