"""Minimal deterministic SVG line charts.

Emits standalone SVG text without any plotting dependency.  Output bytes
are a pure function of the input data: floats are formatted with
round-trip ``repr`` semantics and no timestamps or random identifiers are
embedded.  The charts are diagnostic, not publication-grade.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_WIDTH = 720
_HEIGHT = 480
_MARGIN_L = 70
_MARGIN_R = 160
_MARGIN_T = 40
_MARGIN_B = 55

_PALETTE = [
    "#1b6ca8", "#c23b22", "#2e8b57", "#8a2be2", "#d2691e",
    "#008b8b", "#b8860b", "#4b0082",
]


@dataclass(frozen=True)
class Series:
    label: str
    x: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _transform(v, lo, hi, log):
    v = np.asarray(v, dtype=float)
    if log:
        v, lo, hi = np.log10(v), np.log10(lo), np.log10(hi)
    if hi == lo:
        return np.full_like(v, 0.5)
    return (v - lo) / (hi - lo)


def _ticks(lo: float, hi: float, log: bool):
    if log:
        lo_e = int(np.floor(np.log10(lo)))
        hi_e = int(np.ceil(np.log10(hi)))
        step = max(1, (hi_e - lo_e) // 6)
        return [10.0**e for e in range(lo_e, hi_e + 1, step)]
    span = hi - lo
    if span <= 0:
        return [lo]
    step = 10.0 ** np.floor(np.log10(span / 4.0))
    for m in (1.0, 2.0, 5.0, 10.0):
        if span / (step * m) <= 6:
            step *= m
            break
    first = np.ceil(lo / step) * step
    return list(np.arange(first, hi + step / 2, step))


def _tick_label(v: float, log: bool) -> str:
    if log:
        e = int(round(np.log10(v)))
        return f"1e{e}"
    return f"{v:g}"


def line_chart(
    series: list[Series],
    title: str = "",
    x_label: str = "",
    y_label: str = "",
    log_x: bool = False,
    log_y: bool = False,
) -> str:
    """Render the series as one SVG document (returned as text)."""
    pts = [
        (np.asarray(s.x, float), np.asarray(s.y, float)) for s in series
    ]
    finite = [
        (x[np.isfinite(x) & np.isfinite(y)], y[np.isfinite(x) & np.isfinite(y)])
        for x, y in pts
    ]
    if log_x:
        finite = [(x[x > 0], y[x > 0]) for x, y in finite]
    if log_y:
        finite = [(x[y > 0], y[y > 0]) for x, y in finite]
    xs = np.concatenate([x for x, _ in finite]) if finite else np.array([])
    ys = np.concatenate([y for _, y in finite]) if finite else np.array([])
    if xs.size == 0:
        xs, ys = np.array([0.0, 1.0]), np.array([0.0, 1.0])
    x_lo, x_hi = float(xs.min()), float(xs.max())
    y_lo, y_hi = float(ys.min()), float(ys.max())
    if not log_y:
        pad = 0.05 * (y_hi - y_lo or 1.0)
        y_lo, y_hi = y_lo - pad, y_hi + pad
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo * (10.0 if log_y else 0.0) + (0.0 if log_y else y_lo + 1.0)

    px_w = _WIDTH - _MARGIN_L - _MARGIN_R
    px_h = _HEIGHT - _MARGIN_T - _MARGIN_B

    def to_px(x, y):
        fx = _transform(x, x_lo, x_hi, log_x)
        fy = _transform(y, y_lo, y_hi, log_y)
        return _MARGIN_L + fx * px_w, _MARGIN_T + (1.0 - fy) * px_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
        f'height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<rect x="{_MARGIN_L}" y="{_MARGIN_T}" width="{px_w}" '
        f'height="{px_h}" fill="none" stroke="#333" stroke-width="1"/>',
    ]
    if title:
        out.append(
            f'<text x="{_WIDTH // 2}" y="24" text-anchor="middle" '
            f'font-family="sans-serif" font-size="15">{title}</text>'
        )

    for tv in _ticks(x_lo, x_hi, log_x):
        if not (x_lo <= tv <= x_hi * (1 + 1e-12)):
            continue
        px, _ = to_px(tv, y_lo if not log_y else y_hi)
        out.append(
            f'<line x1="{_fmt(px)}" y1="{_MARGIN_T + px_h}" x2="{_fmt(px)}" '
            f'y2="{_MARGIN_T + px_h + 5}" stroke="#333"/>'
        )
        out.append(
            f'<text x="{_fmt(px)}" y="{_MARGIN_T + px_h + 20}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="11">'
            f"{_tick_label(tv, log_x)}</text>"
        )
    for tv in _ticks(y_lo, y_hi, log_y):
        if not (y_lo <= tv <= y_hi * (1 + 1e-12)):
            continue
        _, py = to_px(x_lo, tv)
        out.append(
            f'<line x1="{_MARGIN_L - 5}" y1="{_fmt(py)}" x2="{_MARGIN_L}" '
            f'y2="{_fmt(py)}" stroke="#333"/>'
        )
        out.append(
            f'<text x="{_MARGIN_L - 8}" y="{_fmt(py + 4)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">'
            f"{_tick_label(tv, log_y)}</text>"
        )
    if x_label:
        out.append(
            f'<text x="{_MARGIN_L + px_w // 2}" y="{_HEIGHT - 12}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="13">'
            f"{x_label}</text>"
        )
    if y_label:
        cy = _MARGIN_T + px_h // 2
        out.append(
            f'<text x="18" y="{cy}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="13" '
            f'transform="rotate(-90 18 {cy})">{y_label}</text>'
        )

    for i, ((x, y), s) in enumerate(zip(finite, series)):
        color = _PALETTE[i % len(_PALETTE)]
        if x.size:
            coords = " ".join(
                f"{_fmt(px)},{_fmt(py)}" for px, py in zip(*to_px(x, y))
            )
            out.append(
                f'<polyline points="{coords}" fill="none" stroke="{color}" '
                f'stroke-width="1.5"/>'
            )
        ly = _MARGIN_T + 16 + 18 * i
        lx = _WIDTH - _MARGIN_R + 12
        out.append(
            f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        out.append(
            f'<text x="{lx + 28}" y="{ly}" font-family="sans-serif" '
            f'font-size="11">{s.label}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
