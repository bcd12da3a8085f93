"""Minimal deterministic SVG line charts."""
from __future__ import annotations

import math
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 800, 500
MARGIN = dict(left=80, right=190, top=40, bottom=60)

# vartheta -> (dasharray, legend text), following the figure's line coding
LINE_CODES = {
    -0.95: ("", "solid"),
    -0.5: ("8,4", "short dash"),
    0.0: ("2,3", "dotted"),
    0.5: ("8,3,2,3", "dot/dash"),
    0.95: ("18,6", "long dash"),
}
_FALLBACK = ["", "8,4", "2,3", "8,3,2,3", "18,6", "12,3,3,3,3,3"]


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _nice_ticks(lo, hi, count=5):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-12 * step:
        ticks.append(round(t, 10))
        t += step
    return ticks


def line_code(key, index):
    if isinstance(key, (int, float)) and float(key) in LINE_CODES:
        return LINE_CODES[float(key)]
    return _FALLBACK[index % len(_FALLBACK)], ""


def emit_svg(curves: dict, path, xlabel="g", ylabel="reconstruction error", title=None,
             label_fmt="\u03d1 = {}"):
    """Write one polyline per curve; ``curves`` maps a key to ``(x, y)``.

    Output depends only on the inputs (fixed viewport, fixed number
    formatting, insertion order of ``curves``).
    """
    if not curves:
        raise ValueError("no curves to draw")
    data = []
    for key, (x, y) in curves.items():
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.shape != y.shape or x.size == 0:
            raise ValueError(f"curve {key!r}: x and y must be nonempty and of equal length")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError(f"curve {key!r} has non-finite values")
        data.append((key, x, y))

    xs = np.concatenate([d[1] for d in data])
    ys = np.concatenate([d[2] for d in data])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(min(ys.min(), 0.0)), float(ys.max())
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    y1 += 0.05 * (y1 - y0)
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def px(v):
        return MARGIN["left"] + (v - x0) / (x1 - x0) * pw

    def py(v):
        return MARGIN["top"] + (y1 - v) / (y1 - y0) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2:.2f}" y="24" text-anchor="middle" font-size="16" '
                   f'font-family="sans-serif">{escape(title)}</text>')
    left, top = MARGIN["left"], MARGIN["top"]
    out.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    for t in _nice_ticks(x0, x1):
        if x0 <= t <= x1:
            out.append(f'<line x1="{_fmt(px(t))}" y1="{top + ph}" x2="{_fmt(px(t))}" '
                       f'y2="{top + ph + 5}" stroke="black"/>')
            out.append(f'<text x="{_fmt(px(t))}" y="{top + ph + 20}" text-anchor="middle" '
                       f'font-size="12" font-family="sans-serif">{t:g}</text>')
    for t in _nice_ticks(y0, y1):
        if y0 <= t <= y1:
            out.append(f'<line x1="{left - 5}" y1="{_fmt(py(t))}" x2="{left}" '
                       f'y2="{_fmt(py(t))}" stroke="black"/>')
            out.append(f'<text x="{left - 8}" y="{_fmt(py(t) + 4)}" text-anchor="end" '
                       f'font-size="12" font-family="sans-serif">{t:g}</text>')
    out.append(f'<text x="{left + pw / 2:.2f}" y="{HEIGHT - 15}" text-anchor="middle" '
               f'font-size="14" font-family="sans-serif">{escape(xlabel)}</text>')
    out.append(f'<text x="20" y="{top + ph / 2:.2f}" text-anchor="middle" font-size="14" '
               f'font-family="sans-serif" transform="rotate(-90 20 {top + ph / 2:.2f})">'
               f'{escape(ylabel)}</text>')

    lx = left + pw + 15
    for i, (key, x, y) in enumerate(data):
        dash, code = line_code(key, i)
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        pts = " ".join(f"{_fmt(px(a))},{_fmt(py(b))}" for a, b in zip(x, y))
        out.append(f'<polyline points="{pts}" fill="none" stroke="black" stroke-width="1.5"{dash_attr}/>')
        ly = top + 20 + 22 * i
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 40}" y2="{ly}" stroke="black" '
                   f'stroke-width="1.5"{dash_attr}/>')
        text = label_fmt.format(key) + (f" ({code})" if code else "")
        out.append(f'<text x="{lx + 48}" y="{ly + 4}" font-size="12" '
                   f'font-family="sans-serif">{escape(text)}</text>')
    out.append("</svg>")

    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(out) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write SVG to {path}: {exc}") from exc
    return path
