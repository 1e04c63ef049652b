"""Minimal static SVG emitters for paths, polar heat maps and curves.

Plotting is best-effort output for human inspection; nothing downstream
parses these files.
"""

from __future__ import annotations

import numpy as np

_HEADER = ('<?xml version="1.0" encoding="UTF-8"?>\n'
           '<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
           'viewBox="0 0 {w} {h}">\n')


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def path_trace(positions: np.ndarray, out_file: str, size: int = 560) -> None:
    """Trajectory in the unit disk with the boundary circle."""
    c = size / 2
    r = 0.46 * size
    pts = " ".join(f"{_fmt(c + r * z.real)},{_fmt(c - r * z.imag)}"
                   for z in positions[:: max(1, len(positions) // 20000)])
    with open(out_file, "w") as f:
        f.write(_HEADER.format(w=size, h=size))
        f.write(f'<circle cx="{c}" cy="{c}" r="{r}" fill="none" stroke="#333"/>\n')
        f.write(f'<polyline points="{pts}" fill="none" stroke="#1f77b4" '
                'stroke-width="0.6" opacity="0.8"/>\n')
        f.write("</svg>\n")


def polar_heatmap(weights: np.ndarray, out_file: str, size: int = 560) -> None:
    """Equal-area polar cells shaded by weight."""
    nr, nt = weights.shape
    c = size / 2
    rmax = 0.46 * size
    w = weights / max(weights.max(), 1e-300)
    parts = [_HEADER.format(w=size, h=size)]
    for i in range(nr):
        r0, r1 = rmax * np.sqrt(i / nr), rmax * np.sqrt((i + 1) / nr)
        for j in range(nt):
            t0, t1 = 2 * np.pi * j / nt, 2 * np.pi * (j + 1) / nt
            v = int(255 * (1 - 0.9 * w[i, j]))
            large = 1 if (t1 - t0) > np.pi else 0
            p = (f'M {_fmt(c + r0 * np.cos(t0))} {_fmt(c - r0 * np.sin(t0))} '
                 f'L {_fmt(c + r1 * np.cos(t0))} {_fmt(c - r1 * np.sin(t0))} '
                 f'A {_fmt(r1)} {_fmt(r1)} 0 {large} 0 '
                 f'{_fmt(c + r1 * np.cos(t1))} {_fmt(c - r1 * np.sin(t1))} '
                 f'L {_fmt(c + r0 * np.cos(t1))} {_fmt(c - r0 * np.sin(t1))} '
                 f'A {_fmt(r0)} {_fmt(r0)} 0 {large} 1 '
                 f'{_fmt(c + r0 * np.cos(t0))} {_fmt(c - r0 * np.sin(t0))} Z')
            parts.append(f'<path d="{p}" fill="rgb({v},{v},255)" stroke="none"/>\n')
    parts.append("</svg>\n")
    with open(out_file, "w") as f:
        f.writelines(parts)


def line_chart(xs, ys_list, out_file: str, labels=None, size=(640, 420),
               logy: bool = False) -> None:
    """Simple multi-series line chart with axes."""
    W, H = size
    m = 50
    xs = np.asarray(xs, dtype=float)
    series = [np.asarray(y, dtype=float) for y in ys_list]
    ally = np.concatenate(series)
    if logy:
        ally = np.log10(np.maximum(ally, 1e-300))
        series = [np.log10(np.maximum(y, 1e-300)) for y in series]
    x0, x1 = xs.min(), xs.max()
    y0, y1 = ally.min(), ally.max()
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1

    def sx(x):
        return m + (x - x0) / (x1 - x0) * (W - 2 * m)

    def sy(y):
        return H - m - (y - y0) / (y1 - y0) * (H - 2 * m)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]
    with open(out_file, "w") as f:
        f.write(_HEADER.format(w=W, h=H))
        f.write(f'<rect x="{m}" y="{m}" width="{W-2*m}" height="{H-2*m}" '
                'fill="none" stroke="#888"/>\n')
        for k, y in enumerate(series):
            pts = " ".join(f"{_fmt(sx(a))},{_fmt(sy(b))}" for a, b in zip(xs, y))
            f.write(f'<polyline points="{pts}" fill="none" '
                    f'stroke="{colors[k % len(colors)]}" stroke-width="1.5"/>\n')
            if labels:
                f.write(f'<text x="{W-m+4}" y="{m+14*k+10}" font-size="11" '
                        f'fill="{colors[k % len(colors)]}">{labels[k]}</text>\n')
        f.write(f'<text x="{m}" y="{H-10}" font-size="11">{x0:.3g}</text>\n')
        f.write(f'<text x="{W-m-30}" y="{H-10}" font-size="11">{x1:.3g}</text>\n')
        f.write("</svg>\n")
