"""Minimal, deterministic SVG charts (scatter and line plots)."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")
WIDTH, HEIGHT = 640, 480
MARGIN = dict(left=70, right=150, top=40, bottom=55)


def _n(v):
    return f"{v:.2f}"


class _Frame:
    def __init__(self, xs, ys):
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        self.x0, self.x1 = _bounds(xs)
        self.y0, self.y1 = _bounds(ys)
        self.pl = MARGIN["left"]
        self.pr = WIDTH - MARGIN["right"]
        self.pt = MARGIN["top"]
        self.pb = HEIGHT - MARGIN["bottom"]

    def x(self, v):
        return self.pl + (v - self.x0) / (self.x1 - self.x0) * (self.pr - self.pl)

    def y(self, v):
        return self.pb - (v - self.y0) / (self.y1 - self.y0) * (self.pb - self.pt)


def _bounds(v):
    if v.size == 0:
        return 0.0, 1.0
    lo, hi = float(v.min()), float(v.max())
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def _open(title, xlabel, ylabel, fr):
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.0f}" y="24" text-anchor="middle" font-family="sans-serif" '
        f'font-size="15">{escape(title)}</text>',
        f'<rect x="{fr.pl}" y="{fr.pt}" width="{fr.pr - fr.pl}" height="{fr.pb - fr.pt}" '
        'fill="none" stroke="black"/>',
    ]
    for t in np.linspace(0, 1, 5):
        xv = fr.x0 + t * (fr.x1 - fr.x0)
        yv = fr.y0 + t * (fr.y1 - fr.y0)
        px, py = fr.x(xv), fr.y(yv)
        out.append(f'<line x1="{_n(px)}" y1="{fr.pb}" x2="{_n(px)}" y2="{fr.pb + 5}" stroke="black"/>')
        out.append(f'<text x="{_n(px)}" y="{fr.pb + 18}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="11">{xv:.3g}</text>')
        out.append(f'<line x1="{fr.pl - 5}" y1="{_n(py)}" x2="{fr.pl}" y2="{_n(py)}" stroke="black"/>')
        out.append(f'<text x="{fr.pl - 8}" y="{_n(py + 4)}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="11">{yv:.3g}</text>')
    out.append(f'<text x="{(fr.pl + fr.pr) / 2:.0f}" y="{HEIGHT - 15}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="13">{escape(xlabel)}</text>')
    out.append(f'<text x="18" y="{(fr.pt + fr.pb) / 2:.0f}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="13" '
               f'transform="rotate(-90 18 {(fr.pt + fr.pb) / 2:.0f})">{escape(ylabel)}</text>')
    return out


def _legend(entries, fr):
    out = ['<g class="legend">']
    for i, (name, colour) in enumerate(entries):
        y = fr.pt + 12 + 20 * i
        out.append(f'<rect x="{fr.pr + 15}" y="{y - 9}" width="12" height="12" fill="{colour}"/>')
        out.append(f'<text x="{fr.pr + 33}" y="{y + 2}" font-family="sans-serif" '
                   f'font-size="12">{escape(name)}</text>')
    out.append("</g>")
    return out


def scatter(points, labels, title, xlabel="LD1", ylabel="LD2"):
    """Points coloured by integer label; legend lists clusters 1..K."""
    P = np.asarray(points, dtype=float).reshape(-1, 2)
    labels = np.asarray(labels, dtype=int)
    fr = _Frame(P[:, 0], P[:, 1])
    out = _open(title, xlabel, ylabel, fr)
    k = int(labels.max()) + 1 if labels.size else 0
    for c in range(k):
        colour = PALETTE[c % len(PALETTE)]
        out.append(f'<g class="cluster-{c + 1}" fill="{colour}" fill-opacity="0.6">')
        for px, py in P[labels == c]:
            out.append(f'<circle cx="{_n(fr.x(px))}" cy="{_n(fr.y(py))}" r="2.5"/>')
        out.append("</g>")
    out += _legend([(f"cluster {c + 1}", PALETTE[c % len(PALETTE)]) for c in range(k)], fr)
    out.append("</svg>")
    return "\n".join(out) + "\n"


def line_chart(series, title, xlabel="sample", ylabel="value"):
    """``series`` is a list of ``(name, values, colour)`` drawn as polylines."""
    allv = np.concatenate([np.asarray(v, dtype=float) for _, v, _ in series]) if series else np.empty(0)
    n = max((len(v) for _, v, _ in series), default=0)
    fr = _Frame(np.arange(max(n, 1)), allv)
    out = _open(title, xlabel, ylabel, fr)
    for name, values, colour in series:
        pts = " ".join(f"{_n(fr.x(i))},{_n(fr.y(v))}" for i, v in enumerate(values))
        out.append(f'<polyline class="series" data-name="{escape(name)}" fill="none" '
                   f'stroke="{colour}" stroke-width="1.5" points="{pts}"/>')
    out += _legend([(name, colour) for name, _, colour in series], fr)
    out.append("</svg>")
    return "\n".join(out) + "\n"
