"""Static SVG figures written directly (paths, axes, labels) with no
renderer dependency.  Output is deterministic: identical input data
yields byte-identical files."""

from __future__ import annotations

import numpy as np

WIDTH, HEIGHT = 720, 480
MARGIN = 60

_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]


def _ticks(lo, hi, n=6):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10.0 ** np.floor(np.log10(raw))
    step = min(s for s in (1 * mag, 2 * mag, 5 * mag, 10 * mag) if s >= raw)
    first = np.ceil(lo / step) * step
    return np.arange(first, hi + 0.5 * step, step)


class SvgFigure:
    def __init__(self, xlim, ylim, xlabel="", ylabel="", title=""):
        self.xlim, self.ylim = xlim, ylim
        self.parts = []
        self._frame(xlabel, ylabel, title)

    def _sx(self, x):
        lo, hi = self.xlim
        return MARGIN + (x - lo) / (hi - lo) * (WIDTH - 2 * MARGIN)

    def _sy(self, y):
        lo, hi = self.ylim
        return HEIGHT - MARGIN - (y - lo) / (hi - lo) * (HEIGHT - 2 * MARGIN)

    def _frame(self, xlabel, ylabel, title):
        p = self.parts
        p.append(f'<rect x="{MARGIN}" y="{MARGIN}" width="{WIDTH - 2 * MARGIN}" '
                 f'height="{HEIGHT - 2 * MARGIN}" fill="none" stroke="black"/>')
        for x in _ticks(*self.xlim):
            sx = self._sx(x)
            p.append(f'<line x1="{sx:.2f}" y1="{HEIGHT - MARGIN}" x2="{sx:.2f}" '
                     f'y2="{HEIGHT - MARGIN + 5}" stroke="black"/>')
            p.append(f'<text x="{sx:.2f}" y="{HEIGHT - MARGIN + 18}" font-size="11" '
                     f'text-anchor="middle">{x:.3g}</text>')
        for y in _ticks(*self.ylim):
            sy = self._sy(y)
            p.append(f'<line x1="{MARGIN - 5}" y1="{sy:.2f}" x2="{MARGIN}" '
                     f'y2="{sy:.2f}" stroke="black"/>')
            p.append(f'<text x="{MARGIN - 8}" y="{sy + 4:.2f}" font-size="11" '
                     f'text-anchor="end">{y:.3g}</text>')
        if xlabel:
            p.append(f'<text x="{WIDTH / 2}" y="{HEIGHT - 12}" font-size="13" '
                     f'text-anchor="middle">{xlabel}</text>')
        if ylabel:
            p.append(f'<text x="16" y="{HEIGHT / 2}" font-size="13" '
                     f'text-anchor="middle" transform="rotate(-90 16 {HEIGHT / 2})">'
                     f'{ylabel}</text>')
        if title:
            p.append(f'<text x="{WIDTH / 2}" y="{MARGIN - 14}" font-size="14" '
                     f'text-anchor="middle">{title}</text>')

    def polyline(self, xs, ys, color="#1f77b4", dashed=False, width=1.5):
        pts = " ".join(f"{self._sx(x):.2f},{self._sy(y):.2f}"
                       for x, y in zip(xs, ys))
        dash = ' stroke-dasharray="6 4"' if dashed else ""
        self.parts.append(f'<polyline points="{pts}" fill="none" '
                          f'stroke="{color}" stroke-width="{width}"{dash}/>')

    def hline(self, y, color="#888888", dashed=True):
        self.polyline([self.xlim[0], self.xlim[1]], [y, y], color, dashed, 1.0)

    def band(self, x_lo, x_hi, color="#fdd", y_range=None):
        ylo, yhi = y_range or self.ylim
        self.parts.append(
            f'<rect x="{self._sx(x_lo):.2f}" y="{self._sy(yhi):.2f}" '
            f'width="{self._sx(x_hi) - self._sx(x_lo):.2f}" '
            f'height="{self._sy(ylo) - self._sy(yhi):.2f}" fill="{color}" '
            f'fill-opacity="0.6" stroke="none"/>')

    def legend(self, entries):
        x0, y0 = WIDTH - MARGIN - 160, MARGIN + 14
        for i, (label, color, dashed) in enumerate(entries):
            y = y0 + 18 * i
            dash = ' stroke-dasharray="6 4"' if dashed else ""
            self.parts.append(f'<line x1="{x0}" y1="{y}" x2="{x0 + 26}" y2="{y}" '
                              f'stroke="{color}" stroke-width="2"{dash}/>')
            self.parts.append(f'<text x="{x0 + 32}" y="{y + 4}" '
                              f'font-size="12">{label}</text>')

    def render(self) -> str:
        body = "\n".join(self.parts)
        return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
                f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">\n'
                f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>\n'
                f"{body}\n</svg>\n")

    def save(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.render())


def worldline_figure(t_vals, x_vals, v0_vals, t1=None, title="world line"):
    """x horizontal, coordinate time vertical; backward-in-time segments
    (dt/ds < 0) drawn dashed in red."""
    pad_x = 0.05 * (np.ptp(x_vals) or 1.0)
    pad_t = 0.05 * (np.ptp(t_vals) or 1.0)
    fig = SvgFigure((float(np.min(x_vals) - pad_x), float(np.max(x_vals) + pad_x)),
                    (float(np.min(t_vals) - pad_t), float(np.max(t_vals) + pad_t)),
                    xlabel="x", ylabel="t", title=title)
    if t1 is not None:
        fig.hline(t1)
    backward = np.asarray(v0_vals) < 0
    start = 0
    for i in range(1, len(t_vals) + 1):
        if i == len(t_vals) or backward[i] != backward[start]:
            seg = slice(max(start - 1, 0), i)
            fig.polyline(x_vals[seg], t_vals[seg],
                         color="#d62728" if backward[start] else "#1f77b4",
                         dashed=bool(backward[start]))
            start = i
    fig.legend([("forward (dt/ds > 0)", "#1f77b4", False),
                ("backward (dt/ds < 0)", "#d62728", True)])
    return fig


def density_figure(x, curves, zero_bands=(), title="density", labels=None):
    """Line plot of one or more densities over x, with optional shaded
    bands marking the zeroed (excluded) regions."""
    ymin = min(float(np.min(c)) for c in curves)
    ymax = max(float(np.max(c)) for c in curves)
    pad = 0.08 * (ymax - ymin or 1.0)
    fig = SvgFigure((float(x[0]), float(x[-1])), (ymin - pad, ymax + pad),
                    xlabel="x", ylabel="density", title=title)
    for lo, hi in zero_bands:
        fig.band(lo, hi)
    entries = []
    for i, c in enumerate(curves):
        color = _PALETTE[i % len(_PALETTE)]
        fig.polyline(x, c, color=color)
        if labels:
            entries.append((labels[i], color, False))
    if entries:
        fig.legend(entries)
    fig.hline(0.0)
    return fig
