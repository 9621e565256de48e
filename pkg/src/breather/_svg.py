"""Minimal self-contained SVG line plots (no plotting-stack dependency).

Writes deterministic standalone SVG files: axes, linear or log ticks,
polyline series and a small legend.  Only what the command-line figures
need.
"""

from __future__ import annotations

import math

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
_W, _H = 720, 480
_ML, _MR, _MT, _MB = 70, 20, 40, 55


def _fmt(v):
    if v == 0:
        return "0"
    a = abs(v)
    if 1e-3 <= a < 1e4:
        s = f"{v:.4g}"
    else:
        s = f"{v:.2e}"
    return s


def _ticks(lo, hi, log):
    if log:
        lo_e = math.floor(math.log10(lo))
        hi_e = math.ceil(math.log10(hi))
        step = max(1, (hi_e - lo_e) // 6)
        return [10.0 ** e for e in range(lo_e, hi_e + 1, step)]
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / 5.0
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    start = math.ceil(lo / step) * step
    out = []
    t = start
    while t <= hi + 1e-12 * abs(step):
        out.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return out


class LinePlot:
    """Accumulates (x, y) series and renders one SVG file."""

    def __init__(self, title="", xlabel="", ylabel="", logx=False, logy=False):
        self.title = title
        self.xlabel = xlabel
        self.ylabel = ylabel
        self.logx = logx
        self.logy = logy
        self.series = []

    def add(self, x, y, label="", marker=False):
        pts = [
            (float(a), float(b))
            for a, b in zip(x, y)
            if math.isfinite(a) and math.isfinite(b)
            and not (self.logx and a <= 0) and not (self.logy and b <= 0)
        ]
        if pts:
            self.series.append((pts, label, marker))

    def _tx(self, v, lo, hi, log):
        if log:
            v, lo, hi = math.log10(v), math.log10(lo), math.log10(hi)
        if hi == lo:
            return 0.5
        return (v - lo) / (hi - lo)

    def render(self):
        if not self.series:
            body = ['<text x="320" y="240">no data</text>']
            return _wrap(body, self.title)
        xs = [p[0] for pts, _, _ in self.series for p in pts]
        ys = [p[1] for pts, _, _ in self.series for p in pts]
        xlo, xhi = min(xs), max(xs)
        ylo, yhi = min(ys), max(ys)
        if not self.logx and xlo == xhi:
            xlo, xhi = xlo - 1.0, xhi + 1.0
        if not self.logy and ylo == yhi:
            ylo, yhi = ylo - 1.0, yhi + 1.0
        if self.logy and ylo == yhi:
            ylo, yhi = ylo / 10.0, yhi * 10.0
        if self.logx and xlo == xhi:
            xlo, xhi = xlo / 10.0, xhi * 10.0
        pw = _W - _ML - _MR
        ph = _H - _MT - _MB

        def X(v):
            return _ML + pw * self._tx(v, xlo, xhi, self.logx)

        def Y(v):
            return _MT + ph * (1.0 - self._tx(v, ylo, yhi, self.logy))

        body = [
            f'<rect x="{_ML}" y="{_MT}" width="{pw}" height="{ph}" '
            'fill="none" stroke="#333"/>'
        ]
        for t in _ticks(xlo, xhi, self.logx):
            if not (xlo <= t <= xhi) and not self.logx:
                continue
            x = X(t)
            body.append(
                f'<line x1="{x:.1f}" y1="{_MT + ph}" x2="{x:.1f}" '
                f'y2="{_MT + ph + 5}" stroke="#333"/>'
            )
            body.append(
                f'<text x="{x:.1f}" y="{_MT + ph + 18}" text-anchor="middle" '
                f'font-size="11">{_fmt(t)}</text>'
            )
        for t in _ticks(ylo, yhi, self.logy):
            if not (ylo <= t <= yhi) and not self.logy:
                continue
            y = Y(t)
            body.append(
                f'<line x1="{_ML - 5}" y1="{y:.1f}" x2="{_ML}" y2="{y:.1f}" '
                'stroke="#333"/>'
            )
            body.append(
                f'<text x="{_ML - 8}" y="{y + 4:.1f}" text-anchor="end" '
                f'font-size="11">{_fmt(t)}</text>'
            )
        for i, (pts, label, marker) in enumerate(self.series):
            color = _COLORS[i % len(_COLORS)]
            path = " ".join(f"{X(a):.2f},{Y(b):.2f}" for a, b in pts)
            body.append(
                f'<polyline points="{path}" fill="none" stroke="{color}" '
                'stroke-width="1.5"/>'
            )
            if marker:
                for a, b in pts:
                    body.append(
                        f'<circle cx="{X(a):.2f}" cy="{Y(b):.2f}" r="3" '
                        f'fill="{color}"/>'
                    )
            if label:
                ly = _MT + 16 + 16 * i
                body.append(
                    f'<line x1="{_ML + pw - 150}" y1="{ly - 4}" '
                    f'x2="{_ML + pw - 125}" y2="{ly - 4}" stroke="{color}" '
                    'stroke-width="2"/>'
                )
                body.append(
                    f'<text x="{_ML + pw - 120}" y="{ly}" '
                    f'font-size="12">{label}</text>'
                )
        body.append(
            f'<text x="{_ML + pw / 2:.0f}" y="{_H - 12}" text-anchor="middle" '
            f'font-size="13">{self.xlabel}</text>'
        )
        body.append(
            f'<text x="18" y="{_MT + ph / 2:.0f}" text-anchor="middle" '
            f'font-size="13" transform="rotate(-90 18 {_MT + ph / 2:.0f})">'
            f'{self.ylabel}</text>'
        )
        return _wrap(body, self.title)

    def write(self, path):
        with open(path, "w") as fh:
            fh.write(self.render())


def _wrap(body, title):
    head = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" '
        f'height="{_H}" viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.0f}" y="24" text-anchor="middle" '
        f'font-size="15">{title}</text>',
    ]
    return "\n".join(head + body + ["</svg>"]) + "\n"
