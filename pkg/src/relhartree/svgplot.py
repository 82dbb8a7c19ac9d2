"""Minimal log-log line plots written directly as SVG text.

Output depends only on the inputs: coordinates are printed with fixed
precision and elements are emitted in a fixed order.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

W, H = 640, 420
ML, MR, MT, MB = 70, 20, 30, 50


def _f(x: float) -> str:
    return f"{x:.2f}"


def _ticks(lo: float, hi: float) -> list[float]:
    """Tick positions (log10 units) for the span [lo, hi]."""
    a, b = math.floor(lo), math.ceil(hi)
    if b - a >= 2:
        return [float(k) for k in range(a, b + 1) if lo - 1e-9 <= k <= hi + 1e-9]
    out = []
    for k in range(a - 1, b + 1):
        for m in (1, 2, 5):
            v = k + math.log10(m)
            if lo - 1e-9 <= v <= hi + 1e-9:
                out.append(v)
    return out


def _label(v: float) -> str:
    x = 10.0**v
    return f"{x:.3g}"


def loglog_svg(
    t: Sequence[float],
    y: Sequence[float],
    title: str,
    fit: tuple[float, float, float, float] | None = None,
) -> str:
    """SVG text for y(t) on log-log axes.

    ``fit`` = (exponent, log_amplitude, t_lo, t_hi) draws the fitted power
    law as a dashed overlay across its window.  Non-positive samples are
    skipped.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = (t > 0) & (y > 0) & np.isfinite(y)
    lt, ly = np.log10(t[keep]), np.log10(y[keep])
    if lt.size == 0:
        lt, ly = np.array([0.0, 1.0]), np.array([0.0, 1.0])
    fit_pts = None
    if fit is not None:
        p, c, a, b = fit
        a = max(a, 10.0 ** lt.min())
        b = min(b, 10.0 ** lt.max())
        if b > a > 0:
            xs = np.log10([a, b])
            fit_pts = (xs, (c + p * np.log([a, b])) / math.log(10.0))
    xlo, xhi = float(lt.min()), float(lt.max())
    ylo, yhi = float(ly.min()), float(ly.max())
    if fit_pts is not None:
        ylo = min(ylo, float(fit_pts[1].min()))
        yhi = max(yhi, float(fit_pts[1].max()))
    if xhi - xlo < 1e-9:
        xlo, xhi = xlo - 0.5, xhi + 0.5
    if yhi - ylo < 1e-9:
        ylo, yhi = ylo - 0.5, yhi + 0.5
    pw, ph = W - ML - MR, H - MT - MB

    def X(v):
        return ML + (v - xlo) / (xhi - xlo) * pw

    def Y(v):
        return MT + (yhi - v) / (yhi - ylo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W // 2}" y="18" text-anchor="middle" font-family="sans-serif" font-size="14">{_esc(title)}</text>',
        f'<rect x="{ML}" y="{MT}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for v in _ticks(xlo, xhi):
        x = X(v)
        out.append(f'<line x1="{_f(x)}" y1="{MT + ph}" x2="{_f(x)}" y2="{MT + ph + 5}" stroke="black"/>')
        out.append(
            f'<text x="{_f(x)}" y="{MT + ph + 18}" text-anchor="middle" font-family="sans-serif" '
            f'font-size="11">{_label(v)}</text>'
        )
    for v in _ticks(ylo, yhi):
        y_ = Y(v)
        out.append(f'<line x1="{ML - 5}" y1="{_f(y_)}" x2="{ML}" y2="{_f(y_)}" stroke="black"/>')
        out.append(
            f'<text x="{ML - 8}" y="{_f(y_ + 4)}" text-anchor="end" font-family="sans-serif" '
            f'font-size="11">{_label(v)}</text>'
        )
    out.append(
        f'<text x="{ML + pw // 2}" y="{H - 10}" text-anchor="middle" font-family="sans-serif" font-size="12">t</text>'
    )
    pts = " ".join(f"{_f(X(a))},{_f(Y(b))}" for a, b in zip(lt, ly))
    out.append(f'<polyline points="{pts}" fill="none" stroke="#1f4e9c" stroke-width="1.5"/>')
    if fit_pts is not None:
        (x0, x1), (y0, y1) = fit_pts
        out.append(
            f'<line x1="{_f(X(x0))}" y1="{_f(Y(y0))}" x2="{_f(X(x1))}" y2="{_f(Y(y1))}" '
            f'stroke="#c0392b" stroke-width="1.5" stroke-dasharray="6,4"/>'
        )
        out.append(
            f'<text x="{ML + pw - 5}" y="{MT + 15}" text-anchor="end" font-family="sans-serif" '
            f'font-size="12" fill="#c0392b">slope {fit[0]:.3f}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
