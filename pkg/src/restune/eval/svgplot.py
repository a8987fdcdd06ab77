"""Self-contained deterministic SVG line charts (no plotting dependency)."""

from __future__ import annotations

import math

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 64, 16, 34, 48


def _ticks(lo: float, hi: float, n: int = 5):
    if hi <= lo:
        hi = lo + 1.0
    step = (hi - lo) / (n - 1)
    return [lo + i * step for i in range(n)]


def _log_ticks(lo: float, hi: float):
    lo_e = math.floor(math.log10(lo))
    hi_e = math.ceil(math.log10(hi))
    return [10.0**e for e in range(lo_e, hi_e + 1)]


def write_line_chart(
    path,
    series,
    title: str = "",
    x_label: str = "",
    y_label: str = "",
    log_y: bool = False,
    width: int = 640,
    height: int = 420,
) -> None:
    """Render labelled (x, y) series as an SVG file.

    ``series`` is a list of ``(label, xs, ys)`` triples.  With ``log_y`` the
    vertical axis is log-scaled; non-positive values are rejected.
    """
    series = [(label, list(xs), list(ys)) for label, xs, ys in series]
    if not series or all(not xs for _, xs, _ in series):
        raise ValueError("write_line_chart needs at least one non-empty series")
    all_x = [x for _, xs, _ in series for x in xs]
    all_y = [y for _, _, ys in series for y in ys]
    if log_y and min(all_y) <= 0:
        raise ValueError("log_y requires strictly positive y values")

    x_lo, x_hi = min(all_x), max(all_x)
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0
    if log_y:
        y_lo, y_hi = math.log10(min(all_y)), math.log10(max(all_y))
    else:
        y_lo, y_hi = min(all_y), max(all_y)
    if y_hi <= y_lo:
        y_hi = y_lo + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    plot_w = width - MARGIN_L - MARGIN_R
    plot_h = height - MARGIN_T - MARGIN_B

    def sx(x: float) -> float:
        return MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w

    def sy(y: float) -> float:
        v = math.log10(y) if log_y else y
        return MARGIN_T + plot_h - (v - y_lo) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="#333" stroke-width="1"/>',
    ]
    if title:
        parts.append(
            f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{title}</text>'
        )

    for xv in _ticks(x_lo, x_hi):
        px = sx(xv)
        parts.append(
            f'<line x1="{px:.2f}" y1="{MARGIN_T + plot_h}" x2="{px:.2f}" '
            f'y2="{MARGIN_T + plot_h + 5}" stroke="#333"/>'
        )
        parts.append(
            f'<text x="{px:.2f}" y="{MARGIN_T + plot_h + 18}" text-anchor="middle">{xv:g}</text>'
        )
    y_ticks = _log_ticks(10.0**y_lo, 10.0**y_hi) if log_y else _ticks(y_lo, y_hi)
    for yv in y_ticks:
        py = sy(yv)
        if py < MARGIN_T or py > MARGIN_T + plot_h:
            continue
        parts.append(
            f'<line x1="{MARGIN_L - 5}" y1="{py:.2f}" x2="{MARGIN_L}" y2="{py:.2f}" stroke="#333"/>'
        )
        parts.append(
            f'<line x1="{MARGIN_L}" y1="{py:.2f}" x2="{MARGIN_L + plot_w}" y2="{py:.2f}" '
            'stroke="#ddd" stroke-width="0.5"/>'
        )
        parts.append(
            f'<text x="{MARGIN_L - 8}" y="{py + 4:.2f}" text-anchor="end">{yv:g}</text>'
        )
    if x_label:
        parts.append(
            f'<text x="{MARGIN_L + plot_w / 2:.1f}" y="{height - 8}" text-anchor="middle">{x_label}</text>'
        )
    if y_label:
        cy = MARGIN_T + plot_h / 2
        parts.append(
            f'<text x="16" y="{cy:.1f}" text-anchor="middle" transform="rotate(-90 16 {cy:.1f})">{y_label}</text>'
        )

    for i, (label, xs, ys) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        ly = MARGIN_T + 14 + 16 * i
        lx = MARGIN_L + plot_w - 130
        parts.append(
            f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 18}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(f'<text x="{lx + 24}" y="{ly}">{label}</text>')

    parts.append("</svg>")
    with open(path, "w") as f:
        f.write("\n".join(parts) + "\n")
