"""Figures for sweep results and coefficient dumps.

``sweep_svg`` writes a self-contained SVG by hand. The ``plot_*`` functions
render the same data with matplotlib (Agg backend) to PNG/PDF files.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

OBJECTIVE_COLOR = "#c0392b"
DIFF_COLOR = "#2e59a8"

STYLE = {
    "figure.figsize": (7.0, 3.2),
    "figure.dpi": 120,
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "legend.fontsize": 8,
    "lines.linewidth": 1.4,
    "lines.markersize": 4,
    "savefig.bbox": "tight",
}


def _pair_label(r) -> str:
    return f"[{r.eps1:g};{r.eps2:g}]"


def _fmt(v: float) -> str:
    return f"{v:.4g}"


def sweep_svg(records, path, width: int = 640, height: int = 320) -> None:
    """Two polylines over pair index: objective (left axis), |R_e - R_x| (right axis)."""
    ok = [(i, r) for i, r in enumerate(records) if r.objective is not None]
    left, right, top, bottom = 70, 70, 30, 60
    pw, ph = width - left - right, height - top - bottom
    n = max(len(records) - 1, 1)

    def x_of(i):
        return left + pw * (i / n if len(records) > 1 else 0.5)

    def scaler(values):
        lo, hi = min(values, default=0.0), max(values, default=1.0)
        if hi - lo <= 0:
            lo, hi = lo - 0.5, hi + 0.5
        return lo, hi, (lambda v: top + ph * (1 - (v - lo) / (hi - lo)))

    objs = [r.objective for _, r in ok]
    diffs = [r.abs_diff for _, r in ok]
    olo, ohi, oy = scaler(objs)
    dlo, dhi, dy = scaler(diffs)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
           f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>']
    for frac in (0.0, 0.5, 1.0):
        y = top + ph * (1 - frac)
        out.append(f'<text x="{left - 6}" y="{y + 4:.1f}" text-anchor="end" '
                   f'fill="{OBJECTIVE_COLOR}">{_fmt(olo + frac * (ohi - olo))}</text>')
        out.append(f'<text x="{left + pw + 6}" y="{y + 4:.1f}" '
                   f'fill="{DIFF_COLOR}">{_fmt(dlo + frac * (dhi - dlo))}</text>')
    for i, r in enumerate(records):
        out.append(f'<text x="{x_of(i):.1f}" y="{top + ph + 16}" text-anchor="middle">'
                   f'{escape(_pair_label(r))}</text>')
    for vals, ys, color, name in ((objs, oy, OBJECTIVE_COLOR, "objective (eta + delta)"),
                                  (diffs, dy, DIFF_COLOR, "|R_e - R_x|")):
        pts = " ".join(f"{x_of(i):.2f},{ys(v):.2f}" for (i, _), v in zip(ok, vals))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{pts}">'
                   f'<title>{escape(name)}</title></polyline>')
        for (i, _), v in zip(ok, vals):
            out.append(f'<circle cx="{x_of(i):.2f}" cy="{ys(v):.2f}" r="3" fill="{color}"/>')
    out.append(f'<text x="{left}" y="{height - 12}" fill="{OBJECTIVE_COLOR}">'
               f'objective (eta + delta)</text>')
    out.append(f'<text x="{left + pw}" y="{height - 12}" text-anchor="end" '
               f'fill="{DIFF_COLOR}">|R_e - R_x| (bits/s/Hz)</text>')
    out.append(f'<text x="{left + pw / 2}" y="{top - 10}" text-anchor="middle">'
               f'threshold pair [eps1;eps2]</text>')
    out.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")


def plot_sweep(records, path):
    """Objective and rate error against threshold pair, on twin y axes."""
    ok = [(i, r) for i, r in enumerate(records) if r.objective is not None]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        idx = [i for i, _ in ok]
        ax.plot(idx, [r.objective for _, r in ok], "o-", color=OBJECTIVE_COLOR)
        ax.set_ylabel(r"$\eta + \delta$", color=OBJECTIVE_COLOR)
        ax.set_xticks(range(len(records)))
        ax.set_xticklabels([_pair_label(r) for r in records], rotation=30, ha="right")
        ax.set_xlabel(r"threshold pair $[\epsilon_1;\epsilon_2]$")
        ax2 = ax.twinx()
        ax2.plot(idx, [r.abs_diff for _, r in ok], "s-", color=DIFF_COLOR)
        ax2.set_ylabel(r"$|R_e - R_x|$ (bits/s/Hz)", color=DIFF_COLOR)
        ax2.grid(False)
        fig.savefig(path)
        plt.close(fig)


def plot_coefficients(magnitudes, path, selected=None, title=None):
    """Normalized coefficient magnitudes in monomial order, optionally with a selection mask.

    ``magnitudes`` is the list returned by ``normalize_magnitudes``.
    """
    mags = [m for _, m in magnitudes]
    n_panels = 1 if selected is None else 2
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, n_panels, squeeze=False)
        ax = axes[0][0]
        ax.stem(range(len(mags)), mags, markerfmt=" ", basefmt=" ")
        ax.set_xlabel("monomial index (degree, then theta_tx power)")
        ax.set_ylabel("normalized magnitude")
        ax.set_ylim(0, 1.05)
        if title:
            ax.set_title(title)
        # tick at the first monomial of each degree
        starts = [(i, a) for i, ((a, b), _) in enumerate(magnitudes) if b == 0]
        step = max(1, math.ceil(len(starts) / 6))
        ax.set_xticks([i for i, _ in starts[::step]])
        ax.set_xticklabels([f"deg {d}" for _, d in starts[::step]])
        if selected is not None:
            ax2 = axes[0][1]
            ax2.stem(range(len(selected)), selected, markerfmt=" ", basefmt=" ")
            ax2.set_xlabel("monomial index")
            ax2.set_ylabel("selected")
            ax2.set_yticks([0, 1])
        fig.savefig(path)
        plt.close(fig)
