"""Render report figures to files (matplotlib, Agg backend) and emit a small
static HTML page linking them next to the delimited/JSON outputs."""
from __future__ import annotations

import html
from pathlib import Path
from typing import List, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .evaluation import HistogramResult  # noqa: E402


def plot_histogram(hist: HistogramResult, out_png: str | Path, title: str) -> Path:
    edges = hist.bin_edges
    centers = [(a + b) / 2 for a, b in zip(edges[:-1], edges[1:])]
    width = (edges[1] - edges[0]) * 0.9 if len(edges) > 1 else 0.1
    fig, ax = plt.subplots(figsize=(7, 4.2))
    ax.bar(centers, hist.duplicate_counts, width=width, alpha=0.6, label="duplicate")
    ax.bar(centers, hist.non_duplicate_counts, width=width, alpha=0.6, label="non-duplicate")
    ax.set_xlabel("distance")
    ax.set_ylabel("frequency")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_png, dpi=120)
    plt.close(fig)
    return Path(out_png)


def plot_curve(
    points: Sequence[Tuple[float, float]],
    xlabel: str,
    ylabel: str,
    out_png: str | Path,
    title: str,
) -> Path:
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    fig, ax = plt.subplots(figsize=(7, 4.2))
    ax.plot(xs, ys, marker="o", markersize=3)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_png, dpi=120)
    plt.close(fig)
    return Path(out_png)


def emit_html(title: str, figures: List[Path], out_html: str | Path) -> Path:
    body = "\n".join(
        f'<figure><img src="{html.escape(p.name)}" alt="{html.escape(p.stem)}">'
        f"<figcaption>{html.escape(p.stem)}</figcaption></figure>"
        for p in figures
    )
    page = (
        "<!doctype html><html><head><meta charset='utf-8'>"
        f"<title>{html.escape(title)}</title>"
        "<style>body{font-family:sans-serif;max-width:60em;margin:2em auto}"
        "img{max-width:100%}</style></head>"
        f"<body><h1>{html.escape(title)}</h1>{body}</body></html>"
    )
    out = Path(out_html)
    out.write_text(page, encoding="utf-8")
    return out
