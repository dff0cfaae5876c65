"""
Reporting: summary tables and hop-wise F1 plots for run directories.

Plots are written as plain SVG text with fixed geometry and fixed number
formatting, so the same results always give the same bytes.
"""

import logging
import os
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import pandas as pd

from config import (
    PLOT_COLORS,
    PLOT_HEIGHT,
    PLOT_OVERLAY_OPACITY,
    PLOT_WIDTH,
    SEQUENCE_FILE,
)

from . import metrics
from .errors import RunDirectoryError
from .run_config import RunConfig
from .run_store import RunStore
from .sequence import HopSequence, read_sequence_file
from .state import HopRecord, HopResult, RunSummary

logger = logging.getLogger(__name__)


@dataclass
class RunData:
    """Everything the report needs from one (possibly partial) run directory."""
    name: str
    run_dir: str
    config: RunConfig
    lang_names: Tuple[str, ...]
    category_names: Tuple[str, ...]
    sequence: HopSequence  # trimmed to the completed hops
    records: List[HopRecord]
    results: List[HopResult]
    summary: RunSummary


def load_run(run_dir: str, name: Optional[str] = None) -> RunData:
    store = RunStore(run_dir, (), ())
    if not os.path.exists(store.config_path):
        raise RunDirectoryError(f"Run directory {run_dir} has no configuration snapshot", run_dir)
    config = RunConfig.load(store.config_path)
    lang_names, category_names = config.corpus_names()
    store = RunStore(run_dir, lang_names, category_names)

    results = store.load_results()
    records = store.load_records()
    full = read_sequence_file(os.path.join(run_dir, SEQUENCE_FILE), lang_names, category_names)
    sequence = HopSequence(full.combos[:len(results)], full.seed, full.id)
    collapsed = [r.hop for r in records if r.collapsed]
    summary = metrics.summarize(results, sequence, config["metrics.strict_ol_od"], collapsed)
    return RunData(name or os.path.basename(os.path.normpath(run_dir)), run_dir, config,
                   lang_names, category_names, sequence, records, results, summary)


# =============================================================================
# TABLES
# =============================================================================

def summary_frame(rows: Sequence[Tuple[str, RunSummary]]) -> pd.DataFrame:
    """One row per run; metric columns x100 at two decimals."""
    return pd.DataFrame(
        [{"Run": name, **summary.formatted(), "Hops": summary.hops,
          "Collapsed": len(summary.collapsed_hops)} for name, summary in rows],
        columns=["Run", *RunSummary.COLUMNS, "Hops", "Collapsed"],
    )


def summary_table(rows: Sequence[Tuple[str, RunSummary]]) -> str:
    return summary_frame(rows).to_string(index=False) + "\n"


# =============================================================================
# PLOTS
# =============================================================================

def _escape(text: str) -> str:
    return (
        text.replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
        .replace("'", "&#39;")
    )


_MARGIN_LEFT = 60
_MARGIN_RIGHT = 130
_MARGIN_TOP = 40
_MARGIN_BOTTOM = 110


def _polyline(points: List[Tuple[float, float]], color: str, css: str = "lang", extra: str = "") -> str:
    coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in points)
    return f'<polyline class="{css}" points="{coords}" fill="none" stroke="{color}" stroke-width="2"{extra}/>'


def render_hopwise_svg(run: RunData, overlay: Optional[RunData] = None) -> str:
    """
    Mean F1 per language after every hop, one polyline per language.

    The x axis has one tick per hop labelled with the hop's training combo.
    Hops flagged as collapsed get a dashed vertical marker. An overlay run is
    drawn translucent and dashed beneath this run's lines.
    """
    width, height = PLOT_WIDTH, PLOT_HEIGHT
    chart_left, chart_right = _MARGIN_LEFT, width - _MARGIN_RIGHT
    chart_top, chart_bottom = _MARGIN_TOP, height - _MARGIN_BOTTOM
    chart_w, chart_h = chart_right - chart_left, chart_bottom - chart_top
    n = len(run.results)
    slot_w = chart_w / max(n, 1)

    def x_of(hop: int) -> float:
        return chart_left + (hop - 0.5) * slot_w

    def y_of(f1: float) -> float:
        return chart_bottom - f1 * chart_h

    svg = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">']
    svg.append("<style>")
    svg.append(".title{font:700 15px Arial;fill:#111}")
    svg.append(".axis{stroke:#000;stroke-width:1}")
    svg.append(".grid{stroke:#d0d0d0;stroke-width:1}")
    svg.append(".tick,.xtick,.legend{font:11px Arial;fill:#111}")
    svg.append(".collapse{stroke:#d62728;stroke-width:1;stroke-dasharray:4 3}")
    svg.append("</style>")
    svg.append(f'<rect x="0" y="0" width="{width}" height="{height}" fill="#fff"/>')
    title = f"{run.name}: hop-wise F1 by language ({run.config['method']})"
    if overlay is not None:
        title += f" vs {overlay.name}"
    svg.append(f'<text class="title" x="{chart_left}" y="24">{_escape(title)}</text>')

    svg.append(f'<line class="axis" x1="{chart_left}" y1="{chart_top}" x2="{chart_left}" y2="{chart_bottom}"/>')
    svg.append(f'<line class="axis" x1="{chart_left}" y1="{chart_bottom}" x2="{chart_right}" y2="{chart_bottom}"/>')
    for step in range(5):
        value = step / 4
        y = y_of(value)
        svg.append(f'<line class="grid" x1="{chart_left}" y1="{y:.2f}" x2="{chart_right}" y2="{y:.2f}"/>')
        svg.append(f'<text class="tick" x="{chart_left - 8}" y="{y + 4:.2f}" text-anchor="end">{value:.2f}</text>')

    for hop, combo in enumerate(run.sequence.combos, 1):
        label = f"{run.lang_names[combo.lang]}-{run.category_names[combo.category]}"
        x, y = x_of(hop), chart_bottom + 14
        svg.append(f'<text class="xtick" x="{x:.2f}" y="{y}" text-anchor="end" '
                   f'transform="rotate(-45 {x:.2f} {y})">{_escape(label)}</text>')

    for record in run.records:
        if record.collapsed and record.hop <= n:
            x = x_of(record.hop)
            svg.append(f'<line class="collapse" x1="{x:.2f}" y1="{chart_top}" x2="{x:.2f}" y2="{chart_bottom}"/>')

    if overlay is not None:
        hops = min(n, len(overlay.results))
        for lang in range(min(len(run.lang_names), len(overlay.lang_names))):
            t = metrics.language_trajectory(overlay.results[:hops], lang)
            points = [(x_of(i + 1), y_of(v)) for i, v in enumerate(t)]
            svg.append(_polyline(points, PLOT_COLORS[lang % len(PLOT_COLORS)], "overlay",
                                 f' stroke-dasharray="6 4" opacity="{PLOT_OVERLAY_OPACITY}"'))

    for lang, name in enumerate(run.lang_names):
        color = PLOT_COLORS[lang % len(PLOT_COLORS)]
        t = metrics.language_trajectory(run.results, lang)
        svg.append(_polyline([(x_of(i + 1), y_of(v)) for i, v in enumerate(t)], color))
        ly = chart_top + 16 * lang + 8
        svg.append(f'<line x1="{chart_right + 16}" y1="{ly}" x2="{chart_right + 36}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        svg.append(f'<text class="legend" x="{chart_right + 42}" y="{ly + 4}">{_escape(name)}</text>')

    svg.append("</svg>")
    return "\n".join(svg) + "\n"


def write_svg(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    logger.debug(f"Wrote plot {path}")
