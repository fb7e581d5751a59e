"""Report emission: per-subset metric means as CSV/JSON/Markdown, plus
bar-chart figures rendered next to the delimited output.

Means are computed at full precision and rounded to two decimals only at
presentation time.  CSV output is RFC 4180 (CRLF line endings); the long
format (subset, metric, value) is plot-ready for external tooling.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path

from .errors import NoMetricsFound
from .model import Dataset


@dataclass
class ReportTable:
    subsets: list[str]
    columns: list[str]
    means: dict[tuple[str, str], float]
    counts: dict[tuple[str, str], int]

    def cell(self, subset: str, column: str) -> float | None:
        return self.means.get((subset, column))


def collect_metric_means(dataset: Dataset) -> ReportTable:
    """Per-subset mean of every metric name present on any question, answer,
    or hint; columns are sorted by metric name."""
    values: dict[tuple[str, str], list[float]] = {}
    for sname, subset in dataset.subsets.items():
        for inst in subset.instances.values():
            for target in [inst.question, *inst.answers, *inst.hints]:
                for name, result in target.metrics.items():
                    values.setdefault((sname, name), []).append(result.value)
    if not values:
        raise NoMetricsFound("dataset carries no metric results")
    columns = sorted({name for _, name in values})
    means = {key: sum(vals) / len(vals) for key, vals in values.items()}
    counts = {key: len(vals) for key, vals in values.items()}
    return ReportTable(subsets=list(dataset.subsets), columns=columns, means=means, counts=counts)


def _fmt(value: float | None) -> str:
    return "" if value is None else f"{value:.2f}"


def to_csv(table: ReportTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)  # default lineterminator is CRLF per RFC 4180
    writer.writerow(["subset", *table.columns])
    for subset in table.subsets:
        writer.writerow([subset, *(_fmt(table.cell(subset, c)) for c in table.columns)])
    return buf.getvalue()


def to_long_csv(table: ReportTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["subset", "metric", "value"])
    for subset in table.subsets:
        for column in table.columns:
            value = table.cell(subset, column)
            if value is not None:
                writer.writerow([subset, column, _fmt(value)])
    return buf.getvalue()


def to_markdown(table: ReportTable) -> str:
    header = ["subset", *table.columns]
    lines = ["| " + " | ".join(header) + " |",
             "| " + " | ".join("---" for _ in header) + " |"]
    for subset in table.subsets:
        cells = [subset, *(_fmt(table.cell(subset, c)) for c in table.columns)]
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def to_json(table: ReportTable) -> str:
    doc = {
        subset: {c: _fmt(table.cell(subset, c)) for c in table.columns
                 if table.cell(subset, c) is not None}
        for subset in table.subsets
    }
    return json.dumps(doc, ensure_ascii=False, indent=2) + "\n"


def render_figures(table: ReportTable, out_dir: str | Path, stem: str = "report") -> list[Path]:
    """One grouped bar chart per metric family (relevance, readability, ...)
    saved as ``<stem>_<family>.png`` under ``out_dir``."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    families: dict[str, list[str]] = {}
    for column in table.columns:
        families.setdefault(column.split("/", 1)[0], []).append(column)

    paths = []
    for family, columns in families.items():
        fig, ax = plt.subplots(figsize=(max(6.0, 1.8 * len(table.subsets)), 4.0))
        x = np.arange(len(table.subsets))
        width = 0.8 / len(columns)
        for i, column in enumerate(columns):
            heights = [table.cell(s, column) or 0.0 for s in table.subsets]
            ax.bar(x + i * width, heights, width, label=column)
        ax.set_xticks(x + 0.4 - width / 2)
        ax.set_xticklabels(table.subsets, rotation=20, ha="right")
        ax.set_ylabel("mean score")
        ax.set_title(family)
        ax.legend(fontsize="small")
        fig.tight_layout()
        path = out_dir / f"{stem}_{family}.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        paths.append(path)
    return paths
