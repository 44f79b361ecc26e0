"""Summary tables and standalone SVG figures of coverage and width-ratio results"""

import logging
import os
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import polars as pl
import pyarrow as pa
from matplotlib import cbook, rc_context
from matplotlib.figure import Figure

from kfoldpi.data import write_file
from kfoldpi.exceptions import EmptyGroup
from kfoldpi.inference.harness import AggregateSummary, method_sort_key
from kfoldpi.inference.utils.polars_utils import group_values
from kfoldpi.inference.utils.validations import validate_pyarrow_table
from kfoldpi.pipeline import Step

logger = logging.getLogger(__name__)

METRICS = ("coverage", "log2_ratio")
SUMMARY_COLUMNS = (
    "scenario",
    "method",
    "replicates",
    "mean_coverage",
    "mean_width",
    "mean_log2_ratio",
)

# Fixed ids and no timestamp so identical input gives identical bytes
_SVG_RC = {"svg.hashsalt": "kfoldpi", "svg.fonttype": "none", "path.simplify": False}
_SVG_METADATA = {"Date": None, "Creator": "kfoldpi"}
_MEAN_MARKER = {"marker": "o", "markerfacecolor": "white", "markeredgecolor": "black"}


def _format(value: Optional[float]) -> str:
    return "-" if value is None else f"{value:.4f}"


def summary_table(summaries: Sequence[AggregateSummary]) -> str:
    """Fixed-width text table, one row per (scenario, method), reals to 4 decimal places

    Rows follow scenario order, then SC before k-fold methods by increasing k. A missing
    width ratio prints as ``-``.
    """
    if not summaries:
        raise ValueError("summary_table needs at least one summary.")
    ordered = sorted(summaries, key=lambda s: (s.scenario, method_sort_key(s.method)))
    rows = [
        (
            s.scenario,
            s.method,
            str(s.replicates),
            _format(s.mean_coverage),
            _format(s.mean_width),
            _format(s.log2_width_ratio),
        )
        for s in ordered
    ]
    widths = [max(len(cell) for cell in column) for column in zip(SUMMARY_COLUMNS, *rows)]
    lines = []
    for row in [SUMMARY_COLUMNS, *rows]:
        cells = [
            cell.ljust(width) if position < 2 else cell.rjust(width)
            for position, (cell, width) in enumerate(zip(row, widths))
        ]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines) + "\n"


def emit_boxplot_svg(
    groups: Mapping[str, Sequence[float]],
    metric: str,
    path: str,
    nominal_line: Optional[float] = None,
    title: Optional[str] = None,
) -> None:
    """Write one boxplot per group as a standalone SVG

    Boxes span the quartiles (linear interpolation) with the median marked, whiskers
    reach the most extreme values within 1.5 IQR, a white circle marks the group mean and,
    when ``nominal_line`` is given, a dashed red horizontal line marks it.

    Parameters
    ----------

    groups : Mapping[str, Sequence[float]]
        Values per method label, drawn in mapping order.
    metric : str
        ``coverage`` or ``log2_ratio``; sets the axis label.
    path : str
        Destination file.
    nominal_line : Optional[float]
        Reference level, e.g. 0.9 for coverage or 0 for ratios.
    title : Optional[str]

    Raises
    ------

    EmptyGroup
        There are no groups, or a group has no values
    """
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}, got '{metric}'.")
    if not groups:
        raise EmptyGroup("A boxplot needs at least one group.")
    stats = []
    for label, values in groups.items():
        values = np.asarray(values, dtype=np.float64).ravel()
        if values.shape[0] == 0:
            raise EmptyGroup(f"The group '{label}' has no values to plot.")
        # quartiles by linear interpolation, the numpy percentile default
        stats.extend(cbook.boxplot_stats(values, whis=1.5, labels=[label]))

    with rc_context(_SVG_RC):
        fig = Figure(figsize=(1.2 * len(stats) + 2.0, 4.0))
        ax = fig.subplots()
        ax.bxp(stats, showmeans=True, meanprops=_MEAN_MARKER, showfliers=True)
        if nominal_line is not None:
            ax.axhline(nominal_line, linestyle="--", color="red", linewidth=1.0)
        ax.set_ylabel("coverage rate" if metric == "coverage" else "log2(width SC / width)")
        if title:
            ax.set_title(title)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata=_SVG_METADATA)
    logger.info(f"Wrote {path}")


def emit_ratio_scatter_svg(
    points: Mapping[str, float], path: str, title: Optional[str] = None
) -> None:
    """Scatter of one mean log2 width ratio per dataset, with a dashed line at zero"""
    if not points:
        raise EmptyGroup("A scatter plot needs at least one point.")
    labels = list(points)
    with rc_context(_SVG_RC):
        fig = Figure(figsize=(0.8 * len(labels) + 2.5, 4.0))
        ax = fig.subplots()
        ax.scatter(range(len(labels)), [points[label] for label in labels], color="black")
        ax.axhline(0.0, linestyle="--", color="red", linewidth=1.0)
        ax.set_xticks(range(len(labels)))
        ax.set_xticklabels(labels, rotation=45, ha="right")
        ax.set_ylabel("mean log2(width SC / width k5)")
        if title:
            ax.set_title(title)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata=_SVG_METADATA)
    logger.info(f"Wrote {path}")


def _safe_filename(name: str) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in name)


class ReportWriter(Step):
    """Pipeline step rendering the summary table and figures

    ``run`` builds the summary text and figure groups from the records and the
    Aggregator's artifacts; ``write_artifacts`` writes ``summary.txt``,
    ``coverage_<scenario>.svg``, ``ratio_<scenario>.svg`` and, when ``scatter_method`` is
    set, ``ratio_scatter.svg``.

    Attributes
    ----------

    nominal_coverage : float
        Level of the dashed line in coverage plots (``1 - alpha``).
    scatter_method : Optional[str]
        Method whose mean ratio per scenario forms the scatter plot (``k5`` for real data).
    """

    def __init__(self, nominal_coverage: float = 0.9, scatter_method: Optional[str] = None):
        """Constructor method"""
        super().__init__()
        self.nominal_coverage = nominal_coverage
        self.scatter_method = scatter_method

    def run(self, data: pa.Table, artifacts: dict) -> Tuple[None, dict]:
        validate_pyarrow_table(data)
        summaries: List[AggregateSummary] = artifacts.get("summaries") or []
        records_df = pl.from_arrow(data)
        scenarios = sorted(set(records_df["scenario"].to_list()))
        methods = sorted(set(records_df["method"].to_list()), key=method_sort_key)

        coverage_groups: Dict[str, dict] = {
            scenario: group_values(records_df, "coverage", scenario, methods)
            for scenario in scenarios
        }
        ratio_groups: Dict[str, dict] = {}
        paired = artifacts.get("paired_ratios")
        if paired is not None:
            for scenario in scenarios:
                groups = group_values(paired, "log2_ratio", scenario, methods)
                if groups:
                    ratio_groups[scenario] = groups

        scatter = {}
        if self.scatter_method:
            scatter = {
                s.scenario: s.log2_width_ratio
                for s in summaries
                if s.method == self.scatter_method and s.log2_width_ratio is not None
            }

        report = {
            "summary_text": summary_table(summaries) if summaries else "",
            "coverage_groups": coverage_groups,
            "ratio_groups": ratio_groups,
            "ratio_scatter": scatter,
            "record_count": data.num_rows,
        }
        return None, {"report": report}

    def write_artifacts(self, write_path: str, artifacts: dict) -> None:
        report = artifacts["report"]
        write_file(report["summary_text"], os.path.join(write_path, "summary.txt"), "txt")
        for scenario, groups in report["coverage_groups"].items():
            emit_boxplot_svg(
                groups,
                "coverage",
                os.path.join(write_path, f"coverage_{_safe_filename(scenario)}.svg"),
                nominal_line=self.nominal_coverage,
                title=scenario,
            )
        for scenario, groups in report["ratio_groups"].items():
            emit_boxplot_svg(
                groups,
                "log2_ratio",
                os.path.join(write_path, f"ratio_{_safe_filename(scenario)}.svg"),
                nominal_line=0.0,
                title=scenario,
            )
        if report["ratio_scatter"]:
            emit_ratio_scatter_svg(
                report["ratio_scatter"], os.path.join(write_path, "ratio_scatter.svg")
            )
