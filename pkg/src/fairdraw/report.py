"""Simulation report output: delimited frequency tables and figures."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .simulate import SimulationResult

TABLE_NAME = "frequencies.tsv"
FIGURE_NAME = "frequencies.png"


def write_frequency_table(result: SimulationResult, path) -> Path:
    path = Path(path)
    lines = ["candidate\tcount\tfrequency\texpected\tdeviation_sigma"]
    for cand, count, freq, expected, dev in result.rows():
        lines.append(f"{cand}\t{count}\t{freq:.6f}\t{expected:.6f}\t{dev:+.3f}")
    path.write_text("\n".join(lines) + "\n")
    return path


def plot_frequencies(result: SimulationResult, path) -> Path:
    path = Path(path)
    rows = result.rows()
    labels = [r[0] for r in rows]
    empirical = [r[2] for r in rows]
    expected = [r[3] for r in rows]
    x = np.arange(len(labels))
    fig, ax = plt.subplots(figsize=(max(6, 0.5 * len(labels)), 4))
    ax.bar(x - 0.2, empirical, width=0.4, label="empirical", color="#4878a8")
    ax.bar(x + 0.2, expected, width=0.4, label="expected", color="#b0b0b0")
    ax.set_xticks(x)
    ax.set_xticklabels(labels, rotation=45, ha="right")
    ax.set_ylabel("probability")
    ax.set_title(
        f"{result.n_trials} trials, {result.n_stakeholders} stakeholders "
        f"({result.honest} honest), chi2 p={result.p_value:.4f}"
    )
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def write_report(result: SimulationResult, out_dir) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    table = write_frequency_table(result, out / TABLE_NAME)
    figure = plot_frequencies(result, out / FIGURE_NAME)
    return table, figure
