"""Report figures for the command-line interface.

Only the CLI report path imports this module, keeping the core library
matplotlib-free.  All figures render with the Agg backend straight to files,
placed alongside the report they illustrate.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .campaign import CampaignReport
from .splitting import RunOutcome

_RATE_COLOR = "#3465a4"
_THRESHOLD_COLOR = "#cc0000"


def _error_bars(ax, rates: dict, threshold: float, title: str) -> None:
    stages = list(rates)
    values = [rates[s] for s in stages]
    ax.bar(range(len(stages)), values, color=_RATE_COLOR)
    ax.axhline(threshold, color=_THRESHOLD_COLOR, linestyle="--", label="abort threshold")
    ax.set_xticks(range(len(stages)))
    ax.set_xticklabels(stages, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("error rate")
    ax.set_ylim(0, max([threshold * 1.5, *values, 0.01]) * 1.15)
    ax.set_title(title)
    ax.legend(loc="upper right", fontsize=8)


def run_figure(outcome: RunOutcome, threshold: float, path: str) -> str:
    """Per-stage error rates of a single run against the abort threshold."""
    fig, ax = plt.subplots(figsize=(7, 4))
    rates = outcome.error_rates or {"(no checks)": 0.0}
    verdict = outcome.verdict
    if outcome.abort_stage:
        verdict += f" at {outcome.abort_stage}"
    _error_bars(ax, rates, threshold, f"check error rates — {verdict}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def campaign_figure(report: CampaignReport, threshold: float, path: str) -> str:
    """Verdict mix and mean per-stage error rates across a campaign."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    labels = ["aborted", "recovered"]
    values = [report.abort_rate, report.recovery_rate]
    if report.mean_fidelity is not None:
        labels.append("mean fidelity")
        values.append(report.mean_fidelity)
    ax1.bar(labels, values, color=["#cc0000", "#4e9a06", "#3465a4"][: len(labels)])
    ax1.set_ylim(0, 1.05)
    ax1.set_title(f"{report.trials} trials of {report.protocol}")
    for i, value in enumerate(values):
        ax1.text(i, value + 0.02, f"{value:.3f}", ha="center", fontsize=8)
    _error_bars(ax2, report.mean_error_rates or {"(no checks)": 0.0}, threshold,
                "mean check error rates")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def sweep_figure(param: str, rows: list[dict], path: str) -> str:
    """Abort/recovery/error and efficiency trends across a parameter sweep."""
    xs = [row["param"] for row in rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.plot(xs, [r["abort_rate"] for r in rows], "o-", label="abort rate")
    ax1.plot(xs, [r["recovery_rate"] for r in rows], "s-", label="recovery rate")
    ax1.plot(xs, [r["mean_error"] for r in rows], "^-", label="mean error")
    ax1.set_xlabel(param)
    ax1.set_ylim(-0.05, 1.05)
    ax1.legend(fontsize=8)
    ax1.set_title("protocol response")
    for key, style in (("eta_q", "o-"), ("eta_t", "s-")):
        series = [(x, r[key]) for x, r in zip(xs, rows) if r[key] is not None]
        if series:
            ax2.plot([s[0] for s in series], [s[1] for s in series], style, label=key)
    ax2.set_xlabel(param)
    ax2.set_ylim(0, 1.05)
    ax2.legend(fontsize=8)
    ax2.set_title("efficiency (completed trials)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
