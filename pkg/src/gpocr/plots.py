"""SVG figures for benchmark reports and the 1-D kernel demo."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

COLORS = {"gp": "tab:blue", "bicubic": "tab:green", "lowres": "tab:red"}
_SVG_META = {"Date": None}


def _save(fig, path):
    with matplotlib.rc_context({"svg.hashsalt": "gpocr", "svg.fonttype": "none"}):
        fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)


def plot_accuracy(report, path):
    """Per-page accuracy for each pipeline with dashed lines at the means."""
    from .ocr_eval import METHOD_LABELS

    fig, ax = plt.subplots(figsize=(8, 4))
    summary = report.summary
    for m in report.methods:
        acc = [s.accuracy for s in report.per_image if s.method == m]
        color = COLORS.get(m)
        ax.plot(np.arange(len(acc)), acc, color=color, label=METHOD_LABELS.get(m, m))
        ax.axhline(summary[m].average, color=color, linestyle="--", linewidth=1)
    ax.set_xlabel("image")
    ax.set_ylabel("word accuracy")
    ax.set_ylim(0, 1.05)
    ax.legend()
    _save(fig, path)


def plot_gain(report, path):
    """Per-page relative gain of GP over bicubic, with the equal-accuracy line."""
    fig, ax = plt.subplots(figsize=(6, 4))
    acc = {(s.entry_id, s.method): s.accuracy for s in report.per_image}
    ids = list(dict.fromkeys(s.entry_id for s in report.per_image))
    if "gp" in report.methods and "bicubic" in report.methods:
        gains = [
            (acc[i, "gp"] - acc[i, "bicubic"]) / acc[i, "bicubic"] if acc[i, "bicubic"] > 0 else np.nan
            for i in ids
        ]
        ax.scatter(np.arange(len(ids)), gains, color="tab:blue", s=12, label="GP vs bicubic")
        ax.axhline(0.0, color="tab:orange", label="equal accuracy")
        ax.legend()
    else:
        ax.text(0.5, 0.5, "GP and bicubic pipelines required", ha="center", transform=ax.transAxes)
    ax.set_xlabel("image")
    ax.set_ylabel("relative gain")
    _save(fig, path)


def plot_demo(fit, path):
    """Prior draws (top) and posterior mean with 2-sigma band (bottom) per kernel."""
    fig, axes = plt.subplots(2, 2, figsize=(10, 6), sharex=True)
    panels = [("se", "Squared exponential"), ("m32", "Matérn 3/2")]
    for col, (name, title) in enumerate(panels):
        prior = getattr(fit, f"{name}_prior")
        mean = getattr(fit, f"{name}_mean")
        sd = getattr(fit, f"{name}_sd")
        top, bottom = axes[0, col], axes[1, col]
        top.plot(fit.x, prior, linewidth=1)
        top.set_title(title)
        bottom.fill_between(fit.x, mean - 2 * sd, mean + 2 * sd, color="0.85")
        bottom.plot(fit.x, mean, color="k")
        bottom.scatter(fit.x_train, fit.y_train, color="tab:red", s=15, zorder=3)
        bottom.set_xlabel("x")
    axes[0, 0].set_ylabel("prior draws")
    axes[1, 0].set_ylabel("posterior")
    fig.tight_layout()
    _save(fig, path)
