"""Report figures, rendered headlessly to PNG files.

Three views of an evaluation report: pooled ROC curves, test-error bars,
and chosen-factor-count bars. Written next to the delimited outputs so a
run directory is self-describing.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .evaluate import EvalReport  # noqa: E402

_METHOD_COLORS = {"RM": "tab:blue", "PCA": "tab:red"}
_LINE_STYLES = ("-", "--", ":", "-.")


def _color(method: str) -> str:
    return _METHOD_COLORS.get(method, "tab:gray")


def _roc_figure(report: EvalReport, path: Path) -> bool:
    curves = [s for s in report.summaries if s.roc_fpr]
    if not curves:
        return False
    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    for s in curves:
        style = _LINE_STYLES[report.config.p_stars.index(s.p_star) % len(_LINE_STYLES)]
        ax.plot(s.roc_fpr, s.roc_tpr, style, color=_color(s.method), lw=1.4,
                label=f"{s.method} p*={s.p_star} (AUC {s.auc:.3f})")
    ax.plot([0, 1], [0, 1], color="0.7", lw=0.8, zorder=0)
    ax.set_xlim(-0.02, 1.02)
    ax.set_ylim(-0.02, 1.02)
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    ax.set_title("pooled ROC over all trials")
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return True


def _grouped_bars(report: EvalReport, path: Path, value, err, ylabel: str,
                  title: str) -> None:
    methods = report.config.methods
    p_stars = report.config.p_stars
    x = np.arange(len(p_stars), dtype=np.float64)
    width = 0.8 / len(methods)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for mi, method in enumerate(methods):
        vals = [value(report.summary(method, p)) for p in p_stars]
        errs = [err(report.summary(method, p)) for p in p_stars]
        ax.bar(x + (mi - (len(methods) - 1) / 2) * width, vals, width * 0.9,
               yerr=errs, capsize=3, color=_color(method), label=method)
    ax.set_xticks(x)
    ax.set_xticklabels([str(p) for p in p_stars])
    ax.set_xlabel("genes selected (p*)")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend(fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_figures(report: EvalReport, out_dir) -> list:
    """Write the report figures into out_dir; returns the paths created."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    roc_path = out / "roc.png"
    if _roc_figure(report, roc_path):
        paths.append(roc_path)
    mer_path = out / "mer.png"
    _grouped_bars(report, mer_path,
                  lambda s: s.mer_mean, lambda s: s.mer_sd,
                  "test misclassification rate", "mean test error (sd whiskers)")
    paths.append(mer_path)
    k_path = out / "kstar.png"
    _grouped_bars(report, k_path,
                  lambda s: s.k_star_mean, lambda s: s.k_star_sd,
                  "chosen factor count", "mean selected K (sd whiskers)")
    paths.append(k_path)
    return paths
