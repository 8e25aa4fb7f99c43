"""Report figures rendered to PNG files with the non-interactive backend."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.ticker import MaxNLocator  # noqa: E402

_PNG_META = {"Software": None}


def plot_diversity(doc: dict, path: Path) -> Path:
    """Grouped bars: within-instance mean (with std) and across-corpus score per kind."""
    kinds = list(doc["diversity"])
    within = [doc["diversity"][k]["within"]["mean"] for k in kinds]
    spread = [doc["diversity"][k]["within"]["std"] for k in kinds]
    across = [doc["diversity"][k]["across"]["value"] for k in kinds]
    xs = range(len(kinds))
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.bar([x - 0.2 for x in xs], [v or 0 for v in within], 0.4, yerr=[s or 0 for s in spread],
           capsize=3, label="within (mean)")
    ax.bar([x + 0.2 for x in xs], [v or 0 for v in across], 0.4, label="across")
    for x, w, a in zip(xs, within, across):
        if w is None:
            ax.text(x - 0.2, 0.02, "-", ha="center")
        if a is None:
            ax.text(x + 0.2, 0.02, "-", ha="center")
    ax.set_xticks(list(xs), kinds)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("diversity")
    ax.set_title(f"Attribute value diversity ({doc['model']})")
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(path, metadata=_PNG_META)
    plt.close(fig)
    return path


def plot_status(doc: dict, path: Path) -> Path:
    counts = doc["status_counts"]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    labels = [k.replace("-", "\n", 1) for k in counts]
    ax.bar(labels, list(counts.values()), color=["tab:green", "tab:red", "tab:orange", "tab:gray"])
    ax.yaxis.set_major_locator(MaxNLocator(integer=True))
    ax.set_ylabel("instances")
    ax.set_title(f"Instance status ({doc['model']})")
    fig.tight_layout()
    fig.savefig(path, metadata=_PNG_META)
    plt.close(fig)
    return path


def render_figures(doc: dict, out_dir: Path) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    return [plot_diversity(doc, out_dir / "diversity.png"), plot_status(doc, out_dir / "status.png")]
