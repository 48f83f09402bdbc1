"""Timing diagram of a simulation trace."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

INPUT_COLOR = "tab:blue"
OUTPUT_COLOR = "tab:red"


def plot_trace(trace, path, inputs, outputs, only_active=True, title=None):
    """Draw one step lane per signal (inputs blue, outputs red) and save to `path`."""
    names = [(n, INPUT_COLOR) for n in inputs] + [(n, OUTPUT_COLOR) for n in outputs]
    if only_active:
        names = [(n, c) for n, c in names if "1" in trace.column(n)] or names[:1]
    steps = [int(s) for s in trace.column("step")]
    fig, ax = plt.subplots(figsize=(max(6, len(steps) * 0.35), 0.45 * len(names) + 1))
    for lane, (name, color) in enumerate(reversed(names)):
        vals = [int(v) for v in trace.column(name)]
        ax.step(steps + [steps[-1] + 1], [lane + 0.7 * v for v in vals] + [lane + 0.7 * vals[-1]],
                where="post", color=color, linewidth=1.5)
    ax.set_yticks([i + 0.35 for i in range(len(names))])
    ax.set_yticklabels([n for n, _ in reversed(names)], fontsize=8)
    ax.set_xticks(steps)
    ax.tick_params(axis="x", labelsize=7)
    ax.set_xlim(steps[0], steps[-1] + 1)
    ax.set_xlabel("step")
    ax.grid(axis="x", linestyle=":", linewidth=0.5)
    if title:
        ax.set_title(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
