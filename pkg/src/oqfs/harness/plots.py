"""Deterministic SVG line plots for sweep outputs.

The SVG backend is pinned (fixed hashsalt, no date metadata) so identical
data produces byte-identical files, which the determinism checks rely on.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "oqfs"


def save_sweep_plot(
    ks: list[int], rsu4: list[float], path: str | Path, title: str = "k sweep"
) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(ks, rsu4, marker="o")
    ax.set_xlabel("retrieved passages k")
    ax.set_ylabel("ROUGE-SU4 F1")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
