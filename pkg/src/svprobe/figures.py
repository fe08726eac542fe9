"""Report figures rendered next to the delimited output files."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def plot_layer_weights(report, path, title: str = "Layer weights") -> None:
    """Bar chart of the normalized layer weights ("L0".."Ln")."""
    labels = [label for label, _ in report]
    weights = [weight for _, weight in report]
    fig, ax = plt.subplots(figsize=(7, 3.2))
    ax.bar(range(len(weights)), weights, color="#4878a8")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, fontsize=8)
    ax.set_ylabel("weight")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_loss_history(history, path, title: str = "Stage-1 training loss") -> None:
    fig, ax = plt.subplots(figsize=(6, 3.2))
    ax.plot(range(1, len(history) + 1), history, marker="o", markersize=3)
    ax.set_xlabel("epoch")
    ax.set_ylabel("mean training loss")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
