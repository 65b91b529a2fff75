"""Figure rendering for the CLI report path (matplotlib, file output only)."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

__all__ = ["save_separation_report"]


def save_separation_report(path, panels, title):
    """Save a one-row grayscale montage; `panels` is [(label, image), ...]."""
    fig, axes = plt.subplots(1, len(panels), figsize=(3 * len(panels), 3.2))
    if len(panels) == 1:
        axes = [axes]
    for ax, (label, img) in zip(axes, panels):
        ax.imshow(img, cmap="gray")
        ax.set_title(label, fontsize=9)
        ax.axis("off")
    fig.suptitle(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
