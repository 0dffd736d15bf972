"""Rendered report figures; every figure has a CSV/dat twin with the numbers.

Uses the Agg backend so rendering works headless. Reconstructions are shown
with the DC pixel blanked, otherwise the undiffracted spike swamps the
colormap and the first-order image becomes invisible.
"""

from __future__ import annotations

import io

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .field import RealImage
from .imageio import atomic_write_bytes

FIGURE_DPI = 130


def _save(fig, path) -> None:
    buf = io.BytesIO()
    fig.savefig(buf, format="png", dpi=FIGURE_DPI, bbox_inches="tight")
    plt.close(fig)
    atomic_write_bytes(path, buf.getvalue())


def save_convergence_figure(
    curves: dict[str, np.ndarray], path, ylabel: str = "first-order std / mean"
) -> None:
    """Plot one metric-vs-iteration curve per label and write a PNG."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for label, values in curves.items():
        iterations = np.arange(1, len(values) + 1)
        ax.plot(iterations, values, marker="o", markersize=3, label=label)
    ax.set_xlabel("iteration")
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.4)
    ax.legend()
    _save(fig, path)


def _display_intensity(img: RealImage, blank_dc: bool) -> np.ndarray:
    shown = np.array(img.data, copy=True)
    if blank_dc:
        shown[0, 0] = 0.0
    return shown


def save_comparison_row(
    target: RealImage,
    gs_recon: RealImage,
    bgs_recon: RealImage,
    path,
    title: str | None = None,
) -> None:
    """Three-panel row: target, GS reconstruction, BGS reconstruction."""
    fig, axes = plt.subplots(1, 3, figsize=(9.6, 3.4))
    panels = [
        ("target", _display_intensity(target, blank_dc=False)),
        ("GS", _display_intensity(gs_recon, blank_dc=True)),
        ("BGS", _display_intensity(bgs_recon, blank_dc=True)),
    ]
    for ax, (label, data) in zip(axes, panels):
        ax.imshow(data, cmap="gray", interpolation="nearest")
        ax.set_title(label)
        ax.set_xticks([])
        ax.set_yticks([])
    if title:
        fig.suptitle(title)
    _save(fig, path)
