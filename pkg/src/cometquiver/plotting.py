"""Figures for CLI reports: closed polygons and singular-value spectra.

Uses the non-interactive Agg backend; every function writes a file and
returns its path.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .geometry import hermitian_coordinates  # noqa: E402


def _chain(vectors: np.ndarray) -> np.ndarray:
    return np.vstack([np.zeros(vectors.shape[1]), np.cumsum(vectors, axis=0)])


def _project(vectors: np.ndarray, dim: int) -> np.ndarray:
    """Principal-axis projection to ``dim`` coordinates (identity if already small)."""
    if vectors.shape[1] <= dim:
        pad = np.zeros((vectors.shape[0], dim - vectors.shape[1]))
        return np.hstack([vectors, pad])
    _, _, vh = np.linalg.svd(vectors, full_matrices=False)
    return vectors @ vh[:dim].T


def plot_polygon(vectors, path, title: str = "", n_arms: int | None = None) -> Path:
    """Draw a closed chain of side vectors, in 3D for su(2) and projected otherwise."""
    vectors = np.asarray(vectors, dtype=float)
    n_arms = len(vectors) if n_arms is None else n_arms
    pts = _chain(_project(vectors, 3))
    fig = plt.figure(figsize=(5, 5))
    ax = fig.add_subplot(projection="3d")
    for s in range(len(vectors)):
        colour = "C0" if s < n_arms else "C3"
        ax.plot(*pts[s : s + 2].T, color=colour, lw=2)
    ax.scatter(*pts.T, color="k", s=10)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_bundle_polygon(figure, path) -> Path:
    return plot_polygon(figure.vectors(), path, "bundle polygon", len(figure.arm_sides))


def plot_higgs_polygon(sides, path, n_arms: int) -> Path:
    """Real and imaginary Hermitian parts of the sl(r, C) sides, side by side."""
    re = np.array([hermitian_coordinates((s + s.conj().T) / 2) for s in sides])
    im = np.array([hermitian_coordinates((s - s.conj().T) / 2j) for s in sides])
    fig, axes = plt.subplots(1, 2, figsize=(9, 4.5))
    for ax, part, label in zip(axes, (re, im), ("Hermitian part", "anti-Hermitian part / i")):
        pts = _chain(_project(part, 2))
        for s in range(len(sides)):
            ax.plot(*pts[s : s + 2].T, color="C0" if s < n_arms else "C3", lw=2)
        ax.scatter(*pts.T, color="k", s=10)
        ax.set_aspect("equal", adjustable="datalim")
        ax.set_title(label)
    fig.suptitle("Higgs polygon")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_spectrum(singular_values, path, rank: int | None = None, title: str = "singular values") -> Path:
    s = np.asarray(singular_values, dtype=float)
    floor = np.finfo(float).tiny
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(np.arange(1, len(s) + 1), np.maximum(s, floor), "o-", ms=3)
    if rank is not None and 0 < rank <= len(s):
        ax.axvline(rank + 0.5, color="C3", ls="--", label=f"rank {rank}")
        ax.legend()
    ax.set_xlabel("index")
    ax.set_ylabel("singular value")
    ax.set_title(title)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
