"""Figure rendering for the CLI report paths.

Every figure is written straight to file (Agg backend, no display); the CLI
places PNGs next to the CSV outputs unless plotting is disabled.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import matplotlib.tri as mtri
import numpy as np

_FIGSIZE = (5.4, 4.2)


def save_field(mesh, values, path, title=None):
    """Nodal field over a triangulation as a flat-shaded color plot."""
    tri = mtri.Triangulation(mesh.vertices[:, 0], mesh.vertices[:, 1], mesh.triangles)
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    im = ax.tripcolor(tri, values, shading="gouraud")
    fig.colorbar(im, ax=ax)
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_profile(x, values, path, title=None, ylabel="value"):
    """1D nodal profile (interval meshes)."""
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.plot(x, values, lw=1.0)
    ax.set_xlabel("x")
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_matrix(C, path, title=None):
    """Dense covariance matrix as an image."""
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    im = ax.imshow(C, origin="lower", interpolation="nearest")
    fig.colorbar(im, ax=ax)
    ax.set_xlabel("node")
    ax.set_ylabel("node")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_psd(periodogram, path, title=None):
    """Log power spectral density over the two frequency axes (DC centered)."""
    p = np.fft.fftshift(periodogram.power)
    fx = np.fft.fftshift(periodogram.freq_x)
    fy = np.fft.fftshift(periodogram.freq_y)
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    with np.errstate(divide="ignore"):
        img = np.log10(np.maximum(p, np.finfo(float).tiny))
    im = ax.imshow(img, origin="lower", extent=(fx[0], fx[-1], fy[0], fy[-1]))
    fig.colorbar(im, ax=ax, label="log10 PSD")
    ax.set_xlabel("frequency x")
    ax.set_ylabel("frequency y")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_radial_fit(freqs, log_psd, fit, f_min, path, title=None):
    """Radial PSD curve with the fitted power-law line above the cutoff."""
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.plot(np.log10(freqs), log_psd, "o-", ms=3, label="radial average")
    sel = freqs >= f_min
    if fit is not None and sel.any():
        x = np.log10(freqs[sel])
        ax.plot(x, fit.slope * x + fit.intercept, "r--",
                label=f"slope {fit.slope:.2f} +/- {fit.stderr:.2f}")
    ax.set_xlabel("log10 radial frequency")
    ax.set_ylabel("mean log10 PSD")
    ax.legend()
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_convergence(rows, path, title=None):
    """Relative error against quadrature size, one line per refinement level."""
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    by_level = {}
    for level, nodes, _, n, err in rows:
        by_level.setdefault((level, nodes), []).append((n, err))
    for (level, nodes), pts in sorted(by_level.items()):
        pts.sort()
        ns = [p[0] for p in pts]
        errs = [max(p[1], 1e-17) for p in pts]
        ax.semilogy(ns, errs, "o-", label=f"level {level} ({nodes} nodes)")
    ax.set_xlabel("quadrature nodes N")
    ax.set_ylabel("relative Linf error")
    ax.legend()
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
