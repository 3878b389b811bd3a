"""Spectral diagnostics for sampled fields: regular-grid interpolation,
averaged periodograms, radial (azimuthal) averages, power-law slope fits,
and Monte Carlo covariance estimates.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass

import numpy as np

from .mesh import Mesh, element_areas
from .numerics import dft_1d, dft_2d, _require_pow2
from .spectral import SamplePath

_locator_cache = weakref.WeakKeyDictionary()


@dataclass(frozen=True, eq=False)
class GridField:
    """Field values resampled onto a regular grid over the mesh bounding box.

    ``mask`` marks grid points inside the domain; outside points are zero.
    Grid points sit at cell centers, values[iy, ix] pairs with (x[ix], y[iy]).
    """

    values: np.ndarray
    mask: np.ndarray
    x: np.ndarray
    y: np.ndarray
    dx: float
    dy: float


@dataclass(frozen=True, eq=False)
class Periodogram2D:
    """Averaged squared-magnitude 2D spectrum with physical frequency axes."""

    power: np.ndarray            # (ny, nx), mean over realizations of |DFT|^2
    freq_x: np.ndarray           # cycles per unit length
    freq_y: np.ndarray
    n_realizations: int
    dx: float
    dy: float


@dataclass(frozen=True)
class PowerLawFit:
    """Least-squares line through (log10 f, log10 S)."""

    slope: float
    intercept: float
    residual: float              # rms of fit residuals
    stderr: float                # standard error of the slope


@dataclass(frozen=True, eq=False)
class CovarianceAtPoint:
    """Monte Carlo covariance of one reference vertex against all vertices."""

    covariance: np.ndarray
    stderr: np.ndarray
    ref_vertex: int
    n_paths: int
    degenerate: bool


def _grid_locator(mesh: Mesh, nx: int, ny: int):
    """Cached assignment of bbox cell-center grid points to triangles.

    Brute-force barycentric scan, run once per (mesh, nx, ny); returns the
    inside mask plus vertex indices and weights for P1 evaluation.
    """
    per_mesh = _locator_cache.setdefault(mesh, {})
    key = (nx, ny)
    if key in per_mesh:
        return per_mesh[key]
    lo = mesh.vertices.min(axis=0)
    hi = mesh.vertices.max(axis=0)
    dx = (hi[0] - lo[0]) / nx
    dy = (hi[1] - lo[1]) / ny
    xs = lo[0] + (np.arange(nx) + 0.5) * dx
    ys = lo[1] + (np.arange(ny) + 0.5) * dy
    X, Y = np.meshgrid(xs, ys, indexing="xy")
    pts = np.column_stack([X.ravel(), Y.ravel()])
    npts = pts.shape[0]
    verts = np.zeros((npts, 3), dtype=np.int64)
    bary = np.zeros((npts, 3))
    inside = np.zeros(npts, dtype=bool)
    areas2 = 2.0 * element_areas(mesh)
    eps = 1e-12
    for t, tri in enumerate(mesh.triangles):
        p = mesh.vertices[tri]
        bb_lo = p.min(axis=0) - eps
        bb_hi = p.max(axis=0) + eps
        cand = np.nonzero(
            ~inside
            & (pts[:, 0] >= bb_lo[0]) & (pts[:, 0] <= bb_hi[0])
            & (pts[:, 1] >= bb_lo[1]) & (pts[:, 1] <= bb_hi[1])
        )[0]
        if cand.size == 0:
            continue
        d0 = pts[cand] - p[0]
        e1 = p[1] - p[0]
        e2 = p[2] - p[0]
        w2 = (e1[0] * d0[:, 1] - e1[1] * d0[:, 0]) / areas2[t]
        w1 = (d0[:, 0] * e2[1] - d0[:, 1] * e2[0]) / areas2[t]
        w0 = 1.0 - w1 - w2
        hit = (w0 >= -eps) & (w1 >= -eps) & (w2 >= -eps)
        sel = cand[hit]
        verts[sel] = tri
        bary[sel] = np.column_stack([w0[hit], w1[hit], w2[hit]])
        inside[sel] = True
    out = (inside, verts, bary, xs, ys, dx, dy)
    per_mesh[key] = out
    return out


def interpolate_to_grid(mesh: Mesh, path, nx: int, ny: int) -> GridField:
    """P1-interpolate nodal values onto an nx-by-ny cell-center grid.

    Grid dimensions must be powers of two so the result feeds the DFT
    directly.  Points outside the domain are zero-filled and flagged in the
    coverage mask.
    """
    _require_pow2(nx)
    _require_pow2(ny)
    if mesh.n_triangles == 0:
        raise ValueError("empty mesh")
    values = path.values if isinstance(path, SamplePath) else np.asarray(path, dtype=float)
    if values.shape != (mesh.n_vertices,):
        raise ValueError("nodal value count does not match the mesh")
    inside, verts, bary, xs, ys, dx, dy = _grid_locator(mesh, nx, ny)
    flat = np.zeros(nx * ny)
    flat[inside] = np.einsum("pk,pk->p", values[verts[inside]], bary[inside])
    return GridField(flat.reshape(ny, nx), inside.reshape(ny, nx), xs, ys, dx, dy)


def cosine_taper(n: int) -> np.ndarray:
    """Hann-style cosine window aligned with cell-centered samples."""
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * (np.arange(n) + 0.5) / n))


def periodogram(grids, dx: float | None = None, dy: float | None = None,
                taper: bool = False) -> Periodogram2D:
    """Mean over realizations of the squared-magnitude 2D DFT.

    ``grids`` is a non-empty list of :class:`GridField` (spacing taken from
    the first) or of plain arrays with explicit ``dx``/``dy``.  No window is
    applied by default; ``taper=True`` multiplies each realization by a
    separable cosine window before transforming.
    """
    if len(grids) == 0:
        raise ValueError("at least one realization grid is required")
    first = grids[0]
    if isinstance(first, GridField):
        dx = first.dx if dx is None else dx
        dy = first.dy if dy is None else dy
        arrays = [g.values for g in grids]
    else:
        arrays = [np.asarray(g, dtype=float) for g in grids]
        dx = 1.0 if dx is None else dx
        dy = 1.0 if dy is None else dy
    shape = arrays[0].shape
    if any(a.shape != shape for a in arrays):
        raise ValueError("realization grids have mismatched dimensions")
    window = None
    if taper:
        window = np.outer(cosine_taper(shape[0]), cosine_taper(shape[1]))
    acc = np.zeros(shape)
    for a in arrays:
        acc += np.abs(dft_2d(a if window is None else a * window)) ** 2
    acc /= len(arrays)
    ny, nx = shape
    return Periodogram2D(acc, np.fft.fftfreq(nx, d=dx), np.fft.fftfreq(ny, d=dy),
                         len(arrays), dx, dy)


def radial_average(p: Periodogram2D, n_bins: int):
    """Azimuthal mean of log10 PSD in equal-width radial frequency bins.

    The DC bin is excluded, bins run up to the smaller axis Nyquist
    frequency (annuli beyond it are incomplete), and empty bins are omitted.
    Returns (bin center frequencies, mean log10 power).
    """
    if n_bins < 4:
        raise ValueError("at least 4 radial bins are required")
    FX, FY = np.meshgrid(p.freq_x, p.freq_y, indexing="xy")
    R = np.hypot(FX, FY)
    f_lim = min(1.0 / (2.0 * p.dx), 1.0 / (2.0 * p.dy))
    edges = np.linspace(0.0, f_lim, n_bins + 1)
    r = R.ravel()
    power = p.power.ravel()
    keep = (r > 0) & (r <= f_lim) & (power > 0)
    idx = np.digitize(r[keep], edges) - 1
    idx = np.clip(idx, 0, n_bins - 1)
    logp = np.log10(power[keep])
    sums = np.bincount(idx, weights=logp, minlength=n_bins)
    counts = np.bincount(idx, minlength=n_bins)
    nonempty = counts > 0
    centers = 0.5 * (edges[:-1] + edges[1:])
    return centers[nonempty], sums[nonempty] / counts[nonempty]


def fit_power_law(freqs, log10_psd, f_min: float) -> PowerLawFit:
    """Least squares of log10 S against log10 f above the low-frequency cutoff."""
    freqs = np.asarray(freqs, dtype=float)
    log10_psd = np.asarray(log10_psd, dtype=float)
    sel = freqs >= f_min
    if sel.sum() < 5:
        raise ValueError(f"need at least 5 points above the cutoff, got {int(sel.sum())}")
    x = np.log10(freqs[sel])
    y = log10_psd[sel]
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    dof = max(x.size - 2, 1)
    s2 = float(resid @ resid) / dof
    stderr = np.sqrt(s2 / float(((x - x.mean()) ** 2).sum()))
    return PowerLawFit(float(slope), float(intercept),
                       float(np.sqrt(np.mean(resid ** 2))), float(stderr))


def periodogram_1d(series, spacing: float = 1.0):
    """Averaged 1D periodogram of one or more equal-length series.

    Returns positive non-DC frequencies (cycles per unit) and the mean
    squared-magnitude spectrum at them.
    """
    series = np.atleast_2d(np.asarray(series, dtype=float))
    n = series.shape[1]
    power = np.abs(dft_1d(series)) ** 2
    mean = power.mean(axis=0)
    freqs = np.arange(1, n // 2) / (n * spacing)
    return freqs, mean[1: n // 2]


def sample_covariance_at(paths, ref_vertex: int) -> CovarianceAtPoint:
    """Unbiased Monte Carlo covariance of X(ref) against every vertex.

    Standard errors follow the Gaussian estimator formula
    sqrt((C_ii C_jj + C_ij^2)/S).  A zero-variance reference (all paths
    identical there) is flagged as degenerate.
    """
    if len(paths) < 100:
        raise ValueError(f"need at least 100 paths, got {len(paths)}")
    arrays = [p.values if isinstance(p, SamplePath) else np.asarray(p, float) for p in paths]
    n = arrays[0].size
    if any(a.size != n for a in arrays):
        raise ValueError("mesh mismatch among paths (unequal vertex counts)")
    X = np.vstack(arrays)
    S = X.shape[0]
    Xc = X - X.mean(axis=0)
    ref = Xc[:, ref_vertex]
    cov = (Xc.T @ ref) / (S - 1)
    var = np.einsum("sj,sj->j", Xc, Xc) / (S - 1)
    var_ref = var[ref_vertex]
    stderr = np.sqrt(np.maximum(var_ref * var + cov ** 2, 0.0) / S)
    # identical paths leave only mean-cancellation roundoff in the variance
    scale = np.abs(X[:, ref_vertex]).max()
    degenerate = bool(var_ref <= (1e-12 * max(scale, 1e-300)) ** 2)
    if degenerate:
        cov = np.zeros_like(cov)
    return CovarianceAtPoint(cov, stderr, int(ref_vertex), S, degenerate)
