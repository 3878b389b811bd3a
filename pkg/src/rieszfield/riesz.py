"""Power-law fields as discretized Riesz-potential convolutions of white noise.

The kernel distance is the in-domain geodesic (shortest path through the
mesh edge graph, centroids included), so non-convex domains decorrelate
across obstructions.  No boundary conditions apply here; in exchange the
Hurst parameter may vary over the domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import dijkstra

from .errors import RieszError
from .mesh import Mesh, edge_graph, element_areas
from .numerics import gamma_fn
from .spectral import SamplePath

WEIGHT_MODES = ("sqrt-area", "area")


@dataclass(frozen=True, eq=False)
class GeodesicTable:
    """Geodesic distances from every mesh vertex to every triangle centroid."""

    distances: np.ndarray        # (n_vertices, n_triangles)

    @property
    def shape(self):
        return self.distances.shape


def floyd_warshall(weights) -> np.ndarray:
    """All-pairs shortest paths of a dense symmetric weight matrix.

    Missing edges are ``inf``; the diagonal is forced to zero.  The k-loop
    is vectorized over numpy, cubic in the node count.
    """
    d = np.array(weights, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValueError("weight matrix must be square")
    np.fill_diagonal(d, 0.0)
    n = d.shape[0]
    for k in range(n):
        np.minimum(d, d[:, k, None] + d[None, k, :], out=d)
    return d


def geodesic_table(mesh: Mesh) -> GeodesicTable:
    """Vertex-to-centroid geodesic distances through the edge graph.

    Centroids enter the graph as extra nodes connected to their triangle's
    vertices; shortest paths are computed with the Floyd-Warshall recursion
    over the full graph and restricted to (vertex, centroid) pairs.
    """
    graph = edge_graph(mesh, include_centroids=True)
    n = graph.n_nodes
    dense = np.full((n, n), np.inf)
    adj = graph.adjacency.tocoo()
    dense[adj.row, adj.col] = adj.data
    dist = floyd_warshall(dense)
    table = dist[: graph.n_vertices, graph.n_vertices:]
    if not np.all(np.isfinite(table)):
        raise RieszError("mesh edge graph is disconnected")
    return GeodesicTable(table)


def dijkstra_table(mesh: Mesh) -> np.ndarray:
    """Independent oracle for :func:`geodesic_table` (per-source Dijkstra)."""
    graph = edge_graph(mesh, include_centroids=True)
    dist = dijkstra(graph.adjacency, directed=False)
    return dist[: graph.n_vertices, graph.n_vertices:]


def riesz_constant(hurst: float, dim: int) -> float:
    """Normalization of the Riesz potential at order s = H + d/2.

    Defined for 0 < s < d; beyond that the gamma factor in the numerator
    hits a pole and the kernel is not integrable.
    """
    s = hurst + dim / 2.0
    if not 0.0 < s < dim:
        raise ValueError(
            f"Riesz order s = H + d/2 = {s} must lie in (0, {dim}); "
            f"H={hurst} is too large for d={dim}"
        )
    return gamma_fn((dim - s) / 2.0) / (math.pi ** (dim / 2.0) * 2.0 ** s * gamma_fn(s / 2.0))


def _hurst_per_vertex(mesh: Mesh, hurst) -> np.ndarray:
    values = np.asarray(hurst, dtype=float)
    if values.ndim == 0:
        values = np.full(mesh.n_vertices, float(values))
    if values.shape != (mesh.n_vertices,):
        raise ValueError(f"Hurst field must be scalar or length {mesh.n_vertices}")
    if np.any(values <= 0.0) or np.any(values >= 1.0):
        raise ValueError("Hurst values must lie in (0,1)")
    return values


def _element_weights(mesh: Mesh, weight_mode: str) -> np.ndarray:
    if weight_mode not in WEIGHT_MODES:
        raise ValueError(f"weight_mode must be one of {WEIGHT_MODES}, got {weight_mode!r}")
    areas = element_areas(mesh)
    return np.sqrt(areas) if weight_mode == "sqrt-area" else areas


def kernel_matrix(mesh: Mesh, table: GeodesicTable, hurst, dim: int = 2) -> np.ndarray:
    """Row-scaled kernel K[i, m] = c(H_i) d(x_i, y_m)^{H_i - d/2}.

    With spatially varying H the exponent and constant follow the evaluation
    vertex, so the matrix is not symmetric in its two sites; that asymmetry
    is inherent to the construction.
    """
    h = _hurst_per_vertex(mesh, hurst)
    const = np.array([riesz_constant(v, dim) for v in h])
    expo = h - dim / 2.0
    return const[:, None] * table.distances ** expo[:, None]


def sample_riesz(mesh: Mesh, table: GeodesicTable, hurst, stream,
                 weight_mode: str = "sqrt-area") -> SamplePath:
    """One realization of the geodesic Riesz-kernel field at the vertices.

    One normal draw per element, shared by all evaluation vertices.  The
    default "sqrt-area" weights make the element noise match the white-noise
    measure W(element) ~ N(0, area); "area" reproduces the literal
    area-times-normal discretization instead.
    """
    K = kernel_matrix(mesh, table, hurst)
    w = _element_weights(mesh, weight_mode)
    z = stream.normal(mesh.n_triangles)
    values = K @ (w * z)
    return SamplePath(values, f"riesz({weight_mode})", getattr(stream, "seed", None), None)


def covariance_riesz(mesh: Mesh, table: GeodesicTable, hurst,
                     weight_mode: str = "sqrt-area") -> np.ndarray:
    """Exact covariance K diag(w^2) K^T of the discretized kernel field.

    Positive semi-definite by construction, and entrywise positive because
    every kernel entry is positive.
    """
    K = kernel_matrix(mesh, table, hurst)
    w2 = _element_weights(mesh, weight_mode) ** 2
    C = (K * w2[None, :]) @ K.T
    return 0.5 * (C + C.T)
