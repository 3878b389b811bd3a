"""Triangulated bounded domains: loading, generation, and geometric queries.

A :class:`Mesh` is immutable after construction and safe for shared reads.
The text format is a three-section grammar (vertices / triangles / boundary),
see :func:`load_mesh`.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import MeshFormatError, MeshInvariantError


@dataclass(frozen=True, eq=False)
class Mesh:
    """Triangulation of a bounded planar domain.

    vertices        (nv, 2) float coordinates
    triangles       (nt, 3) vertex indices, counter-clockwise
    boundary_edges  (nb, 2) vertex indices
    boundary_markers(nb,)   non-negative integer marker per boundary edge
    warnings        ingestion notes (e.g. reoriented triangles)
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    boundary_markers: np.ndarray
    warnings: tuple = ()

    def __post_init__(self):
        for arr in (self.vertices, self.triangles, self.boundary_edges, self.boundary_markers):
            arr.flags.writeable = False

    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    @property
    def n_triangles(self):
        return self.triangles.shape[0]

    def markers(self):
        """Sorted set of boundary markers present in the mesh."""
        return sorted(int(m) for m in np.unique(self.boundary_markers))


@dataclass(frozen=True, eq=False)
class EdgeGraph:
    """Weighted undirected graph over mesh vertices (plus optional centroids)."""

    coords: np.ndarray          # (n_nodes, 2)
    adjacency: sp.csr_matrix    # symmetric, weights are Euclidean lengths
    n_vertices: int
    n_centroids: int

    @property
    def n_nodes(self):
        return self.coords.shape[0]

    @property
    def n_edges(self):
        return self.adjacency.nnz // 2


def _signed_areas(vertices, triangles):
    p = vertices[triangles]
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])


def _build(vertices, triangles, boundary_edges, markers, warnings, where):
    vertices = np.ascontiguousarray(vertices, dtype=float)
    triangles = np.ascontiguousarray(triangles, dtype=np.int64)
    boundary_edges = np.ascontiguousarray(boundary_edges, dtype=np.int64).reshape(-1, 2)
    markers = np.ascontiguousarray(markers, dtype=np.int64)
    warnings = list(warnings)
    nv = len(vertices)

    if triangles.size and (triangles.min() < 0 or triangles.max() >= nv):
        tri = int(np.nonzero(((triangles < 0) | (triangles >= nv)).any(axis=1))[0][0])
        raise MeshInvariantError(f"{where}: dangling index in triangle {tri}")
    if boundary_edges.size and (boundary_edges.min() < 0 or boundary_edges.max() >= nv):
        edge = int(np.nonzero(((boundary_edges < 0) | (boundary_edges >= nv)).any(axis=1))[0][0])
        raise MeshInvariantError(f"{where}: dangling index in boundary edge {edge}")
    if np.any(markers < 0):
        raise MeshInvariantError(f"{where}: negative boundary marker")

    # orientation: auto-fix clockwise triangles, reject degenerate ones
    areas = _signed_areas(vertices, triangles)
    scale = max(float(np.abs(vertices).max()) if nv else 1.0, 1.0)
    tiny = 1e-14 * scale * scale
    flipped = np.nonzero(areas < -tiny)[0]
    if flipped.size:
        triangles = triangles.copy()
        triangles[flipped] = triangles[flipped][:, ::-1]
        areas = np.abs(areas)
        warnings.append(f"reoriented {flipped.size} clockwise triangle(s): {flipped.tolist()}")
    degenerate = np.nonzero(np.abs(areas) <= tiny)[0]
    if degenerate.size:
        raise MeshInvariantError(f"{where}: degenerate (zero area) triangle {int(degenerate[0])}")

    # manifold check through the edge-use map
    edge_use = {}
    for t, tri in enumerate(triangles):
        for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            key = (min(a, b), max(a, b))
            edge_use[key] = edge_use.get(key, 0) + 1
            if edge_use[key] > 2:
                raise MeshInvariantError(f"{where}: non-manifold edge {key} (triangle {t})")
    rim = {e for e, c in edge_use.items() if c == 1}
    declared = set()
    for e, (a, b) in enumerate(boundary_edges):
        key = (min(a, b), max(a, b))
        if key not in edge_use:
            raise MeshInvariantError(f"{where}: boundary edge {e} {key} is not a triangle edge")
        if edge_use[key] == 2:
            raise MeshInvariantError(f"{where}: boundary edge {e} {key} belongs to two triangles")
        if key in declared:
            raise MeshInvariantError(f"{where}: boundary edge {e} {key} declared twice")
        declared.add(key)
    missing = rim - declared
    if missing:
        raise MeshInvariantError(f"{where}: undeclared boundary edge {sorted(missing)[0]}")

    # connectivity of the triangle union
    if nv:
        rows = triangles[:, [0, 1, 2]].ravel()
        cols = triangles[:, [1, 2, 0]].ravel()
        adj = sp.coo_matrix((np.ones(rows.size), (rows, cols)), shape=(nv, nv))
        n_comp, _ = connected_components(adj, directed=False)
        if n_comp > 1:
            raise MeshInvariantError(f"{where}: mesh is disconnected ({n_comp} components)")

    return Mesh(vertices, triangles, boundary_edges, markers, tuple(warnings))


def load_mesh(text: str) -> Mesh:
    """Parse the plain-text mesh format.

    Grammar (UTF-8, '#' starts a comment line)::

        vertices <n>
        <x> <y>            n lines
        triangles <m>
        <i> <j> <k>        m lines, 0-based
        boundary <b>
        <i> <j> <marker>   b lines, 0-based, non-negative marker

    Clockwise triangles are reoriented with a warning; structural problems
    raise :class:`MeshInvariantError` naming the offending entity.
    """
    lines = text.splitlines()
    pos = 0

    def next_data_line():
        nonlocal pos
        while pos < len(lines):
            raw = lines[pos]
            pos += 1
            stripped = raw.strip()
            if stripped and not stripped.startswith("#"):
                return pos, stripped
        return None, None

    def expect_section(name):
        lineno, content = next_data_line()
        if content is None:
            raise MeshFormatError(f"line {len(lines)}: unexpected end of file, expected '{name}'")
        parts = content.split()
        if len(parts) != 2 or parts[0] != name:
            raise MeshFormatError(f"line {lineno}: expected '{name} <count>', got {content!r}")
        try:
            count = int(parts[1])
        except ValueError:
            raise MeshFormatError(f"line {lineno}: bad count in '{name}' header") from None
        if count < 0:
            raise MeshFormatError(f"line {lineno}: negative count in '{name}' header")
        return count

    def read_rows(count, n_fields, kind, caster):
        rows = []
        for _ in range(count):
            lineno, content = next_data_line()
            if content is None:
                raise MeshFormatError(f"line {len(lines)}: unexpected end of file in {kind} block")
            parts = content.split()
            if len(parts) != n_fields:
                raise MeshFormatError(
                    f"line {lineno}: expected {n_fields} fields in {kind} entry, got {len(parts)}"
                )
            try:
                rows.append([caster(p) for p in parts])
            except ValueError:
                raise MeshFormatError(f"line {lineno}: bad {kind} entry {content!r}") from None
        return rows

    nv = expect_section("vertices")
    verts = read_rows(nv, 2, "vertex", float)
    nt = expect_section("triangles")
    tris = read_rows(nt, 3, "triangle", int)
    nb = expect_section("boundary")
    bnd = read_rows(nb, 3, "boundary", int)
    lineno, extra = next_data_line()
    if extra is not None:
        raise MeshFormatError(f"line {lineno}: trailing content {extra!r}")

    bnd = np.asarray(bnd, dtype=np.int64).reshape(-1, 3)
    return _build(
        np.asarray(verts, dtype=float).reshape(-1, 2),
        np.asarray(tris, dtype=np.int64).reshape(-1, 3),
        bnd[:, :2],
        bnd[:, 2],
        [],
        "load_mesh",
    )


def dump_mesh(mesh: Mesh) -> str:
    """Serialize a mesh back into the text format (17 significant digits)."""
    out = [f"vertices {mesh.n_vertices}"]
    out += [f"{x:.17g} {y:.17g}" for x, y in mesh.vertices]
    out.append(f"triangles {mesh.n_triangles}")
    out += [f"{i} {j} {k}" for i, j, k in mesh.triangles]
    out.append(f"boundary {len(mesh.boundary_edges)}")
    out += [
        f"{a} {b} {m}"
        for (a, b), m in zip(mesh.boundary_edges, mesh.boundary_markers)
    ]
    return "\n".join(out) + "\n"


def from_arrays(vertices, triangles, boundary_edges, boundary_markers) -> Mesh:
    """Construct and validate a mesh from raw arrays."""
    return _build(vertices, triangles, boundary_edges, boundary_markers, [], "from_arrays")


def generate_rectangle(nx, ny, width, height, markers=(1, 2, 3, 4)) -> Mesh:
    """Structured triangulation of ``[0,width] x [0,height]``.

    Each of the nx-by-ny cells is split along its southwest-northeast
    diagonal.  ``markers`` assigns boundary markers per side in the order
    (bottom, right, top, left).
    """
    if nx < 1 or ny < 1:
        raise ValueError("nx and ny must be >= 1")
    if width <= 0 or height <= 0:
        raise ValueError("width and height must be positive")
    xs = np.linspace(0.0, width, nx + 1)
    ys = np.linspace(0.0, height, ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing="xy")
    verts = np.column_stack([X.ravel(), Y.ravel()])

    def vid(i, j):
        return j * (nx + 1) + i

    tris = np.empty((2 * nx * ny, 3), dtype=np.int64)
    t = 0
    for j in range(ny):
        for i in range(nx):
            a, b = vid(i, j), vid(i + 1, j)
            c, d = vid(i + 1, j + 1), vid(i, j + 1)
            tris[t] = (a, b, c)
            tris[t + 1] = (a, c, d)
            t += 2
    bottom, right, top, left = markers
    edges, marks = [], []
    for i in range(nx):
        edges.append((vid(i, 0), vid(i + 1, 0)))
        marks.append(bottom)
        edges.append((vid(i, ny), vid(i + 1, ny)))
        marks.append(top)
    for j in range(ny):
        edges.append((vid(nx, j), vid(nx, j + 1)))
        marks.append(right)
        edges.append((vid(0, j), vid(0, j + 1)))
        marks.append(left)
    return _build(verts, tris, np.asarray(edges), np.asarray(marks), [], "generate_rectangle")


def scaled(mesh: Mesh, factor: float) -> Mesh:
    """Copy of the mesh with all coordinates scaled by ``factor`` (same connectivity)."""
    if factor <= 0:
        raise ValueError("scale factor must be positive")
    return Mesh(
        np.array(mesh.vertices * factor),
        np.array(mesh.triangles),
        np.array(mesh.boundary_edges),
        np.array(mesh.boundary_markers),
        mesh.warnings,
    )


def element_areas(mesh: Mesh) -> np.ndarray:
    """All triangle areas (positive by the orientation invariant)."""
    return _signed_areas(mesh.vertices, mesh.triangles)


def element_area(mesh: Mesh, i: int) -> float:
    """Area of triangle ``i``: half the cross product of two edge vectors."""
    if not 0 <= i < mesh.n_triangles:
        raise IndexError(f"triangle index {i} out of range [0,{mesh.n_triangles})")
    return float(element_areas(mesh)[i])


def centroids(mesh: Mesh) -> np.ndarray:
    """All triangle centroids, shape (nt, 2)."""
    return mesh.vertices[mesh.triangles].mean(axis=1)


def centroid(mesh: Mesh, i: int) -> np.ndarray:
    """Arithmetic mean of triangle ``i``'s three vertices."""
    if not 0 <= i < mesh.n_triangles:
        raise IndexError(f"triangle index {i} out of range [0,{mesh.n_triangles})")
    return mesh.vertices[mesh.triangles[i]].mean(axis=0)


def edge_graph(mesh: Mesh, include_centroids=False) -> EdgeGraph:
    """Weighted graph of mesh edges, optionally with one node per centroid.

    Centroid nodes attach to their triangle's three vertices.  Weights are
    Euclidean lengths, the adjacency is symmetric.
    """
    nv = mesh.n_vertices
    pairs = set()
    for tri in mesh.triangles:
        for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            pairs.add((min(a, b), max(a, b)))
    pairs = np.asarray(sorted(pairs), dtype=np.int64)
    coords = mesh.vertices
    rows, cols = pairs[:, 0], pairs[:, 1]
    n_cent = 0
    if include_centroids:
        cent = centroids(mesh)
        coords = np.vstack([coords, cent])
        n_cent = mesh.n_triangles
        cent_ids = nv + np.arange(n_cent)
        rows = np.concatenate([rows, np.repeat(cent_ids, 3)])
        cols = np.concatenate([cols, mesh.triangles.ravel()])
    weights = np.linalg.norm(coords[rows] - coords[cols], axis=1)
    n = coords.shape[0]
    adj = sp.coo_matrix(
        (np.concatenate([weights, weights]),
         (np.concatenate([rows, cols]), np.concatenate([cols, rows]))),
        shape=(n, n),
    ).tocsr()
    return EdgeGraph(coords, adj, nv, n_cent)


def mesh_hash(mesh: Mesh) -> str:
    """SHA-256 of the canonical serialization, for run manifests."""
    return hashlib.sha256(dump_mesh(mesh).encode()).hexdigest()
