"""P1 finite element assembly of the Laplacian pencil (L, M) with
Dirichlet/Neumann/Robin boundary conditions, on 2D triangulations and on
1D interval meshes.

Dirichlet conditions are handled by elimination so the pencil restricted to
free nodes keeps the exact constrained spectrum.  Mass is consistent (no
lumping); the covariance identities downstream rely on that.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import numerics
from .mesh import Mesh, element_areas

_LOCAL_MASS = (np.ones((3, 3)) + np.eye(3)) / 12.0
_LOCAL_MASS_1D = np.array([[2.0, 1.0], [1.0, 2.0]]) / 6.0
_EDGE_MASS = np.array([[2.0, 1.0], [1.0, 2.0]]) / 6.0


@dataclass(frozen=True)
class BoundaryCondition:
    """Homogeneous boundary condition tag; Robin carries its coefficient."""

    kind: str            # "dirichlet" | "neumann" | "robin"
    gamma: float = 0.0

    def __post_init__(self):
        if self.kind not in ("dirichlet", "neumann", "robin"):
            raise ValueError(f"unknown boundary condition kind {self.kind!r}")
        if self.kind == "robin" and not (np.isfinite(self.gamma) and self.gamma >= 0):
            raise ValueError(f"Robin coefficient must be finite and >= 0, got {self.gamma}")


DIRICHLET = BoundaryCondition("dirichlet")
NEUMANN = BoundaryCondition("neumann")


def robin(gamma: float) -> BoundaryCondition:
    return BoundaryCondition("robin", float(gamma))


@dataclass(frozen=True, eq=False)
class FemSystem:
    """Assembled pencil restricted to free (non-Dirichlet) nodes.

    M is symmetric positive definite and L symmetric positive semi-definite;
    with any Dirichlet or Robin marker present L is strictly definite.
    ``points`` holds all nodal coordinates (including Dirichlet nodes).
    The instance is immutable; ``cache`` holds derived objects (eigenpairs,
    contour factorizations) keyed by the operations that build them.
    """

    M: sp.csr_matrix
    L: sp.csr_matrix
    free_nodes: np.ndarray
    dirichlet_nodes: np.ndarray
    points: np.ndarray
    dim: int
    mesh: Mesh | None = None
    bc: dict | None = None
    cache: dict = field(default_factory=dict, repr=False)

    @property
    def n_nodes(self):
        return self.points.shape[0]

    @property
    def n_free(self):
        return self.free_nodes.size

    @property
    def pure_neumann(self):
        # bc=None means a synthetic pencil, assumed definite
        if self.bc is None:
            return False
        return all(c.kind == "neumann" for c in self.bc.values())

    def expand(self, free_values):
        """Embed free-node values into the full nodal vector (Dirichlet rows 0)."""
        free_values = np.asarray(free_values)
        full = np.zeros(free_values.shape[:-1] + (self.n_nodes,), dtype=free_values.dtype)
        full[..., self.free_nodes] = free_values
        return full


def assemble(mesh: Mesh, bc: dict) -> FemSystem:
    """Assemble mass and stiffness on a triangulation with per-marker conditions.

    ``bc`` maps every boundary marker of the mesh to a
    :class:`BoundaryCondition`.  Exact P1 integration: local mass is
    (area/12)[[2,1,1],[1,2,1],[1,1,2]], stiffness comes from the constant
    barycentric gradients, and Robin edges add (gamma*len/6)[[2,1],[1,2]].
    """
    missing = [m for m in mesh.markers() if m not in bc]
    if missing:
        raise ValueError(f"unmapped boundary marker(s) {missing}")
    for m, cond in bc.items():
        if not isinstance(cond, BoundaryCondition):
            raise TypeError(f"marker {m}: expected BoundaryCondition, got {type(cond)!r}")

    nv = mesh.n_vertices
    tris = mesh.triangles
    p = mesh.vertices[tris]                       # (nt, 3, 2)
    areas = element_areas(mesh)
    # constant gradients of the barycentric basis
    g = np.empty((mesh.n_triangles, 3, 2))
    g[:, 0, 0] = p[:, 1, 1] - p[:, 2, 1]
    g[:, 0, 1] = p[:, 2, 0] - p[:, 1, 0]
    g[:, 1, 0] = p[:, 2, 1] - p[:, 0, 1]
    g[:, 1, 1] = p[:, 0, 0] - p[:, 2, 0]
    g[:, 2, 0] = p[:, 0, 1] - p[:, 1, 1]
    g[:, 2, 1] = p[:, 1, 0] - p[:, 0, 0]
    g /= (2.0 * areas)[:, None, None]
    l_loc = areas[:, None, None] * np.einsum("tid,tjd->tij", g, g)
    m_loc = areas[:, None, None] * _LOCAL_MASS
    rows = np.broadcast_to(tris[:, :, None], l_loc.shape).ravel()
    cols = np.broadcast_to(tris[:, None, :], l_loc.shape).ravel()
    L = sp.coo_matrix((l_loc.ravel(), (rows, cols)), shape=(nv, nv)).tocsr()
    M = sp.coo_matrix((m_loc.ravel(), (rows, cols)), shape=(nv, nv)).tocsr()

    # boundary terms and Dirichlet node collection
    dirichlet = np.zeros(nv, dtype=bool)
    rb_rows, rb_cols, rb_vals = [], [], []
    for (a, b), marker in zip(mesh.boundary_edges, mesh.boundary_markers):
        cond = bc[int(marker)]
        if cond.kind == "dirichlet":
            dirichlet[a] = dirichlet[b] = True
        elif cond.kind == "robin" and cond.gamma > 0:
            length = float(np.linalg.norm(mesh.vertices[a] - mesh.vertices[b]))
            block = cond.gamma * length * _EDGE_MASS
            for i, vi in enumerate((a, b)):
                for j, vj in enumerate((a, b)):
                    rb_rows.append(vi)
                    rb_cols.append(vj)
                    rb_vals.append(block[i, j])
    if rb_vals:
        L = (L + sp.coo_matrix((rb_vals, (rb_rows, rb_cols)), shape=(nv, nv))).tocsr()

    free = np.nonzero(~dirichlet)[0]
    fixed = np.nonzero(dirichlet)[0]
    return FemSystem(
        M=M[np.ix_(free, free)].tocsr(),
        L=L[np.ix_(free, free)].tocsr(),
        free_nodes=free,
        dirichlet_nodes=fixed,
        points=mesh.vertices,
        dim=2,
        mesh=mesh,
        bc=dict(bc),
    )


def assemble_interval(n_cells: int, length: float = 1.0,
                      bc_left=DIRICHLET, bc_right=DIRICHLET) -> FemSystem:
    """1D P1 assembly on ``[0, length]`` with uniform cells.

    Element mass is (h/6)[[2,1],[1,2]] and stiffness (1/h)[[1,-1],[-1,1]].
    Robin at an endpoint adds gamma to the corresponding diagonal entry.
    """
    if n_cells < 1:
        raise ValueError("n_cells must be >= 1")
    if length <= 0:
        raise ValueError("length must be positive")
    n = n_cells + 1
    h = length / n_cells
    main_m = np.full(n, 4.0 * h / 6.0)
    main_m[0] = main_m[-1] = 2.0 * h / 6.0
    off_m = np.full(n - 1, h / 6.0)
    M = sp.diags([off_m, main_m, off_m], [-1, 0, 1]).tocsr()
    main_l = np.full(n, 2.0 / h)
    main_l[0] = main_l[-1] = 1.0 / h
    off_l = np.full(n - 1, -1.0 / h)
    L = sp.diags([off_l, main_l, off_l], [-1, 0, 1]).tolil()

    dirichlet = np.zeros(n, dtype=bool)
    for idx, cond in ((0, bc_left), (n - 1, bc_right)):
        if cond.kind == "dirichlet":
            dirichlet[idx] = True
        elif cond.kind == "robin":
            L[idx, idx] += cond.gamma
    L = L.tocsr()
    free = np.nonzero(~dirichlet)[0]
    fixed = np.nonzero(dirichlet)[0]
    points = np.linspace(0.0, length, n).reshape(-1, 1)
    return FemSystem(
        M=M[np.ix_(free, free)].tocsr(),
        L=L[np.ix_(free, free)].tocsr(),
        free_nodes=free,
        dirichlet_nodes=fixed,
        points=points,
        dim=1,
        mesh=None,
        bc={1: bc_left, 2: bc_right},
    )


def laplace_eigenpairs(system: FemSystem, k="all") -> numerics.EigenDecomposition:
    """Eigenpairs of the free-node pencil, ascending and M-orthonormal."""
    if k != "all" and int(k) > system.n_free:
        raise ValueError(f"requested {k} modes but only {system.n_free} free nodes")
    key = ("eig", "all" if k == "all" else int(k))
    if key not in system.cache:
        system.cache[key] = numerics.generalized_eigen(system.L, system.M, k)
    return system.cache[key]


def locate(mesh: Mesh, point) -> tuple:
    """Brute-force point location: (triangle index, barycentric weights)."""
    point = np.asarray(point, dtype=float)
    p = mesh.vertices[mesh.triangles]
    areas2 = 2.0 * element_areas(mesh)
    # barycentric coordinates via sub-triangle cross products
    d0 = point - p[:, 0]
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    w2 = (e1[:, 0] * d0[:, 1] - e1[:, 1] * d0[:, 0]) / areas2
    w1 = (d0[:, 0] * e2[:, 1] - d0[:, 1] * e2[:, 0]) / areas2
    w0 = 1.0 - w1 - w2
    eps = 1e-12
    inside = (w0 >= -eps) & (w1 >= -eps) & (w2 >= -eps)
    hits = np.nonzero(inside)[0]
    if hits.size == 0:
        raise ValueError(f"point {point.tolist()} lies outside the mesh")
    t = int(hits[0])
    return t, np.array([w0[t], w1[t], w2[t]])


def evaluate(system: FemSystem, coefficients, points) -> np.ndarray:
    """P1 interpolation of a free-node coefficient vector at arbitrary points.

    Dirichlet nodes contribute zero.  Raises ValueError for points outside
    every triangle (2D) or outside the interval (1D).
    """
    full = system.expand(np.asarray(coefficients, dtype=float))
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if system.dim == 1:
        xs = system.points[:, 0]
        q = points.ravel() if points.shape[1] == 1 else points[:, 0]
        if np.any(q < xs[0] - 1e-12) or np.any(q > xs[-1] + 1e-12):
            raise ValueError("point outside the interval")
        return np.interp(q, xs, full)
    out = np.empty(points.shape[0])
    for i, pt in enumerate(points):
        t, w = locate(system.mesh, pt)
        out[i] = w @ full[system.mesh.triangles[t]]
    return out
