import numpy as np
import pytest
import scipy.sparse as sp

import rieszfield as rf


class ProbeStream:
    """Deterministic stand-in for GaussianStream feeding fixed values."""

    def __init__(self, values):
        self._values = np.asarray(values, dtype=float).ravel()
        self._pos = 0
        self.seed = None

    def normal(self, shape=None):
        if shape is None:
            v = self._values[self._pos]
            self._pos += 1
            return float(v)
        size = int(np.prod(shape))
        out = self._values[self._pos: self._pos + size].reshape(shape)
        self._pos += size
        return out.copy()


def synthetic_system(diagonal, mass=None):
    """Pencil with L = diag(diagonal) and M = diag(mass or ones)."""
    diagonal = np.asarray(diagonal, dtype=float)
    n = diagonal.size
    mass = np.ones(n) if mass is None else np.asarray(mass, dtype=float)
    return rf.FemSystem(
        M=sp.diags(mass).tocsr(),
        L=sp.diags(diagonal).tocsr(),
        free_nodes=np.arange(n),
        dirichlet_nodes=np.array([], dtype=np.int64),
        points=np.zeros((n, 2)),
        dim=2,
        mesh=None,
        bc=None,
    )


@pytest.fixture(scope="session")
def rect16_dirichlet():
    mesh = rf.generate_rectangle(16, 16, 1.0, 1.0)
    system = rf.assemble(mesh, {m: rf.DIRICHLET for m in mesh.markers()})
    return mesh, system


@pytest.fixture(scope="session")
def rect16_neumann():
    mesh = rf.generate_rectangle(16, 16, 1.0, 1.0)
    system = rf.assemble(mesh, {m: rf.NEUMANN for m in mesh.markers()})
    return mesh, system


@pytest.fixture(scope="session")
def rect13_dirichlet():
    # 13x13 cells: 144 interior nodes, the coarse cross-method mesh
    mesh = rf.generate_rectangle(13, 13, 1.0, 1.0)
    system = rf.assemble(mesh, {m: rf.DIRICHLET for m in mesh.markers()})
    return mesh, system


@pytest.fixture(scope="session")
def c_shaped_mesh():
    """C-shaped (non-convex) domain built from a 3x3 block grid with the
    middle-right block removed; 4 cells per block."""
    n = 12
    keep = np.ones((n, n), dtype=bool)
    keep[4:8, 4:] = False      # notch opening to the right
    xs = np.linspace(0.0, 3.0, n + 1)
    ys = np.linspace(0.0, 3.0, n + 1)
    X, Y = np.meshgrid(xs, ys, indexing="xy")
    verts = np.column_stack([X.ravel(), Y.ravel()])

    def vid(i, j):
        return j * (n + 1) + i

    tris = []
    for j in range(n):
        for i in range(n):
            if not keep[j, i]:
                continue
            a, b = vid(i, j), vid(i + 1, j)
            c, d = vid(i + 1, j + 1), vid(i, j + 1)
            tris.append((a, b, c))
            tris.append((a, c, d))
    tris = np.asarray(tris)
    used = np.unique(tris)
    remap = -np.ones(verts.shape[0], dtype=np.int64)
    remap[used] = np.arange(used.size)
    verts = verts[used]
    tris = remap[tris]
    edge_count = {}
    for tri in tris:
        for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            key = (min(a, b), max(a, b))
            edge_count[key] = edge_count.get(key, 0) + 1
    boundary = [e for e, c in edge_count.items() if c == 1]
    markers = np.ones(len(boundary), dtype=np.int64)
    return rf.from_arrays(verts, tris, np.asarray(boundary), markers)
