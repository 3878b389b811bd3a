"""Sample paths and exact discrete covariances of power-law fields via the
truncated eigen-expansion of the FEM Laplacian pencil.

The white-noise forcing is realized as the assembled load vector
``b ~ N(0, M)`` (element-local mass Cholesky applied to i.i.d. normals).
Projecting onto the M-orthonormal eigenbasis turns ``b`` into i.i.d. mode
coefficients, so the spectral field equals the fractional-solve field
computed by the contour-integral module path by path, not only in law.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import fem, numerics
from .mesh import element_areas

_TRUNCATION_DEFAULT_LARGE = 2000     # modes kept when n_free exceeds the dense limit
_ZERO_MODE_RTOL = 1e-12


@dataclass(frozen=True)
class DropZeroMode:
    """Neumann policy: omit the (numerically) zero eigenvalue's mode."""


@dataclass(frozen=True)
class PinAtOrigin:
    """Neumann policy: subtract each eigenfunction's value at ``origin``,
    forcing the field to vanish there."""

    origin: tuple

    def __post_init__(self):
        object.__setattr__(self, "origin", tuple(float(v) for v in self.origin))


@dataclass(frozen=True)
class RieszFieldSpec:
    """Parameters of a power-law field: Hurst index, intrinsic dimension,
    mode truncation and the zero-mode policy for pure-Neumann operators.

    The fractional exponent gamma = d/4 + H/2 is always derived, never stored.
    """

    hurst: float
    dim: int = 2
    truncation: object = "all"          # "all" or a positive mode count
    neumann_mode: object = field(default_factory=DropZeroMode)
    bc: dict | None = None

    def __post_init__(self):
        if not 0.0 < self.hurst < 1.0:
            raise ValueError(f"Hurst parameter must lie in (0,1), got {self.hurst}")
        if self.dim not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.dim}")
        if self.truncation != "all":
            if int(self.truncation) < 1:
                raise ValueError("truncation must be >= 1 or 'all'")
            object.__setattr__(self, "truncation", int(self.truncation))

    @property
    def gamma(self):
        """Exponent of the fractional inverse applied to white noise."""
        return self.dim / 4.0 + self.hurst / 2.0


@dataclass(frozen=True, eq=False)
class SamplePath:
    """Nodal field values over all mesh vertices with their provenance."""

    values: np.ndarray
    method: str
    seed: int | None = None
    spec: RieszFieldSpec | None = None

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise ValueError("sample path contains non-finite values")


_CHOL3 = np.linalg.cholesky((np.ones((3, 3)) + np.eye(3)) / 12.0)
_CHOL2 = np.linalg.cholesky(np.array([[2.0, 1.0], [1.0, 2.0]]) / 6.0)


def white_noise_load(system: fem.FemSystem, stream) -> np.ndarray:
    """Assembled white-noise load over free nodes, distributed N(0, M).

    Mesh systems draw one normal triple per element and scatter it through
    the element-local mass Cholesky, which is exact and scales linearly.
    Systems without geometry (synthetic pencils) fall back to a dense
    Cholesky of M.
    """
    if system.mesh is not None:
        tris = system.mesh.triangles
        if "areas" not in system.cache:
            system.cache["areas"] = element_areas(system.mesh)
        areas = system.cache["areas"]
        z = stream.normal((len(tris), 3))
        local = np.sqrt(areas)[:, None] * (z @ _CHOL3.T)
        b = np.zeros(system.n_nodes)
        np.add.at(b, tris.ravel(), local.ravel())
        return b[system.free_nodes]
    if system.dim == 1:
        xs = system.points[:, 0]
        widths = np.diff(xs)
        z = stream.normal((widths.size, 2))
        local = np.sqrt(widths)[:, None] * (z @ _CHOL2.T)
        b = np.zeros(system.n_nodes)
        cells = np.column_stack([np.arange(widths.size), np.arange(1, widths.size + 1)])
        np.add.at(b, cells.ravel(), local.ravel())
        return b[system.free_nodes]
    if "wn_chol" not in system.cache:
        system.cache["wn_chol"] = np.linalg.cholesky(system.M.toarray())
    return system.cache["wn_chol"] @ stream.normal(system.n_free)


def effective_truncation(system: fem.FemSystem, spec: RieszFieldSpec) -> int:
    """Mode count actually used: all modes up to the dense limit, else 2000."""
    if spec.truncation == "all":
        if system.n_free <= numerics._DENSE_EIGEN_LIMIT:
            return system.n_free
        return min(_TRUNCATION_DEFAULT_LARGE, system.n_free)
    return min(spec.truncation, system.n_free)


def _mode_basis(system, spec):
    """Retained eigenpairs plus the field basis after the Neumann policy.

    Returns (lam, V, B): V projects loads to mode coefficients, B carries the
    field back to nodes (differs from V only under PinAtOrigin).
    """
    k = effective_truncation(system, spec)
    request = "all" if k >= system.n_free else min(k + 1, system.n_free)
    eig = fem.laplace_eigenpairs(system, request)
    lam, V = eig.eigenvalues, eig.eigenvectors
    lam_max = lam[-1] if lam.size else 0.0
    zero = lam <= _ZERO_MODE_RTOL * max(lam_max, 1e-300)
    if np.any(zero):
        if spec.neumann_mode is None:
            raise ValueError("zero eigenvalue included without a Neumann policy")
        keep = ~zero
        lam, V = lam[keep], V[:, keep]
    lam, V = lam[:k], V[:, :k]
    B = V
    if np.any(zero) and isinstance(spec.neumann_mode, PinAtOrigin):
        psi0 = _modes_at_point(system, V, spec.neumann_mode.origin)
        B = V - np.ones((V.shape[0], 1)) * psi0[None, :]
    return lam, V, B


def _modes_at_point(system, V, point):
    """P1 evaluation of every eigenvector column at one point."""
    full = system.expand(V.T).T        # (n_nodes, k)
    if system.dim == 1:
        xs = system.points[:, 0]
        x = float(np.atleast_1d(point)[0])
        i = np.clip(np.searchsorted(xs, x) - 1, 0, xs.size - 2)
        w = (x - xs[i]) / (xs[i + 1] - xs[i])
        return (1.0 - w) * full[i] + w * full[i + 1]
    t, w = fem.locate(system.mesh, point)
    return w @ full[system.mesh.triangles[t]]


def field_from_load(system: fem.FemSystem, spec: RieszFieldSpec, load) -> np.ndarray:
    """Free-node field produced by a given white-noise load vector."""
    lam, V, B = _mode_basis(system, spec)
    z = V.T @ load
    return B @ (lam ** (-spec.gamma) * z)


def sample_spectral(system: fem.FemSystem, spec: RieszFieldSpec, stream) -> SamplePath:
    """Draw one field realization through the truncated eigen-expansion."""
    if spec.dim != system.dim:
        raise ValueError(f"spec dimension {spec.dim} does not match system dimension {system.dim}")
    load = white_noise_load(system, stream)
    x = field_from_load(system, spec, load)
    return SamplePath(system.expand(x), "eig", getattr(stream, "seed", None), spec)


def covariance_spectral(system: fem.FemSystem, spec: RieszFieldSpec) -> np.ndarray:
    """Exact covariance of the discrete field over free nodes.

    C = B diag(lam^{-(d/2+H)}) B^T, symmetric positive semi-definite.
    """
    lam, _, B = _mode_basis(system, spec)
    C = (B * lam ** (-2.0 * spec.gamma)) @ B.T
    return 0.5 * (C + C.T)


def truncation_tail_estimate(system: fem.FemSystem, spec: RieszFieldSpec) -> float:
    """Weyl-extrapolated covariance error of the dropped modes.

    Estimates sum_{k>K} lam_k^{-(d/2+H)} by extending the computed spectrum
    with lam_k ~ lam_K (k/K)^{2/d}; zero when nothing is truncated.
    """
    k = effective_truncation(system, spec)
    if k >= system.n_free:
        return 0.0
    lam, _, _ = _mode_basis(system, spec)
    p = 2.0 * spec.gamma
    growth = 2.0 * p / spec.dim
    return float(lam[-1] ** (-p) * lam.size / (growth - 1.0))


def scale_covariance_check(system_a: fem.FemSystem, system_b: fem.FemSystem,
                           spec: RieszFieldSpec, factor: float) -> float:
    """Largest relative deviation of C_b from factor^{2H} C_a over node pairs.

    ``system_b`` must be assembled on the same connectivity scaled by
    ``factor``.  FEM scaling makes the identity exact up to roundoff for
    Dirichlet or Robin conditions.
    """
    if system_a.n_free != system_b.n_free:
        raise ValueError("systems have different free-node counts")
    if system_a.mesh is not None and system_b.mesh is not None:
        if not np.array_equal(system_a.mesh.triangles, system_b.mesh.triangles):
            raise ValueError("meshes do not share connectivity")
    c_a = covariance_spectral(system_a, spec)
    c_b = covariance_spectral(system_b, spec)
    scale = np.abs(c_a).max()
    return float(np.abs(c_b - factor ** (2.0 * spec.hurst) * c_a).max() / scale)
