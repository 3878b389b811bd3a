"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: any :class:`RieszError` is a numeric
failure (exit 2), I/O problems keep their OSError identity (exit 3).
"""


class RieszError(Exception):
    """Base class for all numeric and validation failures."""


class MeshFormatError(RieszError):
    """Mesh file does not conform to the text grammar; message carries a line number."""


class MeshInvariantError(RieszError):
    """Structurally invalid mesh (dangling index, negative area, non-manifold edge)."""


class SingularMatrixError(RieszError):
    """Direct factorization hit an (almost) zero pivot; message names the pivot index."""


class ConvergenceError(RieszError):
    """Iterative eigenvalue estimation did not converge within its iteration cap."""
