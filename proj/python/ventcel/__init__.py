"""Python bindings for the ventcel finite element and eigensolver core."""

from ._core import *  # noqa: F401,F403
from ._core import VentcelError, assemble

__all__ = [name for name in dir() if not name.startswith("_")]


def to_scipy(triple):
    """Turn an (indptr, indices, data, n) triple from assemble() into a scipy CSR matrix.

    Both triangles are present in the triple, so no symmetrization is needed.
    """
    import scipy.sparse as sp

    indptr, indices, data, n = triple
    return sp.csr_matrix((data, indices, indptr), shape=(n, n))


def assemble_scipy(mesh, degree):
    """assemble() with every matrix converted by to_scipy()."""
    out = assemble(mesh, degree)
    return {k: (v if k == "dof_coords" else to_scipy(v)) for k, v in out.items()}
