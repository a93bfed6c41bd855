"""Dense linear algebra and distance kernels.

A data matrix is a 2-D float64 ndarray, one sample per row.  All entries
must be finite.  `as_data_matrix` is the validating constructor used at
every public entry point of the package.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, NumericalFailure


def as_data_matrix(values, name: str = "X") -> np.ndarray:
    """Coerce to a C-contiguous float64 (n, d) array and check invariants."""
    X = np.ascontiguousarray(values, dtype=np.float64)
    if X.ndim != 2:
        raise InvalidInput(f"{name} must be 2-dimensional, got ndim={X.ndim}")
    if X.shape[0] < 1 or X.shape[1] < 1:
        raise InvalidInput(f"{name} must have at least one row and one column, got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise InvalidInput(f"{name} contains NaN or Inf entries")
    return X


@dataclass(frozen=True)
class SymEigResult:
    """Full spectrum of a symmetric matrix.

    eigenvalues are ascending; column i of eigenvectors pairs with
    eigenvalue i and the columns are orthonormal.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def sym_eig(A, rel_tol: float = 1e-10) -> SymEigResult:
    """Eigendecompose a real symmetric matrix.

    The input must be square and symmetric within `rel_tol` relative to
    its Frobenius norm.  Delegates to LAPACK's symmetric solver, which
    returns the eigenvalues ascending with orthonormal eigenvectors.
    """
    A = as_data_matrix(A, name="A")
    n, m = A.shape
    if n != m:
        raise InvalidInput(f"matrix must be square, got {A.shape}")
    norm = float(np.linalg.norm(A))
    asym = float(np.linalg.norm(A - A.T))
    if asym > rel_tol * max(norm, 1e-300):
        raise InvalidInput(f"matrix is not symmetric: ||A - A^T|| = {asym:.3e} vs ||A|| = {norm:.3e}")
    # Symmetrize round-off before handing to the solver so the result is
    # exact for the symmetric part we validated.
    S = 0.5 * (A + A.T)
    try:
        eigenvalues, eigenvectors = np.linalg.eigh(S)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"symmetric eigensolver did not converge: {exc}") from exc
    return SymEigResult(eigenvalues=eigenvalues, eigenvectors=eigenvectors)


def pairwise_sq_dists(X, Y=None) -> np.ndarray:
    """Squared Euclidean distances between the rows of X and the rows of Y.

    Uses the ||x||^2 + ||y||^2 - 2 x.y expansion; negative round-off is
    clamped to 0.  When Y is X itself (or omitted) the diagonal is set
    to exactly 0.
    """
    X = as_data_matrix(X, name="X")
    same = Y is None or Y is X
    Y2 = X if same else as_data_matrix(Y, name="Y")
    if X.shape[1] != Y2.shape[1]:
        raise InvalidInput(f"dimension mismatch: X has {X.shape[1]} columns, Y has {Y2.shape[1]}")
    x_sq = np.einsum("ij,ij->i", X, X)
    y_sq = x_sq if same else np.einsum("ij,ij->i", Y2, Y2)
    D = x_sq[:, None] + y_sq[None, :] - 2.0 * (X @ Y2.T)
    np.maximum(D, 0.0, out=D)
    if same:
        np.fill_diagonal(D, 0.0)
    return D
