"""Dense linear-algebra kernels used by every other module.

The package standardizes on a handful of primitives with fixed conventions:

* matrices are 2-D ``numpy.ndarray`` objects (real or complex),
* eigenvector columns have unit Euclidean norm and are rotated so their
  largest-magnitude entry is real and positive,
* eigenpair residuals are ``||M v - lam v||_2`` measured relative to the
  Frobenius norm of ``M``.

Eigenvalue and LU factorizations are delegated to LAPACK (via numpy and
scipy); the positive-definiteness probe is a direct Cholesky loop so that
the failing pivot index is available to callers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

__all__ = [
    "LinalgError",
    "NotPositiveDefinite",
    "NoConvergence",
    "Singular",
    "EigenDecomposition",
    "cholesky",
    "sym_eig",
    "nonsym_eig",
    "solve",
    "operator_norm_2",
    "spd_sqrt_pair",
]

# Max relative asymmetry accepted by ops that require symmetric input.
SYMMETRY_RTOL = 1e-12


class LinalgError(Exception):
    """Base class for numerical failures raised by this module."""


class NotPositiveDefinite(LinalgError):
    """Cholesky pivot failed; ``pivot_index`` is the offending column."""

    def __init__(self, pivot_index: int, message: str | None = None):
        self.pivot_index = int(pivot_index)
        super().__init__(message or f"matrix is not positive definite (pivot {pivot_index})")


class NoConvergence(LinalgError):
    """An iterative eigenvalue kernel failed to converge."""

    def __init__(self, detail: str = ""):
        self.detail = detail
        super().__init__(f"eigenvalue iteration did not converge{': ' + detail if detail else ''}")


class Singular(LinalgError):
    """Linear solve hit a negligible pivot; ``rank_estimate`` counts the usable ones."""

    def __init__(self, rank_estimate: int, message: str | None = None):
        self.rank_estimate = int(rank_estimate)
        super().__init__(message or f"matrix is numerically singular (rank estimate {rank_estimate})")


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues, matching eigenvector columns, and per-pair residuals.

    ``eigenvalues[i]`` pairs with column ``eigenvectors[:, i]``;
    ``residual_norms[i]`` is ``||M v_i - lam_i v_i||_2 / ||M||_F``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residual_norms: np.ndarray

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]


def _as_square(m) -> np.ndarray:
    a = np.asarray(m)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square 2-D matrix, got shape {a.shape}")
    return a


def _require_symmetric(a: np.ndarray, what: str) -> np.ndarray:
    scale = np.max(np.abs(a)) if a.size else 0.0
    if scale > 0.0 and np.max(np.abs(a - a.T)) > SYMMETRY_RTOL * scale:
        raise ValueError(f"{what} must be symmetric to {SYMMETRY_RTOL:g} relative")
    # Symmetrize so downstream kernels see an exactly symmetric matrix.
    return 0.5 * (a + a.T)


def _frobenius_scale(a: np.ndarray) -> float:
    s = float(np.linalg.norm(a))
    return s if s > 0.0 else 1.0


def normalize_columns(v: np.ndarray) -> np.ndarray:
    """Unit Euclidean columns, largest-magnitude entry rotated real positive.

    The rotation fixes the arbitrary per-column phase (sign, in the real
    case) so that repeated runs and different code paths produce identical
    eigenvector matrices.
    """
    v = np.array(v, copy=True)
    for j in range(v.shape[1]):
        col = v[:, j]
        nrm = np.linalg.norm(col)
        if nrm == 0.0:
            continue
        col = col / nrm
        k = int(np.argmax(np.abs(col)))
        piv = col[k]
        if piv != 0.0:
            col = col * (np.conj(piv) / abs(piv))
        if np.iscomplexobj(col):
            col.real[k] = abs(col[k])  # kill rounding in the pivot's phase
            col.imag[k] = 0.0
        v[:, j] = col
    return v


def _residuals(m: np.ndarray, values: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    scale = _frobenius_scale(m)
    r = m @ vectors - vectors * values[np.newaxis, :]
    return np.linalg.norm(r, axis=0) / scale


def cholesky(m) -> np.ndarray:
    """Lower-triangular Cholesky factor of a symmetric positive definite matrix.

    Runs the standard column-by-column elimination and raises
    :class:`NotPositiveDefinite` with the failing pivot index as soon as a
    pivot drops to zero or below.  This is the package's working definition
    of positive definiteness.

    Parameters
    ----------
    m : array_like
        Symmetric real matrix.

    Returns
    -------
    numpy.ndarray
        Lower-triangular ``L`` with ``L @ L.T == m`` up to roundoff.
    """
    a = _require_symmetric(_as_square(m).astype(float), "cholesky input")
    n = a.shape[0]
    low = np.zeros((n, n))
    for j in range(n):
        d = a[j, j] - low[j, :j] @ low[j, :j]
        if not np.isfinite(d) or d <= 0.0:
            raise NotPositiveDefinite(pivot_index=j)
        low[j, j] = np.sqrt(d)
        if j + 1 < n:
            low[j + 1 :, j] = (a[j + 1 :, j] - low[j + 1 :, :j] @ low[j, :j]) / low[j, j]
    return low


def sym_eig(m) -> EigenDecomposition:
    """Full eigendecomposition of a symmetric real matrix.

    Returns real eigenvalues in ascending order with orthonormal
    eigenvector columns (phase-normalized as in :func:`normalize_columns`).
    """
    a = _require_symmetric(_as_square(m).astype(float), "sym_eig input")
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure is exotic
        raise NoConvergence(str(exc)) from exc
    v = normalize_columns(v)
    return EigenDecomposition(w, v, _residuals(a, w, v))


def nonsym_eig(m) -> EigenDecomposition:
    """Eigendecomposition of a general real or complex square matrix.

    Eigenvalues are sorted by ``(Re, Im)``.  For real input the eigenvalue
    multiset is closed under conjugation (LAPACK returns exact conjugate
    pairs).  Eigenvectors follow the package normalization convention.
    """
    a = _as_square(m)
    a = a.astype(complex) if np.iscomplexobj(a) else a.astype(float)
    try:
        w, v = np.linalg.eig(a)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    order = np.lexsort((w.imag, w.real))
    w = w[order]
    v = normalize_columns(v[:, order])
    return EigenDecomposition(w, v, _residuals(a, w, v))


def solve(m, b, pivot_rtol: float = 1e-13):
    """Solve ``m @ x = b`` by LU factorization with partial pivoting.

    Accepts one right-hand side vector or a matrix of stacked columns.
    Raises :class:`Singular` when an upper-triangular pivot is negligible
    relative to the matrix scale, with ``rank_estimate`` set to the number
    of healthy pivots.
    """
    a = _as_square(m)
    rhs = np.asarray(b)
    if rhs.shape[0] != a.shape[0]:
        raise ValueError(f"rhs length {rhs.shape[0]} does not match matrix order {a.shape[0]}")
    scale = _frobenius_scale(a)
    lu, piv = lu_factor(a)
    diag = np.abs(np.diag(lu))
    healthy = int(np.count_nonzero(diag > pivot_rtol * scale))
    if healthy < a.shape[0]:
        raise Singular(rank_estimate=healthy)
    x = lu_solve((lu, piv), rhs)
    resid = np.linalg.norm(a @ x - rhs)
    if not np.isfinite(resid) or resid > 1e-10 * (scale * np.linalg.norm(x) + np.linalg.norm(rhs)):
        raise Singular(rank_estimate=healthy, message="solution residual exceeds tolerance; matrix is effectively singular")
    return x


def operator_norm_2(m) -> float:
    """Spectral norm, computed as ``sqrt(lam_max(M^H M))`` via :func:`sym_eig`.

    Accepts real or complex, square or rectangular input.
    """
    a = np.asarray(m)
    if a.ndim != 2:
        raise ValueError("operator_norm_2 expects a 2-D matrix")
    gram = a.conj().T @ a
    if np.iscomplexobj(gram):
        gram = 0.5 * (gram + gram.conj().T)
        w = np.linalg.eigvalsh(gram)
    else:
        w = sym_eig(gram).eigenvalues
    return float(np.sqrt(max(float(w[-1]), 0.0)))


def spd_sqrt_pair(m) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric square root and inverse square root of an SPD matrix.

    Both factors are built from one :func:`sym_eig` call; the smallest
    eigenvalue must be strictly positive.
    """
    dec = sym_eig(m)
    w = dec.eigenvalues
    if w[0] <= 0.0:
        raise NotPositiveDefinite(pivot_index=0, message="spd_sqrt_pair requires a positive definite matrix")
    v = dec.eigenvectors
    root = (v * np.sqrt(w)) @ v.T
    inv_root = (v / np.sqrt(w)) @ v.T
    return 0.5 * (root + root.T), 0.5 * (inv_root + inv_root.T)
