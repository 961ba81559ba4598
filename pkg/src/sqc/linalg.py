"""Dense symmetric linear algebra.

Matrices are plain ``numpy`` arrays; :func:`as_symmetric` is the single
entry point that validates and symmetrizes user input.  Spectral data is
carried by :class:`SpectralDecomposition`, whose eigenvectors are stored
row-wise (``dec.vectors[0]`` is the eigenvector of the smallest eigenvalue).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, SolverFailure

#: relative gap used to group (numerically) equal eigenvalues
DEFAULT_GAP_RTOL = 1e-8


def as_symmetric(A) -> np.ndarray:
    """Return a read-only float copy of ``A`` symmetrized as ``(A + A.T) / 2``.

    Raises :class:`InvalidInputError` for non-square, non-finite or
    too-small (``n < 2``) input.
    """
    a = np.array(A, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] < 2:
        raise InvalidInputError("dimension must be at least 2")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("matrix has non-finite entries")
    a = 0.5 * (a + a.T)
    a.setflags(write=False)
    return a


def asymmetry(A) -> float:
    """Largest absolute entry of ``A - A.T``."""
    a = np.asarray(A, dtype=float)
    return float(np.max(np.abs(a - a.T))) if a.size else 0.0


def default_gap_tol(eigenvalues) -> float:
    lam = np.asarray(eigenvalues, dtype=float)
    return DEFAULT_GAP_RTOL * (1.0 + float(np.max(np.abs(lam))))


def _normalize_signs(vectors: np.ndarray) -> np.ndarray:
    # largest-magnitude entry positive; near-ties go to the lowest index
    out = vectors.copy()
    for i, v in enumerate(out):
        mags = np.abs(v)
        j = int(np.flatnonzero(mags >= mags.max() - 1e-12)[0])
        if v[j] < 0:
            out[i] = -v
    return out


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Ascending eigenvalues with an orthonormal eigenvector system.

    Attributes
    ----------
    eigenvalues : ndarray, shape (n,)
        ``lambda_1 <= ... <= lambda_n``.
    vectors : ndarray, shape (n, n)
        Row ``i`` is the unit eigenvector for ``eigenvalues[i]``.
    multiplicity_of_smallest : int
        Number of eigenvalues within ``gap_tol`` of ``lambda_1``.
    gap_tol : float
        Tolerance used to group eigenvalues.
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray
    multiplicity_of_smallest: int
    gap_tol: float

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]

    def v(self, i: int) -> np.ndarray:
        """One-based access to the eigenvector system, ``v(1)`` is the first."""
        return self.vectors[i - 1]

    def lam(self, i: int) -> float:
        return float(self.eigenvalues[i - 1])

    def equal(self, a: float, b: float) -> bool:
        return abs(a - b) <= self.gap_tol

    @property
    def is_scalar(self) -> bool:
        """All eigenvalues coincide, i.e. ``A = cI`` and ``q_A`` is constant on the sphere."""
        return self.equal(self.lam(1), self.lam(self.n))

    @property
    def two_eigenvalue_pattern(self) -> bool:
        """``lambda_1 < lambda_2 = ... = lambda_n``."""
        return (
            self.multiplicity_of_smallest == 1
            and self.eigenvalues[-1] - self.eigenvalues[1] <= self.gap_tol
        )

    @property
    def countergg_pattern(self) -> bool:
        """``lambda_1 < lambda_2 = ... = lambda_{n-1} < lambda_n`` (needs n >= 3)."""
        if self.n < 3 or self.multiplicity_of_smallest != 1:
            return False
        lam = self.eigenvalues
        return bool(lam[-2] - lam[1] <= self.gap_tol and lam[-1] - lam[-2] > self.gap_tol)

    def reconstruct(self) -> np.ndarray:
        return (self.vectors.T * self.eigenvalues) @ self.vectors

    def summary(self) -> dict:
        return {
            "eigenvalues": self.eigenvalues.tolist(),
            "multiplicity_of_smallest": self.multiplicity_of_smallest,
            "gap_tol": self.gap_tol,
        }


def spectral_decompose(A, gap_tol: float | None = None) -> SpectralDecomposition:
    """Eigen-decomposition of a symmetric matrix with deterministic output.

    ``gap_tol`` defaults to ``1e-8 * (1 + max|lambda|)``.  Each eigenvector is
    signed so that its largest-magnitude entry is positive.
    """
    a = as_symmetric(A)
    try:
        lam, V = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise SolverFailure(f"eigen-solver did not converge: {exc}") from exc
    if gap_tol is None:
        gap_tol = default_gap_tol(lam)
    if not gap_tol > 0:
        raise InvalidInputError("gap_tol must be positive")
    vectors = _normalize_signs(V.T)
    vectors.setflags(write=False)
    lam.setflags(write=False)
    k = int(np.count_nonzero(lam - lam[0] <= gap_tol))
    return SpectralDecomposition(lam, vectors, k, float(gap_tol))


def householder(v) -> np.ndarray:
    """Reflection ``I - 2 v v^T / |v|^2`` through the hyperplane orthogonal to ``v``."""
    v = np.asarray(v, dtype=float).ravel()
    nrm2 = float(v @ v)
    if not np.isfinite(nrm2) or nrm2 == 0.0:
        raise InvalidInputError("householder vector must be nonzero and finite")
    return as_symmetric(np.eye(v.size) - 2.0 * np.outer(v, v) / nrm2)


@dataclass(frozen=True)
class PSDResult:
    """Outcome of :func:`is_psd`; ``witness`` is set only when ``psd`` is False."""

    psd: bool
    min_eigenvalue: float
    witness: np.ndarray | None = None

    def __bool__(self) -> bool:
        return self.psd


def is_psd(A, tol: float = 0.0) -> PSDResult:
    """Test ``lambda_min(A) >= -tol``.

    When the test fails, the returned witness is a unit vector ``u`` with
    ``<Au, u> < -tol``.
    """
    if tol < 0:
        raise InvalidInputError("tol must be nonnegative")
    a = np.asarray(A, dtype=float)
    try:
        lam, V = np.linalg.eigh(0.5 * (a + a.T))
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise SolverFailure(str(exc)) from exc
    lmin = float(lam[0])
    if lmin >= -tol:
        return PSDResult(True, lmin)
    u = _normalize_signs(V[:, :1].T)[0]
    return PSDResult(False, lmin, u)


def quad(A, x) -> np.ndarray:
    """``<A x, x>`` for a single vector or row-wise for a stack of vectors."""
    x = np.asarray(x, dtype=float)
    return np.einsum("...i,ij,...j->...", x, A, x)


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))
