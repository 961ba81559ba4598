"""Copositivity of symmetric matrices over cones.

Over the Lorentz cone ``L`` copositivity is decided exactly through the
S-lemma: ``A`` is ``L``-copositive iff ``A - rho J`` is positive
semidefinite for some ``rho >= 0``, where ``J = diag(1, -1, ..., -1)``.
The function ``g(rho) = lambda_min(A - rho J)`` is concave, so its maximum
is located by golden-section search.  Elliptic cones are linear images of
``L`` and reduce to the same test.  For the orthant only refutation by a
sampled witness (or the PSD shortcut) is available.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from ._capopt import minimize_on_cap, project_base
from .cones import ConeSpec, contains, sample_cap
from .errors import InvalidInputError, SamplingBudgetExceeded, UnsupportedConeError
from .linalg import as_symmetric, is_psd, quad

DEFAULT_TOL = 1e-8
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


class CopositivityStatus(str, enum.Enum):
    COPOSITIVE = "COPOSITIVE"
    NOT_COPOSITIVE = "NOT_COPOSITIVE"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class CopositivityCertificate:
    """Outcome of a copositivity test.

    Attributes
    ----------
    status : CopositivityStatus
    rho : float or None
        S-lemma multiplier; ``A - rho J`` is PSD up to ``tol`` when COPOSITIVE.
    psd_floor : float or None
        ``lambda_min(A - rho J)`` at the returned ``rho``.  For the Lorentz
        cone this is a valid lower bound on ``<Ax, x>`` over the unit cap.
    witness : ndarray or None
        Unit vector of the cone with ``<Ax, x> < -tol`` (NOT_COPOSITIVE only).
    witness_value : float or None
    method : str
        ``"psd"``, ``"s-lemma"`` or ``"sampling"``.
    """

    status: CopositivityStatus
    rho: float | None = None
    psd_floor: float | None = None
    witness: np.ndarray | None = None
    witness_value: float | None = None
    method: str = ""
    diagnostic: str = ""

    @property
    def copositive(self) -> bool:
        return self.status is CopositivityStatus.COPOSITIVE

    @property
    def refuted(self) -> bool:
        return self.status is CopositivityStatus.NOT_COPOSITIVE

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "rho": self.rho,
            "psd_floor": self.psd_floor,
            "witness": None if self.witness is None else self.witness.tolist(),
            "witness_value": self.witness_value,
            "method": self.method,
            "diagnostic": self.diagnostic,
        }


def lorentz_j(n: int) -> np.ndarray:
    j = -np.ones(n)
    j[0] = 1.0
    return np.diag(j)


def s_lemma_floor(A, rho: float) -> float:
    """``g(rho) = lambda_min(A - rho J)``."""
    a = np.asarray(A, dtype=float)
    shifted = a.copy()
    shifted[0, 0] -= rho
    shifted[np.arange(1, a.shape[0]), np.arange(1, a.shape[0])] += rho
    return float(np.linalg.eigvalsh(shifted)[0])


def maximize_s_lemma(A, *, rel_width: float = 1e-10, max_widen: int = 4):
    """Golden-section maximization of the concave ``g`` on ``[0, R]``, ``R = 2|A|_F + 1``.

    Returns ``(rho, g(rho), R)``.  Endpoints are compared explicitly so a
    maximum at ``rho = 0`` or ``rho = R`` is returned exactly.  If the search
    ends at the right endpoint the interval is doubled and the search rerun.
    """
    a = np.asarray(A, dtype=float)
    R = 2.0 * float(np.linalg.norm(a)) + 1.0
    for _ in range(max_widen + 1):
        lo, hi = 0.0, R
        c = hi - _INVPHI * (hi - lo)
        d = lo + _INVPHI * (hi - lo)
        gc, gd = s_lemma_floor(a, c), s_lemma_floor(a, d)
        while hi - lo > rel_width * R:
            if gc >= gd:
                hi, d, gd = d, c, gc
                c = hi - _INVPHI * (hi - lo)
                gc = s_lemma_floor(a, c)
            else:
                lo, c, gc = c, d, gd
                d = lo + _INVPHI * (hi - lo)
                gd = s_lemma_floor(a, d)
        rho, g = (c, gc) if gc >= gd else (d, gd)
        for end in (0.0, R):
            ge = s_lemma_floor(a, end)
            if ge >= g:
                rho, g = end, ge
        if rho < R * (1.0 - 1e-6):
            break
        R *= 2.0
    return float(rho), float(g), float(R)


def _snap(K: ConeSpec, x: np.ndarray) -> np.ndarray | None:
    """Round a nearly feasible vector onto ``K`` through the chart and normalize."""
    T, base = K.chart()
    u = np.linalg.solve(T, x)
    u = project_base(u[None, :], base)[0]
    y = T @ u
    nrm = float(np.linalg.norm(y))
    if nrm < 1e-12:
        return None
    return y / nrm


def _lorentz_candidates(A: np.ndarray, rho: float) -> list[np.ndarray]:
    """Directions in ``L ∪ -L`` built from the minimal eigenspace of ``A - rho J``."""
    n = A.shape[0]
    J = lorentz_j(n)
    lam, V = np.linalg.eigh(A - rho * J)
    spread = 1e-6 * (1.0 + abs(lam[0]))
    V = V[:, lam <= lam[0] + spread]
    out = []
    MJ = V.T @ J @ V
    mu, W = np.linalg.eigh(0.5 * (MJ + MJ.T))
    # combinations of a J-positive and a J-negative direction with zero J-form
    pos = [W[:, i] for i in range(mu.size) if mu[i] >= 0]
    neg = [W[:, i] for i in range(mu.size) if mu[i] < 0]
    for i, c in enumerate(W.T):
        if mu[i] >= 0:
            out.append(V @ c)
    if pos and neg:
        p, q = mu[-1], mu[0]
        t = math.sqrt(-q / (p - q))
        out.append(V @ (t * W[:, -1] + math.sqrt(1.0 - t * t) * W[:, 0]))
    # the leading eigenvector is always tried
    out.append(V[:, 0])
    signed = []
    for u in out:
        s = 1.0 if u[0] >= 0 else -1.0
        signed.append(s * u / np.linalg.norm(u))
    return signed


def _cap_minimize(A: np.ndarray, K: ConeSpec, starts: np.ndarray, max_iter: int = 500):
    def fun(X):
        AX = X @ A
        return np.sum(AX * X, axis=1), 2.0 * AX

    return minimize_on_cap(fun, K, starts, max_iter=max_iter)


def _pull_inside(K: ConeSpec, y: np.ndarray) -> np.ndarray | None:
    """Nudge a unit vector on the boundary toward the cone center until membership holds exactly."""
    if K.margin(y) >= 0.0:
        return y
    T, base = K.chart()
    center = T @ (np.ones(K.n) if base == "orthant" else np.eye(K.n)[0])
    center /= np.linalg.norm(center)
    for t in (1e-15, 1e-13, 1e-11, 1e-9):
        z = (1.0 - t) * y + t * center
        z /= np.linalg.norm(z)
        if K.margin(z) >= 0.0:
            return z
    return None


def _verified_witness(A: np.ndarray, K: ConeSpec, candidates, tol: float):
    """Best candidate that lies in ``K`` with no tolerance and has ``<Ax, x> < -tol``."""
    best = None
    for x in candidates:
        y = _snap(K, x)
        if y is None or not contains(K, y):
            continue
        y = _pull_inside(K, y)
        if y is None:
            continue
        val = float(quad(A, y))
        if val < -tol and (best is None or val < best[1]):
            best = (y, val)
    return best


def lorentz_copositive(A, tol: float = DEFAULT_TOL, *, cone: ConeSpec | None = None) -> CopositivityCertificate:
    """Exact Lorentz-cone copositivity through the S-lemma.

    ``cone`` may be a negated Lorentz cone (same answer, since ``<Ax, x>``
    is even) and is used for the witness orientation.
    """
    a = as_symmetric(A)
    n = a.shape[0]
    K = ConeSpec.lorentz(n) if cone is None else cone
    if K.kind != "lorentz" or K.n != n:
        raise InvalidInputError("lorentz_copositive needs a Lorentz cone of matching dimension")
    rho, g, _ = maximize_s_lemma(a)
    if g >= -tol:
        return CopositivityCertificate(CopositivityStatus.COPOSITIVE, rho, g, method="s-lemma")
    cands = _lorentz_candidates(a, rho)
    cands = [K.sign * c for c in cands]
    found = _verified_witness(a, K, cands, tol)
    if found is None:
        res = _cap_minimize(a, K, np.vstack(cands + [K.sign * np.eye(n)[0]]))
        found = _verified_witness(a, K, list(res.x), tol)
    if found is None:
        return CopositivityCertificate(CopositivityStatus.INCONCLUSIVE, rho, g, method="s-lemma",
                                       diagnostic="negative S-lemma floor but no verified witness")
    x, val = found
    return CopositivityCertificate(CopositivityStatus.NOT_COPOSITIVE, rho, g, x, val, method="s-lemma")


def sampled_copositive(A, K: ConeSpec, samples: int = 2000, seed: int = 0,
                       tol: float = DEFAULT_TOL, *, n_local: int = 10) -> CopositivityCertificate:
    """Search for a violation of copositivity on ``K``.

    Never answers COPOSITIVE unless ``A`` itself is PSD.  Otherwise the
    result is either NOT_COPOSITIVE with a verified witness or INCONCLUSIVE
    (no violation found).
    """
    a = as_symmetric(A)
    if samples < 1:
        raise InvalidInputError("samples must be positive")
    psd = is_psd(a, tol)
    if psd:
        return CopositivityCertificate(CopositivityStatus.COPOSITIVE, 0.0, psd.min_eigenvalue, method="psd")
    rng = np.random.default_rng(seed)
    try:
        X = sample_cap(K, samples, rng, boundary_fraction=0.1)
    except (SamplingBudgetExceeded, UnsupportedConeError) as exc:
        return CopositivityCertificate(CopositivityStatus.INCONCLUSIVE, method="sampling", diagnostic=str(exc))
    vals = quad(a, X)
    order = np.argsort(vals, kind="stable")[:n_local]
    starts = X[order]
    if K.kind == "orthant":
        # the unit vectors are the extreme rays
        starts = np.vstack([starts, K.sign * np.eye(K.n)])
    res = _cap_minimize(a, K, starts)
    found = _verified_witness(a, K, list(res.x) + list(starts), tol)
    if found is None:
        return CopositivityCertificate(CopositivityStatus.INCONCLUSIVE, method="sampling",
                                       psd_floor=None, diagnostic="no violation found")
    x, val = found
    return CopositivityCertificate(CopositivityStatus.NOT_COPOSITIVE, None, None, x, val, method="sampling")


def certify_copositive(A, K: ConeSpec, tol: float = DEFAULT_TOL, *, samples: int = 2000,
                       seed: int = 0) -> CopositivityCertificate:
    """Best available copositivity test for ``K``.

    Exact for Lorentz and (non-degenerate) elliptic cones; PSD shortcut or
    sampled refutation otherwise.
    """
    a = as_symmetric(A)
    if K.n != a.shape[0]:
        raise InvalidInputError("matrix and cone dimensions differ")
    psd = is_psd(a, tol)
    if psd:
        return CopositivityCertificate(CopositivityStatus.COPOSITIVE, 0.0, psd.min_eigenvalue, method="psd")
    if K.kind == "lorentz":
        return lorentz_copositive(a, tol, cone=K)
    if K.kind == "elliptic" and not K.degenerate:
        T, _ = K.chart()
        cert = lorentz_copositive(T.T @ a @ T, tol)
        if cert.status is not CopositivityStatus.NOT_COPOSITIVE:
            return cert
        found = _verified_witness(a, K, [T @ cert.witness], tol)
        if found is None:
            return CopositivityCertificate(CopositivityStatus.INCONCLUSIVE, cert.rho, cert.psd_floor,
                                           method="s-lemma", diagnostic="witness lost in chart")
        return CopositivityCertificate(CopositivityStatus.NOT_COPOSITIVE, cert.rho, cert.psd_floor,
                                       found[0], found[1], method="s-lemma")
    return sampled_copositive(a, K, samples, seed, tol)


# ---------------------------------------------------------------------------
# Z-property


class ZStatus(str, enum.Enum):
    CONSISTENT = "CONSISTENT"
    VIOLATED = "VIOLATED"


@dataclass(frozen=True)
class ZPropertyResult:
    """``max <Ax, y>`` found over complementary pairs, with the maximizing pair."""

    status: ZStatus
    max_value: float
    x: np.ndarray | None = None
    y: np.ndarray | None = None
    pairs_tested: int = 0

    def to_dict(self) -> dict:
        return {"status": self.status.value, "max_value": self.max_value,
                "x": None if self.x is None else self.x.tolist(),
                "y": None if self.y is None else self.y.tolist(),
                "pairs_tested": self.pairs_tested}


def complementary_pairs(K: ConeSpec, pairs: int, rng: np.random.Generator):
    """Pairs ``x ∈ K``, ``y ∈ K*`` with ``<x, y> = 0`` (self-dual cones only).

    Orthant pairs have disjoint supports; Lorentz pairs are ``x = (1, u)``
    on the boundary with ``y = J x``.  Deterministic pairs come first: unit
    vector pairs for the orthant, for the Lorentz cone none (see
    :func:`z_property_sampled`).
    """
    n = K.n
    if K.kind == "orthant":
        I = np.eye(n)
        idx = [(i, j) for i in range(n) for j in range(n) if i != j]
        X = [I[i] for i, _ in idx]
        Y = [I[j] for _, j in idx]
        for _ in range(pairs):
            mask = rng.uniform(size=n) < 0.5
            if mask.all() or not mask.any():
                mask[rng.integers(n)] ^= True
            x = np.where(mask, np.abs(rng.standard_normal(n)), 0.0)
            y = np.where(~mask, np.abs(rng.standard_normal(n)), 0.0)
            X.append(x / np.linalg.norm(x))
            Y.append(y / np.linalg.norm(y))
        X, Y = np.array(X), np.array(Y)
    elif K.kind == "lorentz":
        U = rng.standard_normal((pairs, n - 1))
        U /= np.linalg.norm(U, axis=1)[:, None]
        X = np.hstack([np.ones((pairs, 1)), U]) / math.sqrt(2.0)
        Y = X.copy()
        Y[:, 1:] *= -1.0
    else:
        raise UnsupportedConeError("complementary pairs are generated for self-dual cones only")
    return K.sign * X, K.sign * Y


def z_property_sampled(A, K: ConeSpec, pairs: int = 2000, seed: int = 0,
                       tol: float = DEFAULT_TOL) -> ZPropertyResult:
    """Check ``<Ax, y> <= tol`` on complementary pairs of ``K``.

    For the orthant the unit-vector pairs make the test exact (it reduces to
    nonpositive off-diagonal entries).  For the Lorentz cone the maximizer
    of ``<Ax, Jx>`` over ``x = (1, u)``, ``|u| = 1``, is the eigenvector of
    the smallest eigenvalue of the trailing block, which is added as a pair.
    """
    a = as_symmetric(A)
    if pairs < 1:
        raise InvalidInputError("pairs must be positive")
    if not K.self_dual:
        raise UnsupportedConeError("Z-property test needs a self-dual cone")
    rng = np.random.default_rng(seed)
    X, Y = complementary_pairs(K, pairs, rng)
    if K.kind == "lorentz":
        _, V = np.linalg.eigh(a[1:, 1:])
        x = np.concatenate([[1.0], V[:, 0]]) / math.sqrt(2.0)
        y = x.copy()
        y[1:] *= -1.0
        X = np.vstack([K.sign * x, X])
        Y = np.vstack([K.sign * y, Y])
    vals = np.einsum("ij,jk,ik->i", X, a, Y)
    i = int(np.argmax(vals))
    status = ZStatus.VIOLATED if vals[i] > tol else ZStatus.CONSISTENT
    return ZPropertyResult(status, float(vals[i]), X[i], Y[i], X.shape[0])
