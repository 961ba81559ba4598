"""Cones, memberships, Moreau decompositions and the level cones of a matrix.

Three cone variants are supported: the nonnegative orthant, the Lorentz
(second-order) cone and elliptic cones

    E = {x : <a, x> >= sqrt(sum_i w_i <b_i, x>^2)}

given by a unit axis ``a``, an orthonormal completion ``b_2..b_n`` and
weights ``w_i``.  Orthant and Lorentz cones may be negated.

Questions that can only be settled numerically (dual membership of an
elliptic cone, membership in the dual of the cone ``W``, triviality of an
intersection) return a three-valued :class:`Decision`-like enum and never
answer NO without a re-verified witness.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from ._capopt import multistart_minimize, project_lorentz_rows
from .errors import DomainError, InvalidInputError, SamplingBudgetExceeded, UnsupportedConeError
from .linalg import SpectralDecomposition

MEMBERSHIP_TOL = 1e-9
INTERIOR_MARGIN = 1e-7
SAMPLING_BUDGET = 10**6


class Decision(str, enum.Enum):
    YES = "YES"
    NO = "NO"
    INCONCLUSIVE = "INCONCLUSIVE"


class Intersection(str, enum.Enum):
    TRIVIAL = "TRIVIAL"
    NONTRIVIAL = "NONTRIVIAL"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True, eq=False)
class ConeSpec:
    """A closed convex cone in R^n.

    Use the constructors :meth:`orthant`, :meth:`lorentz` and
    :meth:`elliptic`; ``-K`` gives the negated cone.
    """

    kind: str
    n: int
    sign: int = 1
    axis: np.ndarray | None = None
    basis: np.ndarray | None = None
    weights: np.ndarray | None = None

    @classmethod
    def orthant(cls, n: int) -> "ConeSpec":
        _check_dim(n)
        return cls("orthant", int(n))

    @classmethod
    def lorentz(cls, n: int) -> "ConeSpec":
        _check_dim(n)
        return cls("lorentz", int(n))

    @classmethod
    def elliptic(cls, axis, basis, weights, *, allow_degenerate: bool = False,
                 ortho_tol: float = 1e-10) -> "ConeSpec":
        axis = np.asarray(axis, dtype=float).ravel()
        n = axis.size
        _check_dim(n)
        basis = np.asarray(basis, dtype=float).reshape(-1, n)
        weights = np.asarray(weights, dtype=float).ravel()
        if basis.shape[0] != n - 1 or weights.size != n - 1:
            raise InvalidInputError("elliptic cone needs n-1 basis vectors and n-1 weights")
        frame = np.vstack([axis, basis])
        if not np.all(np.isfinite(frame)) or not np.all(np.isfinite(weights)):
            raise InvalidInputError("elliptic cone data must be finite")
        if np.max(np.abs(frame @ frame.T - np.eye(n))) > ortho_tol:
            raise InvalidInputError("axis and basis must form an orthonormal system")
        if np.any(weights < 0) or (not allow_degenerate and np.any(weights <= 0)):
            raise InvalidInputError("elliptic weights must be positive")
        for arr in (axis, basis, weights):
            arr.setflags(write=False)
        return cls("elliptic", n, 1, axis, basis, weights)

    def __neg__(self) -> "ConeSpec":
        if self.kind == "elliptic":
            axis = -self.axis
            axis.setflags(write=False)
            return ConeSpec("elliptic", self.n, 1, axis, self.basis, self.weights)
        return ConeSpec(self.kind, self.n, -self.sign)

    def __repr__(self) -> str:
        if self.kind == "elliptic":
            return f"ConeSpec.elliptic(n={self.n}, weights={self.weights.tolist()})"
        return f"{'-' if self.sign < 0 else ''}ConeSpec.{self.kind}({self.n})"

    @property
    def self_dual(self) -> bool:
        return self.kind in ("orthant", "lorentz")

    @property
    def degenerate(self) -> bool:
        return self.kind == "elliptic" and bool(np.any(self.weights == 0))

    @property
    def subdual(self) -> bool:
        """``K ⊆ K*``; for an elliptic cone this means every weight is at least 1."""
        if self.self_dual:
            return True
        return bool(np.all(self.weights >= 1.0 - 1e-12))

    def frame(self) -> np.ndarray:
        """Rows ``a, b_2, ..., b_n`` (elliptic cones only)."""
        return np.vstack([self.axis, self.basis])

    def margin(self, x) -> np.ndarray:
        """Signed slack of the defining inequality, row-wise for stacked input."""
        x = np.asarray(x, dtype=float)
        if self.kind == "orthant":
            return np.min(self.sign * x, axis=-1)
        if self.kind == "lorentz":
            return self.sign * x[..., 0] - np.linalg.norm(x[..., 1:], axis=-1)
        z = x @ self.frame().T
        return z[..., 0] - np.sqrt(np.sum(self.weights * z[..., 1:] ** 2, axis=-1))

    def dual_weights(self) -> np.ndarray:
        return 1.0 / self.weights

    def chart(self):
        """``(T, base)`` with ``K = T(base)``, base being 'orthant' or 'lorentz'."""
        if self.kind in ("orthant", "lorentz"):
            return self.sign * np.eye(self.n), self.kind
        if self.degenerate:
            raise UnsupportedConeError("degenerate elliptic cone has no Lorentz chart")
        scale = np.concatenate([[1.0], 1.0 / np.sqrt(self.weights)])
        return self.frame().T * scale, "lorentz"

    def to_dict(self) -> dict:
        if self.kind == "elliptic":
            return {"type": "elliptic", "n": self.n, "axis": self.axis.tolist(),
                    "basis": self.basis.tolist(), "weights": self.weights.tolist()}
        out = {"type": self.kind, "n": self.n}
        if self.sign < 0:
            out["negated"] = True
        return out

    @classmethod
    def from_dict(cls, d: dict, n: int | None = None) -> "ConeSpec":
        kind = str(d.get("type", "")).lower()
        dim = d.get("n", n)
        if kind in ("orthant", "lorentz"):
            if dim is None:
                raise InvalidInputError("cone dimension missing")
            if n is not None and int(dim) != n:
                raise InvalidInputError(f"cone dimension {dim} does not match matrix dimension {n}")
            cone = getattr(cls, kind)(int(dim))
            return -cone if d.get("negated", False) else cone
        if kind == "elliptic":
            try:
                cone = cls.elliptic(d["axis"], d["basis"], d["weights"])
            except KeyError as exc:
                raise InvalidInputError(f"elliptic cone missing field {exc}") from None
            if n is not None and cone.n != n:
                raise InvalidInputError(f"cone dimension {cone.n} does not match matrix dimension {n}")
            return cone
        raise InvalidInputError(f"unknown cone type {d.get('type')!r}")


def _check_dim(n):
    if int(n) != n or n < 2:
        raise InvalidInputError("cone dimension must be an integer >= 2")


def _as_vector(K: ConeSpec, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != K.n:
        raise InvalidInputError(f"vector of dimension {x.shape[-1]} for a cone in R^{K.n}")
    return x


def contains(K: ConeSpec, x, tol: float = MEMBERSHIP_TOL, *, strict: bool = False):
    """Membership test; ``strict=True`` demands a margin larger than ``tol``."""
    m = K.margin(_as_vector(K, x))
    res = m > tol if strict else m >= -tol
    return bool(res) if np.ndim(res) == 0 else res


# ---------------------------------------------------------------------------
# sampling


def sample_cap(K: ConeSpec, m: int, rng: np.random.Generator, *, strict_margin: float = INTERIOR_MARGIN,
               boundary_fraction: float = 0.0, boundary_band: float = 0.05,
               budget: int = SAMPLING_BUDGET) -> np.ndarray:
    """``m`` unit vectors strictly inside ``K``.

    Orthant and Lorentz caps are sampled uniformly; elliptic caps are the
    image of a uniform Lorentz sample.  A ``boundary_fraction`` of the rows is
    drawn from the band of defining-inequality margin below ``boundary_band``.
    """
    T, base = K.chart()
    n = K.n
    n_bdry = int(round(boundary_fraction * m))
    out = []
    have = 0
    drawn = 0
    while have < m:
        if drawn > budget:
            raise SamplingBudgetExceeded(f"could not sample the interior of {K!r}: cone too thin")
        want = m - have
        nb = min(n_bdry, want) if have == 0 else 0
        U = _sample_base(base, n, want, nb, boundary_band, rng)
        drawn += want
        X = U @ T.T
        X /= np.linalg.norm(X, axis=1)[:, None]
        X = X[K.margin(X) > strict_margin]
        out.append(X)
        have += X.shape[0]
    return np.vstack(out)[:m]


def _sample_base(base, n, m, n_bdry, band, rng):
    if base == "orthant":
        U = np.abs(rng.standard_normal((m, n)))
        U /= np.linalg.norm(U, axis=1)[:, None]
        if n_bdry:
            j = rng.integers(0, n, size=n_bdry)
            U[np.arange(n_bdry), j] = rng.uniform(0.0, band, size=n_bdry)
            U[:n_bdry] /= np.linalg.norm(U[:n_bdry], axis=1)[:, None]
        return U
    # Lorentz cap: polar angle phi in [0, pi/4) with density ~ sin^{n-2}(phi)
    phi = np.empty(m)
    got = 0
    s_max = math.sin(math.pi / 4)
    while got < m - n_bdry:
        cand = rng.uniform(0.0, math.pi / 4, size=2 * (m - n_bdry - got) + 8)
        keep = cand[rng.uniform(size=cand.size) < (np.sin(cand) / s_max) ** (n - 2)]
        take = keep[: m - n_bdry - got]
        phi[n_bdry + got: n_bdry + got + take.size] = take
        got += take.size
    if n_bdry:
        # margin cos(phi) - sin(phi) ~ sqrt(2) (pi/4 - phi)
        phi[:n_bdry] = math.pi / 4 - rng.uniform(0.0, band / math.sqrt(2), size=n_bdry)
    w = rng.standard_normal((m, n - 1))
    w /= np.linalg.norm(w, axis=1)[:, None]
    return np.hstack([np.cos(phi)[:, None], np.sin(phi)[:, None] * w])


# ---------------------------------------------------------------------------
# Moreau decomposition


@dataclass(frozen=True)
class MoreauParts:
    """``x = plus - minus`` with ``plus ∈ K``, ``minus ∈ K*`` and ``<plus, minus> = 0``."""

    plus: np.ndarray
    minus: np.ndarray

    @property
    def abs(self) -> np.ndarray:
        return self.plus + self.minus

    def to_dict(self) -> dict:
        # adding 0.0 turns -0.0 into 0.0
        return {"plus": (self.plus + 0.0).tolist(), "minus": (self.minus + 0.0).tolist(),
                "abs": (self.abs + 0.0).tolist()}


def project_lorentz(x) -> MoreauParts:
    """Moreau decomposition with respect to the Lorentz cone, in closed form."""
    x = np.asarray(x, dtype=float).ravel()
    if x.size < 2:
        raise InvalidInputError("Lorentz cone needs n >= 2")
    x1, x2 = x[0], x[1:]
    r = float(np.linalg.norm(x2))
    if x1 >= r:
        return MoreauParts(x.copy(), np.zeros_like(x))
    if -x1 >= r:
        return MoreauParts(np.zeros_like(x), -x)
    a = (x1 + r) / (2.0 * r)
    b = (r - x1) / (2.0 * r)
    plus = a * np.concatenate([[r], x2])
    minus = b * np.concatenate([[r], -x2])
    return MoreauParts(plus, minus)


def abs_lorentz(x) -> np.ndarray:
    """Absolute value ``|x|`` with respect to the Lorentz cone.

    For ``x_2 != 0`` this is ``(max(|x1|, r), min(|x1|, r) sgn(x1) x_2 / r)``
    with ``r = |x_2|``; for ``x_2 = 0`` the limit ``(|x1|, 0)``.
    """
    x = np.asarray(x, dtype=float).ravel()
    if not np.any(x):
        raise InvalidInputError("absolute value is defined for nonzero vectors")
    x1, x2 = x[0], x[1:]
    r = float(np.linalg.norm(x2))
    if r == 0.0:
        out = np.zeros_like(x)
        out[0] = abs(x1)
        return out
    return np.concatenate([[max(abs(x1), r)], min(abs(x1), r) * np.sign(x1) * x2 / r])


def moreau_decompose(K: ConeSpec, x) -> MoreauParts:
    """Closed-form Moreau decomposition for (possibly negated) orthants and Lorentz cones."""
    x = _as_vector(K, x).ravel()
    if K.kind == "elliptic":
        raise UnsupportedConeError("no closed-form projection onto elliptic cones")
    # P_{-K}(x) = -P_K(-x) and (-K)* = -K for self-dual K
    y = K.sign * x
    if K.kind == "orthant":
        parts = MoreauParts(np.maximum(y, 0.0), np.maximum(-y, 0.0))
    else:
        parts = project_lorentz(y)
    if K.sign < 0:
        return MoreauParts(-parts.plus, -parts.minus)
    return parts


# ---------------------------------------------------------------------------
# dual membership


def _linear_objective(y):
    def fun(X):
        return X @ y, np.broadcast_to(y, X.shape)
    return fun


def dual_contains(K: ConeSpec, y, tol: float = MEMBERSHIP_TOL, *, seed: int = 0,
                  n_starts: int = 32) -> Decision:
    """Is ``y`` in the dual cone ``K*``?

    Self-dual variants answer exactly.  For an elliptic cone the minimum of
    ``<y, x>`` over ``K ∩ S^{n-1}`` is searched by multi-start projected
    descent: YES when the minimum is at least ``-tol`` and the search
    converged, NO when a verified ``x ∈ K`` with ``<y, x> < -tol`` is found.
    """
    y = _as_vector(K, y).ravel()
    if K.self_dual:
        return Decision.YES if contains(K, y, tol) else Decision.NO
    if K.degenerate:
        raise UnsupportedConeError("dual membership of a degenerate elliptic cone")
    rng = np.random.default_rng(seed)
    # the axis and its image under the chart are natural extra starts
    res = multistart_minimize(_linear_objective(y), K, rng, n_starts=n_starts, sampler=sample_cap,
                              extra_starts=K.axis)
    i = res.best_index
    x, val = res.x[i], float(res.values[i])
    if val < -tol and contains(K, x) and float(x @ y) < -tol:
        return Decision.NO
    if val >= -tol and bool(res.converged[i]) and np.mean(res.converged) >= 0.5:
        return Decision.YES
    return Decision.INCONCLUSIVE


# ---------------------------------------------------------------------------
# level cones of a matrix


def theta(dec: SpectralDecomposition, c: float) -> np.ndarray:
    """Weights ``(lambda_i - c) / (c - lambda_1)`` for ``i = 2..n``."""
    lam = dec.eigenvalues
    return (lam[1:] - c) / (c - lam[0])


def elliptic_levelcone(dec: SpectralDecomposition, c: float | None = None) -> ConeSpec:
    """The cone ``L_c`` around the first eigenvector, for ``lambda_1 < c <= lambda_2``.

    At ``c = lambda_2`` the weights of eigenvalues equal to ``lambda_2``
    vanish and the returned cone is flagged degenerate.
    """
    lam = dec.eigenvalues
    if c is None:
        c = float(lam[1])
    if not (c > lam[0] + dec.gap_tol) or c > lam[1] + dec.gap_tol:
        raise DomainError(f"level c={c} must satisfy lambda_1 < c <= lambda_2 "
                          f"({lam[0]}, {lam[1]})")
    w = theta(dec, c)
    w[np.abs(lam[1:] - c) <= dec.gap_tol] = 0.0
    return ConeSpec.elliptic(dec.vectors[0], dec.vectors[1:], np.maximum(w, 0.0), allow_degenerate=True)


@dataclass(frozen=True, eq=False)
class WConeSpec:
    """``W = (L_c ∪ -L_c) ∩ int K`` with ``c = lambda_2`` by default."""

    decomposition: SpectralDecomposition
    base_cone: ConeSpec
    c: float | None = None
    level_cone: ConeSpec = field(init=False)

    def __post_init__(self):
        c = self.decomposition.lam(2) if self.c is None else float(self.c)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "level_cone", elliptic_levelcone(self.decomposition, c))

    def contains(self, x, tol: float = INTERIOR_MARGIN) -> bool:
        """Exact membership: strictly inside ``K`` and in ``L_c ∪ -L_c``."""
        x = np.asarray(x, dtype=float)
        L = self.level_cone
        z = x @ L.frame().T
        in_double_cone = abs(z[0]) - math.sqrt(float(np.sum(L.weights * z[1:] ** 2))) >= 0.0
        return bool(in_double_cone and contains(self.base_cone, x, tol, strict=True))


def _smooth_norm(v, eps=1e-12):
    return np.sqrt(v @ v + eps * eps)


def _cone_margin_constraints(K: ConeSpec, shift_index: int | None = None):
    """SLSQP inequality constraints ``margin_piece(x) - t >= 0``.

    Variables are ``z = (x, t)`` when ``shift_index`` is given, else ``x``.
    Orthants contribute one linear piece per coordinate.
    """
    n = K.n

    def wrap(fun, jac):
        if shift_index is None:
            return {"type": "ineq", "fun": fun, "jac": jac}

        def f(z):
            return fun(z[:n]) - z[n]

        def j(z):
            return np.concatenate([np.atleast_2d(jac(z[:n])), -np.ones((np.atleast_2d(jac(z[:n])).shape[0], 1))], axis=1)

        return {"type": "ineq", "fun": f, "jac": j}

    if K.kind == "orthant":
        s = K.sign
        return [wrap(lambda x: s * x, lambda x: s * np.eye(n))]
    if K.kind == "lorentz":
        s = K.sign

        def f(x):
            return np.array([s * x[0] - _smooth_norm(x[1:])])

        def j(x):
            g = np.empty(n)
            g[0] = s
            g[1:] = -x[1:] / _smooth_norm(x[1:])
            return g[None, :]

        return [wrap(f, j)]
    F = K.frame()
    w = K.weights

    def f(x):
        z = F @ x
        return np.array([z[0] - _smooth_norm(np.sqrt(w) * z[1:])])

    def j(x):
        z = F @ x
        r = _smooth_norm(np.sqrt(w) * z[1:])
        return (F[0] - (w * z[1:] / r) @ F[1:])[None, :]

    return [wrap(f, j)]


def _sphere_eq(n, with_t=False):
    def f(z):
        x = z[:n]
        return np.array([x @ x - 1.0])

    def j(z):
        g = np.zeros(z.size)
        g[:n] = 2.0 * z[:n]
        return g[None, :]

    return {"type": "eq", "fun": f, "jac": j}


def _ball_ineq(n):
    return {"type": "ineq", "fun": lambda x: np.array([1.0 - x @ x]), "jac": lambda x: (-2.0 * x)[None, :]}


@dataclass(frozen=True)
class WDualResult:
    decision: Decision
    min_value: float | None
    witness: np.ndarray | None = None
    diagnostic: str = ""


def w_dual_contains(w: WConeSpec, v, samples: int = 4000, tol: float = 1e-8, *, seed: int = 0,
                    n_local: int = 8) -> WDualResult:
    """Is ``v`` in the dual of ``W``?

    ``W`` splits into the convex pieces ``K ∩ L_c`` and ``K ∩ -L_c``.  On each
    piece the minimum of ``<v, x>`` over the unit ball is a convex program,
    solved by SLSQP from the best sampled members; its sign equals the sign
    of the minimum over ``piece ∩ S^{n-1}``.
    """
    v = np.asarray(v, dtype=float).ravel()
    K, L = w.base_cone, w.level_cone
    if not np.any(v):
        return WDualResult(Decision.YES, 0.0)
    rng = np.random.default_rng(seed)
    try:
        pts = sample_cap(K, samples, rng, boundary_fraction=0.1)
    except SamplingBudgetExceeded as exc:
        return WDualResult(Decision.INCONCLUSIVE, None, diagnostic=str(exc))
    members = pts[[w.contains(p) for p in pts]]
    if members.shape[0] == 0:
        return WDualResult(Decision.INCONCLUSIVE, None,
                           diagnostic=f"no sampled point of W among {samples} draws")
    vals = members @ v
    best_i = int(np.argmin(vals))
    best_val, witness = float(vals[best_i]), members[best_i]
    all_converged = True
    z_axis = members @ L.axis
    for piece_sign in (1.0, -1.0):
        piece = members[z_axis * piece_sign >= 0]
        piece_cone = L if piece_sign > 0 else -L
        cons = _cone_margin_constraints(K) + _cone_margin_constraints(piece_cone) + [_ball_ineq(K.n)]
        if piece.shape[0] == 0:
            continue
        successes = 0
        order = np.argsort(piece @ v, kind="stable")
        starts = np.vstack([piece[order[: n_local // 2]],
                            piece[rng.choice(piece.shape[0], size=min(n_local // 2, piece.shape[0]), replace=False)]])
        for x0 in starts:
            res = minimize(lambda x: float(x @ v), x0, jac=lambda x: v, method="SLSQP",
                           constraints=cons, options={"maxiter": 500, "ftol": 1e-14})
            x = res.x
            nx = float(np.linalg.norm(x))
            # the apex is a kink of the constraints; stopping there with value 0 is expected
            at_apex = nx < 1e-9 and float(x @ v) >= -tol
            successes += bool(res.success)
            all_converged &= bool(res.success) or at_apex
            if nx < 1e-12:
                continue
            xu = x / nx
            val = float(xu @ v)
            if val < best_val:
                cand = _pull_into_interior(xu, piece, w, v)
                if cand is not None:
                    best_val, witness = float(cand @ v), cand
                elif val >= -tol:
                    best_val = min(best_val, val)
        all_converged &= successes > 0
    if best_val < -10 * tol and w.contains(witness) and float(witness @ v) < -10 * tol:
        return WDualResult(Decision.NO, best_val, witness)
    if best_val >= -tol and all_converged:
        return WDualResult(Decision.YES, best_val)
    return WDualResult(Decision.INCONCLUSIVE, best_val, None,
                       diagnostic="optimizer did not converge" if not all_converged else "margin below resolution")


def _pull_into_interior(x, piece_members, w: WConeSpec, v):
    """Move an optimizer point slightly toward sampled members until it is an exact member of W."""
    if w.contains(x):
        return x
    anchor = piece_members[int(np.argmin(piece_members @ v))]
    for t in (1e-9, 1e-7, 1e-5, 1e-3, 1e-2):
        y = (1 - t) * x + t * anchor
        y /= np.linalg.norm(y)
        if w.contains(y):
            return y
    return None


# ---------------------------------------------------------------------------
# intersections


@dataclass(frozen=True)
class IntersectionResult:
    status: Intersection
    max_joint_margin: float
    witness: np.ndarray | None = None
    converged_starts: int = 0


def joint_margin(K: ConeSpec, L: ConeSpec, x) -> np.ndarray:
    return np.minimum(K.margin(x), L.margin(x))


def intersection_trivial(K: ConeSpec, L: ConeSpec, budget: int = 24, tol: float = MEMBERSHIP_TOL, *,
                         seed: int = 0) -> IntersectionResult:
    """Decide whether ``K ∩ L = {0}`` by maximizing the joint margin on the sphere.

    NONTRIVIAL when a unit vector in both cones (within ``tol``) is found;
    TRIVIAL when the best joint margin over ``budget`` converged starts is at
    most ``-10 tol``; INCONCLUSIVE otherwise.
    """
    if K.n != L.n:
        raise InvalidInputError("cones live in different dimensions")
    n = K.n
    rng = np.random.default_rng(seed)
    pool = [rng.standard_normal((64 * budget, n))]
    for C in (K, L):
        try:
            pool.append(sample_cap(C, 8 * budget, rng, strict_margin=0.0, boundary_fraction=0.2))
        except (UnsupportedConeError, SamplingBudgetExceeded):
            pass
    if L.kind == "elliptic":
        pool.append(L.axis[None, :])
    if K.kind == "elliptic":
        pool.append(K.axis[None, :])
    P = np.vstack(pool)
    P /= np.linalg.norm(P, axis=1)[:, None]
    jm = joint_margin(K, L, P)
    order = np.argsort(-jm, kind="stable")
    best_x = P[order[0]]
    best = float(jm[order[0]])
    if best >= -tol:
        return IntersectionResult(Intersection.NONTRIVIAL, best, best_x, 0)
    cons = (_cone_margin_constraints(K, shift_index=n) + _cone_margin_constraints(L, shift_index=n)
            + [_sphere_eq(n, with_t=True)])
    half = budget // 2
    starts = np.vstack([P[order[:half]], P[rng.choice(P.shape[0], size=budget - half, replace=False)]])
    converged = 0
    for x0 in starts:
        z0 = np.concatenate([x0, [float(joint_margin(K, L, x0))]])
        res = minimize(lambda z: -z[n], z0, jac=lambda z: np.concatenate([np.zeros(n), [-1.0]]),
                       method="SLSQP", constraints=cons, options={"maxiter": 300, "ftol": 1e-13})
        converged += bool(res.success)
        x = res.x[:n]
        nx = float(np.linalg.norm(x))
        if nx < 1e-12:
            continue
        x = x / nx
        m = float(joint_margin(K, L, x))
        if m > best:
            best, best_x = m, x
    if best >= -tol and contains(K, best_x, tol) and contains(L, best_x, tol):
        return IntersectionResult(Intersection.NONTRIVIAL, best, best_x, converged)
    if best <= -10 * tol and converged > 0:
        return IntersectionResult(Intersection.TRIVIAL, best, None, converged)
    return IntersectionResult(Intersection.INCONCLUSIVE, best, best_x, converged)
