"""Sampling oracles for spherical quasi-convexity of ``q_A`` on ``int K ∩ S^{n-1}``.

Three independent refuters are provided:

* :func:`geodesic_quasiconvexity_test` looks for a point on a minimal
  geodesic where ``q_A`` exceeds both endpoint values;
* :func:`pairwise_test` checks ``<Ax, y> <= <x, y> max(q_A(x), q_A(y))``
  on unit pairs and its Rayleigh-quotient form on unnormalized pairs;
* :func:`sublevel_convexity_test` looks for convex combinations escaping a
  sublevel set ``{x in int K : phi_A(x) <= c}``.

None of them can certify quasi-convexity: ``NO_VIOLATION`` only means the
budget was exhausted.  Every ``VIOLATED`` result carries a
:class:`Counterexample` that re-verifies from its stored data alone.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .cones import ConeSpec, contains, sample_cap
from .errors import DegenerateGeodesicError, InvalidInputError
from .linalg import as_symmetric, quad

DEFAULT_TOL = 1e-8
ANTIPODAL_GAP = 1e-6
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


class OracleStatus(str, enum.Enum):
    NO_VIOLATION = "NO_VIOLATION"
    VIOLATED = "VIOLATED"


class CounterexampleKind(str, enum.Enum):
    GEODESIC = "GEODESIC"
    PAIRWISE = "PAIRWISE"
    SUBLEVEL = "SUBLEVEL"


def rayleigh(A, x) -> float:
    """``<Ax, x> / |x|^2``."""
    x = np.asarray(x, dtype=float)
    nrm2 = float(x @ x)
    if nrm2 == 0.0:
        raise InvalidInputError("Rayleigh quotient of the zero vector")
    return float(quad(np.asarray(A, dtype=float), x)) / nrm2


def _rayleigh_rows(A, X):
    return quad(A, X) / np.sum(X * X, axis=-1)


def geodesic_point(x, y, t):
    """Point at fraction ``t`` of the minimal arc from unit ``x`` to unit ``y``.

    ``t`` may be an array, in which case rows are returned.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    cos = float(np.clip(x @ y, -1.0, 1.0))
    theta = math.acos(cos)
    if theta < 1e-12 or theta > math.pi - 1e-12:
        raise DegenerateGeodesicError("geodesic endpoints coincide or are antipodal")
    t = np.asarray(t, dtype=float)
    s = math.sin(theta)
    p = (np.sin((1.0 - t) * theta)[..., None] * x + np.sin(t * theta)[..., None] * y) / s
    return p[()] if t.ndim else p.reshape(x.shape)


@dataclass(frozen=True)
class GeodesicSample:
    """Endpoints of a tested minimal geodesic."""

    x: np.ndarray
    y: np.ndarray
    theta: float
    grid: int


@dataclass(frozen=True, eq=False)
class Counterexample:
    """A violation that can be recomputed from ``data`` alone.

    ``data`` holds, by kind:

    * GEODESIC: ``x``, ``y`` (unit endpoints) and ``t``; the margin is
      ``q(gamma(t)) - max(q(x), q(y))``;
    * PAIRWISE: ``x``, ``y`` and ``form`` (``"b"`` for unit pairs,
      ``"c"`` for the Rayleigh form);
    * SUBLEVEL: ``c``, ``x``, ``y`` and ``s``; the margin is
      ``phi((1 - s) x + s y) - c``.
    """

    kind: CounterexampleKind
    data: dict
    margin: float

    def recompute(self, A) -> float:
        a = np.asarray(A, dtype=float)
        d = self.data
        x, y = np.asarray(d["x"], dtype=float), np.asarray(d["y"], dtype=float)
        if self.kind is CounterexampleKind.GEODESIC:
            z = geodesic_point(x, y, float(d["t"]))
            return float(quad(a, z)) - max(float(quad(a, x)), float(quad(a, y)))
        if self.kind is CounterexampleKind.PAIRWISE:
            return _pair_margin(a, x, y, d["form"])
        z = (1.0 - float(d["s"])) * x + float(d["s"]) * y
        return rayleigh(a, z) - float(d["c"])

    def verify(self, A, K: ConeSpec, tol: float = DEFAULT_TOL) -> bool:
        """Recompute the margin and check every side condition exactly."""
        a = np.asarray(A, dtype=float)
        d = self.data
        x, y = np.asarray(d["x"], dtype=float), np.asarray(d["y"], dtype=float)
        if not (contains(K, x, 0.0, strict=True) and contains(K, y, 0.0, strict=True)):
            return False
        if self.kind is CounterexampleKind.SUBLEVEL:
            c = float(d["c"])
            if rayleigh(a, x) > c or rayleigh(a, y) > c or not 0.0 < float(d["s"]) < 1.0:
                return False
        elif self.kind is CounterexampleKind.GEODESIC:
            if not 0.0 < float(d["t"]) < 1.0:
                return False
            if float(x @ y) < math.cos(math.pi - ANTIPODAL_GAP):
                return False
        return self.recompute(a) > tol

    def to_dict(self) -> dict:
        data = {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in self.data.items()}
        return {"kind": self.kind.value, "data": data, "margin": self.margin}


@dataclass(frozen=True)
class OracleResult:
    status: OracleStatus
    counterexample: Counterexample | None = None
    tested: int = 0
    max_margin: float = -math.inf
    diagnostics: tuple = field(default_factory=tuple)

    @property
    def violated(self) -> bool:
        return self.status is OracleStatus.VIOLATED

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "counterexample": None if self.counterexample is None else self.counterexample.to_dict(),
            "tested": self.tested,
            "max_margin": self.max_margin if np.isfinite(self.max_margin) else None,
            "diagnostics": list(self.diagnostics),
        }


# ---------------------------------------------------------------------------
# geodesics


def _arc_values(a, b, c, theta, t):
    """``q`` on the arcs, rows of pairs by columns of ``t``, from the Gram data."""
    s = np.sin(theta)[:, None]
    s1 = np.sin((1.0 - t) * theta[:, None]) / s
    s2 = np.sin(t * theta[:, None]) / s
    return s1 * s1 * a[:, None] + 2.0 * s1 * s2 * c[:, None] + s2 * s2 * b[:, None]


def _arc_maxima(a, b, c, theta, grid: int, iters: int = 60):
    """Grid search plus golden-section refinement of ``q`` on each arc."""
    t = np.linspace(0.0, 1.0, grid)[1:-1]
    F = _arc_values(a, b, c, theta, t[None, :])
    j = np.argmax(F, axis=1)
    h = 1.0 / (grid - 1)
    lo = np.clip(t[j] - h, 0.0, 1.0)
    hi = np.clip(t[j] + h, 0.0, 1.0)
    # golden-section on the bracketing cell; q is a sinusoid in t, unimodal on it
    for _ in range(iters):
        m1 = hi - _INVPHI * (hi - lo)
        m2 = lo + _INVPHI * (hi - lo)
        f1 = _arc_values(a, b, c, theta, m1[:, None])[:, 0]
        f2 = _arc_values(a, b, c, theta, m2[:, None])[:, 0]
        left = f1 >= f2
        hi = np.where(left, m2, hi)
        lo = np.where(left, lo, m1)
    tr = 0.5 * (lo + hi)
    fr = _arc_values(a, b, c, theta, tr[:, None])[:, 0]
    use = fr >= F[np.arange(F.shape[0]), j]
    tbest = np.where(use, tr, t[j])
    fbest = np.where(use, fr, F[np.arange(F.shape[0]), j])
    return tbest, fbest


def _pair_stream(K, samples, rng, boundary_fraction, batch):
    """Endpoint pairs in the open cap, in batches, discarding near-antipodal pairs."""
    done = 0
    while done < samples:
        m = min(batch, samples - done)
        X = sample_cap(K, m, rng, boundary_fraction=boundary_fraction)
        Y = sample_cap(K, m, rng, boundary_fraction=boundary_fraction)
        yield done, X, Y
        done += m


def shrink_geodesic(A, x, y, t, tol: float = DEFAULT_TOL, steps: int = 40):
    """Shrink ``[x, y]`` around the violating parameter ``t`` while the violation persists.

    Returns ``(x', y', t')`` on the same arc with the sub-arc as short as
    the bisection allows and margin still above ``tol``.
    """
    a_mat = np.asarray(A, dtype=float)
    lo, hi = 0.0, 1.0
    peak = float(quad(a_mat, geodesic_point(x, y, t)))

    def margin(l, h):
        ends = geodesic_point(x, y, np.array([l, h]))
        return peak - float(np.max(quad(a_mat, ends)))

    for _ in range(steps):
        nl = 0.5 * (lo + t)
        if margin(nl, hi) > tol and margin(nl, hi) >= 0.5 * margin(lo, hi):
            lo = nl
        nh = 0.5 * (hi + t)
        if margin(lo, nh) > tol and margin(lo, nh) >= 0.5 * margin(lo, hi):
            hi = nh
    xs, ys = geodesic_point(x, y, np.array([lo, hi]))
    return xs, ys, (t - lo) / (hi - lo)


def _geodesic_cex(a, x, y, t, tol, K):
    margin = float(quad(a, geodesic_point(x, y, t))) - max(float(quad(a, x)), float(quad(a, y)))
    if margin <= tol:
        return None
    xs, ys, ts = shrink_geodesic(a, x, y, t, tol)
    cex = Counterexample(CounterexampleKind.GEODESIC, {"x": xs, "y": ys, "t": ts}, 0.0)
    m = cex.recompute(a)
    cex = Counterexample(CounterexampleKind.GEODESIC, cex.data, m)
    if cex.verify(a, K, tol):
        return cex
    cex = Counterexample(CounterexampleKind.GEODESIC, {"x": x, "y": y, "t": t}, margin)
    return cex if cex.verify(a, K, tol) else None


def geodesic_quasiconvexity_test(A, K: ConeSpec, samples: int = 10000, grid: int = 33, seed: int = 0,
                                 tol: float = DEFAULT_TOL, *, boundary_fraction: float = 0.1,
                                 batch: int = 8192) -> OracleResult:
    """Search sampled minimal geodesics of the cap for a violation of quasi-convexity.

    The first violating sample (lowest index) is refined to a short sub-arc
    and returned.
    """
    a = as_symmetric(A)
    if samples < 1 or grid < 3:
        raise InvalidInputError("need samples >= 1 and grid >= 3")
    rng = np.random.default_rng(seed)
    best = -math.inf
    tested = 0
    for _, X, Y in _pair_stream(K, samples, rng, boundary_fraction, batch):
        cos = np.clip(np.sum(X * Y, axis=1), -1.0, 1.0)
        theta = np.arccos(cos)
        keep = (theta > 1e-9) & (theta < math.pi - ANTIPODAL_GAP)
        X, Y, theta = X[keep], Y[keep], theta[keep]
        tested += X.shape[0]
        if X.shape[0] == 0:
            continue
        qa, qb = quad(a, X), quad(a, Y)
        qc = np.einsum("ij,jk,ik->i", X, a, Y)
        t, f = _arc_maxima(qa, qb, qc, theta, grid)
        m = f - np.maximum(qa, qb)
        best = max(best, float(np.max(m)))
        for i in np.flatnonzero(m > tol):
            cex = _geodesic_cex(a, X[i], Y[i], float(t[i]), tol, K)
            if cex is not None:
                return OracleResult(OracleStatus.VIOLATED, cex, tested, best)
    return OracleResult(OracleStatus.NO_VIOLATION, None, tested, best)


def arc_violation(A, x, y, tol: float = DEFAULT_TOL, grid: int = 65, K: ConeSpec | None = None):
    """Geodesic counterexample on the single arc ``[x, y]`` (unit vectors), or None."""
    a = np.asarray(A, dtype=float)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    theta = math.acos(float(np.clip(x @ y, -1.0, 1.0)))
    if theta < 1e-9 or theta > math.pi - ANTIPODAL_GAP:
        return None
    t, f = _arc_maxima(np.array([quad(a, x)]), np.array([quad(a, y)]),
                       np.array([x @ a @ y]), np.array([theta]), grid)
    if K is None:
        margin = float(f[0]) - max(float(quad(a, x)), float(quad(a, y)))
        if margin <= tol:
            return None
        return Counterexample(CounterexampleKind.GEODESIC, {"x": x, "y": y, "t": float(t[0])}, margin)
    return _geodesic_cex(a, x, y, float(t[0]), tol, K)


# ---------------------------------------------------------------------------
# pairwise inequalities


def _pair_margin(a, x, y, form):
    axy = float(x @ a @ y)
    xy = float(x @ y)
    if form == "b":
        return axy - xy * max(float(quad(a, x)), float(quad(a, y)))
    return axy / xy - max(rayleigh(a, x), rayleigh(a, y))


def pairwise_test(A, K: ConeSpec, pairs: int = 10000, seed: int = 0, tol: float = DEFAULT_TOL, *,
                  forms: str = "bc", boundary_fraction: float = 0.1, batch: int = 8192) -> OracleResult:
    """Check the pairwise inequalities characterizing quasi-convexity.

    Form ``b`` uses unit pairs of the cap; form ``c`` uses the Rayleigh
    version on pairs with random positive scales and ``|<x, y>| > 1e-8``.
    """
    a = as_symmetric(A)
    if pairs < 1:
        raise InvalidInputError("pairs must be positive")
    rng = np.random.default_rng(seed)
    best = -math.inf
    tested = 0
    for _, X, Y in _pair_stream(K, pairs, rng, boundary_fraction, batch):
        axy = np.einsum("ij,jk,ik->i", X, a, Y)
        xy = np.sum(X * Y, axis=1)
        ok = np.abs(xy) > 1e-8
        cands = []
        if "b" in forms:
            mb = axy - xy * np.maximum(quad(a, X), quad(a, Y))
            cands.append(("b", X, Y, mb))
        if "c" in forms:
            # random positive scales leave phi unchanged but exercise the homogeneous form
            sx = np.exp(rng.uniform(-3.0, 3.0, size=X.shape[0]))[:, None]
            sy = np.exp(rng.uniform(-3.0, 3.0, size=X.shape[0]))[:, None]
            Xc, Yc = sx * X, sy * Y
            xyc = np.sum(Xc * Yc, axis=1)
            with np.errstate(divide="ignore", invalid="ignore"):
                mc = np.einsum("ij,jk,ik->i", Xc, a, Yc) / xyc - np.maximum(_rayleigh_rows(a, Xc),
                                                                             _rayleigh_rows(a, Yc))
            mc = np.where(ok, mc, -np.inf)
            cands.append(("c", Xc, Yc, mc))
        tested += X.shape[0]
        # lowest sample index wins; at equal index form b precedes c
        first = None
        for form, P, Q, m in cands:
            best = max(best, float(np.max(m)))
            hits = np.flatnonzero(m > tol)
            for i in hits:
                cex = Counterexample(CounterexampleKind.PAIRWISE, {"x": P[i], "y": Q[i], "form": form},
                                     _pair_margin(a, P[i], Q[i], form))
                if cex.verify(a, K, tol):
                    if first is None or i < first[0]:
                        first = (i, cex)
                    break
        if first is not None:
            return OracleResult(OracleStatus.VIOLATED, first[1], tested, best)
    return OracleResult(OracleStatus.NO_VIOLATION, None, tested, best)


# ---------------------------------------------------------------------------
# sublevel sets


def default_levels(A, K: ConeSpec, levels: int, rng) -> np.ndarray:
    """Levels inside ``(lambda_1, lambda_n)``: quantiles of ``q_A`` on sampled cap points."""
    lam = np.linalg.eigvalsh(A)
    X = sample_cap(K, 4096, rng)
    q = quad(A, X)
    qs = np.quantile(q, np.linspace(0.05, 0.95, levels))
    return np.clip(qs, lam[0], lam[-1])


def sublevel_convexity_test(A, K: ConeSpec, levels=16, pairs: int = 2000, seed: int = 0,
                            tol: float = DEFAULT_TOL, *, pool: int = 4096,
                            boundary_fraction: float = 0.1) -> OracleResult:
    """Look for convex combinations escaping a sublevel set of the Rayleigh quotient.

    ``levels`` is a count (levels are then spread over the sampled range of
    ``q_A``) or an explicit sequence.  Levels outside ``[lambda_1, lambda_n]``
    give the empty set or the whole cone and are skipped.  For each level
    the midpoint and three random convex combinations of each member pair
    are tested.
    """
    a = as_symmetric(A)
    rng = np.random.default_rng(seed)
    lam = np.linalg.eigvalsh(a)
    if np.ndim(levels) == 0:
        cs = default_levels(a, K, int(levels), rng)
    else:
        cs = np.asarray(levels, dtype=float).ravel()
    diags = []
    best = -math.inf
    tested = 0
    for c in cs:
        c = float(c)
        if c < lam[0] or c >= lam[-1]:
            diags.append(f"level {c:.6g} outside (lambda_1, lambda_n): set is empty or the whole cone")
            continue
        X = sample_cap(K, pool, rng, boundary_fraction=boundary_fraction)
        members = X[quad(a, X) <= c]
        if members.shape[0] < 2:
            diags.append(f"level {c:.6g}: fewer than two sampled members")
            continue
        i = rng.integers(0, members.shape[0], size=pairs)
        j = rng.integers(0, members.shape[0], size=pairs)
        P, Q = members[i], members[j]
        # random positive scales: the set is a cone, membership is scale-free
        P = P * np.exp(rng.uniform(-1.0, 1.0, size=pairs))[:, None]
        Q = Q * np.exp(rng.uniform(-1.0, 1.0, size=pairs))[:, None]
        S = np.column_stack([np.full(pairs, 0.5), rng.uniform(0.0, 1.0, size=(pairs, 3))])
        Z = (1.0 - S)[:, :, None] * P[:, None, :] + S[:, :, None] * Q[:, None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            M = _rayleigh_rows(a, Z) - c
        M = np.where(np.isfinite(M), M, -np.inf)
        tested += pairs
        best = max(best, float(np.max(M)))
        for k in np.flatnonzero(np.any(M > tol, axis=1)):
            col = int(np.flatnonzero(M[k] > tol)[0])
            cex = Counterexample(CounterexampleKind.SUBLEVEL,
                                 {"c": c, "x": P[k], "y": Q[k], "s": float(S[k, col])}, float(M[k, col]))
            if cex.verify(a, K, tol):
                return OracleResult(OracleStatus.VIOLATED, cex, tested, best, tuple(diags))
    return OracleResult(OracleStatus.NO_VIOLATION, None, tested, best, tuple(diags))


# ---------------------------------------------------------------------------
# transfers between oracles


def geodesic_to_sublevel(A, cex: Counterexample) -> Counterexample:
    """Sublevel escape at level ``c = max(q(x), q(y))`` from a geodesic violation.

    ``gamma(t)`` is a positive combination of ``x`` and ``y``; rescaled to a
    convex combination it has Rayleigh quotient ``q(gamma(t)) > c``.
    """
    if cex.kind is not CounterexampleKind.GEODESIC:
        raise InvalidInputError("expected a geodesic counterexample")
    a = np.asarray(A, dtype=float)
    x, y, t = cex.data["x"], cex.data["y"], float(cex.data["t"])
    theta = math.acos(float(np.clip(x @ y, -1.0, 1.0)))
    s1, s2 = math.sin((1.0 - t) * theta), math.sin(t * theta)
    # same arithmetic as the membership check in verify()
    c = max(rayleigh(a, x), rayleigh(a, y))
    s = s2 / (s1 + s2)
    out = Counterexample(CounterexampleKind.SUBLEVEL, {"c": c, "x": x, "y": y, "s": s}, 0.0)
    return Counterexample(CounterexampleKind.SUBLEVEL, out.data, out.recompute(a))


def sublevel_to_geodesic(A, cex: Counterexample) -> Counterexample:
    """Geodesic violation between the normalized members of a sublevel escape."""
    if cex.kind is not CounterexampleKind.SUBLEVEL:
        raise InvalidInputError("expected a sublevel counterexample")
    a = np.asarray(A, dtype=float)
    x, y, s = cex.data["x"], cex.data["y"], float(cex.data["s"])
    xu, yu = x / np.linalg.norm(x), y / np.linalg.norm(y)
    z = (1.0 - s) * x + s * y
    zu = z / np.linalg.norm(z)
    theta = math.acos(float(np.clip(xu @ yu, -1.0, 1.0)))
    t = math.acos(float(np.clip(xu @ zu, -1.0, 1.0))) / theta
    out = Counterexample(CounterexampleKind.GEODESIC, {"x": xu, "y": yu, "t": t}, 0.0)
    return Counterexample(CounterexampleKind.GEODESIC, out.data, out.recompute(a))


def pairwise_to_geodesic(A, cex: Counterexample, K: ConeSpec | None = None,
                         tol: float = DEFAULT_TOL) -> Counterexample | None:
    """Maximize ``q`` along the arc of a violating pair."""
    x, y = cex.data["x"], cex.data["y"]
    return arc_violation(A, x / np.linalg.norm(x), y / np.linalg.norm(y), tol, K=K)


def geodesic_to_pairwise(A, cex: Counterexample, form: str = "b") -> Counterexample:
    """Pairwise inequality evaluated at the sub-arc endpoints ``x``, ``gamma(t)``."""
    a = np.asarray(A, dtype=float)
    x, y, t = cex.data["x"], cex.data["y"], float(cex.data["t"])
    # the endpoint with the larger value together with the peak violates the inequality
    z = geodesic_point(x, y, t)
    best = None
    for p, q in ((x, y), (x, z), (z, y)):
        m = _pair_margin(a, p, q, form)
        if best is None or m > best[2]:
            best = (p, q, m)
    return Counterexample(CounterexampleKind.PAIRWISE, {"x": best[0], "y": best[1], "form": form}, best[2])
