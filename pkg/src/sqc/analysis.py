"""Decision engine for spherical quasi-convexity of ``q_A`` on ``int K ∩ S^{n-1}``.

Each known condition is evaluated into a :class:`ConditionOutcome`.  The
verdict follows a fixed precedence: exact characterizations, then failed
necessary conditions, then satisfied sufficient conditions, then verified
oracle counterexamples; anything else is UNKNOWN.

Conditions are stated for subdual cones (``K ⊆ K*``); on other cones only
the oracles are consulted.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field

import numpy as np

from ._capopt import multistart_minimize
from .cones import (ConeSpec, Decision, Intersection, WConeSpec, contains, dual_contains,
                    elliptic_levelcone, intersection_trivial, moreau_decompose, sample_cap,
                    w_dual_contains)
from .copositivity import (CopositivityStatus, ZStatus, certify_copositive, maximize_s_lemma,
                           z_property_sampled)
from .errors import DomainError, InvalidInputError, SQCError
from .linalg import SpectralDecomposition, as_symmetric, quad, spectral_decompose
from .oracle import geodesic_quasiconvexity_test, sublevel_convexity_test


class Verdict(str, enum.Enum):
    CERTIFIED_QUASICONVEX = "CERTIFIED_QUASICONVEX"
    CERTIFIED_NOT = "CERTIFIED_NOT"
    UNKNOWN = "UNKNOWN"


class Status(str, enum.Enum):
    HOLDS = "HOLDS"
    FAILS = "FAILS"
    NOT_APPLICABLE = "NOT_APPLICABLE"
    INCONCLUSIVE = "INCONCLUSIVE"


class ConditionId(str, enum.Enum):
    NEC_MULT_ONE = "NEC_MULT_ONE"
    NEC_LAMBDA2_SPLIT = "NEC_LAMBDA2_SPLIT"
    NEC_Z_PROPERTY = "NEC_Z_PROPERTY"
    SUF_BEST_III = "SUF_BEST_III"
    SUF_COUNTERGG = "SUF_COUNTERGG"
    SUF_ALPHA_ETA = "SUF_ALPHA_ETA"
    SUF_TWO_EIG = "SUF_TWO_EIG"
    SUF_CONV_SL = "SUF_CONV_SL"
    CHAR_SELFDUAL_IV = "CHAR_SELFDUAL_IV"
    CHAR_LORENTZ_2EIG = "CHAR_LORENTZ_2EIG"

    @property
    def role(self) -> str:
        return {"NEC": "necessary", "SUF": "sufficient", "CHA": "characterization"}[self.value[:3]]


# fixed keys for per-condition random streams
_STREAM = {"cap": 1, "z": 2, "copos": 3, "wdual": 4, "alpha": 5, "conv": 6, "oracle": 7, "dual": 8}


@dataclass(frozen=True)
class AnalysisOptions:
    """Tolerances and budgets of :func:`analyze`.

    Attributes
    ----------
    tol : float
        Additive tolerance for inequalities, copositivity and oracle margins.
    seed : int
        Root seed; every randomized step derives its own stream from it.
    gap_tol : float or None
        Eigenvalue grouping tolerance (default relative ``1e-8``).
    cap_starts : int
        Starts of the multi-start cap optimizers.
    oracle_samples : int
        Geodesic samples used when the oracle is consulted.
    exhaustive : bool
        Evaluate every condition instead of stopping at the first decisive one.
    cross_validate : bool
        Run the oracle even when the verdict is already certified.
    """

    tol: float = 1e-8
    seed: int = 42
    gap_tol: float | None = None
    cap_starts: int = 64
    z_pairs: int = 2000
    copositivity_samples: int = 2000
    w_samples: int = 4000
    intersection_budget: int = 24
    oracle_samples: int = 20000
    oracle_levels: int = 16
    oracle_pairs: int = 2000
    exhaustive: bool = False
    cross_validate: bool = False
    use_oracle: bool = True
    include_timings: bool = False

    def __post_init__(self):
        if not self.tol > 0:
            raise InvalidInputError("tol must be positive")
        if self.gap_tol is not None and not self.gap_tol > 0:
            raise InvalidInputError("gap_tol must be positive")
        for name in ("cap_starts", "z_pairs", "copositivity_samples", "w_samples",
                     "intersection_budget", "oracle_samples", "oracle_levels", "oracle_pairs"):
            if getattr(self, name) < 1:
                raise InvalidInputError(f"{name} must be positive")

    def stream_seed(self, key: str) -> int:
        return int(np.random.default_rng([self.seed, _STREAM[key]]).integers(2**62))

    def rng(self, key: str) -> np.random.Generator:
        return np.random.default_rng([self.seed, _STREAM[key]])

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class ConditionOutcome:
    condition_id: ConditionId
    status: Status
    evidence: dict = field(default_factory=dict)

    @property
    def role(self) -> str:
        return self.condition_id.role

    def to_dict(self) -> dict:
        return {"condition_id": self.condition_id.value, "role": self.role,
                "status": self.status.value, "evidence": self.evidence}


@dataclass(frozen=True)
class AnalysisReport:
    verdict: Verdict
    basis: str | None
    outcomes: tuple
    spectral: dict
    cone: dict
    provenance: dict
    oracle_summary: dict | None = None
    notes: tuple = ()
    conflicts: tuple = ()

    def outcome(self, cid: ConditionId | str) -> ConditionOutcome | None:
        cid = ConditionId(cid)
        for o in self.outcomes:
            if o.condition_id is cid:
                return o
        return None

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "basis": self.basis,
            "outcomes": [o.to_dict() for o in self.outcomes],
            "spectral": self.spectral,
            "cone": self.cone,
            "oracle_summary": self.oracle_summary,
            "notes": list(self.notes),
            "conflicts": list(self.conflicts),
            "provenance": self.provenance,
        }

    def summary(self) -> str:
        lines = [f"verdict: {self.verdict.value}" + (f" (via {self.basis})" if self.basis else "")]
        for o in self.outcomes:
            lines.append(f"  {o.condition_id.value:<18} {o.status.value}")
        if self.oracle_summary:
            for name, res in self.oracle_summary.items():
                lines.append(f"  oracle {name:<11} {res['status']}")
        for c in self.conflicts:
            lines.append(f"  conflict: {c}")
        return "\n".join(lines)


@dataclass(frozen=True)
class AlphaEta:
    """Constants ``alpha = min <v1, y>^2`` and ``eta = max sum_{i>=3} <v_i, y>^2 / <v1, y>^2`` over the cap.

    Both come from a numerical search: ``alpha`` is an upper bound on the true
    minimum and ``eta`` a lower bound on the true maximum.  ``sign`` records
    which orientation of ``v1`` lies in ``int K*``.
    """

    alpha: float
    eta: float
    alpha_argmin: np.ndarray
    eta_argmax: np.ndarray
    sign: int
    converged: bool

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "eta": self.eta, "alpha_argmin": self.alpha_argmin,
                "eta_argmax": self.eta_argmax, "sign": self.sign, "converged": self.converged,
                "semantics": "alpha is an upper bound, eta a lower bound"}


# ---------------------------------------------------------------------------
# shared helpers


def _prepare(A, K: ConeSpec, opts: AnalysisOptions | None):
    a = as_symmetric(A)
    if K.n != a.shape[0]:
        raise InvalidInputError(f"matrix is {a.shape[0]}x{a.shape[0]} but the cone lives in R^{K.n}")
    opts = AnalysisOptions() if opts is None else opts
    return a, spectral_decompose(a, opts.gap_tol), opts


def _signed(dec: SpectralDecomposition, i: int):
    v = dec.v(i)
    return ((1, v), (-1, -v))


def _dual_member(K: ConeSpec, y, opts: AnalysisOptions) -> Decision:
    return dual_contains(K, y, opts.tol * 0.1 if K.self_dual else opts.tol, seed=opts.stream_seed("dual"))


def _cert_copositive(M, K, opts):
    return certify_copositive(M, K, opts.tol, samples=opts.copositivity_samples, seed=opts.stream_seed("copos"))


@dataclass(frozen=True)
class CapRange:
    """Minimum and maximum of ``q_A`` on ``K ∩ S^{n-1}``.

    ``min_value``/``max_value`` are attained at the stored points;
    ``min_bound``/``max_bound`` are certified bounds when available
    (Lorentz cones, through the S-lemma), otherwise None.
    """

    min_value: float
    argmin: np.ndarray
    max_value: float
    argmax: np.ndarray
    min_bound: float | None
    max_bound: float | None
    converged: bool

    def to_dict(self) -> dict:
        return {"min_value": self.min_value, "argmin": self.argmin, "max_value": self.max_value,
                "argmax": self.argmax, "min_bound": self.min_bound, "max_bound": self.max_bound,
                "converged": self.converged}


def cap_range(A, K: ConeSpec, *, n_starts: int = 64, seed: int = 0) -> CapRange:
    """Multi-start projected descent and ascent of ``q_A`` over the closed cap."""
    a = np.asarray(A, dtype=float)
    rng = np.random.default_rng(seed)
    extra = K.sign * np.eye(K.n) if K.kind == "orthant" else None
    out = []
    for s in (1.0, -1.0):
        def fun(X, s=s):
            AX = X @ a
            return s * np.sum(AX * X, axis=1), 2.0 * s * AX

        res = multistart_minimize(fun, K, rng, n_starts=n_starts, sampler=sample_cap, extra_starts=extra)
        i = res.best_index
        x = res.x[i]
        out.append((float(quad(a, x)), x, bool(res.converged[i])))
    (m, xm, cm), (M, xM, cM) = out
    m_lb = M_ub = None
    if K.kind == "lorentz":
        # min over the Lorentz cap equals max_rho lambda_min(A - rho J)
        m_lb = maximize_s_lemma(a)[1]
        M_ub = -maximize_s_lemma(-a)[1]
    return CapRange(m, xm, M, xM, m_lb, M_ub, cm and cM)


# ---------------------------------------------------------------------------
# necessary conditions


def _mult_one(dec: SpectralDecomposition) -> ConditionOutcome:
    k = dec.multiplicity_of_smallest
    ev = {"multiplicity_of_smallest": k, "smallest": dec.eigenvalues[:k], "gap_tol": dec.gap_tol}
    if dec.is_scalar:
        ev["constant_on_sphere"] = True
        return ConditionOutcome(ConditionId.NEC_MULT_ONE, Status.NOT_APPLICABLE, ev)
    return ConditionOutcome(ConditionId.NEC_MULT_ONE, Status.HOLDS if k == 1 else Status.FAILS, ev)


def _lambda2_split(a, dec, K, opts) -> ConditionOutcome:
    cid = ConditionId.NEC_LAMBDA2_SPLIT
    lam2 = dec.lam(2)
    r = cap_range(a, K, n_starts=opts.cap_starts, seed=opts.stream_seed("cap"))
    ev = {"lambda2": lam2, "cap_range": r.to_dict()}
    tol = opts.tol
    lo = r.min_bound if r.min_bound is not None else r.min_value
    hi = r.max_bound if r.max_bound is not None else r.max_value
    ev["certified_bounds"] = r.min_bound is not None
    if lam2 <= lo + tol or hi <= lam2 + tol:
        return ConditionOutcome(cid, Status.HOLDS, ev)
    # both sides witnessed by points of the closed cap
    if (r.min_value < lam2 - 10 * tol and r.max_value > lam2 + 10 * tol
            and contains(K, r.argmin) and contains(K, r.argmax)
            and float(quad(a, r.argmin)) < lam2 - 10 * tol and float(quad(a, r.argmax)) > lam2 + 10 * tol):
        return ConditionOutcome(cid, Status.FAILS, ev)
    return ConditionOutcome(cid, Status.INCONCLUSIVE, ev)


def _z_property(a, K, opts) -> ConditionOutcome:
    cid = ConditionId.NEC_Z_PROPERTY
    if not K.self_dual:
        return ConditionOutcome(cid, Status.NOT_APPLICABLE, {"reason": "cone is not self-dual"})
    z = z_property_sampled(a, K, opts.z_pairs, opts.stream_seed("z"), opts.tol)
    status = Status.FAILS if z.status is ZStatus.VIOLATED else Status.HOLDS
    return ConditionOutcome(cid, status, z.to_dict())


def necessary_conditions(A, K: ConeSpec, opts: AnalysisOptions | None = None) -> list[ConditionOutcome]:
    """Multiplicity of the smallest eigenvalue, the ``lambda_2`` split and the Z-property.

    A constant ``q_A`` (one eigenvalue) is reported as NOT_APPLICABLE for
    the multiplicity test with ``constant_on_sphere`` in the evidence.
    """
    a, dec, opts = _prepare(A, K, opts)
    first = _mult_one(dec)
    if first.status is Status.NOT_APPLICABLE or not K.subdual:
        na = {"reason": "constant form" if dec.is_scalar else "cone is not subdual"}
        return [first] + [ConditionOutcome(c, Status.NOT_APPLICABLE, na)
                          for c in (ConditionId.NEC_LAMBDA2_SPLIT, ConditionId.NEC_Z_PROPERTY)]
    return [first, _lambda2_split(a, dec, K, opts), _z_property(a, K, opts)]


# ---------------------------------------------------------------------------
# sufficient conditions


def sufficient_two_eig(A, K: ConeSpec, opts: AnalysisOptions | None = None) -> ConditionOutcome:
    """``lambda_1 < lambda_2 = ... = lambda_n`` and ``±v1 ∈ K*``."""
    a, dec, opts = _prepare(A, K, opts)
    cid = ConditionId.SUF_TWO_EIG
    if not dec.two_eigenvalue_pattern:
        return ConditionOutcome(cid, Status.NOT_APPLICABLE, {"reason": "not a two-eigenvalue spectrum"})
    results = {}
    for s, v in _signed(dec, 1):
        d = _dual_member(K, v, opts)
        results[str(s)] = d.value
        if d is Decision.YES:
            return ConditionOutcome(cid, Status.HOLDS, {"v1": v, "sign": s, "dual_membership": results})
    status = Status.FAILS if all(r == "NO" for r in results.values()) else Status.INCONCLUSIVE
    return ConditionOutcome(cid, status, {"v1": dec.v(1), "dual_membership": results})


def sufficient_best_iii(A, K: ConeSpec, opts: AnalysisOptions | None = None, *,
                        use_w: bool = True) -> ConditionOutcome:
    """Simple ``lambda_1``, copositive ``lambda_2 I - A`` and ``±v1 ∈ K*`` (or ``±v1 ∈ W*``).

    Under the first two hypotheses quasi-convexity is equivalent to
    ``v1 ∈ W* ∪ -W*``; a refuted ``W*`` membership for both signs is
    recorded with ``w_dual_refuted`` in the evidence.
    """
    a, dec, opts = _prepare(A, K, opts)
    cid = ConditionId.SUF_BEST_III
    if dec.multiplicity_of_smallest != 1:
        return ConditionOutcome(cid, Status.NOT_APPLICABLE, {"reason": "smallest eigenvalue is not simple"})
    ev = {}
    cert = _cert_copositive(dec.lam(2) * np.eye(dec.n) - a, K, opts)
    ev["copositivity"] = cert.to_dict()
    if cert.status is CopositivityStatus.NOT_COPOSITIVE:
        return ConditionOutcome(cid, Status.FAILS, ev)
    dual = {}
    for s, v in _signed(dec, 1):
        d = _dual_member(K, v, opts)
        dual[str(s)] = d.value
        if d is Decision.YES and cert.copositive:
            ev.update(dual_membership=dual, sign=s, branch="K*")
            return ConditionOutcome(cid, Status.HOLDS, ev)
    ev["dual_membership"] = dual
    if not use_w:
        return ConditionOutcome(cid, Status.INCONCLUSIVE, ev)
    try:
        w = WConeSpec(dec, K)
    except (DomainError, InvalidInputError) as exc:
        ev["w_error"] = str(exc)
        return ConditionOutcome(cid, Status.INCONCLUSIVE, ev)
    wres = {}
    for s, v in _signed(dec, 1):
        r = w_dual_contains(w, v, opts.w_samples, opts.tol, seed=opts.stream_seed("wdual"))
        wres[str(s)] = {"decision": r.decision.value, "min_value": r.min_value, "witness": r.witness,
                        "diagnostic": r.diagnostic}
        if r.decision is Decision.YES and cert.copositive:
            ev.update(w_dual=wres, sign=s, branch="W*")
            return ConditionOutcome(cid, Status.HOLDS, ev)
    ev["w_dual"] = wres
    refuted = all(r["decision"] == "NO" for r in wres.values())
    ev["w_dual_refuted"] = refuted
    if refuted and cert.copositive:
        return ConditionOutcome(cid, Status.FAILS, ev)
    return ConditionOutcome(cid, Status.INCONCLUSIVE, ev)


def countergg_pattern(dec: SpectralDecomposition) -> bool:
    """``lambda_1 < lambda_2 = ... = lambda_{n-1} <= lambda_n`` with ``n >= 3``."""
    lam = dec.eigenvalues
    return dec.n >= 3 and dec.multiplicity_of_smallest == 1 and bool(lam[-2] - lam[1] <= dec.gap_tol)


def sufficient_countergg(A, K: ConeSpec, opts: AnalysisOptions | None = None) -> ConditionOutcome:
    """``v1 - sqrt((eta - mu) / (mu - lambda)) |v_n|^K ∈ K*`` for the spectrum ``lambda < mu = ... = mu <= eta``."""
    a, dec, opts = _prepare(A, K, opts)
    cid = ConditionId.SUF_COUNTERGG
    if not countergg_pattern(dec):
        return ConditionOutcome(cid, Status.NOT_APPLICABLE, {"reason": "spectrum is not lambda < mu = ... = mu <= eta"})
    if K.kind == "elliptic":
        return ConditionOutcome(cid, Status.NOT_APPLICABLE, {"reason": "no closed-form Moreau decomposition"})
    lam, mu, eta = dec.lam(1), dec.lam(2), dec.lam(dec.n)
    coef = math.sqrt(max(eta - mu, 0.0) / (mu - lam))
    tried = []
    for s1, v1 in _signed(dec, 1):
        for sn, vn in _signed(dec, dec.n):
            absv = moreau_decompose(K, vn).abs
            u = v1 - coef * absv
            ok = contains(K, u, opts.tol * 0.1)
            tried.append({"sign_v1": s1, "sign_vn": sn, "u": u, "in_dual": ok})
            if ok:
                return ConditionOutcome(cid, Status.HOLDS, {"coefficient": coef, "u": u, "abs_vn": absv,
                                                            "sign_v1": s1, "sign_vn": sn})
    return ConditionOutcome(cid, Status.FAILS, {"coefficient": coef, "tried": tried})


def _int_dual_sign(dec, K, opts) -> int | None:
    for s, v in _signed(dec, 1):
        if K.self_dual:
            if contains(K, v, 1e-9, strict=True):
                return s
        elif dual_contains(K, v, opts.tol, seed=opts.stream_seed("dual")) is Decision.YES:
            return s
    return None


def compute_alpha_eta(dec: SpectralDecomposition, K: ConeSpec, opts: AnalysisOptions | None = None) -> AlphaEta:
    """Multi-start estimates of ``alpha`` and ``eta``.

    Raises :class:`DomainError` when neither ``v1`` nor ``-v1`` lies in
    ``int K*``.
    """
    opts = AnalysisOptions() if opts is None else opts
    if dec.n != K.n:
        raise InvalidInputError("dimension mismatch")
    s = _int_dual_sign(dec, K, opts)
    if s is None:
        raise DomainError("v1 is not in the interior of the dual cone (for either sign)")
    v1 = s * dec.v(1)
    P = dec.vectors[2:]
    rng = opts.rng("alpha")
    extra = K.sign * np.eye(K.n) if K.kind == "orthant" else None

    def lin(X):
        return X @ v1, np.broadcast_to(v1, X.shape)

    ra = multistart_minimize(lin, K, rng, n_starts=opts.cap_starts, sampler=sample_cap, extra_starts=extra,
                             stat_tol=1e-10, max_iter=5000)
    i = ra.best_index
    p_min = float(ra.x[i] @ v1)
    if not p_min > 1e-12:
        raise DomainError("v1 is not in the interior of the dual cone: <v1, y> reaches 0 on the cap")

    def neg_ratio(X):
        p = X @ v1
        Z = X @ P.T
        N = np.sum(Z * Z, axis=1)
        g = 2.0 * (Z @ P) / (p * p)[:, None] - 2.0 * (N / p**3)[:, None] * v1
        return -N / (p * p), -g

    re = multistart_minimize(neg_ratio, K, rng, n_starts=opts.cap_starts, sampler=sample_cap,
                             extra_starts=extra, stat_tol=1e-10, max_iter=5000)
    j = re.best_index
    y = re.x[j]
    eta = float(np.sum((P @ y) ** 2) / (y @ v1) ** 2)
    x = ra.x[i]
    return AlphaEta(float((x @ v1) ** 2), eta, x, y, s, bool(ra.converged[i] and re.converged[j]))


def sufficient_alpha_eta(A, K: ConeSpec, opts: AnalysisOptions | None = None) -> ConditionOutcome:
    """``lambda_n <= lambda_2 + delta (lambda_2 - lambda_1)`` with ``delta = max(alpha, 1/eta)``."""
    a, dec, opts = _prepare(A, K, opts)
    cid = ConditionId.SUF_ALPHA_ETA
    if dec.n < 3 or dec.multiplicity_of_smallest != 1:
        return ConditionOutcome(cid, Status.NOT_APPLICABLE, {"reason": "needs n >= 3 and a simple lambda_1"})
    try:
        ae = compute_alpha_eta(dec, K, opts)
    except DomainError as exc:
        return ConditionOutcome(cid, Status.NOT_APPLICABLE, {"reason": str(exc)})
    delta = max(ae.alpha, 1.0 / ae.eta) if ae.eta > 0 else math.inf
    lam1, lam2, lamn = dec.lam(1), dec.lam(2), dec.lam(dec.n)
    bound = lam2 + delta * (lam2 - lam1)
    ev = {"alpha_eta": ae.to_dict(), "delta": delta if math.isfinite(delta) else None,
          "delta_from": "alpha" if ae.alpha >= (1.0 / ae.eta if ae.eta > 0 else math.inf) else "1/eta",
          "bound": bound if math.isfinite(bound) else None, "lambda_n": lamn,
          "holds_with_alpha": lamn <= lam2 + ae.alpha * (lam2 - lam1) + opts.tol,
          "holds_with_inverse_eta": ae.eta > 0 and lamn <= lam2 + (lam2 - lam1) / ae.eta + opts.tol}
    if lamn <= bound + opts.tol:
        return ConditionOutcome(cid, Status.HOLDS if ae.converged else Status.INCONCLUSIVE, ev)
    return ConditionOutcome(cid, Status.FAILS, ev)


def sufficient_conv_sl(A, K: ConeSpec, opts: AnalysisOptions | None = None) -> ConditionOutcome:
    """``lambda_2 <= (lambda_1 + lambda_3) / 2``, copositive ``lambda_2 I - A`` and ``K ∩ ±L_{lambda_2} = {0}``."""
    a, dec, opts = _prepare(A, K, opts)
    cid = ConditionId.SUF_CONV_SL
    if dec.n < 3 or dec.multiplicity_of_smallest != 1:
        return ConditionOutcome(cid, Status.NOT_APPLICABLE, {"reason": "needs n >= 3 and a simple lambda_1"})
    lam1, lam2, lam3 = dec.lam(1), dec.lam(2), dec.lam(3)
    ev = {"midpoint": 0.5 * (lam1 + lam3), "lambda2": lam2}
    if lam2 > 0.5 * (lam1 + lam3) + opts.tol:
        return ConditionOutcome(cid, Status.FAILS, ev)
    cert = _cert_copositive(lam2 * np.eye(dec.n) - a, K, opts)
    ev["copositivity"] = cert.to_dict()
    if cert.status is CopositivityStatus.NOT_COPOSITIVE:
        return ConditionOutcome(cid, Status.FAILS, ev)
    level = elliptic_levelcone(dec, lam2)
    inter = {}
    for name, L in (("minus", -level), ("plus", level)):
        r = intersection_trivial(K, L, opts.intersection_budget, opts.tol, seed=opts.stream_seed("conv"))
        inter[name] = {"status": r.status.value, "max_joint_margin": r.max_joint_margin, "witness": r.witness}
        if r.status is Intersection.TRIVIAL and cert.copositive:
            ev.update(intersection=inter, trivial_side=name)
            return ConditionOutcome(cid, Status.HOLDS, ev)
    ev["intersection"] = inter
    if all(v["status"] == "NONTRIVIAL" for v in inter.values()):
        return ConditionOutcome(cid, Status.FAILS, ev)
    return ConditionOutcome(cid, Status.INCONCLUSIVE, ev)


# ---------------------------------------------------------------------------
# characterizations


def characterize_selfdual(A, K: ConeSpec, opts: AnalysisOptions | None = None) -> ConditionOutcome:
    """Self-dual ``K`` with ``±v1 ∈ K``: quasi-convex iff ``k = 1`` and ``lambda_2 I - A`` is copositive."""
    a, dec, opts = _prepare(A, K, opts)
    cid = ConditionId.CHAR_SELFDUAL_IV
    if not K.self_dual:
        return ConditionOutcome(cid, Status.NOT_APPLICABLE, {"reason": "cone is not self-dual"})
    if dec.is_scalar:
        return ConditionOutcome(cid, Status.NOT_APPLICABLE, {"reason": "constant form"})
    if dec.multiplicity_of_smallest > 1:
        return ConditionOutcome(cid, Status.FAILS, {"reason": "smallest eigenvalue is multiple",
                                                    "multiplicity": dec.multiplicity_of_smallest})
    sign = next((s for s, v in _signed(dec, 1) if contains(K, v, opts.tol * 0.1)), None)
    if sign is None:
        return ConditionOutcome(cid, Status.NOT_APPLICABLE, {"reason": "v1 not in K for either sign", "v1": dec.v(1)})
    cert = _cert_copositive(dec.lam(2) * np.eye(dec.n) - a, K, opts)
    ev = {"sign": sign, "v1": sign * dec.v(1), "copositivity": cert.to_dict()}
    if cert.copositive:
        return ConditionOutcome(cid, Status.HOLDS, ev)
    if cert.refuted:
        return ConditionOutcome(cid, Status.FAILS, ev)
    return ConditionOutcome(cid, Status.INCONCLUSIVE, ev)


def characterize_lorentz_2eig(A, opts: AnalysisOptions | None = None, *, cone: ConeSpec | None = None) -> ConditionOutcome:
    """Lorentz cone and ``lambda_1 < lambda_2 = ... = lambda_n``: quasi-convex iff ``v1 ∈ L ∪ -L``."""
    a = as_symmetric(A)
    K = ConeSpec.lorentz(a.shape[0]) if cone is None else cone
    a, dec, opts = _prepare(a, K, opts)
    cid = ConditionId.CHAR_LORENTZ_2EIG
    if K.kind != "lorentz":
        return ConditionOutcome(cid, Status.NOT_APPLICABLE, {"reason": "cone is not a Lorentz cone"})
    if not dec.two_eigenvalue_pattern:
        return ConditionOutcome(cid, Status.NOT_APPLICABLE, {"reason": "not a two-eigenvalue spectrum"})
    v = dec.v(1)
    margin = float(abs(v[0]) - np.linalg.norm(v[1:]))
    ev = {"v1": v, "membership_margin": margin}
    return ConditionOutcome(cid, Status.HOLDS if margin >= -opts.tol * 0.1 else Status.FAILS, ev)


# ---------------------------------------------------------------------------
# aggregation


def _oracle(a, K, opts) -> dict:
    seed = opts.stream_seed("oracle")
    out = {}
    g = geodesic_quasiconvexity_test(a, K, opts.oracle_samples, seed=seed, tol=opts.tol)
    out["geodesic"] = g
    if not g.violated:
        out["sublevel"] = sublevel_convexity_test(a, K, opts.oracle_levels, opts.oracle_pairs,
                                                  seed=seed + 1, tol=opts.tol)
    return out


_DECISIVE = {
    # condition role -> (status, verdict)
    "characterization": {Status.HOLDS: Verdict.CERTIFIED_QUASICONVEX, Status.FAILS: Verdict.CERTIFIED_NOT},
    "necessary": {Status.FAILS: Verdict.CERTIFIED_NOT},
    "sufficient": {Status.HOLDS: Verdict.CERTIFIED_QUASICONVEX},
}


def _decide(outcomes, oracle_violation: str | None):
    """Verdict and basis under the precedence characterization > necessary > sufficient > oracle."""
    for role in ("characterization", "necessary", "sufficient"):
        for o in outcomes:
            if o.role == role and o.status in _DECISIVE[role]:
                return _DECISIVE[role][o.status], o.condition_id.value
    if oracle_violation is not None:
        return Verdict.CERTIFIED_NOT, f"ORACLE_{oracle_violation.upper()}"
    return Verdict.UNKNOWN, None


def _conflicts(outcomes, oracle_violation):
    pos = [o.condition_id.value for o in outcomes if o.role != "necessary" and o.status is Status.HOLDS]
    neg = [o.condition_id.value for o in outcomes
           if o.role != "sufficient" and o.status is Status.FAILS]
    out = []
    if pos and neg:
        out.append(f"{', '.join(pos)} certify quasi-convexity but {', '.join(neg)} refute it")
    if pos and oracle_violation:
        out.append(f"{', '.join(pos)} certify quasi-convexity but the {oracle_violation} oracle found a counterexample")
    return tuple(out)


def analyze(A, K: ConeSpec, opts: AnalysisOptions | None = None) -> AnalysisReport:
    """Evaluate the known conditions in order and aggregate a verdict.

    Order: constant form, simple smallest eigenvalue, the two
    characterizations, the ``lambda_2`` split and the Z-property, then the
    sufficient conditions from cheapest to most expensive, finally the
    oracles.  Unless ``opts.exhaustive`` is set, evaluation stops at the
    first decisive outcome.  Condition errors are recorded as INCONCLUSIVE.
    """
    a, dec, opts = _prepare(A, K, opts)
    t0 = time.perf_counter()
    timings = {}
    outcomes: list[ConditionOutcome] = []
    notes = []
    if float(np.min(np.abs(dec.eigenvalues))) <= dec.gap_tol:
        notes.append("matrix is singular; the conditions used here do not require nonsingularity")

    def decided():
        return _decide(outcomes, None)[0] is not Verdict.UNKNOWN

    def run(cid, fn):
        t = time.perf_counter()
        try:
            o = fn()
        except SQCError as exc:
            o = ConditionOutcome(cid, Status.INCONCLUSIVE, {"error": f"{type(exc).__name__}: {exc}"})
        timings[cid.value] = time.perf_counter() - t
        outcomes[:] = [x for x in outcomes if x.condition_id is not cid] + [o]
        return o

    basis_override = None
    if dec.is_scalar:
        outcomes.append(_mult_one(dec))
        notes.append("all eigenvalues coincide: q_A is constant on the sphere")
        basis_override = "CONSTANT_FORM"
    elif not K.subdual:
        notes.append("cone is not subdual: only the oracles apply")
        for cid in ConditionId:
            outcomes.append(ConditionOutcome(cid, Status.NOT_APPLICABLE, {"reason": "cone is not subdual"}))
    else:
        steps = [
            (ConditionId.NEC_MULT_ONE, lambda: _mult_one(dec)),
            (ConditionId.CHAR_LORENTZ_2EIG, lambda: characterize_lorentz_2eig(a, opts, cone=K)),
            (ConditionId.CHAR_SELFDUAL_IV, lambda: characterize_selfdual(a, K, opts)),
            (ConditionId.NEC_LAMBDA2_SPLIT, lambda: _lambda2_split(a, dec, K, opts)),
            (ConditionId.NEC_Z_PROPERTY, lambda: _z_property(a, K, opts)),
            (ConditionId.SUF_TWO_EIG, lambda: sufficient_two_eig(a, K, opts)),
            (ConditionId.SUF_BEST_III, lambda: sufficient_best_iii(a, K, opts, use_w=False)),
            (ConditionId.SUF_COUNTERGG, lambda: sufficient_countergg(a, K, opts)),
            (ConditionId.SUF_ALPHA_ETA, lambda: sufficient_alpha_eta(a, K, opts)),
            (ConditionId.SUF_CONV_SL, lambda: sufficient_conv_sl(a, K, opts)),
            (ConditionId.SUF_BEST_III, lambda: sufficient_best_iii(a, K, opts, use_w=True)),
        ]
        for i, (cid, fn) in enumerate(steps):
            if cid is ConditionId.SUF_BEST_III and i > 6:
                prev = next(o for o in outcomes if o.condition_id is cid)
                if prev.status is not Status.INCONCLUSIVE:
                    continue
            run(cid, fn)
            if decided() and not opts.exhaustive:
                break

    verdict, basis = _decide(outcomes, None)
    if basis_override:
        verdict, basis = Verdict.CERTIFIED_QUASICONVEX, basis_override
    oracle_summary = None
    oracle_violation = None
    if opts.use_oracle and (verdict is Verdict.UNKNOWN or opts.cross_validate):
        t = time.perf_counter()
        res = _oracle(a, K, opts)
        timings["oracle"] = time.perf_counter() - t
        oracle_summary = {k: v.to_dict() for k, v in res.items()}
        oracle_violation = next((k for k, v in res.items() if v.violated), None)
        if verdict is Verdict.UNKNOWN:
            verdict, basis = _decide(outcomes, oracle_violation)
    timings["total"] = time.perf_counter() - t0
    provenance = {"seed": opts.seed, "tol": opts.tol, "gap_tol": dec.gap_tol, "options": opts.to_dict()}
    if opts.include_timings:
        provenance["timings"] = timings
    return AnalysisReport(verdict, basis, tuple(outcomes), dec.summary() | {"vectors": dec.vectors},
                          K.to_dict(), provenance, oracle_summary, tuple(notes),
                          _conflicts(outcomes, oracle_violation))
