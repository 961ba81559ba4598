"""Projected-gradient optimization over ``K ∩ S^{n-1}``.

Every supported cone is the linear image ``T(B)`` of a base cone ``B``
(the orthant or the Lorentz cone) whose projection is available in closed
form.  Iterates live on ``B ∩ S^{n-1}``; the objective is evaluated at
``x = T u / |T u|``.  All starts advance in lockstep as rows of a matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def project_lorentz_rows(U: np.ndarray) -> np.ndarray:
    """Row-wise metric projection onto the Lorentz cone."""
    U = np.atleast_2d(U)
    x1 = U[:, 0]
    x2 = U[:, 1:]
    r = np.linalg.norm(x2, axis=1)
    out = np.empty_like(U)
    inside = x1 >= r
    polar = -x1 >= r
    mid = ~(inside | polar)
    out[inside] = U[inside]
    out[polar] = 0.0
    if np.any(mid):
        coef = (x1[mid] + r[mid]) / (2.0 * r[mid])
        out[mid, 0] = coef * r[mid]
        out[mid, 1:] = coef[:, None] * x2[mid]
    return out


def project_base(U: np.ndarray, base: str) -> np.ndarray:
    if base == "orthant":
        return np.maximum(U, 0.0)
    if base == "lorentz":
        return project_lorentz_rows(U)
    raise ValueError(f"unknown base cone {base!r}")


def _project_cap(U: np.ndarray, base: str):
    P = project_base(U, base)
    nrm = np.linalg.norm(P, axis=1)
    ok = nrm > 1e-14
    out = np.where(ok[:, None], P / np.where(ok, nrm, 1.0)[:, None], U)
    return out, ok


@dataclass
class CapOptResult:
    """Final iterates of a batched cap minimization (one row per start)."""

    x: np.ndarray
    values: np.ndarray
    converged: np.ndarray
    iterations: int

    @property
    def best_index(self) -> int:
        return int(np.argmin(self.values))

    @property
    def best_x(self) -> np.ndarray:
        return self.x[self.best_index]

    @property
    def best_value(self) -> float:
        return float(self.values[self.best_index])


def minimize_on_cap(fun, cone, starts, *, max_iter: int = 3000, stat_tol: float = 1e-9) -> CapOptResult:
    """Minimize ``fun`` over ``cone ∩ S^{n-1}`` from each row of ``starts``.

    ``fun(X)`` takes an ``(m, n)`` array of unit vectors and returns the
    values ``(m,)`` and Euclidean gradients ``(m, n)``.  A start is flagged
    converged once its gradient-mapping norm drops below ``stat_tol``
    (scaled by the gradient size), or below its square root once the line
    search can no longer make progress in floating point.
    """
    T, base = cone.chart()
    X0 = np.atleast_2d(np.asarray(starts, dtype=float))
    U, _ = _project_cap(np.linalg.solve(T, X0.T).T, base)

    def evaluate(U):
        W = U @ T.T
        nrm = np.linalg.norm(W, axis=1)
        X = W / nrm[:, None]
        f, G = fun(X)
        Gt = G - np.sum(G * X, axis=1)[:, None] * X
        return X, f, (Gt / nrm[:, None]) @ T

    X, f, g = evaluate(U)
    m = U.shape[0]
    step = np.full(m, 0.5 / (1.0 + np.max(np.abs(g))))
    done = np.zeros(m, dtype=bool)
    conv = np.zeros(m, dtype=bool)
    flat = np.zeros(m, dtype=int)
    eps = np.finfo(float).eps
    it = 0
    for it in range(1, max_iter + 1):
        active = ~done
        if not np.any(active):
            break
        Ua, sa = U[active], step[active]
        cand, ok = _project_cap(Ua - sa[:, None] * g[active], base)
        Xc, fc, gc = evaluate(cand)
        disp2 = np.sum((cand - Ua) ** 2, axis=1)
        accept = ok & (fc <= f[active] - 1e-4 * disp2 / sa)
        idx = np.flatnonzero(active)
        # changes at round-off level mean the value can no longer resolve progress
        noise = np.abs(fc - f[active]) <= 64 * eps * (1.0 + np.abs(f[active]))
        flat[idx] = np.where(noise, flat[idx] + 1, 0)
        acc_idx = idx[accept]
        U[acc_idx], X[acc_idx], f[acc_idx], g[acc_idx] = cand[accept], Xc[accept], fc[accept], gc[accept]
        step[acc_idx] = np.minimum(step[acc_idx] * 1.5, 1e6)
        rej_idx = idx[~accept]
        step[rej_idx] *= 0.3
        # gradient mapping at a fixed reference step measures stationarity
        tau = 1e-3
        probe, _ = _project_cap(U[idx] - tau * g[idx], base)
        gm = np.linalg.norm(probe - U[idx], axis=1) / tau
        gscale = 1.0 + np.linalg.norm(g[idx], axis=1)
        stalled = (step[idx] < 1e-16) | (flat[idx] >= 20)
        # a stalled line search at round-off level still counts when nearly stationary
        conv[idx] = (gm <= stat_tol * gscale) | (stalled & (gm <= np.sqrt(stat_tol) * gscale))
        done[idx] = conv[idx] | stalled
    return CapOptResult(X, f, conv, it)


def multistart_minimize(fun, cone, rng, *, n_starts: int = 64, pool_factor: int = 8,
                        sampler=None, extra_starts=None, **kwargs) -> CapOptResult:
    """Sample a pool on the cap, keep the best half plus random picks, then descend."""
    pool = sampler(cone, n_starts * pool_factor, rng)
    vals, _ = fun(pool)
    order = np.argsort(vals, kind="stable")
    best = pool[order[: n_starts // 2]]
    rest = pool[rng.choice(pool.shape[0], size=n_starts - best.shape[0], replace=False)]
    starts = np.vstack([best, rest] + ([np.atleast_2d(extra_starts)] if extra_starts is not None else []))
    return minimize_on_cap(fun, cone, starts, **kwargs)
