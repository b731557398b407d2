"""Closed-form quantities from the saddle-conversion analysis: the ratio beta
and the minimal odd lift order, the distance condition, the local-region
radius, and the supporting bounds on ``G = -lambda_min(grad f(xx^T))``.

Every check takes the curvature constants ``(L, alpha)`` from the caller and
defaults to the global surrogates of :func:`liftsense.sensing.spectrum_constants`.
The surrogates bracket the restricted constants,
``alpha <= alpha_s <= L_s <= L``, which fixes how each check behaves:

* ``G <= L ||x||^2`` and ``G >= alpha dist^2 / (2 tr M*)`` and
  ``||x||^2 < sqrt(2 L / alpha) ||M*||_F`` only get looser, so they remain
  valid statements that must hold.
* The distance condition and ``beta`` get stricter, so a condition that
  holds with surrogates also holds with the restricted constants; when it
  fails the surrogate result is inconclusive.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .objective import Problem
from .sensing import spectrum_constants

__all__ = [
    "BoundReport",
    "LemmaBounds",
    "beta_and_l_threshold",
    "bound_report",
    "check_distance_condition",
    "distance_condition_sides",
    "l_threshold_from_beta",
    "lemma_bounds",
    "region_bounds",
    "surrogate_constants",
]


def surrogate_constants(p: Problem) -> tuple[float, float]:
    c = spectrum_constants(p.op)
    return c.L_global, c.alpha_global


def _geometry(p: Problem, xhat) -> tuple[float, float, float]:
    x = np.asarray(xhat, dtype=float).reshape(-1)
    if x.shape != (p.n,):
        raise ValueError(f"expected a length-{p.n} vector")
    dist_sq = float(np.sum((np.outer(p.z, p.z) - np.outer(x, x)) ** 2))
    return dist_sq, float(x @ x), float(p.z @ p.z)


def l_threshold_from_beta(beta: float) -> tuple[float, int | None]:
    """``l_threshold = 1 / (1 - log2(2 beta))`` for ``0 < beta < 1``, else
    infinity; with the smallest odd integer strictly above it."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    if beta >= 1:
        return math.inf, None
    thr = 1.0 / (1.0 - math.log2(2.0 * beta))
    odd = math.floor(thr) + 1
    if odd % 2 == 0:
        odd += 1
    return thr, odd


def beta_and_l_threshold(p: Problem, xhat, L: float, alpha: float):
    """``beta = L tr(M*) ||x||^2 / (alpha ||M* - xx^T||_F^2)`` and the lift
    order threshold derived from it."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    dist_sq, xn, tr = _geometry(p, xhat)
    if dist_sq == 0.0:
        raise ValueError("xhat reproduces the ground truth; beta is undefined")
    beta = L * tr * xn / (alpha * dist_sq)
    if beta == 0.0:
        # xhat = 0: the threshold collapses to 0, so every odd order qualifies
        return 0.0, 0.0, 1
    thr, odd = l_threshold_from_beta(beta)
    return beta, thr, odd


def distance_condition_sides(p: Problem, xhat, L: float, alpha: float) -> tuple[float, float]:
    """``(||M* - xx^T||_F^2, (L / alpha) ||x||^2 tr(M*))``."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    dist_sq, xn, tr = _geometry(p, xhat)
    return dist_sq, (L / alpha) * xn * tr


def check_distance_condition(p: Problem, xhat, L: float, alpha: float) -> bool:
    lhs, rhs = distance_condition_sides(p, xhat, L, alpha)
    return lhs >= rhs


def region_bounds(p: Problem, L: float, alpha: float) -> tuple[float, float]:
    """``(4 L alpha / (L + alpha)^2 ||z||^2, 2 sqrt(2) alpha^{5/2} / ((L + alpha)^2 sqrt(L)))``.

    A spurious SOP can never satisfy ``||xx^T - M*||_F <= `` the first value.
    """
    if alpha <= 0 or L <= 0:
        raise ValueError("L and alpha must be positive")
    radius = 4.0 * L * alpha / (L + alpha) ** 2 * float(p.z @ p.z)
    rhs = 2.0 * math.sqrt(2.0) * alpha**2.5 / ((L + alpha) ** 2 * math.sqrt(L))
    return radius, rhs


@dataclass(frozen=True)
class LemmaBounds:
    G: float
    G_upper: float
    G_lower: float
    xhat_norm_sq: float
    xhat_norm_bound: float
    upper_holds: bool
    lower_holds: bool
    norm_holds: bool

    @property
    def all_hold(self) -> bool:
        return self.upper_holds and self.lower_holds and self.norm_holds


def lemma_bounds(p: Problem, xhat, L: float, alpha: float, rtol: float = 1e-9, check_sop: bool = True) -> LemmaBounds:
    """Evaluate the three bounds at an SOP ``xhat``.

    ``rtol`` absorbs round-off in the comparisons; it never decides a
    bound that is off by more than that relative margin.
    """
    from .landscape import Classification, classify

    if alpha <= 0:
        raise ValueError("alpha must be positive")
    x = np.asarray(xhat, dtype=float).reshape(-1)
    if check_sop:
        rep = classify(p, 1, x)
        if rep.classification is not Classification.SOP:
            raise ValueError(f"xhat is not a second-order point ({rep.classification.value})")
    dist_sq, xn, tr = _geometry(p, x)
    G = max(-float(np.linalg.eigvalsh(p.grad_f(x))[0]), 0.0)
    G_upper = xn * L
    G_lower = alpha * dist_sq / (2.0 * tr)
    mstar_fro = float(np.linalg.norm(np.outer(p.z, p.z)))
    norm_bound = math.sqrt(2.0 * L / alpha) * mstar_fro
    slack = rtol * (1.0 + max(G, G_upper, G_lower))
    return LemmaBounds(
        G=G,
        G_upper=G_upper,
        G_lower=G_lower,
        xhat_norm_sq=xn,
        xhat_norm_bound=norm_bound,
        upper_holds=G <= G_upper + slack,
        lower_holds=G >= G_lower - slack,
        norm_holds=xn < norm_bound,
    )


@dataclass(frozen=True)
class BoundReport:
    L: float
    alpha: float
    G: float
    dist_sq: float
    xhat_norm_sq: float
    trace_mstar: float
    beta: float
    gamma: float
    l_threshold: float
    min_odd_l: int | None
    distance_condition_holds: bool
    distance_lhs: float
    distance_rhs: float
    local_region_radius: float
    violates_local_region: bool
    corollary_bound_rhs: float
    lemmas_hold: bool

    def to_dict(self) -> dict:
        d = asdict(self)
        if math.isinf(d["l_threshold"]):
            d["l_threshold"] = None
        return d


def bound_report(p: Problem, xhat, L: float | None = None, alpha: float | None = None) -> BoundReport:
    """All quantities for one spurious point; ``gamma = 2 beta`` is the
    normalization under which the threshold reads ``gamma < 2``."""
    if L is None or alpha is None:
        L0, a0 = surrogate_constants(p)
        L = L0 if L is None else L
        alpha = a0 if alpha is None else alpha
    beta, thr, odd = beta_and_l_threshold(p, xhat, L, alpha)
    lhs, rhs = distance_condition_sides(p, xhat, L, alpha)
    radius, cor = region_bounds(p, L, alpha)
    lem = lemma_bounds(p, xhat, L, alpha)
    dist_sq, xn, tr = _geometry(p, xhat)
    return BoundReport(
        L=L,
        alpha=alpha,
        G=lem.G,
        dist_sq=dist_sq,
        xhat_norm_sq=xn,
        trace_mstar=tr,
        beta=beta,
        gamma=2.0 * beta,
        l_threshold=thr,
        min_odd_l=odd,
        distance_condition_holds=lhs >= rhs,
        distance_lhs=lhs,
        distance_rhs=rhs,
        local_region_radius=radius,
        violates_local_region=math.sqrt(dist_sq) > radius,
        corollary_bound_rhs=cor,
        lemmas_hold=lem.all_hold,
    )
