"""Critical-point classification for the unlifted and lifted objectives:
gradient norms, smallest Hessian eigenpairs, SOP search, and the rank-1
escape direction of a spurious point."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .objective import Problem, h_grad, h_hess, h_value, hl_grad, hl_hess_dense, hl_hvp
from .optimize import AdamConfig, NonFiniteLoss, run_adam
from .tensor import DenseTensor, rank1_power

__all__ = [
    "Classification",
    "EigenSolverError",
    "EscapeDirection",
    "LandscapeReport",
    "SopList",
    "canonical_sign",
    "classify",
    "default_tolerances",
    "escape_direction",
    "find_sops",
    "lifted_curvature",
    "min_eigenpair",
    "newton_polish",
    "spurious",
]

DENSE_LIMIT = 512


class EigenSolverError(RuntimeError):
    pass


class Classification(str, Enum):
    NOT_CRITICAL = "NOT_CRITICAL"
    FOP_ONLY = "FOP_ONLY"
    SOP = "SOP"


@dataclass(frozen=True, eq=False)
class LandscapeReport:
    grad_norm: float
    min_eig: float
    min_eigvec: np.ndarray
    classification: Classification
    tol_grad: float
    tol_eig: float


def min_eigenpair(H, dim: int | None = None, tol: float = 1e-10, maxiter: int | None = None):
    """Algebraically smallest eigenpair of a symmetric operator.

    ``H`` is either a dense matrix (full ``eigh``) or a callable ``v -> Hv``
    with ``dim`` given, handled by ARPACK on a ``LinearOperator``.
    """
    if callable(H):
        if dim is None or dim < 1:
            raise ValueError("a matrix-free operator needs dim >= 1")
        op = LinearOperator((dim, dim), matvec=lambda v: np.asarray(H(v), dtype=float).reshape(-1), dtype=float)
        if dim == 1:
            lam = float(op.matvec(np.ones(1))[0])
            return lam, np.ones(1)
        try:
            vals, vecs = eigsh(op, k=1, which="SA", tol=tol, maxiter=maxiter or 20 * dim)
        except ArpackNoConvergence as exc:
            raise EigenSolverError(f"iterative eigensolver did not converge: {exc}") from exc
        v = vecs[:, 0]
        return float(vals[0]), v / np.linalg.norm(v)
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1] or H.shape[0] < 1:
        raise ValueError(f"expected a nonempty square matrix, got shape {H.shape}")
    vals, vecs = np.linalg.eigh(0.5 * (H + H.T))
    return float(vals[0]), vecs[:, 0]


def default_tolerances(p: Problem, hess_fro: float) -> tuple[float, float]:
    return 1e-7 * (1.0 + float(np.linalg.norm(p.b))), 1e-6 * (1.0 + hess_fro)


def _lifted_hessian_spectrum(p: Problem, l: int, w: np.ndarray):
    """(min_eig, eigvec, Frobenius norm or an upper bound on it)."""
    dim = p.n**l
    if dim <= DENSE_LIMIT:
        H = hl_hess_dense(p, l, w)
        lam, v = min_eigenpair(H)
        return lam, v, float(np.linalg.norm(H))
    hvp = lambda v: hl_hvp(p, l, w, v).flat  # noqa: E731
    lam, v = min_eigenpair(hvp, dim=dim)
    op = LinearOperator((dim, dim), matvec=hvp, dtype=float)
    top = float(abs(eigsh(op, k=1, which="LM", tol=1e-6, return_eigenvectors=False)[0]))
    # ||H||_F <= sqrt(dim) ||H||_2
    return lam, v, np.sqrt(dim) * top


def classify(
    p: Problem,
    l: int,
    w,
    tol_grad: float | None = None,
    tol_eig: float | None = None,
) -> LandscapeReport:
    """Label ``w`` (a flat vector or DenseTensor of order ``l``) as
    NOT_CRITICAL, FOP_ONLY (strict saddle) or SOP."""
    if isinstance(w, DenseTensor):
        w = w.flat
    w = np.asarray(w, dtype=float).reshape(-1)
    gnorm = float(np.linalg.norm(hl_grad(p, l, w).flat))
    lam, v, hfro = _lifted_hessian_spectrum(p, l, w)
    d_grad, d_eig = default_tolerances(p, hfro)
    tol_grad = d_grad if tol_grad is None else tol_grad
    tol_eig = d_eig if tol_eig is None else tol_eig
    if gnorm > tol_grad:
        label = Classification.NOT_CRITICAL
    elif lam >= -tol_eig:
        label = Classification.SOP
    else:
        label = Classification.FOP_ONLY
    return LandscapeReport(gnorm, lam, v, label, tol_grad, tol_eig)


def lifted_curvature(p: Problem, x, u, l: int) -> float:
    """``<Hess h_l(x^{⊗l}) u^{⊗l}, u^{⊗l}>`` in closed form,
    ``4 s^l + 2 (a^l - c^l)`` with ``s = sum_a (u^T A_a x)^2``,
    ``a = <A(xx^T), A(uu^T)>`` and ``c = <b, A(uu^T)>``."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    A = p.op.matrices
    Au = A @ u
    s = float(np.sum((Au @ x) ** 2))
    uAu = Au @ u
    beta = np.einsum("aij,i,j->a", A, x, x)
    a = float(beta @ uAu)
    c = float(p.b @ uAu)
    return 4.0 * s**l + 2.0 * (a**l - c**l)


@dataclass(frozen=True, eq=False)
class EscapeDirection:
    u: np.ndarray
    eigenvalue: float
    curvature: dict


HVP_LIMIT = 10**7


def escape_direction(p: Problem, xhat, ls=(1, 3, 5), tol_grad: float | None = None) -> EscapeDirection:
    """Smallest eigenvector ``u`` of ``grad f(xhat xhat^T)`` and the lifted
    curvature along ``u^{⊗l}`` at ``xhat^{⊗l}`` for each ``l`` in ``ls``.

    The curvature comes from the Hessian-vector product when ``n^{2l}`` is
    small enough to form ``w w^T``, otherwise from the closed form.
    """
    x = np.asarray(xhat, dtype=float).reshape(-1)
    tol_grad = 1e-7 * (1.0 + float(np.linalg.norm(p.b))) if tol_grad is None else tol_grad
    g = float(np.linalg.norm(h_grad(p, x)))
    if g > tol_grad:
        raise ValueError(f"xhat is not a first-order point (gradient norm {g:.3g} > {tol_grad:.3g})")
    lam, u = min_eigenpair(p.grad_f(x))
    if lam < 0 and np.any(x):
        # grad f(xx^T) x = 0 puts x in the kernel; scrub round-off leakage
        xn = x / np.linalg.norm(x)
        u = u - (u @ xn) * xn
        u /= np.linalg.norm(u)
    curv = {}
    for l in ls:
        if p.n ** (2 * l) <= HVP_LIMIT:
            U = rank1_power(u, l).flat
            curv[l] = float(hl_hvp(p, l, rank1_power(x, l), U).flat @ U)
        else:
            curv[l] = lifted_curvature(p, x, u, l)
    return EscapeDirection(u, lam, curv)


def canonical_sign(x: np.ndarray, thresh: float = 1e-8) -> np.ndarray:
    """Flip ``x`` so its first entry of non-negligible size is positive."""
    nz = np.flatnonzero(np.abs(x) > thresh)
    if nz.size and x[nz[0]] < 0:
        return -x
    return x


def _pinv_step(H: np.ndarray, g: np.ndarray, clamp: float = 1e-10) -> np.ndarray:
    vals, vecs = np.linalg.eigh(H)
    inv = np.where(np.abs(vals) > clamp, 1.0 / np.where(vals == 0, 1.0, vals), 0.0)
    return vecs @ (inv * (vecs.T @ g))


def newton_polish(p: Problem, x, tol_grad: float, max_steps: int = 50) -> tuple[np.ndarray, bool]:
    """Newton iteration on ``h`` with an eigenvalue-clamped pseudo-inverse.

    Once the gradient is below ``tol_grad`` a few more steps are taken (the
    convergence is quadratic there) and the iterate with the smallest
    gradient is returned.
    """
    x = np.array(x, dtype=float)
    best, best_g, extra = x, np.inf, 0
    for _ in range(max_steps):
        g = h_grad(p, x)
        gn = float(np.linalg.norm(g))
        if gn < best_g:
            best, best_g = x, gn
        if gn <= tol_grad:
            extra += 1
            if extra > 3 or gn == 0.0:
                break
        x = x - _pinv_step(h_hess(p, x), g)
        if not np.all(np.isfinite(x)):
            break
    return best, bool(best_g <= tol_grad)


class SopList(list):
    """List of ``(point, LandscapeReport)`` pairs sorted by ``h``; ``dropped``
    counts starts that never reached a critical point."""

    dropped: int = 0


def find_sops(
    p: Problem,
    n_starts: int = 50,
    opt_cfg: AdamConfig = AdamConfig(max_iters=3000, record_every=0),
    seed: int = 0,
    init_scale: float | None = None,
    merge_radius: float = 1e-4,
    keep_saddles: bool = False,
    tol_grad: float | None = None,
    tol_eig: float | None = None,
) -> SopList:
    """Multi-start search for second-order points of the unlifted ``h``.

    Start ``i`` draws ``N(0, init_scale^2 I)`` from ``default_rng(seed + i)``
    (``init_scale`` defaults to ``||z|| / sqrt(n)``), runs ADAM, then Newton
    polishes. Points are merged up to sign within ``merge_radius``; with
    ``keep_saddles`` strict saddles are kept as well.
    """
    if n_starts < 1:
        raise ValueError("n_starts must be >= 1")
    scale = float(np.linalg.norm(p.z)) / np.sqrt(p.n) if init_scale is None else init_scale
    tg = 1e-7 * (1.0 + float(np.linalg.norm(p.b))) if tol_grad is None else tol_grad

    found, dropped = [], 0
    for i in range(n_starts):
        rng = np.random.default_rng(seed + i)
        x0 = rng.normal(0.0, scale, size=p.n)
        try:
            x, *_ = run_adam(lambda x: (h_value(p, x), h_grad(p, x)), x0, opt_cfg)
        except NonFiniteLoss:
            dropped += 1
            continue
        x, ok = newton_polish(p, x, tg)
        if not ok:
            dropped += 1
            continue
        found.append(canonical_sign(x))

    found.sort(key=lambda x: (round(h_value(p, x), 12), tuple(np.round(x, 8))))
    out = SopList()
    out.dropped = dropped
    kept: list[np.ndarray] = []
    for x in found:
        if any(np.linalg.norm(x - y) <= merge_radius for y in kept):
            continue
        kept.append(x)
        rep = classify(p, 1, x, tol_grad=tol_grad, tol_eig=tol_eig)
        if rep.classification is Classification.SOP or (
            keep_saddles and rep.classification is Classification.FOP_ONLY
        ):
            out.append((x, rep))
    out.sort(key=lambda item: h_value(p, item[0]))
    return out


def spurious(p: Problem, sops, tol: float = 1e-8) -> list:
    """Entries of ``sops`` that are not global minimizers."""
    return [(x, r) for x, r in sops if h_value(p, x) > tol]
