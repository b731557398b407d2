"""Dense real tensors of equal mode dimension and the few contractions the
lifted objective needs.

Tensors are stored as read-only numpy arrays of shape ``(n,) * order`` in
C (row-major, last index fastest) order, so ``tensor.flat`` is the flat
storage the rest of the package works with.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

__all__ = [
    "DenseTensor",
    "Rank1Projection",
    "as_tensor",
    "best_rank1_projection",
    "multi_mode_inner",
    "multilinear_apply",
    "outer_product",
    "rank1_power",
]


@dataclass(frozen=True, eq=False)
class DenseTensor:
    """Order-``l`` tensor with every mode of length ``n``."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=float, order="C")
        if arr.ndim == 0:
            raise ValueError("a DenseTensor needs order >= 1")
        if len(set(arr.shape)) != 1 or arr.shape[0] == 0:
            raise ValueError(f"all modes must share a positive dimension, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_flat(cls, flat, n: int, order: int) -> "DenseTensor":
        flat = np.asarray(flat, dtype=float)
        if flat.size != n**order:
            raise ValueError(f"expected {n}**{order} = {n**order} values, got {flat.size}")
        return cls(flat.reshape((n,) * order))

    @property
    def order(self) -> int:
        return self.data.ndim

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def flat(self) -> np.ndarray:
        return self.data.reshape(-1)

    def __getitem__(self, index):
        return self.data[index]

    def norm(self) -> float:
        return float(np.linalg.norm(self.flat))

    def __repr__(self):
        return f"DenseTensor(order={self.order}, dim={self.dim}, norm={self.norm():.6g})"


def as_tensor(w, n: int | None = None, order: int | None = None) -> DenseTensor:
    """Coerce an array (shaped or flat) to a DenseTensor."""
    if isinstance(w, DenseTensor):
        t = w
    else:
        arr = np.asarray(w, dtype=float)
        if arr.ndim == 1 and n is not None and order is not None:
            t = DenseTensor.from_flat(arr, n, order)
        else:
            t = DenseTensor(arr)
    if n is not None and t.dim != n:
        raise ValueError(f"tensor dimension {t.dim} does not match n={n}")
    if order is not None and t.order != order:
        raise ValueError(f"tensor order {t.order} does not match l={order}")
    return t


def outer_product(a: DenseTensor, b: DenseTensor) -> DenseTensor:
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return DenseTensor(np.multiply.outer(a.data, b.data))


def multi_mode_inner(a: DenseTensor, b: DenseTensor, k: int):
    """Contract the first ``k`` modes of ``a`` against the first ``k`` of ``b``.

    Returns a float when every mode of both tensors is contracted, otherwise a
    DenseTensor of order ``a.order + b.order - 2k``.
    """
    if k < 0 or k > min(a.order, b.order):
        raise ValueError(f"cannot contract {k} modes of tensors with orders {a.order}, {b.order}")
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch on contracted modes: {a.dim} vs {b.dim}")
    axes = list(range(k))
    out = np.tensordot(a.data, b.data, axes=(axes, axes))
    if out.ndim == 0:
        return float(out)
    return DenseTensor(out)


def rank1_power(x, l: int) -> DenseTensor:
    """The symmetric tensor ``x ⊗ ... ⊗ x`` (``l`` factors)."""
    if l < 1:
        raise ValueError("order l must be >= 1")
    x = np.asarray(x, dtype=float).reshape(-1)
    out = x
    for _ in range(l - 1):
        out = np.multiply.outer(out, x)
    return DenseTensor(out)


def _mode_apply(arr: np.ndarray, mat: np.ndarray, mode: int) -> np.ndarray:
    # out[..., i, ...] = sum_j mat[i, j] arr[..., j, ...] on the given mode
    return np.moveaxis(np.tensordot(mat, arr, axes=([1], [mode])), 0, mode)


def multilinear_apply(mats: Sequence[np.ndarray], w: DenseTensor) -> DenseTensor:
    """Apply ``mats[k]`` along mode ``k`` of ``w`` for every mode."""
    if len(mats) != w.order:
        raise ValueError(f"got {len(mats)} matrices for a tensor of order {w.order}")
    out = w.data
    for k, mat in enumerate(mats):
        mat = np.asarray(mat, dtype=float)
        if mat.shape != (w.dim, w.dim):
            raise ValueError(f"matrix {k} has shape {mat.shape}, expected {(w.dim, w.dim)}")
        out = _mode_apply(out, mat, k)
    return DenseTensor(out)


class Rank1Projection(NamedTuple):
    vector: np.ndarray
    residual: float
    converged: bool


def _contract_all_but(w: np.ndarray, u: np.ndarray, skip: int) -> np.ndarray:
    out = w
    # contract from the last mode down so the remaining axis indices stay valid
    for mode in reversed(range(w.ndim)):
        if mode != skip:
            out = np.tensordot(out, u, axes=([mode], [0]))
    return out


def _symmetric_gradient(w: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Gradient of <w, u^{⊗l}> with respect to u."""
    return sum(_contract_all_but(w, u, k) for k in range(w.ndim))


def _power_iterate(w: np.ndarray, u: np.ndarray, max_iters: int, tol: float):
    l = w.ndim
    scale = np.linalg.norm(w)
    u = u / np.linalg.norm(u)
    g = float(_symmetric_gradient(w, u) @ u) / l
    shift = 0.0
    for _ in range(max_iters):
        step = _symmetric_gradient(w, u) / l + shift * u
        nrm = np.linalg.norm(step)
        if nrm == 0.0:
            return u, g, True
        u_new = step / nrm
        g_new = float(_symmetric_gradient(w, u_new) @ u_new) / l
        if g_new < g - 1e-14 * scale:
            # plain iteration overshot; a positive shift restores monotone ascent
            shift = max(2.0 * shift, (l - 1) * scale)
            continue
        done = abs(g_new - g) <= tol * scale and np.linalg.norm(u_new - u) <= np.sqrt(tol)
        u, g = u_new, g_new
        if done:
            return u, g, True
    return u, g, False


def best_rank1_projection(
    w: DenseTensor,
    restarts: int = 8,
    max_iters: int = 200,
    tol: float = 1e-10,
    seed: int = 0,
    start=None,
) -> Rank1Projection:
    """Best symmetric rank-1 approximation ``v^{⊗l}`` of ``w`` in Frobenius norm.

    Maximizes ``<w, u^{⊗l}>`` over unit ``u`` with higher-order power
    iteration; the first start is the leading left singular vector of the
    mode-1 unfolding, the remaining ``restarts`` starts are random. The
    magnitude follows in closed form, so the residual is
    ``sqrt(||w||^2 - g^2)`` with ``g`` the attained maximum. ``start`` adds
    a warm-start direction, e.g. the previous point along a trajectory.
    """
    w = as_tensor(w)
    arr = w.data
    l = w.order
    wnorm = w.norm()
    if wnorm == 0.0:
        raise ValueError("cannot project the zero tensor")

    rng = np.random.default_rng(seed)
    starts = [np.linalg.svd(arr.reshape(w.dim, -1), full_matrices=False)[0][:, 0]]
    if start is not None and np.any(start):
        starts.append(np.asarray(start, dtype=float).reshape(-1))
    starts += [rng.standard_normal(w.dim) for _ in range(restarts)]

    best_u, best_g, best_ok = None, -np.inf, False
    for u0 in starts:
        if l % 2 == 1:
            # odd order: g(-u) = -g(u), so seed the ascent on the better side
            if float(_symmetric_gradient(arr, u0) @ u0) < 0:
                u0 = -u0
        u, g, ok = _power_iterate(arr, u0, max_iters, tol)
        if g > best_g:
            best_u, best_g, best_ok = u, g, ok

    if best_g <= 0.0:
        # only reachable for even l: no positive rank-1 component
        return Rank1Projection(np.zeros(w.dim), wnorm, best_ok)

    v = best_g ** (1.0 / l) * best_u
    if l % 2 == 0:
        nz = np.flatnonzero(np.abs(v) > 1e-12 * np.abs(v).max())
        if nz.size and v[nz[0]] < 0:
            v = -v
    residual = float(np.linalg.norm(arr - rank1_power(v, l).data))
    return Rank1Projection(v, residual, best_ok)
