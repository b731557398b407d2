"""Unlifted and lifted rank-1 sensing objectives with analytic derivatives.

With residuals ``r_a = <A_a, xx^T> - b_a`` the unlifted objective is

    h(x) = 1/2 * sum_a r_a^2,

and for an order-``l`` tensor ``w`` with ``K_m = A_{m_1} ⊗ ... ⊗ A_{m_l}``
(acting on ``w`` flattened to length ``n**l``) the lifted objective is

    h_l(w) = 1/2 * sum_m (<w, K_m w> - b_{m_1} ... b_{m_l})^2.

The sum over the ``m**l`` measurement multi-indices never runs explicitly.
Every quantity is a contraction of ``w w^T - Z Z^T`` (``Z = z^{⊗l}``) with
the ``l``-fold tensor power of one of two ``n^2 x n^2`` Gram matrices of the
measurement stack, which costs ``O(l n^{2l+2})`` per call.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .sensing import SensingOperator, adjoint_weighted, apply
from .tensor import DenseTensor, as_tensor, rank1_power

__all__ = [
    "Problem",
    "canonical_ground_truth",
    "evaluate_materialized",
    "h_grad",
    "h_hess",
    "h_value",
    "hl_grad",
    "hl_hess_dense",
    "hl_hvp",
    "hl_value",
    "hl_value_and_grad",
    "materialize_lifted",
]

HESS_CAP = 4096
MATERIALIZE_CAP = 10**8


def canonical_ground_truth(n: int) -> np.ndarray:
    """Ones on the odd (1-based) coordinates, zeros elsewhere; ``[1, 0, 1]``
    for ``n = 3``."""
    z = np.zeros(n)
    z[0::2] = 1.0
    return z


@dataclass(frozen=True, eq=False)
class Problem:
    op: SensingOperator
    z: np.ndarray
    b: np.ndarray = field(init=False)

    def __post_init__(self):
        z = np.array(self.z, dtype=float).reshape(-1)
        if z.shape != (self.op.n,):
            raise ValueError(f"ground truth has length {z.size}, operator has n={self.op.n}")
        if not np.any(z):
            raise ValueError("ground truth must be nonzero")
        z.setflags(write=False)
        object.__setattr__(self, "z", z)
        b = apply(self.op, np.outer(z, z))
        b.setflags(write=False)
        object.__setattr__(self, "b", b)

        n, A = self.op.n, self.op.matrices
        V = A.reshape(self.op.m, n * n)
        # gram_q[(i,j),(k,l)] = sum_a A_a[i,j] A_a[k,l]
        object.__setattr__(self, "_gram_q", V.T @ V)
        # gram_p[(i,j),(k,l)] = sum_a A_a[i,k] A_a[j,l]
        object.__setattr__(self, "_gram_p", np.einsum("aik,ajl->ijkl", A, A).reshape(n * n, n * n))

    @property
    def n(self) -> int:
        return self.op.n

    @property
    def m(self) -> int:
        return self.op.m

    @classmethod
    def benchmark(cls, n: int, eps: float, z=None) -> "Problem":
        from .sensing import BenchmarkSpec, make_benchmark

        return cls(make_benchmark(BenchmarkSpec(n, eps)), canonical_ground_truth(n) if z is None else z)

    def residual(self, x) -> np.ndarray:
        x = self._vec(x)
        return apply(self.op, np.outer(x, x)) - self.b

    def grad_f(self, x) -> np.ndarray:
        """Gradient of ``f(M) = 1/2 ||A(M - zz^T)||^2`` at ``M = xx^T``."""
        return adjoint_weighted(self.op, self.residual(x))

    def _vec(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.shape != (self.n,):
            raise ValueError(f"expected a length-{self.n} vector, got {x.size} values")
        return x


# ---------------------------------------------------------------------------
# unlifted


def h_value(p: Problem, x) -> float:
    r = p.residual(x)
    return 0.5 * float(r @ r)


def h_grad(p: Problem, x) -> np.ndarray:
    x = p._vec(x)
    return 2.0 * p.grad_f(x) @ x


def h_hess(p: Problem, x) -> np.ndarray:
    x = p._vec(x)
    Ax = p.op.matrices @ x
    H = 4.0 * Ax.T @ Ax + 2.0 * p.grad_f(x)
    return 0.5 * (H + H.T)


# ---------------------------------------------------------------------------
# lifted


def _pair_apply(gram: np.ndarray, T: np.ndarray, n: int, l: int) -> np.ndarray:
    """Apply ``gram^{⊗l}`` to an ``n^l x n^l`` matrix ``T[I, J]`` whose
    row/column multi-indices are paired mode by mode as ``(i_k, j_k)``."""
    n2 = n * n
    X = T.reshape((n,) * (2 * l))
    X = X.transpose([a for k in range(l) for a in (k, l + k)])
    X = np.ascontiguousarray(X).reshape(n2, -1)
    for _ in range(l):
        # transform the leading pair mode, then rotate it to the back
        X = np.ascontiguousarray((gram @ X).T).reshape(n2, -1)
    X = X.reshape((n,) * (2 * l))
    X = X.transpose([2 * k for k in range(l)] + [2 * k + 1 for k in range(l)])
    return X.reshape(n**l, n**l)


def _flat(p: Problem, l: int, w) -> np.ndarray:
    if l < 1:
        raise ValueError("lift order must be >= 1")
    if isinstance(w, DenseTensor):
        w = as_tensor(w, p.n, l).flat
    w = np.asarray(w, dtype=float).reshape(-1)
    if w.size != p.n**l:
        raise ValueError(f"expected {p.n}**{l} = {p.n**l} entries, got {w.size}")
    return w


def _lifted_truth(p: Problem, l: int) -> np.ndarray:
    return rank1_power(p.z, l).flat


def _lifted_residual(p: Problem, l: int, w: np.ndarray) -> np.ndarray:
    """``R = sum_m r_m K_m`` as an ``n^l x n^l`` matrix."""
    Z = _lifted_truth(p, l)
    D = np.outer(w, w) - np.outer(Z, Z)
    return _pair_apply(p._gram_q, D, p.n, l), D


def hl_value_and_grad(p: Problem, l: int, w) -> tuple[float, np.ndarray]:
    """Lifted value and flat gradient sharing one residual contraction."""
    w = _flat(p, l, w)
    R, D = _lifted_residual(p, l, w)
    return 0.5 * float(np.sum(D * R)), 2.0 * R @ w


def hl_value(p: Problem, l: int, w) -> float:
    w = _flat(p, l, w)
    R, D = _lifted_residual(p, l, w)
    return 0.5 * float(np.sum(D * R))


def hl_grad(p: Problem, l: int, w) -> DenseTensor:
    w = _flat(p, l, w)
    R, _ = _lifted_residual(p, l, w)
    return DenseTensor.from_flat(2.0 * R @ w, p.n, l)


def hl_hvp(p: Problem, l: int, w, v) -> DenseTensor:
    """Hessian of ``h_l`` at ``w`` applied to ``v``."""
    w = _flat(p, l, w)
    v = _flat(p, l, v)
    R, _ = _lifted_residual(p, l, w)
    cross = _pair_apply(p._gram_q, np.outer(v, w), p.n, l)
    return DenseTensor.from_flat(4.0 * cross @ w + 2.0 * R @ v, p.n, l)


def hl_hess_dense(p: Problem, l: int, w, cap: int = HESS_CAP) -> np.ndarray:
    """Full ``n^l x n^l`` Hessian of ``h_l`` at ``w``.

    Assembled as ``4 sum_m (K_m w)(K_m w)^T + 2 sum_m r_m K_m``; both sums
    are single Gram contractions, so no per-column HVP loop is needed.
    """
    if p.n**l > cap:
        raise ValueError(f"n**l = {p.n**l} exceeds the dense Hessian cap {cap}")
    w = _flat(p, l, w)
    R, _ = _lifted_residual(p, l, w)
    outer = _pair_apply(p._gram_p, np.outer(w, w), p.n, l)
    H = 4.0 * outer + 2.0 * R
    return 0.5 * (H + H.T)


# ---------------------------------------------------------------------------
# explicit lifted operator (testing oracle)


def materialize_lifted(p: Problem, l: int, cap: int = MATERIALIZE_CAP) -> np.ndarray:
    """Explicit ``m^l x n^{2l}`` table of ``vec(A_{m_1}) ⊗ ... ⊗ vec(A_{m_l})``.

    Row ``(m_1, ..., m_l)``, column ``(i_1, j_1, ..., i_l, j_l)``, both
    row-major; the entry is ``prod_k A_{m_k}[i_k, j_k]``.
    """
    size = p.m**l * p.n ** (2 * l)
    if size > cap:
        raise ValueError(f"materialized operator would hold {size} entries (cap {cap})")
    V = p.op.matrices.reshape(p.m, p.n * p.n)
    table = np.ones((1, 1))
    for _ in range(l):
        table = np.kron(table, V)
    return table


def _pair_layout(w: np.ndarray, n: int, l: int) -> np.ndarray:
    X = np.multiply.outer(w, w).reshape((n,) * (2 * l))
    return X.transpose([a for k in range(l) for a in (k, l + k)]).reshape(-1)


def evaluate_materialized(p: Problem, l: int, w, table: np.ndarray | None = None) -> tuple[float, np.ndarray]:
    """Lifted value and flat gradient by direct summation over the table."""
    n = p.n
    w = _flat(p, l, w)
    if table is None:
        table = materialize_lifted(p, l)
    Z = _lifted_truth(p, l)
    y = table @ (_pair_layout(w, n, l) - _pair_layout(Z, n, l))
    K = table.reshape((-1,) + (n,) * (2 * l))
    K = K.transpose([0] + [1 + 2 * k for k in range(l)] + [2 + 2 * k for k in range(l)])
    K = K.reshape(-1, n**l, n**l)
    grad = 2.0 * np.einsum("m,mij,j->i", y, K, w)
    return 0.5 * float(y @ y), grad
