"""Linear measurement operators ``M -> (<A_1, M>, ..., <A_m, M>)`` on
symmetric matrices, the entrywise benchmark family, and curvature constants
of the induced least-squares objective.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "BenchmarkSpec",
    "ConstantsReport",
    "SensingOperator",
    "adjoint_weighted",
    "apply",
    "benchmark_omega",
    "load_operator",
    "make_benchmark",
    "sampled_rank2_constants",
    "save_operator",
    "spectrum_constants",
    "sym_basis",
]


@dataclass(frozen=True)
class BenchmarkSpec:
    n: int
    eps: float

    def __post_init__(self):
        if not 0.0 <= self.eps <= 1.0:
            raise ValueError(f"eps must lie in [0, 1], got {self.eps}")


@dataclass(frozen=True, eq=False)
class SensingOperator:
    """An ordered stack of ``m`` symmetric ``n x n`` measurement matrices."""

    matrices: np.ndarray
    labels: tuple = ()
    benchmark: BenchmarkSpec | None = None

    def __post_init__(self):
        mats = np.array(self.matrices, dtype=float)
        if mats.ndim != 3 or mats.shape[0] < 1 or mats.shape[1] != mats.shape[2]:
            raise ValueError(f"expected an (m, n, n) stack with m >= 1, got shape {mats.shape}")
        if not np.array_equal(mats, mats.transpose(0, 2, 1)):
            raise ValueError("measurement matrices must be exactly symmetric")
        mats.setflags(write=False)
        object.__setattr__(self, "matrices", mats)
        labels = tuple(self.labels) if self.labels else tuple({"index": a} for a in range(len(mats)))
        if len(labels) != len(mats):
            raise ValueError("one label per measurement matrix is required")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_matrices(cls, mats, labels=(), symmetrize=True) -> "SensingOperator":
        mats = np.asarray(mats, dtype=float)
        if symmetrize:
            mats = 0.5 * (mats + mats.transpose(0, 2, 1))
        return cls(mats, labels)

    @property
    def n(self) -> int:
        return self.matrices.shape[1]

    @property
    def m(self) -> int:
        return self.matrices.shape[0]

    def to_dict(self) -> dict:
        out = {
            "n": self.n,
            "m": self.m,
            "matrices": self.matrices.tolist(),
            "labels": list(self.labels),
        }
        if self.benchmark is not None:
            out["benchmark"] = {"n": self.benchmark.n, "eps": self.benchmark.eps}
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "SensingOperator":
        mats = np.asarray(d["matrices"], dtype=float)
        if mats.shape != (d["m"], d["n"], d["n"]):
            raise ValueError(f"declared (m, n) = ({d['m']}, {d['n']}) but matrices have shape {mats.shape}")
        bench = d.get("benchmark")
        spec = BenchmarkSpec(bench["n"], bench["eps"]) if bench else None
        return cls(mats, tuple(d.get("labels") or ()), spec)


def save_operator(op: SensingOperator, path) -> None:
    Path(path).write_text(json.dumps(op.to_dict(), indent=1))


def load_operator(path) -> SensingOperator:
    return SensingOperator.from_dict(json.loads(Path(path).read_text()))


def benchmark_omega(n: int) -> set[tuple[int, int]]:
    """Fully observed index pairs, 1-based: the diagonal plus every row and
    column with an even index."""
    evens = range(2, 2 * (n // 2) + 1, 2)
    omega = {(i, i) for i in range(1, n + 1)}
    for i in range(1, n + 1):
        for e in evens:
            omega.add((i, e))
            omega.add((e, i))
    return omega


def make_benchmark(spec: BenchmarkSpec) -> SensingOperator:
    """One measurement per entry ``(i, j)``: the symmetrized elementary matrix,
    scaled by 1 inside the observed set and by ``eps`` outside it.

    Both ``(i, j)`` and ``(j, i)`` are kept, so ``m = n**2``.
    """
    n = spec.n
    if n < 2:
        raise ValueError("benchmark needs n >= 2")
    omega = benchmark_omega(n)
    mats = np.zeros((n * n, n, n))
    labels = []
    for i in range(n):
        for j in range(n):
            a = i * n + j
            in_omega = (i + 1, j + 1) in omega
            scale = 1.0 if in_omega else spec.eps
            mats[a, i, j] += 0.5 * scale
            mats[a, j, i] += 0.5 * scale
            labels.append({"entry": [i + 1, j + 1], "in_omega": in_omega, "scale": scale})
    return SensingOperator(mats, tuple(labels), spec)


def apply(op: SensingOperator, M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.shape != (op.n, op.n):
        raise ValueError(f"expected a {op.n}x{op.n} matrix, got shape {M.shape}")
    return np.einsum("aij,ij->a", op.matrices, M)


def adjoint_weighted(op: SensingOperator, y) -> np.ndarray:
    """``sum_a y_a A_a``."""
    y = np.asarray(y, dtype=float)
    if y.shape != (op.m,):
        raise ValueError(f"expected a length-{op.m} vector, got shape {y.shape}")
    return np.tensordot(y, op.matrices, axes=(0, 0))


def sym_basis(n: int) -> np.ndarray:
    """Orthonormal basis of the symmetric ``n x n`` matrices under the
    Frobenius inner product, shape ``(n(n+1)/2, n, n)``."""
    basis = []
    for i in range(n):
        for j in range(i, n):
            E = np.zeros((n, n))
            if i == j:
                E[i, i] = 1.0
            else:
                E[i, j] = E[j, i] = 1.0 / np.sqrt(2.0)
            basis.append(E)
    return np.array(basis)


@dataclass(frozen=True)
class ConstantsReport:
    """Extreme eigenvalues of ``M -> ||A(M)||^2`` on symmetric matrices.

    ``L_global``/``alpha_global`` are the smoothness/strong-convexity
    constants of ``f(M) = 1/2 ||A(M - M*)||^2``; they bound every restricted
    constant from outside (``alpha_global <= alpha_s <= L_s <= L_global``).
    """

    lam_max: float
    lam_min: float
    L_global: float
    alpha_global: float
    delta_global: float
    delta_paper: float | None = None
    gram_eigenvalues: np.ndarray = field(default=None, repr=False, compare=False)


def spectrum_constants(op: SensingOperator) -> ConstantsReport:
    basis = sym_basis(op.n)
    coords = np.einsum("aij,bij->ab", op.matrices, basis)
    eig = np.linalg.eigvalsh(coords.T @ coords)
    lam_min, lam_max = max(float(eig[0]), 0.0), float(eig[-1])
    delta = (lam_max - lam_min) / (lam_max + lam_min) if lam_max + lam_min > 0 else 1.0
    delta_paper = None
    if op.benchmark is not None:
        eps = op.benchmark.eps
        delta_paper = (1.0 - eps) / (1.0 + eps)
    return ConstantsReport(
        lam_max=lam_max,
        lam_min=lam_min,
        L_global=lam_max,
        alpha_global=lam_min,
        delta_global=delta,
        delta_paper=delta_paper,
        gram_eigenvalues=eig,
    )


def sampled_rank2_constants(op: SensingOperator, samples: int = 2000, seed: int = 0) -> tuple[float, float]:
    """Diagnostic estimate of the rank-2 restricted extreme ratios
    ``||A(D)||^2 / ||D||_F^2`` from random symmetric rank-2 ``D``.

    Not a certificate: the true restricted minimum is at most the returned
    minimum and the true maximum at least the returned maximum.
    """
    rng = np.random.default_rng(seed)
    lo, hi = np.inf, 0.0
    for _ in range(samples):
        U = rng.standard_normal((op.n, 2))
        s = rng.standard_normal(2)
        D = (U * s) @ U.T
        ratio = float(np.sum(apply(op, D) ** 2) / np.sum(D**2))
        lo, hi = min(lo, ratio), max(hi, ratio)
    return lo, hi
