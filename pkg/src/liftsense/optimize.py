"""ADAM local search on the unlifted and lifted objectives, seeded trials,
success rates, and rank-1 projection of lifted trajectories."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, NamedTuple

import numpy as np

from .objective import Problem, hl_value_and_grad
from .tensor import DenseTensor, best_rank1_projection, rank1_power

__all__ = [
    "AdamConfig",
    "NonFiniteLoss",
    "ProjectedPath",
    "SUCCESS_RADIUS",
    "TrialRecord",
    "export_jsonl",
    "project_trajectory",
    "run_adam",
    "run_trial",
    "success_distance",
    "success_rate",
]

SUCCESS_RADIUS = 0.05


class NonFiniteLoss(FloatingPointError):
    """Raised when the objective or its gradient stops being finite."""


@dataclass(frozen=True)
class AdamConfig:
    lr: float = 0.02
    beta1: float = 0.9
    beta2: float = 0.999
    eps_hat: float = 1e-8
    max_iters: int = 10000
    grad_tol: float = 1e-8
    # 0 disables trajectory recording
    record_every: int = 1

    def __post_init__(self):
        if not self.lr > 0:
            raise ValueError("lr must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("beta1 and beta2 must lie in [0, 1)")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.record_every < 0:
            raise ValueError("record_every must be >= 0")


Step = tuple  # (iteration, loss, flat point)


def run_adam(
    grad_fn: Callable[[np.ndarray], tuple[float, np.ndarray]],
    x0,
    cfg: AdamConfig = AdamConfig(),
) -> tuple[np.ndarray, list[Step], float, int]:
    """Bias-corrected ADAM from ``x0``.

    Returns ``(terminal, trajectory, terminal_loss, iters_used)``. The
    trajectory holds ``(k, loss(x_k), x_k)`` for every ``record_every``-th
    iterate plus the terminal one.
    """
    x = np.array(x0, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("initial point must be finite")
    m = np.zeros_like(x)
    v = np.zeros_like(x)
    traj: list[Step] = []
    every = cfg.record_every
    k = 0
    while True:
        loss, g = grad_fn(x)
        if not (np.isfinite(loss) and np.all(np.isfinite(g))):
            raise NonFiniteLoss(f"non-finite loss or gradient at iteration {k}")
        last = k == cfg.max_iters or np.linalg.norm(g) <= cfg.grad_tol
        if every and (k % every == 0 or last):
            traj.append((k, float(loss), x.copy()))
        if last:
            return x, traj, float(loss), k
        k += 1
        m = cfg.beta1 * m + (1 - cfg.beta1) * g
        v = cfg.beta2 * v + (1 - cfg.beta2) * g * g
        m_hat = m / (1 - cfg.beta1**k)
        v_hat = v / (1 - cfg.beta2**k)
        x = x - cfg.lr * m_hat / (np.sqrt(v_hat) + cfg.eps_hat)


@dataclass(eq=False)
class TrialRecord:
    seed: int
    l: int
    n: int
    # raw iterates (flat, length n**l); project_trajectory maps them to R^n
    steps: list = field(repr=False)
    terminal: DenseTensor
    terminal_loss: float
    success: bool
    iters_used: int
    distance: float


def success_distance(p: Problem, l: int, w) -> float:
    """Frobenius distance from ``w`` to the nearer of ``±z^{⊗l}``; both are
    global minimizers because ``h_l(w) = h_l(-w)``."""
    Z = rank1_power(p.z, l).flat
    w = np.asarray(w, dtype=float).reshape(-1)
    return float(min(np.linalg.norm(w - Z), np.linalg.norm(w + Z)))


def run_trial(
    p: Problem,
    l: int,
    seed: int,
    cfg: AdamConfig = AdamConfig(),
    init_sigma: float = 0.01,
) -> TrialRecord:
    """One ADAM run on ``h_l`` from a dense ``N(0, init_sigma^2)`` start drawn
    from ``numpy.random.default_rng(seed)`` (PCG64)."""
    if not init_sigma > 0:
        raise ValueError("init_sigma must be positive")
    rng = np.random.default_rng(seed)
    w0 = rng.normal(0.0, init_sigma, size=p.n**l)
    w, traj, loss, iters = run_adam(lambda w: hl_value_and_grad(p, l, w), w0, cfg)
    dist = success_distance(p, l, w)
    return TrialRecord(
        seed=seed,
        l=l,
        n=p.n,
        steps=traj,
        terminal=DenseTensor.from_flat(w, p.n, l),
        terminal_loss=loss,
        success=dist <= SUCCESS_RADIUS,
        iters_used=iters,
        distance=dist,
    )


def success_rate(
    p: Problem,
    l: int,
    n_trials: int,
    base_seed: int = 0,
    cfg: AdamConfig = AdamConfig(record_every=0),
    init_sigma: float = 0.01,
) -> tuple[float, list[TrialRecord]]:
    """Fraction of successful trials over seeds ``base_seed + i``.

    A trial whose loss turns non-finite counts as unsuccessful and is
    omitted from the returned records.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    records = []
    for i in range(n_trials):
        try:
            records.append(run_trial(p, l, base_seed + i, cfg, init_sigma))
        except NonFiniteLoss:
            continue
    wins = sum(r.success for r in records)
    return wins / n_trials, records


class ProjectedPath(NamedTuple):
    iters: np.ndarray
    losses: np.ndarray
    points: np.ndarray  # (steps, n)
    residuals: np.ndarray
    converged: np.ndarray


def project_trajectory(rec: TrialRecord, restarts: int = 2, seed: int = 0) -> ProjectedPath:
    """Best rank-1 projection of every recorded iterate.

    Each projection is warm-started from the previous point. For even ``l``
    the projection is only defined up to sign, so each point takes the sign
    closer to its predecessor; for odd ``l`` the sign is part of the answer
    and is left alone.
    """
    if not rec.steps:
        raise ValueError("trial has no recorded steps")
    iters = np.array([s[0] for s in rec.steps])
    losses = np.array([s[1] for s in rec.steps])
    if rec.l == 1:
        pts = np.array([s[2] for s in rec.steps])
        k = len(pts)
        return ProjectedPath(iters, losses, pts, np.zeros(k), np.ones(k, dtype=bool))

    pts, res, ok = [], [], []
    prev = None
    for _, _, w in rec.steps:
        t = DenseTensor.from_flat(w, rec.n, rec.l)
        if t.norm() == 0.0:
            v, r, c = np.zeros(rec.n), 0.0, True
        else:
            v, r, c = best_rank1_projection(t, restarts=restarts, seed=seed, start=prev)
        if rec.l % 2 == 0 and prev is not None and np.linalg.norm(v + prev) < np.linalg.norm(v - prev):
            v = -v
        pts.append(v)
        res.append(r)
        ok.append(c)
        if np.any(v):
            prev = v
    return ProjectedPath(iters, losses, np.array(pts), np.array(res), np.array(ok))


def export_jsonl(records, dest, header: dict | None = None, project: bool = True) -> int:
    """Write one JSON object per recorded step ``{trial, iter, loss, point}``,
    preceded by ``header`` if given. ``dest`` is a path or an open text
    stream. Returns the number of lines written."""
    if hasattr(dest, "write"):
        return _write_jsonl(dest, records, header, project)
    with Path(dest).open("w") as fh:
        return _write_jsonl(fh, records, header, project)


def _write_jsonl(fh, records, header, project) -> int:
    lines = 0
    if header is not None:
        fh.write(json.dumps(header) + "\n")
        lines += 1
    for rec in records:
        if project:
            path = project_trajectory(rec)
            rows = zip(path.iters, path.losses, path.points)
        else:
            rows = ((k, loss, w) for k, loss, w in rec.steps)
        for k, loss, pt in rows:
            obj = {"trial": rec.seed, "iter": int(k), "loss": float(loss), "point": [float(c) for c in pt]}
            fh.write(json.dumps(obj) + "\n")
            lines += 1
    return lines
