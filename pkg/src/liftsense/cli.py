"""Command-line experiments.

    liftsense table1 --n 3 5 --lmax 4 --eps 0.3 --out table1.csv
    liftsense table2 --n 3 4 5 --l 3 --trials 40 --out table2.csv
    liftsense trajectories --n 3 --l 3 --trials 4 --out traj.jsonl
    liftsense bounds --n 3 --eps 0.3 --out bounds.json

Exit status: 0 on success, 2 on bad flags, 3 on numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from contextlib import contextmanager

import numpy as np

from .landscape import EigenSolverError, classify, escape_direction, find_sops, spurious
from .objective import HESS_CAP, Problem, canonical_ground_truth, h_value
from .optimize import AdamConfig, NonFiniteLoss, export_jsonl, run_trial, success_rate
from .sensing import BenchmarkSpec, load_operator, make_benchmark
from .tensor import rank1_power
from .theory import bound_report, surrogate_constants

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3

TABLE1_FIELDS = ["n", "l", "grad_norm_z", "grad_norm_xhat", "min_eig_z", "min_eig_xhat"]
TABLE2_FIELDS = ["n", "l", "trials", "successes", "rate"]
NONE = "NONE"


def _problem(n: int, eps: float, operator_file: str | None) -> Problem:
    if operator_file:
        op = load_operator(operator_file)
        return Problem(op, canonical_ground_truth(op.n))
    return Problem(make_benchmark(BenchmarkSpec(n, eps)), canonical_ground_truth(n))


@contextmanager
def _sink(path: str | None):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _write_rows(rows: list[dict], fields: list[str], fmt: str, out: str | None) -> None:
    with _sink(out) as fh:
        if fmt == "json":
            json.dump(rows, fh, indent=1)
            fh.write("\n")
            return
        w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})


def table1_rows(p: Problem, ls, starts: int, seed: int, tol_grad=None, tol_eig=None) -> list[dict]:
    sops = find_sops(p, starts, seed=seed, tol_grad=tol_grad, tol_eig=tol_eig)
    bad = spurious(p, sops)
    xhat = bad[0][0] if bad else None
    rows = []
    for l in ls:
        if p.n**l > HESS_CAP:
            raise ValueError(f"n={p.n}, l={l} exceeds the dense Hessian cap")
        rz = classify(p, l, rank1_power(p.z, l), tol_grad, tol_eig)
        row = {"n": p.n, "l": l, "grad_norm_z": rz.grad_norm, "min_eig_z": rz.min_eig}
        if xhat is None:
            row.update(grad_norm_xhat=NONE, min_eig_xhat=NONE)
        else:
            rx = classify(p, l, rank1_power(xhat, l), tol_grad, tol_eig)
            row.update(grad_norm_xhat=rx.grad_norm, min_eig_xhat=rx.min_eig)
        rows.append({k: row[k] for k in TABLE1_FIELDS})
    return rows


def table2_rows(p: Problem, l: int, trials: int, seed: int) -> list[dict]:
    rows = []
    for order in (1, l) if l != 1 else (1,):
        rate, recs = success_rate(p, order, trials, seed)
        rows.append({"n": p.n, "l": order, "trials": trials, "successes": round(rate * trials), "rate": rate})
    return rows


def landmarks(p: Problem, starts: int, seed: int) -> list[dict]:
    """Every SOP with both signs, labelled global or spurious."""
    out = []
    for x, rep in find_sops(p, starts, seed=seed):
        kind = "global" if h_value(p, x) <= 1e-8 else "spurious"
        for s in (1.0, -1.0):
            out.append({"kind": kind, "point": [float(c) for c in s * x], "min_eig": rep.min_eig})
    return out


def bounds_document(p: Problem, eps: float, lmax: int, starts: int, seed: int) -> dict:
    L, alpha = surrogate_constants(p)
    odd = tuple(range(1, lmax + 1, 2))
    sops = []
    for x, _ in spurious(p, find_sops(p, starts, seed=seed)):
        esc = escape_direction(p, x, odd)
        sops.append(
            {
                "xhat": [float(c) for c in x],
                "h_value": h_value(p, x),
                "report": bound_report(p, x, L, alpha).to_dict(),
                "escape_eigenvalue": esc.eigenvalue,
                "escape_curvature": {str(k): v for k, v in esc.curvature.items()},
            }
        )
    return {"n": p.n, "eps": eps, "L": L, "alpha": alpha, "spurious_sops": sops}


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="liftsense", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, n_many: bool):
        if n_many:
            sp.add_argument("--n", type=int, nargs="+", default=[3])
        else:
            sp.add_argument("--n", type=int, default=3)
        sp.add_argument("--eps", type=float, default=0.3)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", default="-")
        sp.add_argument("--operator-file", default=None)

    t1 = sub.add_parser("table1", help="smallest Hessian eigenvalues at z and a spurious SOP")
    common(t1, True)
    t1.add_argument("--l", type=int, nargs="+", default=None)
    t1.add_argument("--lmax", type=int, default=4)
    t1.add_argument("--starts", type=int, default=40)
    t1.add_argument("--format", choices=["csv", "json"], default="csv")
    t1.add_argument("--tol-grad", type=float, default=None)
    t1.add_argument("--tol-eig", type=float, default=None)

    t2 = sub.add_parser("table2", help="ADAM success rates, unlifted and lifted")
    common(t2, True)
    t2.add_argument("--l", type=int, default=3)
    t2.add_argument("--trials", type=int, default=40)
    t2.add_argument("--format", choices=["csv", "json"], default="csv")

    tr = sub.add_parser("trajectories", help="projected ADAM trajectories as JSON lines")
    common(tr, False)
    tr.add_argument("--l", type=int, default=3)
    tr.add_argument("--trials", type=int, default=4)
    tr.add_argument("--record-every", type=int, default=10)
    tr.add_argument("--starts", type=int, default=40)

    bd = sub.add_parser("bounds", help="theorem quantities at every spurious SOP")
    common(bd, False)
    bd.add_argument("--lmax", type=int, default=5)
    bd.add_argument("--starts", type=int, default=40)
    return ap


def _validate(ap, args) -> None:
    ns = args.n if isinstance(args.n, list) else [args.n]
    if any(n < 2 for n in ns):
        ap.error("--n must be >= 2")
    if not 0.0 <= args.eps <= 1.0:
        ap.error("--eps must lie in [0, 1]")
    for name in ("trials", "lmax", "starts", "record_every"):
        if getattr(args, name, 1) < 1:
            ap.error(f"--{name.replace('_', '-')} must be >= 1")
    ls = getattr(args, "l", None)
    if ls is not None and min(ls if isinstance(ls, list) else [ls]) < 1:
        ap.error("--l must be >= 1")
    if args.operator_file and isinstance(args.n, list) and len(args.n) > 1:
        ap.error("--operator-file fixes n; pass a single --n or omit it")


def run(argv=None) -> int:
    ap = _parser()
    args = ap.parse_args(argv)
    _validate(ap, args)
    try:
        if args.command == "table1":
            ls = args.l or list(range(1, args.lmax + 1))
            rows = []
            for n in args.n:
                p = _problem(n, args.eps, args.operator_file)
                rows += table1_rows(p, ls, args.starts, args.seed, args.tol_grad, args.tol_eig)
            _write_rows(rows, TABLE1_FIELDS, args.format, args.out)
        elif args.command == "table2":
            rows = []
            for n in args.n:
                rows += table2_rows(_problem(n, args.eps, args.operator_file), args.l, args.trials, args.seed)
            _write_rows(rows, TABLE2_FIELDS, args.format, args.out)
        elif args.command == "trajectories":
            p = _problem(args.n, args.eps, args.operator_file)
            cfg = AdamConfig(record_every=args.record_every)
            recs = [run_trial(p, args.l, args.seed + i, cfg) for i in range(args.trials)]
            header = {
                "type": "header",
                "n": p.n,
                "l": args.l,
                "eps": args.eps,
                "trials": args.trials,
                "landmarks": landmarks(p, args.starts, args.seed),
            }
            with _sink(args.out) as fh:
                export_jsonl(recs, fh, header)
        elif args.command == "bounds":
            p = _problem(args.n, args.eps, args.operator_file)
            doc = bounds_document(p, args.eps, args.lmax, args.starts, args.seed)
            with _sink(args.out) as fh:
                json.dump(doc, fh, indent=1, default=_json_default)
                fh.write("\n")
    except (NonFiniteLoss, EigenSolverError, np.linalg.LinAlgError) as exc:
        print(f"liftsense: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError) as exc:
        print(f"liftsense: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def _json_default(o):
    if isinstance(o, float) and math.isinf(o):
        return None
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"not serializable: {type(o)}")


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
