"""Lift the spurious point to x^{⊗l} and watch the smallest Hessian
eigenvalue fall until it turns negative."""

import numpy as np

from liftsense import Problem, classify, escape_direction, find_sops, h_value, rank1_power

p = Problem.benchmark(3, 0.3)
xhat = next(x for x, _ in find_sops(p, 40) if h_value(p, x) > 1e-12)
print("spurious point:", np.round(xhat, 4))

print(" l   min eig at z^l   min eig at xhat^l   label at xhat^l")
for l in range(1, 6):
    rz = classify(p, l, rank1_power(p.z, l))
    rx = classify(p, l, rank1_power(xhat, l))
    print(f"{l:2d}   {rz.min_eig:14.4f}   {rx.min_eig:17.4f}   {rx.classification.value}")

# the direction the analysis points to: u^{⊗l} with u the bottom eigenvector
# of grad f(xhat xhat^T)
esc = escape_direction(p, xhat, ls=range(1, 8))
print("u =", np.round(esc.u, 4), " u.xhat =", f"{esc.u @ xhat:.1e}")
for l, c in esc.curvature.items():
    print(f"curvature along u^{l}: {c:+.4f}")
