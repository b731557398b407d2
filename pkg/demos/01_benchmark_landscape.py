"""Walk through the entrywise benchmark: its curvature constants, its
second-order points, and why local search can get stuck."""

import numpy as np

from liftsense import Problem, find_sops, h_value, spectrum_constants

# n = 3, off-pattern entries seen at weight 0.3
p = Problem.benchmark(3, 0.3)
print("ground truth z =", p.z)
print("measurements m =", p.m)

# L and alpha are the extreme eigenvalues of M -> ||A(M)||^2 on symmetric M
c = spectrum_constants(p.op)
print(f"L = {c.L_global:.3f}, alpha = {c.alpha_global:.3f}, delta = {c.delta_global:.3f}")

# 40 random starts, each polished by Newton steps, merged up to sign
for x, rep in find_sops(p, 40):
    kind = "global" if h_value(p, x) < 1e-12 else "spurious"
    print(f"{kind:8s} x = {np.round(x, 4)}  h = {h_value(p, x):.4f}  min eig = {rep.min_eig:.3f}")

# the spurious point has a positive definite Hessian: gradient methods that
# land near it stay there
