import numpy as np
import pytest
from conftest import benchmark, benchmark_sops, spurious_point

from liftsense.landscape import (
    Classification,
    classify,
    escape_direction,
    find_sops,
    lifted_curvature,
    min_eigenpair,
    newton_polish,
    spurious,
)
from liftsense.objective import h_value, hl_hess_dense, hl_hvp
from liftsense.tensor import rank1_power


def test_min_eigenpair_dense_examples():
    lam, v = min_eigenpair(np.diag([3.0, -1.0, 2.0]))
    assert lam == -1.0
    assert abs(v[1]) == pytest.approx(1.0)
    lam, v = min_eigenpair(np.eye(4))
    assert lam == pytest.approx(1.0) and np.linalg.norm(v) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        min_eigenpair(np.ones((2, 3)))
    with pytest.raises(ValueError):
        min_eigenpair(lambda v: v)


def test_min_eigenpair_paths_agree():
    rng = np.random.default_rng(0)
    M = rng.standard_normal((40, 40))
    M = M + M.T
    lam_d, v_d = min_eigenpair(M)
    lam_i, v_i = min_eigenpair(lambda v: M @ v, dim=40)
    assert lam_i == pytest.approx(lam_d, abs=1e-9)
    assert np.linalg.norm(M @ v_i - lam_i * v_i) <= 1e-8 * np.linalg.norm(M, 2)
    assert abs(v_i @ v_d) == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("l", [1, 2, 3, 4])
def test_ground_truth_is_sop(l):
    p = benchmark(3)
    rep = classify(p, l, rank1_power(p.z, l))
    assert rep.classification is Classification.SOP
    assert rep.min_eig == pytest.approx(4.0, abs=1e-9)
    assert rep.grad_norm <= rep.tol_grad


def test_spurious_becomes_strict_saddle_at_order_four():
    p = benchmark(3)
    rep = classify(p, 4, rank1_power(spurious_point(3), 4))
    assert rep.classification is Classification.FOP_ONLY
    assert rep.min_eig < -rep.tol_eig


def test_random_point_not_critical():
    p = benchmark(3)
    rep = classify(p, 2, np.random.default_rng(0).standard_normal(9))
    assert rep.classification is Classification.NOT_CRITICAL


def test_classification_matches_invariants():
    p = benchmark(3)
    x = spurious_point(3)
    rng = np.random.default_rng(2)
    points = [rank1_power(x, l) for l in (2, 3, 4)] + [rank1_power(p.z, 2), rng.standard_normal(9)]
    for w in points:
        l = w.order if hasattr(w, "order") else 2
        for tg in (None, 1e-30, 1.0):
            rep = classify(p, l, w, tol_grad=tg)
            if rep.grad_norm > rep.tol_grad:
                assert rep.classification is Classification.NOT_CRITICAL
            elif rep.min_eig >= -rep.tol_eig:
                assert rep.classification is Classification.SOP
            else:
                assert rep.classification is Classification.FOP_ONLY


def test_matrix_free_classify_matches_dense():
    p = benchmark(3)
    w = rank1_power(spurious_point(3), 6)  # 729 > dense limit
    rep = classify(p, 6, w)
    lam_dense = np.linalg.eigvalsh(hl_hess_dense(p, 6, w))[0]
    assert rep.min_eig == pytest.approx(lam_dense, abs=1e-6)
    assert rep.classification is Classification.FOP_ONLY


def test_escape_direction_orthogonal_and_negative():
    p = benchmark(3)
    x = spurious_point(3)
    esc = escape_direction(p, x, ls=(1, 2, 3, 4, 5))
    assert esc.eigenvalue < 0
    assert abs(esc.u @ x) <= 1e-8
    for l in (1, 2, 3, 4, 5):
        assert esc.curvature[l] == pytest.approx(lifted_curvature(p, x, esc.u, l), rel=1e-9, abs=1e-12)
    # negative exactly where classify sees negative curvature
    assert esc.curvature[4] < 0 and esc.curvature[5] < 0
    assert classify(p, 4, rank1_power(x, 4)).min_eig < 0


def test_escape_direction_at_ground_truth():
    p = benchmark(3)
    esc = escape_direction(p, p.z, ls=(1, 3))
    assert esc.eigenvalue == pytest.approx(0.0, abs=1e-12)
    assert all(c >= -1e-12 for c in esc.curvature.values())


def test_escape_direction_requires_fop():
    with pytest.raises(ValueError):
        escape_direction(benchmark(3), np.array([0.3, 0.2, 0.1]))


def test_closed_form_curvature_matches_hvp():
    p = benchmark(3)
    rng = np.random.default_rng(1)
    x, u = rng.standard_normal(3), rng.standard_normal(3)
    for l in (2, 3):
        U = rank1_power(u, l).flat
        assert lifted_curvature(p, x, u, l) == pytest.approx(hl_hvp(p, l, rank1_power(x, l), U).flat @ U, rel=1e-10)


def test_find_sops_n3():
    p = benchmark(3)
    sops = benchmark_sops(3)
    assert len(sops) == 2
    (x0, r0), (x1, r1) = sops
    assert h_value(p, x0) <= 1e-20
    np.testing.assert_allclose(x0, [1, 0, 1], atol=1e-8)
    assert h_value(p, x1) > 0.01
    assert x1[0] > 0 and x1[2] == pytest.approx(-x1[0]) and abs(x1[1]) < 1e-8
    assert r0.classification is r1.classification is Classification.SOP


def test_find_sops_deterministic():
    p = benchmark(3)
    a, b = find_sops(p, 8, seed=3), find_sops(p, 8, seed=3)
    assert len(a) == len(b)
    for (xa, _), (xb, _) in zip(a, b):
        np.testing.assert_array_equal(xa, xb)


def test_find_sops_n5_has_spurious():
    p = benchmark(5)
    bad = spurious(p, benchmark_sops(5))
    assert bad and all(h_value(p, x) > 0 for x, _ in bad)


def test_find_sops_isometry_only_global():
    p = benchmark(3, 1.0)
    sops = find_sops(p, 20)
    assert sops and all(np.allclose(np.outer(x, x), np.outer(p.z, p.z), atol=1e-8) for x, _ in sops)
    with pytest.raises(ValueError):
        find_sops(p, 0)


def test_newton_polish_reaches_machine_precision():
    p = benchmark(3)
    x, ok = newton_polish(p, np.array([0.9, 0.01, -0.9]), 1e-7)
    assert ok
    np.testing.assert_allclose(x, spurious_point(3), atol=1e-10)
