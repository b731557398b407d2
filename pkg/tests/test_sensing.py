import numpy as np
import pytest

from liftsense.sensing import (
    BenchmarkSpec,
    SensingOperator,
    adjoint_weighted,
    apply,
    benchmark_omega,
    load_operator,
    make_benchmark,
    sampled_rank2_constants,
    save_operator,
    spectrum_constants,
    sym_basis,
)


def test_omega_n3():
    assert benchmark_omega(3) == {(1, 1), (2, 2), (3, 3), (1, 2), (2, 1), (2, 3), (3, 2)}


def test_benchmark_layout():
    op = make_benchmark(BenchmarkSpec(3, 0.3))
    assert (op.n, op.m) == (3, 9)
    assert op.benchmark == BenchmarkSpec(3, 0.3)
    lab = {tuple(d["entry"]): d for d in op.labels}
    assert lab[(1, 3)]["scale"] == 0.3 and not lab[(1, 3)]["in_omega"]
    assert lab[(2, 1)]["scale"] == 1.0 and lab[(2, 1)]["in_omega"]
    M = np.arange(9.0).reshape(3, 3)
    M = M + M.T
    y = apply(op, M)
    # entry (i, j) reads M_ij scaled by its weight
    assert y[0 * 3 + 2] == pytest.approx(0.3 * M[0, 2])
    assert y[1 * 3 + 0] == pytest.approx(M[1, 0])


def test_adjoint_identity():
    rng = np.random.default_rng(0)
    op = make_benchmark(BenchmarkSpec(4, 0.2))
    M = rng.standard_normal((4, 4))
    M = M + M.T
    y = rng.standard_normal(op.m)
    assert apply(op, M) @ y == pytest.approx(np.sum(M * adjoint_weighted(op, y)))


def test_operator_validation():
    with pytest.raises(ValueError):
        SensingOperator(np.array([[[0.0, 1.0], [0.0, 0.0]]]))
    with pytest.raises(ValueError):
        SensingOperator(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        BenchmarkSpec(3, 1.5)
    with pytest.raises(ValueError):
        SensingOperator(np.zeros((2, 2, 2)), labels=({"a": 1},))
    op = SensingOperator.from_matrices(np.array([[[0.0, 1.0], [0.0, 0.0]]]))
    np.testing.assert_array_equal(op.matrices[0], [[0, 0.5], [0.5, 0]])
    with pytest.raises(ValueError):
        apply(op, np.zeros((3, 3)))
    with pytest.raises(ValueError):
        adjoint_weighted(op, np.zeros(2))


def test_json_roundtrip(tmp_path):
    op = make_benchmark(BenchmarkSpec(3, 0.3))
    save_operator(op, tmp_path / "op.json")
    back = load_operator(tmp_path / "op.json")
    np.testing.assert_array_equal(back.matrices, op.matrices)
    assert back.labels == op.labels and back.benchmark == op.benchmark
    bad = op.to_dict()
    bad["m"] = 4
    with pytest.raises(ValueError):
        SensingOperator.from_dict(bad)


def test_sym_basis_is_orthonormal():
    B = sym_basis(4)
    G = np.einsum("aij,bij->ab", B, B)
    np.testing.assert_allclose(G, np.eye(10), atol=1e-14)


def test_constants_benchmark():
    c = spectrum_constants(make_benchmark(BenchmarkSpec(3, 0.3)))
    assert c.L_global == pytest.approx(1.0)
    assert c.alpha_global == pytest.approx(0.09)
    assert c.delta_paper == pytest.approx(0.7 / 1.3)
    assert c.delta_global == pytest.approx(0.91 / 1.09)


def test_constants_isometry():
    c = spectrum_constants(make_benchmark(BenchmarkSpec(4, 1.0)))
    assert c.L_global == pytest.approx(1.0) and c.alpha_global == pytest.approx(1.0)
    assert c.delta_global == pytest.approx(0.0, abs=1e-12)


def test_sampled_constants_inside_global():
    op = make_benchmark(BenchmarkSpec(3, 0.3))
    lo, hi = sampled_rank2_constants(op, samples=300)
    c = spectrum_constants(op)
    assert c.alpha_global - 1e-12 <= lo <= hi <= c.L_global + 1e-12
