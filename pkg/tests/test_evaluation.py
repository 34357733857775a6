import numpy as np
import pytest

from qmcmarginal.errors import ArgumentError, EvaluationError
from qmcmarginal.evaluation import (
    EvaluatedSet,
    evaluate,
    project,
    read_psi_csv,
    transform_domain,
    write_psi_csv,
)
from qmcmarginal.pointset import grid_points, korobov_lattice, random_points


def f_sum(x):
    return float(np.sum(x) + x[0] ** 2)


def f_block(X):
    return X.sum(axis=1) + X[:, 0] ** 2


def test_evaluate_scalar_and_vectorized_agree():
    ps = korobov_lattice(64, 19, 3)
    a = evaluate(f_sum, ps)
    b = evaluate(f_block, ps, vectorized=True)
    np.testing.assert_allclose(a.values, b.values, rtol=0, atol=1e-15)


@pytest.mark.parametrize("workers", [2, 3, 8, 200])
def test_workers_do_not_change_result(workers):
    ps = random_points(101, 2, 5)
    ref = evaluate(f_block, ps, vectorized=True).values
    got = evaluate(f_block, ps, workers=workers, vectorized=True).values
    np.testing.assert_array_equal(ref, got)
    np.testing.assert_array_equal(evaluate(f_sum, ps, workers=workers).values, evaluate(f_sum, ps).values)


def test_non_finite_value_names_index():
    ps = grid_points(3, 2)

    def f(x):
        return np.inf if x[0] == 0.5 and x[1] == 0.5 else 1.0

    with pytest.raises(EvaluationError) as info:
        evaluate(f, ps)
    assert info.value.index == 4


def test_psi_layout():
    ps = grid_points(3, 2)
    es = evaluate(f_block, ps, vectorized=True)
    assert es.psi.shape == (9, 3)
    np.testing.assert_array_equal(es.psi[:, :2], ps.coords)
    np.testing.assert_array_equal(es.psi[:, 2], es.values)


def test_value_shape_checked():
    with pytest.raises(ArgumentError):
        EvaluatedSet(grid_points(3, 2), np.ones(8))


def test_project_pairs():
    ps = grid_points(4, 2)
    es = evaluate(f_block, ps, vectorized=True)
    p = project(es, 1)
    assert p.N == 16 and p.profile.n == 4 and p.profile.m == 4
    np.testing.assert_array_equal(p.pairs[:, 0], ps.coords[:, 1])
    np.testing.assert_array_equal(p.pairs[:, 1], es.values)


def test_transform_domain_has_no_jacobian():
    def f(x):
        return np.asarray(x)[..., 0] * 10 + np.asarray(x)[..., 1]

    g = transform_domain(f, [1.0, -2.0], [3.0, 2.0])
    assert g(np.array([0.5, 0.25])) == pytest.approx(f(np.array([2.0, -1.0])))
    np.testing.assert_allclose(g(np.array([[0, 0], [1, 1]])), [8.0, 32.0])


def test_transform_domain_rejects_empty_box():
    with pytest.raises(ArgumentError):
        transform_domain(f_sum, [0, 1], [1, 1])
    with pytest.raises(ArgumentError):
        transform_domain(f_sum, [0], [1, 2])


def test_psi_csv_round_trip(tmp_path):
    es = evaluate(f_block, random_points(20, 3, 0), vectorized=True)
    path = tmp_path / "psi.csv"
    write_psi_csv(es, path)
    back = read_psi_csv(path)
    np.testing.assert_array_equal(back.psi, es.psi)
    assert path.read_text().startswith("# kind=random,N=20,s=3")
