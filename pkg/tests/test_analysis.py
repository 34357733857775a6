import json

import numpy as np
import pytest

from qmcmarginal.analysis import (
    ConvergenceReport,
    ErrorReport,
    StudyRow,
    build_points,
    compare_grid_vs_lattice,
    convergence_study,
    run_row,
    sup_error,
    theorem_bound,
)
from qmcmarginal.distributions import Beta, Exponential, ProductDistribution, preset
from qmcmarginal.errors import ArgumentError


def test_sup_error_on_known_functions():
    rep = sup_error(lambda x: x, lambda x: 0.0 * x, grid_size=11, axis=3)
    assert rep.sup_error == 1.0
    assert rep.l2_error == pytest.approx(np.sqrt(np.mean(np.linspace(0, 1, 11) ** 2)))
    assert rep.axis == 3 and rep.grid_size == 11
    rep = sup_error(lambda x: x, lambda x: 2.0 + 0 * x)
    assert rep.relative_sup == pytest.approx(1.0)
    with pytest.raises(ArgumentError):
        sup_error(lambda x: x, lambda x: x, grid_size=1)


def test_theorem_bound_values():
    assert theorem_bound(1, 5) == 1 / 20480
    assert theorem_bound(2, 3) == 2 / (4 * 3 * 8)
    with pytest.raises(ArgumentError):
        theorem_bound(1, 1)
    with pytest.raises(ArgumentError):
        theorem_bound(-1, 4)


def test_build_points_kinds():
    assert build_points({"kind": "grid", "n": 3}, 2).N == 9
    assert build_points({"kind": "korobov", "N": 64, "alpha": 19}, 2).params == {"alpha": 19}
    assert build_points({"kind": "korobov", "N": 64}, 2).params["alpha"] >= 1
    assert build_points({"kind": "rank1", "N": 8, "z": [1, 3]}, 2).kind == "rank1"
    assert build_points({"kind": "maximal", "l": 5, "r": 2}, 2).N == 20
    assert build_points({"kind": "random", "N": 5, "seed": 2}, 3).s == 3
    with pytest.raises(ArgumentError):
        build_points({"kind": "sobol", "N": 8}, 2)


def _row(N, errs):
    return StudyRow("korobov", N, 8, N // 8, [ErrorReport(j, e, e, 1001, 1.0) for j, e in enumerate(errs)])


def test_trend_flags_with_slack():
    rep = ConvergenceReport([_row(1024, [0.5, 0.5]), _row(256, [1.0, 1.0]), _row(4096, [0.54, 0.56])]).sorted_by_N()
    assert [r.N for r in rep.rows] == [256, 1024, 4096]
    assert rep.trend_flags() == [True, False]
    assert rep.trend_flags(slack=0.2) == [True, True]
    assert ConvergenceReport([_row(8, [1.0])]).trend_flags() == [True]


def test_convergence_study_exp():
    rep = convergence_study(preset("exp2d"), [{"kind": "korobov", "N": 1024}, {"kind": "korobov", "N": 256}], partitions=8)
    assert [r.N for r in rep.rows] == [256, 1024]
    assert rep.rows[0].n == 8 and rep.rows[0].m == 32
    assert all(rep.trend_flags())
    with pytest.raises(ArgumentError):
        convergence_study(preset("exp2d"), [], partitions=8)


def test_grid_row_reports_profile():
    row = run_row(preset("beta4d"), {"kind": "grid", "n": 4})
    assert (row.kind, row.N, row.n, row.m) == ("grid", 256, 4, 64)


def test_random_seeds_aggregate():
    d = preset("exp2d")
    row = run_row(d, {"kind": "random", "N": 500}, partitions=4, seeds=[0, 1, 2])
    singles = [run_row(d, {"kind": "random", "N": 500, "seed": k}, partitions=4) for k in range(3)]
    for j in range(2):
        sups = [r.errors[j].sup_error for r in singles]
        assert row.errors[j].sup_error == pytest.approx(np.mean(sups))
        assert row.errors[j].sup_std == pytest.approx(np.std(sups, ddof=1))
    assert row.params["seeds"] == [0, 1, 2]


def test_compare_one_dimensional():
    d = ProductDistribution((Beta(2, 5),))
    rep = compare_grid_vs_lattice(d, 6, 256, 6, alpha=1)
    g, lat = rep.rows
    assert (g.kind, g.N, g.n, g.m) == ("grid", 6, 6, 1)
    assert lat.kind == "korobov" and lat.N == 256


def test_compare_multi_dimensional():
    d = ProductDistribution((Exponential(1.0, 4.0), Beta(2, 5)))
    rep = compare_grid_vs_lattice(d, 5, 512, 6)
    assert [r.kind for r in rep.rows] == ["grid", "korobov"]
    assert len(rep.rows[1].errors) == 2


def test_report_writers(tmp_path):
    rep = ConvergenceReport([_row(256, [1.0, 0.5]), _row(1024, [0.25, 0.125])], "t")
    rep.write_csv(tmp_path / "r.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0].split(",")[:7] == ["kind", "N", "n", "m", "axis", "sup_error", "l2_error"]
    assert lines[1].startswith("korobov,256,8,32,0,1,1,")
    assert len(lines) == 5
    rep.write_json(tmp_path / "r.json")
    data = json.loads((tmp_path / "r.json").read_text())
    assert data["trend_flags"] == [True, True]
    assert data["rows"][1]["errors"][1]["sup_error"] == 0.125
