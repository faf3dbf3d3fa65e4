import csv
import io
from dataclasses import replace

import numpy as np
import pytest

from dfrgrad.gridsearch import A_RANGE, B_RANGE, Cell, GridConfig, _best_cell, escalate, evaluate_cell, grid_points, grid_search

SMALL = GridConfig(n_nodes=4, mask_seed=1)


def test_grid_point_examples():
    np.testing.assert_allclose(grid_points(A_RANGE, 1), [0.01], rtol=1e-14)
    np.testing.assert_allclose(grid_points(A_RANGE, 2), [10**-2.875, 10**-1.125], rtol=1e-14)
    np.testing.assert_allclose(grid_points(B_RANGE, 1), [10**-1.5], rtol=1e-14)


@pytest.mark.parametrize("D", [1, 2, 4, 7, 16])
def test_grid_points_geometry(D):
    for lo, hi in (A_RANGE, B_RANGE, (0.2, 0.9)):
        pts = grid_points((lo, hi), D)
        assert len(pts) == D
        assert np.all(pts > lo) and np.all(pts < hi)
        assert np.all(np.diff(pts) > 0)
        if D > 1:
            ratios = pts[1:] / pts[:-1]
            assert np.max(np.abs(ratios - ratios[0])) <= 1e-12


def test_config_validation():
    with pytest.raises(ValueError):
        GridConfig(divisions=0)
    with pytest.raises(ValueError):
        GridConfig(a_range=(0.5, 0.1))
    with pytest.raises(ValueError):
        grid_points(A_RANGE, 0)


def test_single_division_grid(tiny_dataset):
    result = grid_search(tiny_dataset, SMALL)
    assert len(result.cells) == 1
    cell = result.cells[0]
    assert cell.A == pytest.approx(0.01, rel=1e-14)
    assert cell.B == pytest.approx(10**-1.5, rel=1e-14)
    assert result.ridge_fits == len(SMALL.betas)
    assert result.seconds > 0


def test_grid_counts_and_reevaluation(tiny_dataset):
    cfg = replace(SMALL, divisions=3)
    result = grid_search(tiny_dataset, cfg)
    assert len(result.cells) == 9
    assert result.ridge_fits == 9 * len(cfg.betas)
    assert {(c.a_index, c.b_index) for c in result.cells} == {(i, j) for i in range(3) for j in range(3)}
    for cell in result.cells:
        beta, _, acc, _ = evaluate_cell(tiny_dataset, cfg, cell.A, cell.B)
        assert acc == cell.test_accuracy and beta == cell.beta
        assert result.best.test_accuracy >= acc
    table = result.accuracy_table()
    assert table.shape == (3, 3)
    assert table[result.best.a_index, result.best.b_index] == result.best.test_accuracy


def test_best_cell_independent_of_order():
    cells = [Cell(i, j, 0.1, 0.1, 1.0, 0.1, acc, False) for (i, j, acc) in [(1, 0, 0.9), (0, 2, 0.9), (0, 1, 0.5), (2, 2, 0.9)]]
    for perm in ([0, 1, 2, 3], [3, 2, 1, 0], [2, 0, 3, 1]):
        best = _best_cell([cells[p] for p in perm])
        assert (best.a_index, best.b_index) == (0, 2)


def test_divergent_cell_scores_zero(tiny_dataset):
    cfg = replace(SMALL, a_range=(50.0, 60.0), b_range=(50.0, 60.0))
    big = replace(tiny_dataset, train=tuple(replace(s, series=s.series * 1e6) for s in tiny_dataset.train))
    result = grid_search(big, cfg)
    assert result.cells[0].diverged and result.cells[0].test_accuracy == 0.0


def test_csv_export(tiny_dataset):
    result = grid_search(tiny_dataset, replace(SMALL, divisions=2))
    rows = list(csv.DictReader(io.StringIO(result.to_csv())))
    assert len(rows) == 4
    assert float(rows[0]["A"]) == result.cells[0].A


def test_escalate_trivial_target(tiny_dataset):
    esc = escalate(tiny_dataset, 0.0, 5, SMALL)
    assert esc.reached and esc.divisions == 1
    assert esc.cells_evaluated == 1


def test_escalate_unreachable_target(tiny_dataset):
    esc = escalate(tiny_dataset, 1.01, 3, SMALL)
    assert not esc.reached
    assert [lvl.divisions for lvl in esc.levels] == [1, 2, 3]
    assert esc.cells_evaluated == 1 + 4 + 9
    assert sum(lvl.ridge_fits for lvl in esc.levels) == 14 * len(SMALL.betas)
    best = max(lvl.best.test_accuracy for lvl in esc.levels)
    assert esc.result.best.test_accuracy == best


def test_escalate_validation(tiny_dataset):
    with pytest.raises(ValueError):
        escalate(tiny_dataset, 0.5, 0, SMALL)
