#!/usr/bin/env python3

import csv

import numpy as np
import pytest

from lib.errors import BudgetExceededError, UnresolvedHolesError
from lib.homogenized import GridU
from lib.point_process import Box, MarkedPointSet, classify, realize_sieve
from lib.sieve_direct import (
    SlabSource,
    ThinGrid,
    apriori_bound,
    field_summary,
    interpolate_to,
    rescale_field,
    rescaled_energy,
    slab_averages,
    solve_direct,
)

EPS, A, DELTA = 0.5, 0.125, 0.5


@pytest.fixture(scope="module")
def realization():
    # 2 x 2 lattice: contact regions at (0.25|0.75, 0.25|0.75) with radius 1/16
    axis = np.array([0.5, 1.5])
    centers = np.stack(np.meshgrid(axis, axis, indexing="ij"), axis=-1).reshape(-1, 2)
    points = MarkedPointSet(2, centers, np.ones(4), Box((0.0, 0.0), (2.0, 2.0)))
    return realize_sieve(classify(points, EPS, A, DELTA, "inf", Box.unit(2)), "ball", 0.5)


@pytest.fixture(scope="module")
def sieve_grid(realization):
    return ThinGrid.build(realization, fine_fraction=0.125, coarse=1 / 16, growth=1.5, n_z=4)


# --- grids ---

def test_plain_grid_needs_delta():
    with pytest.raises(ValueError):
        ThinGrid.build()


def test_plain_grid_has_no_holes():
    grid = ThinGrid.build(delta=0.25, coarse=1 / 8, n_z=2)
    assert not grid.hole_mask.any()
    assert grid.z[0] == 0.0 and grid.z[-1] == pytest.approx(0.25)
    nx, ny, nz = grid.shape
    assert grid.unknowns() == 2 * (nx - 2) * (ny - 2) * nz


def test_budget_is_enforced():
    with pytest.raises(BudgetExceededError) as exc:
        ThinGrid.build(delta=0.25, coarse=1 / 8, n_z=2, max_unknowns=10)
    assert exc.value.budget == 10


def test_sieve_grid_resolves_holes(sieve_grid):
    assert sieve_grid.hole_mask.any()
    assert sieve_grid.hole_centers.shape == (4, 2)
    assert sieve_grid.unknowns("odd") < sieve_grid.unknowns("none")


def test_coarse_grid_reports_unresolved_holes(realization):
    with pytest.raises(UnresolvedHolesError) as exc:
        ThinGrid.build(realization, fine_fraction=1.0, coarse=0.25, n_z=2)
    assert len(exc.value.regions) == 4


# --- solves ---

def test_without_holes_lower_slab_sees_nothing():
    grid = ThinGrid.build(delta=0.25, coarse=1 / 8, n_z=2)
    field = solve_direct(None, SlabSource("1", "0"), grid)
    assert not field.lower.any()
    assert field.upper.max() > 0
    plus, minus = slab_averages(field)
    assert not minus.any()


def test_holes_couple_the_slabs(realization, sieve_grid):
    field = solve_direct(realization, SlabSource("1", "0"), sieve_grid)
    assert field.lower.max() > 0
    hole = sieve_grid.hole_nodes()[:, :, 0]
    assert np.allclose(field.interface_jump()[hole], 0.0)
    assert field.energy() == pytest.approx(field.load(SlabSource("1", "0")), rel=1e-6)


def test_odd_symmetry_matches_full_solve(realization, sieve_grid):
    source = SlabSource("1", "-1")
    full = solve_direct(realization, source, sieve_grid, method="direct")
    odd = solve_direct(realization, source, sieve_grid, symmetry="odd", method="direct")
    assert np.allclose(full.upper, odd.upper, atol=1e-8)
    assert np.allclose(full.lower, -full.upper, atol=1e-8)


def test_odd_symmetry_requires_odd_source(sieve_grid):
    with pytest.raises(ValueError):
        solve_direct(None, SlabSource("1", "0"), sieve_grid, symmetry="odd")


def test_unknown_symmetry(sieve_grid):
    with pytest.raises(ValueError):
        solve_direct(None, SlabSource("1", "0"), sieve_grid, symmetry="even")


def test_odd_source_detection_uses_mirrored_z(sieve_grid):
    assert SlabSource("z", "z").is_odd(sieve_grid)
    assert not SlabSource("x", "x").is_odd(sieve_grid)


# --- rescaled views ---

def test_rescaled_energy_identity_and_bound(realization, sieve_grid):
    source = SlabSource("sin(pi*x)*sin(pi*y)", "0")
    field = solve_direct(realization, source, sieve_grid)
    assert rescale_field(field).energy() == pytest.approx(rescaled_energy(field), rel=1e-10)
    assert rescaled_energy(field) <= apriori_bound(source, sieve_grid)


def test_summary_and_transfer(realization, sieve_grid):
    field = solve_direct(realization, SlabSource("1", "0"), sieve_grid)
    summary = field_summary(field)
    assert summary["delta"] == DELTA
    assert summary["mean_plus"] > summary["mean_minus"] > 0
    plus, _ = slab_averages(field)
    assert interpolate_to(plus, sieve_grid, GridU(8)).shape == (9, 9)


def test_export_csv_has_both_slabs(tmp_path):
    grid = ThinGrid.build(delta=0.25, coarse=1 / 4, n_z=1)
    field = solve_direct(None, SlabSource("1", "0"), grid)
    path = field.export_csv(str(tmp_path / "u.csv"))
    with open(path) as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 2 * grid.tensor.size
    assert {r["slab"] for r in rows} == {"upper", "lower"}
