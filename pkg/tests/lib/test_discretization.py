#!/usr/bin/env python3

import math

import numpy as np
import pytest
import scipy.sparse as sp

from lib.discretization import (
    StretchedAxis,
    TensorGrid,
    ball_volume,
    dual_measure,
    graded_axis,
    segment_conductance,
    solve_dirichlet,
    solve_spd,
    sphere_surface,
    tent_energy,
)
from lib.errors import SolverError


# --- geometry constants ---

def test_sphere_surface_low_dimensions():
    assert sphere_surface(1) == pytest.approx(2 * math.pi)
    assert sphere_surface(2) == pytest.approx(4 * math.pi)


def test_ball_volume():
    assert ball_volume(2, 2.0) == pytest.approx(4 * math.pi)
    assert ball_volume(3) == pytest.approx(4 * math.pi / 3)


# --- axes ---

def test_stretched_axis_has_uniform_core_and_hits_extent():
    nodes = StretchedAxis(core=2.0, extent=8.0, dx=0.25, stretch=1.0).nodes()
    assert nodes[0] == 0.0
    assert nodes[-1] == pytest.approx(8.0)
    assert np.all(np.diff(nodes) > 0)
    assert np.allclose(np.diff(nodes[:9]), 0.25)


def test_stretched_axis_scales_with_its_lengths():
    small = StretchedAxis(2.0, 8.0, 0.25, 1.0).nodes()
    large = StretchedAxis(4.0, 16.0, 0.5, 1.0).nodes()
    assert np.allclose(2.0 * small, large, rtol=1e-10)


def test_stretched_axis_rejects_nonpositive_spacing():
    with pytest.raises(ValueError):
        StretchedAxis(1.0, 2.0, 0.0)


def test_graded_axis_refines_around_feature():
    nodes = graded_axis(0.0, 1.0, [(0.5, 0.01)], fine=0.002, coarse=0.05, growth=1.3)
    assert nodes[0] == 0.0 and nodes[-1] == 1.0
    assert np.all(np.diff(nodes) > 0)
    assert np.max(np.diff(nodes)) <= 0.05 * 1.1
    inside = np.count_nonzero((nodes > 0.49) & (nodes < 0.51))
    assert inside >= 8


def test_graded_axis_needs_growth_above_one():
    with pytest.raises(ValueError):
        graded_axis(0.0, 1.0, [], fine=0.1, coarse=0.1, growth=1.0)


# --- energy forms ---

def test_dual_measure_sums_to_weighted_length():
    nodes = np.linspace(0.0, 1.0, 9)
    assert dual_measure(nodes, 0).sum() == pytest.approx(1.0)
    assert dual_measure(nodes, 2).sum() == pytest.approx(1.0 / 3.0)


def test_tent_energy_is_one():
    assert tent_energy(0.5) == pytest.approx(1.0)
    assert tent_energy(3.0, n=7) == pytest.approx(1.0)


def test_stiffness_reproduces_linear_energy_in_2d():
    grid = TensorGrid((np.linspace(0, 1, 6), np.linspace(0, 1, 4)))
    x, _ = grid.mesh()
    u = x.ravel()
    assert u @ (grid.stiffness() @ u) == pytest.approx(1.0)


def test_weighted_axis_is_exact_for_radial_logarithm():
    # u = ln r has energy int_a^b (1/r)^2 r dr = ln(b/a) for weight 1
    r = np.geomspace(0.5, 2.0, 7)
    grid = TensorGrid((r,), weights=(1,))
    u = np.log(r)
    assert u @ (grid.stiffness() @ u) == pytest.approx(math.log(4.0))


def test_edge_energies_sum_to_quadratic_form():
    grid = TensorGrid((np.linspace(0, 1, 5), np.linspace(0, 2, 4)), coefficients=(1.0, 3.0))
    rng = np.random.default_rng(0)
    u = rng.standard_normal(grid.size)
    total = sum(e.sum() for e, _ in grid.edge_energies(u))
    assert total == pytest.approx(u @ (grid.stiffness() @ u))


def test_unit_edge_factors_leave_stiffness_unchanged():
    axes = (np.linspace(0.1, 1, 5), np.linspace(0, 2, 4))
    plain = TensorGrid(axes, weights=(1, 0))
    ones = TensorGrid(axes, weights=(1, 0), edge_factors=(np.ones((4, 4)), np.ones((5, 3))))
    assert abs(plain.stiffness() - ones.stiffness()).max() == pytest.approx(0.0, abs=1e-12)


def test_edge_factors_scale_single_edges():
    axes = (np.linspace(0, 1, 3), np.linspace(0, 1, 3))
    factors = np.ones((2, 3))
    factors[1, 2] = 4.0
    grid = TensorGrid(axes, edge_factors=(factors, None))
    rng = np.random.default_rng(1)
    u = rng.standard_normal(grid.size)
    energies = grid.edge_energies(u)
    plain = TensorGrid(axes).edge_energies(u)
    assert energies[0][0][1, 2] == pytest.approx(4.0 * plain[0][0][1, 2])
    total = sum(e.sum() for e, _ in energies)
    assert total == pytest.approx(u @ (grid.stiffness() @ u))


def test_edge_factors_must_match_edge_shape():
    with pytest.raises(ValueError):
        TensorGrid((np.linspace(0, 1, 3), np.linspace(0, 1, 3)), edge_factors=(np.ones((3, 3)), None))


@pytest.mark.parametrize("weight, expected", [
    (0, 1.0),
    (1, 1.0 / math.log(2.0)),
    (2, 2.0),
])
def test_segment_conductance_on_unit_to_two(weight, expected):
    assert segment_conductance(np.array([1.0]), np.array([2.0]), weight)[0] == pytest.approx(expected)


def test_segment_conductance_rejects_origin_on_weighted_axis():
    with pytest.raises(ValueError):
        segment_conductance(np.array([0.0]), np.array([1.0]), 1)


def test_tensor_grid_rejects_degenerate_axis():
    with pytest.raises(ValueError):
        TensorGrid((np.array([0.0]),))


# --- solvers ---

@pytest.mark.parametrize("method", ["cg", "direct"])
def test_dirichlet_solve_gives_linear_profile(method):
    nodes = np.linspace(0.0, 1.0, 21)
    grid = TensorGrid((nodes,))
    fixed = np.zeros(nodes.size, dtype=bool)
    fixed[[0, -1]] = True
    values = np.where(nodes > 0.5, 1.0, 0.0)
    result = solve_dirichlet(grid.stiffness(), fixed, values, method=method)
    assert np.allclose(result.x, nodes, atol=1e-7)
    assert result.residual < 1e-6


def test_solve_spd_zero_rhs_short_circuits():
    result = solve_spd(sp.identity(4), np.zeros(4))
    assert result.iterations == 0
    assert not result.x.any()


def test_solve_spd_rejects_nonpositive_diagonal():
    with pytest.raises(SolverError):
        solve_spd(sp.diags([1.0, 0.0, 2.0]), np.ones(3))


def test_solve_spd_unknown_method():
    with pytest.raises(ValueError):
        solve_spd(sp.identity(3), np.ones(3), method="gauss")


def test_dirichlet_without_free_nodes():
    with pytest.raises(SolverError):
        solve_dirichlet(sp.identity(2), np.ones(2, dtype=bool), np.zeros(2))
