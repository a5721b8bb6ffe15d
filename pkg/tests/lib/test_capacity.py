#!/usr/bin/env python3

import math
from types import SimpleNamespace

import numpy as np
import pytest

from lib.capacity import (
    CylinderSpec,
    GridSchedule,
    GridSpec,
    HoleSpec,
    JTable,
    cap_classical,
    cap_planar,
    _j_unit,
    cap_strip,
    eval_J,
    extrapolate,
    harmonic_box_energy,
    solve_cell_dirichlet,
    solve_cell_mixed,
    solve_cell_planar,
    solve_harmonic_box,
    solve_spherical_capacitor,
    sphere_cut_factors,
    upper_half_energy,
)
from lib.discretization import TensorGrid
from lib.errors import ExtrapolationError, RegimeError

SMALL = GridSchedule(dx=0.25, levels=2)


# --- problem descriptions ---

def test_ball_hole_radius_is_bounded():
    with pytest.raises(ValueError):
        HoleSpec("ball", 1.5)
    assert HoleSpec("solid", 1.5).radius == 1.5


def test_other_hole_needs_indicator():
    with pytest.raises(ValueError):
        HoleSpec("other", 0.5)


def test_cylinder_needs_three_dimensions():
    with pytest.raises(ValueError):
        CylinderSpec(1.0, 1.0, N=2)


def test_schedule_halves_spacing():
    assert [s.dx for s in GridSchedule(0.5, 3).specs()] == [0.5, 0.25, 0.125]
    assert GridSchedule(0.5, 3).scaled(2).dx == 1.0


# --- closed forms ---

@pytest.mark.parametrize("N, expected", [
    (3, 4 * math.pi / (1 / 0.25 - 1)),
    (4, 2 * math.pi ** 2 * 2 / (0.25 ** -2 - 1)),
])
def test_spherical_capacitor_on_cell_grid(N, expected):
    field, energy = solve_spherical_capacitor(0.25, 1.0, N, GridSpec(1 / 64))
    assert energy == pytest.approx(expected, rel=0.03)
    assert field.satisfies_maximum_principle()


def test_cap_classical_ball_domain_converges_to_closed_form():
    estimate = cap_classical(HoleSpec("solid", 0.25), CylinderSpec(1.0, 1.0, 3), GridSchedule(1 / 32, 3),
                             domain="ball")
    assert estimate.extrapolated == pytest.approx(4 * math.pi / 3, rel=0.01)
    assert abs(estimate.extrapolated - 4 * math.pi / 3) < abs(estimate.samples[0] - 4 * math.pi / 3)
    assert estimate.kind == "classical"


def test_cut_edges_end_on_the_sphere():
    tensor = TensorGrid((np.array([0.1, 0.3]), np.array([0.0, 0.2, 0.4, 0.6])), weights=(1, 0))
    S, Z = tensor.mesh()
    fixed = np.hypot(S, Z) <= 0.5
    s_factors, z_factors = sphere_cut_factors(tensor, fixed, [0.5])
    # the z-edge from (0.1, 0.4) to (0.1, 0.6) keeps only its part beyond the sphere
    assert z_factors[0, 2] == pytest.approx(0.2 / (0.6 - math.sqrt(0.25 - 0.01)))
    assert z_factors[0, 0] == 1.0
    assert np.all(s_factors >= 1.0)
    assert np.all(z_factors >= 1.0)


def test_cut_edges_keep_a_minimum_length():
    tensor = TensorGrid((np.array([0.1, 0.3]), np.array([0.0, 0.5, 1.0])), weights=(1, 0))
    S, Z = tensor.mesh()
    radius = math.hypot(0.1, 0.5) * (1 - 1e-9)
    fixed = np.hypot(S, Z) <= radius
    _, z_factors = sphere_cut_factors(tensor, fixed, [radius])
    # the sphere passes just inside the free node (0.1, 0.5)
    assert z_factors[0, 0] == pytest.approx(1e3, rel=1e-6)
    assert np.all(np.isfinite(z_factors))


def test_cap_classical_ball_domain_needs_solid_hole():
    with pytest.raises(ValueError):
        cap_classical(HoleSpec("ball", 0.25), CylinderSpec(1.0, 1.0, 3), SMALL, domain="ball")


def test_planar_capacity_in_two_dimensions():
    _, energy = solve_cell_planar(2.0, HoleSpec("ball", 0.5), GridSpec(0.05), N=3)
    assert energy == pytest.approx(2 * math.pi / math.log(4.0), rel=1e-6)


def test_cap_planar_extrapolates_exact_sequence():
    estimate = cap_planar(HoleSpec("ball", 0.5), 2.0, GridSchedule(0.1, 3), N=3)
    assert estimate.extrapolated == pytest.approx(2 * math.pi / math.log(4.0), rel=1e-6)
    assert estimate.spacings == [0.1, 0.05, 0.025]


# --- cell problems ---

@pytest.mark.parametrize("rho", [2.0, 4.0])
def test_capacity_scales_with_hole_size(rho):
    hole, cyl, grid = HoleSpec("ball", 0.25), CylinderSpec(1.0, 1.0, 3), GridSpec(0.0625)
    _, base = solve_cell_dirichlet(cyl, hole, grid, method="direct")
    _, scaled = solve_cell_dirichlet(
        CylinderSpec(rho, rho, 3), HoleSpec("ball", 0.25 * rho), grid.scaled(rho), method="direct"
    )
    assert scaled == pytest.approx(rho * base, rel=1e-8)


def test_neumann_caps_lower_the_capacity():
    hole, cyl, grid = HoleSpec("ball", 0.5), CylinderSpec(2.0, 1.0, 3), GridSpec(0.125)
    dirichlet_field, dirichlet = solve_cell_dirichlet(cyl, hole, grid)
    mixed_field, mixed = solve_cell_mixed(cyl, hole, grid)
    assert 0 < mixed <= dirichlet
    assert dirichlet_field.satisfies_maximum_principle()
    assert mixed_field.satisfies_maximum_principle()


def test_full_cell_energy_is_twice_its_upper_half():
    hole, cyl, grid = HoleSpec("ball", 0.5), CylinderSpec(2.0, 2.0, 3), GridSpec(0.25)
    full_field, full = solve_cell_dirichlet(cyl, hole, grid, symmetric=False, method="direct")
    _, half = solve_cell_dirichlet(cyl, hole, grid, symmetric=True, method="direct")
    assert full == pytest.approx(2.0 * upper_half_energy(full_field), rel=1e-8)
    assert full == pytest.approx(half, rel=1e-6)


def test_square_hole_through_indicator():
    square = HoleSpec("other", 0.5, indicator=lambda x, y: (np.abs(x) < 0.5) & (np.abs(y) < 0.5), name="square")
    _, energy = solve_cell_dirichlet(CylinderSpec(2.0, 2.0, 3), square, GridSpec(0.25))
    _, disk = solve_cell_dirichlet(CylinderSpec(2.0, 2.0, 3), HoleSpec("ball", 0.5), GridSpec(0.25))
    assert energy > 0
    assert energy == pytest.approx(disk, rel=0.5)


def test_harmonic_box_closed_form_in_three_dimensions():
    s1, z0, z1 = 1.0, 0.5, 1.5
    exact = math.pi * ((1 / z0 - 1 / z1) - (math.atan(z1 / s1) - math.atan(z0 / s1)) / s1)
    assert harmonic_box_energy(3, s1, z0, z1) == pytest.approx(exact, rel=1e-9)


@pytest.mark.parametrize("N", [3, 4])
def test_harmonic_box_converges_at_second_order(N):
    exact = harmonic_box_energy(N)
    errors = [abs(solve_harmonic_box(N, dx=dx, method="direct")[1] - exact) for dx in (0.125, 0.0625, 0.03125)]
    assert errors[0] > errors[1] > errors[2]
    assert errors[1] / errors[2] > 3.0


def test_strip_rejects_solid_hole():
    with pytest.raises(ValueError):
        cap_strip(HoleSpec("solid", 0.5), 2.0, 1.0, SMALL)


# --- extrapolation ---

def test_richardson_recovers_linear_limit():
    fit = extrapolate([(0.5, 4.0), (0.25, 3.5), (0.125, 3.25)], "richardson", orders=(1,))
    assert fit.value == pytest.approx(3.0)
    assert fit.residual == pytest.approx(0.0, abs=1e-12)


def test_inverse_power_with_two_terms_is_exact_for_quadratic_tail():
    samples = [(l, 5.0 - 2.0 / l + 3.0 / l ** 2) for l in (2.0, 4.0, 8.0)]
    fit = extrapolate(samples, "inverse_power_in_l", power=1.0, terms=2)
    assert fit.value == pytest.approx(5.0)
    assert len(fit.coefficients) == 3


def test_inverse_power_recovers_limit():
    samples = [(l, 5.0 - 2.0 / l) for l in (4.0, 8.0, 16.0)]
    assert extrapolate(samples, "inverse_power_in_l", power=1.0).value == pytest.approx(5.0)


def test_extrapolation_needs_two_samples():
    with pytest.raises(ExtrapolationError):
        extrapolate([(0.5, 1.0)])


def test_extrapolation_rejects_degenerate_fit():
    with pytest.raises(ExtrapolationError):
        extrapolate([(0.5, 1.0), (0.5, 2.0)], orders=(1,))


def test_extrapolation_unknown_model():
    with pytest.raises(ValueError):
        extrapolate([(0.5, 1.0), (0.25, 2.0)], model="pade")


# --- J weights ---

@pytest.mark.parametrize("tag", ["zero", "finite:1.5"])
def test_eval_J_undefined_regimes_at_three_dimensions(tag):
    with pytest.raises(RegimeError):
        eval_J(tag, 1.0, N=3, schedule=SMALL, sizes=(4, 8))


def test_eval_J_rejects_bad_mark():
    with pytest.raises(ValueError):
        eval_J("inf", 0.0, schedule=SMALL, sizes=(4, 8))


def test_eval_J_infinite_scales_linearly_in_three_dimensions():
    unit = eval_J("inf", 1.0, schedule=SMALL, sizes=(4, 8))
    # capacity of the unit disk in R^3 is 8
    assert 6.0 < unit < 10.0
    assert eval_J("inf", 2.0, schedule=SMALL, sizes=(4, 8)) == pytest.approx(2.0 * unit)


def test_j_table_infinite_uses_homogeneity():
    table = JTable("inf", rhos=(1.0, 2.0), schedule=SMALL, sizes=(4, 8))
    unit = eval_J("inf", 1.0, schedule=SMALL, sizes=(4, 8))
    assert table(np.array([0.5, 3.0])) == pytest.approx([0.5 * unit, 3.0 * unit])


def test_j_cache_distinguishes_indicators(monkeypatch):
    _j_unit.cache_clear()

    def fake_classical(hole, cyl, schedule):
        return SimpleNamespace(extrapolated=float(np.sum(hole.indicator(np.zeros(1), np.zeros(1)))) + 1.0)

    monkeypatch.setattr("lib.capacity.cap_classical", fake_classical)
    first = HoleSpec("other", 0.5, indicator=lambda x, y: np.ones_like(x, dtype=bool), name="shape")
    second = HoleSpec("other", 0.5, indicator=lambda x, y: np.zeros_like(x, dtype=bool), name="shape")
    assert first != second
    assert eval_J("inf", 1.0, first, schedule=SMALL, sizes=(4, 8)) == pytest.approx(2.0)
    assert eval_J("inf", 1.0, second, schedule=SMALL, sizes=(4, 8)) == pytest.approx(1.0)
    _j_unit.cache_clear()


def test_j_table_rejects_nonpositive_marks():
    with pytest.raises(ValueError):
        JTable("inf", rhos=(0.0, 1.0), schedule=SMALL, sizes=(4, 8))
