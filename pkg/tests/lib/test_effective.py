#!/usr/bin/env python3

import logging

import numpy as np
import pytest

from lib.effective import (
    GammaEstimate,
    ScalingRule,
    admissibility,
    classify_regime,
    cluster_sums,
    critical_a,
    estimate_gamma_empirical,
    gamma_analytic,
)
from lib.errors import RegimeError
from lib.point_process import Box, MarkedPointSet, MarkLaw, ProcessSpec, classify, realize_sieve


def linear_j(rho):
    return 8.0 * np.asarray(rho, dtype=float)


# --- regimes and scaling ---

@pytest.mark.parametrize("N, p, expected", [
    (3, 1.0, "infinite"),
    (3, 10.0, "infinite"),
    (4, 1.0, "infinite"),
    (4, 3.0, "finite:1"),
    (4, 4.0, "zero"),
    (5, 2.0, "finite:1"),
    (5, 3.0, "zero"),
])
def test_classify_regime(N, p, expected):
    assert str(classify_regime(N, p)) == expected


def test_classify_regime_rejects_bad_input():
    with pytest.raises(ValueError):
        classify_regime(2, 1.0)
    with pytest.raises(ValueError):
        classify_regime(3, 0.0)


def test_critical_a_three_dimensions():
    assert critical_a(3, 0.1, 0.01) == pytest.approx(1e-4)


def test_critical_a_higher_dimensions_by_regime():
    eps = 0.01
    # infinite regime: a = eps^((N-1)/(N-2)) delta^(1/(N-2))
    assert critical_a(4, eps, eps, 1.0) == pytest.approx(eps ** 1.5 * eps ** 0.5)
    # zero regime: a = eps^((N-1)/(N-3))
    assert critical_a(4, eps, eps ** 4, 4.0) == pytest.approx(eps ** 3)


def test_critical_a_infers_power():
    eps = 0.1
    assert critical_a(4, eps, eps ** 4) == pytest.approx(critical_a(4, eps, eps ** 4, 4.0))


def test_scaling_rule_three_dimensions():
    rule = ScalingRule.from_power(3, 1 / 16, 1.0)
    assert rule.delta == pytest.approx(1 / 16)
    assert rule.a == pytest.approx(1 / 16 ** 3)
    assert rule.h_eps == pytest.approx(256.0)
    assert rule.to_json()["h0"] == "infinite"


def test_scaling_rule_finite_regime_has_unit_h_eps():
    rule = ScalingRule.from_power(4, 0.01, 3.0)
    assert str(rule.h0_tag) == "finite:1"
    assert rule.h_eps == pytest.approx(1.0)


def test_scaling_rule_warns_far_from_the_limit(caplog):
    with caplog.at_level(logging.WARNING, logger="lib.effective"):
        ScalingRule.from_power(3, 1 / 2, 1.0)
    assert "eps^2 ln(1/delta)" in caplog.text
    caplog.clear()
    with caplog.at_level(logging.WARNING, logger="lib.effective"):
        ScalingRule.from_power(3, 1 / 8, 1.0)
        ScalingRule.from_power(4, 1 / 2, 3.0)
    assert caplog.text == ""


def test_admissibility_shrinks_with_eps():
    values = [admissibility(eps, eps) for eps in (1 / 8, 1 / 16, 1 / 32)]
    assert values[0] > values[1] > values[2] > 0


# --- analytic gamma ---

def test_gamma_analytic_single_mark():
    assert gamma_analytic(2.0, MarkLaw.atom(1.0), "inf", j=linear_j) == pytest.approx(8.0)


def test_gamma_analytic_mixture_and_uniform():
    assert gamma_analytic(2.0, MarkLaw.parse("1:1,2:1"), "inf", j=linear_j) == pytest.approx(12.0)
    assert gamma_analytic(1.0, MarkLaw.parse("uniform:1:3"), "inf", j=linear_j) == pytest.approx(8.0)


def test_gamma_analytic_rejects_zero_regime_in_three_dimensions():
    with pytest.raises(RegimeError):
        gamma_analytic(1.0, MarkLaw.atom(1.0), "zero", N=3, j=linear_j)


def test_gamma_analytic_rejects_nonpositive_intensity():
    with pytest.raises(ValueError):
        gamma_analytic(0.0, MarkLaw.atom(1.0), "inf", j=linear_j)


# --- empirical gamma ---

def test_gamma_estimate_statistics():
    estimate = GammaEstimate(2.5, [0.125, 0.0625], [[1.0, 3.0], [2.0, 2.0]])
    assert estimate.means == [2.0, 2.0]
    assert estimate.stderrs == pytest.approx([1.0, 0.0])
    assert estimate.within(0)
    assert not estimate.within(-1)
    assert estimate.to_json()["rows"][1]["count"] == 2
    assert not GammaEstimate(None, [0.1], [[1.0, 1.0]]).within()


def test_empirical_gamma_on_lattice_matches_analytic():
    process = ProcessSpec("lattice", 1.0, MarkLaw.atom(1.0), offset=0.5)
    estimate = estimate_gamma_empirical(process, "inf", eps_schedule=(1 / 8, 1 / 16), seeds=(0, 1), j=linear_j)
    assert estimate.analytic == pytest.approx(4.0)
    assert estimate.means == pytest.approx([4.0, 4.0])
    assert estimate.within()


def test_empirical_gamma_needs_two_seeds():
    with pytest.raises(ValueError):
        estimate_gamma_empirical(ProcessSpec(), "inf", seeds=(0,), j=linear_j)


# --- cluster diagnostics ---

def test_cluster_sums_weight_cluster_points():
    eps, a = 1 / 8, 1 / 512
    axis = np.arange(8) + 0.5
    centers = np.stack(np.meshgrid(axis, axis, indexing="ij"), axis=-1).reshape(-1, 2)
    marks = np.ones(64)
    marks[27] = 20.0
    points = MarkedPointSet(2, centers, marks, Box((0.0, 0.0), (8.0, 8.0)))
    real = realize_sieve(classify(points, eps, a, eps, "inf", Box.unit(2)), "ball", 1.0)

    diag = cluster_sums(real, "inf", linear_j)
    assert diag.sum_J == pytest.approx(eps ** 2 * 8.0 * 24.0)
    assert diag.sum_vol == pytest.approx(a ** 2 * (400.0 + 4.0))
    assert (diag.n_isolated, diag.n_large, diag.n_near) == (59, 1, 4)
    assert diag.to_json()["epsilon"] == eps
