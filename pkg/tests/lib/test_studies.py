#!/usr/bin/env python3

import csv
import json

import pytest

import lib.studies as studies
from lib.errors import ConfigError, SolverError
from lib.studies import (
    DEFAULTS,
    ExperimentConfig,
    ResultRecord,
    parse_eps_list,
    parse_fraction,
    run_capacity,
    run_classify,
    run_convergence,
    run_gamma,
    run_regimes,
    run_study,
    run_tf_energy,
    steps,
)

SMALL = {"grid": {"dx": 0.25, "levels": 2}, "sizes": [2, 4]}
LATTICE = {"kind": "lattice", "intensity": 1.0, "marks": 1.0, "offset": 0.5}


# --- parsing ---

def test_parse_fraction():
    assert parse_fraction("1/8") == 0.125
    assert parse_fraction(3) == 3.0
    with pytest.raises(ValueError):
        parse_fraction("1/0")


def test_parse_eps_list_forms():
    assert parse_eps_list("1/8..1/64") == [0.125, 0.0625, 0.03125, 0.015625]
    assert parse_eps_list("1/8, 1/16") == [0.125, 0.0625]
    assert parse_eps_list(["1/4", 0.5]) == [0.25, 0.5]


@pytest.mark.parametrize("value", ["1/8..4", "1/64..1/8", "2", ""])
def test_parse_eps_list_rejects(value):
    with pytest.raises(ValueError):
        parse_eps_list(value)


# --- experiment configs ---

def test_merge_order_defaults_section_overrides():
    data = {"defaults": {"seeds": 5, "seed": 3}, "classify": {"seeds": 7, "p": 2.0}}
    config = ExperimentConfig.from_dict("classify", data, {"p": 3.0, "threads": None})
    assert config.get("seeds") == 7
    assert config.get("p") == 3.0
    assert config.seed == 3
    assert config.threads == 1
    assert "seed" not in config.params
    assert config.get("hole_radius") == DEFAULTS["classify"]["hole_radius"]


def test_hyphenated_study_reads_underscore_section():
    config = ExperimentConfig.from_dict("tf-energy", {"tf_energy": {"cell_dx": 0.5}})
    assert config.get("cell_dx") == 0.5


def test_unknown_study_kind():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict("homogenize")
    with pytest.raises(ConfigError):
        ExperimentConfig("nope", {})


def test_config_hash_tracks_parameters_and_seed():
    base = ExperimentConfig.from_dict("regimes")
    assert base.config_hash() == ExperimentConfig.from_dict("regimes").config_hash()
    assert base.config_hash() != ExperimentConfig.from_dict("regimes", overrides={"seed": 1}).config_hash()
    assert base.config_hash() != ExperimentConfig.from_dict("regimes", overrides={"powers": [1.0]}).config_hash()


def test_invalid_process_becomes_config_error():
    config = ExperimentConfig.from_dict("gamma", overrides={"process": {"kind": "cox"}})
    with pytest.raises(ConfigError):
        config.process()


def test_accessors():
    config = ExperimentConfig.from_dict("gamma", overrides={**SMALL, "eps": "1/4..1/8",
                                                            "window": [[0.0, 0.0], [2.0, 1.0]]})
    assert config.eps() == [0.25, 0.125]
    assert config.sizes() == (2.0, 4.0)
    assert config.schedule().levels == 2
    assert config.window(2).volume == 2.0
    assert config.hole().radius == 1.0


def test_steps_per_study():
    assert steps(ExperimentConfig.from_dict("classify", overrides={"eps": "1/4..1/8", "seeds": 3})) == 6
    assert steps(ExperimentConfig.from_dict("tf-energy", overrides={"eps": "1/8..1/32"})) == 3
    assert steps(ExperimentConfig.from_dict("regimes")) is None


# --- result records ---

def test_record_checks_and_write(tmp_path):
    record = ResultRecord("toy", {"seed": 0})
    record.rows.append({"epsilon": 0.125, "value": float("inf")})
    record.rows.append({"epsilon": 0.0625, "extra": 1})
    record.add_metric("ratio", 1.5)
    record.add_check("good", True)
    assert record.passed
    record.add_check("bad", False, "detail")
    record.add_omission("epsilon=1/64", "budget")
    assert not record.passed
    assert record.failed_checks() == ["bad"]

    json_path, csv_path = record.write(str(tmp_path / "out"))
    with open(json_path) as f:
        data = json.load(f)
    assert data["passed"] is False
    assert data["rows"][0]["value"] == "inf"
    assert data["omissions"][0]["reason"] == "budget"
    with open(csv_path) as f:
        rows = list(csv.DictReader(f))
    assert list(rows[0]) == ["epsilon", "value", "extra"]
    assert rows[1]["value"] == ""


# --- studies ---

def test_regimes_study_matches_numeric_ratios():
    config = ExperimentConfig.from_dict("regimes", overrides={"dims": [3, 4], "powers": [1.0, 3.0, 4.0]})
    record = run_regimes(config)
    assert record.passed
    assert len(record.rows) == 6
    by_key = {(r["N"], r["p"]): r for r in record.rows}
    assert by_key[(4, 3.0)]["numeric"] == "finite"
    assert by_key[(4, 4.0)]["numeric"] == "zero"
    assert "admissibility" in by_key[(3, 1.0)]
    assert "admissibility" not in by_key[(4, 1.0)]
    assert set(record.provenance) == {"git_revision", "config_hash", "runtime_s", "version", "threads"}
    assert record.provenance["config_hash"] == config.config_hash()


def test_run_study_dispatches_by_kind():
    record = run_study(ExperimentConfig.from_dict("regimes", overrides={"dims": [3], "powers": [1.0]}))
    assert record.study == "regimes"


def test_gamma_study_on_aligned_lattice_is_exact():
    config = ExperimentConfig.from_dict("gamma", overrides={**SMALL, "process": LATTICE, "eps": "1/4..1/8",
                                                            "seeds": 2})
    record = run_gamma(config)
    assert record.passed
    assert [c["name"] for c in record.checks] == ["lattice_exact"]
    assert record.metrics[0]["name"] == "gamma_analytic"
    assert len(record.rows) == 2


def test_classify_study_reports_invariants_and_ticks():
    ticks = []
    config = ExperimentConfig.from_dict("classify", overrides={**SMALL, "process": LATTICE, "eps": "1/4..1/8",
                                                               "seeds": 2})
    record = run_classify(config, progress=lambda: ticks.append(1))
    assert len(ticks) == steps(config)
    checks = {c["name"]: c for c in record.checks}
    assert checks["realization_invariants"]["passed"]
    assert [r["epsilon"] for r in record.rows] == [0.25, 0.125]
    assert all(r["n_large"] == 0 for r in record.rows)


def test_classify_study_is_deterministic_for_a_seed():
    config = ExperimentConfig.from_dict("classify", overrides={**SMALL, "eps": "1/4..1/8", "seeds": 2})
    assert run_classify(config).rows == run_classify(config).rows


def test_classify_failed_realizations_become_omissions(monkeypatch):
    calls = []
    real_sums = studies.cluster_sums

    def flaky(*args):
        calls.append(1)
        if len(calls) <= 2:
            raise ValueError("degenerate realization")
        return real_sums(*args)

    monkeypatch.setattr("lib.studies.cluster_sums", flaky)
    ticks = []
    config = ExperimentConfig.from_dict("classify", overrides={**SMALL, "process": LATTICE, "eps": "1/4..1/8",
                                                               "seeds": 2})
    record = run_classify(config, progress=lambda: ticks.append(1))
    assert len(ticks) == steps(config)
    assert [r["epsilon"] for r in record.rows] == [0.125]
    assert record.rows[0]["realizations"] == 2
    assert [o["what"] for o in record.omissions] == ["epsilon=0.25 seed=0", "epsilon=0.25 seed=1", "cluster_trends"]


def test_run_tf_energy_rows_and_checks():
    ticks = []
    config = ExperimentConfig.from_dict("tf-energy", overrides={**SMALL, "eps": "1/2..1/4", "cell_dx": 0.25})
    record = run_tf_energy(config, progress=lambda: ticks.append(1))
    assert len(ticks) == 2
    assert [row["epsilon"] for row in record.rows] == [0.5, 0.25]
    assert record.rows[0]["patches"] < record.rows[1]["patches"]
    assert all(row["energy"] > 0 for row in record.rows)
    assert [c["name"] for c in record.checks] == ["energy_limit", "energy_trend", "bilinear_limit"]
    assert record.metrics[0]["name"] == "gamma"


def test_run_tf_energy_failed_epsilon_becomes_omission(monkeypatch):
    calls = []
    real_build = studies.build_w

    def flaky(real, cache, executor=None):
        calls.append(1)
        if len(calls) == 1:
            raise SolverError("patch solve did not converge")
        return real_build(real, cache, executor=executor)

    monkeypatch.setattr("lib.studies.build_w", flaky)
    config = ExperimentConfig.from_dict("tf-energy", overrides={**SMALL, "eps": "1/2..1/4", "cell_dx": 0.25})
    record = run_tf_energy(config)
    assert [row["epsilon"] for row in record.rows] == [0.25]
    assert [o["what"] for o in record.omissions] == ["epsilon=0.5", "energy_trend"]
    assert [c["name"] for c in record.checks] == ["energy_limit", "bilinear_limit"]


CONVERGENCE = {**SMALL, "eps": "1/2", "hole_radius": 0.5, "coarse": 1 / 16, "n_z": 2, "homog_n": 8,
               "control": False}


def test_run_convergence_single_eps_records_bound_and_omits_trend():
    record = run_convergence(ExperimentConfig.from_dict("convergence", overrides=CONVERGENCE))
    assert len(record.rows) == 1
    row = record.rows[0]
    assert row["epsilon"] == 0.5 and row["delta"] == 0.5
    assert row["rescaled_energy"] <= row["apriori_bound"]
    assert [c["name"] for c in record.checks] == ["apriori_bound_eps_0.5", "discrepancy_small"]
    assert record.omissions[-1]["what"] == "discrepancy_trend"


@pytest.mark.parametrize("limit, passed", [(1e9, True), (0.0, False)])
def test_run_convergence_discrepancy_threshold(limit, passed):
    config = ExperimentConfig.from_dict("convergence", overrides={**CONVERGENCE, "max_discrepancy": limit})
    checks = {c["name"]: c for c in run_convergence(config).checks}
    assert checks["discrepancy_small"]["passed"] is passed


def test_run_convergence_over_budget_becomes_omission():
    config = ExperimentConfig.from_dict("convergence", overrides={**CONVERGENCE, "max_unknowns": 10})
    record = run_convergence(config)
    assert record.rows == []
    assert record.omissions[0]["what"] == "epsilon=0.5"


def test_run_convergence_needs_unit_square():
    config = ExperimentConfig.from_dict("convergence", overrides={**CONVERGENCE, "window": [[0.0, 0.0], [2.0, 1.0]]})
    with pytest.raises(ConfigError):
        run_convergence(config)


# --- capacity study at its defaults ---

@pytest.fixture(scope="module")
def capacity_record():
    return run_capacity(ExperimentConfig.from_dict("capacity"))


def test_capacity_study_passes_every_check(capacity_record):
    assert capacity_record.failed_checks() == []
    names = {c["name"] for c in capacity_record.checks}
    assert {"h_sweep_increasing", "h_sweep_limit", "thin_strip_limit", "refinement_order", "spherical_capacitor",
            "spherical_capacitor_cylinder", "flat_disk", "scaling_identity"} <= names


def test_capacity_study_reports_sweep_convergence(capacity_record):
    metrics = {m["name"]: m["value"] for m in capacity_record.metrics}
    assert metrics["h_sweep_converged_at"] is not None
    assert metrics["thin_strip_over_planar"] == pytest.approx(1.0, abs=0.02)
    tables = {r["table"] for r in capacity_record.rows}
    assert {"strip", "h_sweep", "thin_strip", "refinement", "scaling", "oracle"} <= tables
