#!/usr/bin/env python3

import pytest

from commands.capacity import CapacityCommands
from commands.classify import ClassifyCommands, RegimesCommands
from commands.gamma import GammaCommands
from lib.session import Session

SMALL = {"grid": {"dx": 0.25, "levels": 2}, "sizes": [2, 4]}
LATTICE = {"kind": "lattice", "intensity": 1.0, "marks": 1.0, "offset": 0.5}


class DummyConsole:
    def __init__(self, session):
        self.session = session


def build(cls, config=None):
    return cls(DummyConsole(Session(config=config or {})))


# --- capacity cell ---

def test_planar_cell_capacity(capsys):
    cmd = build(CapacityCommands)
    cmd.handle_command(["cell", "--kind", "planar", "--l", "4", "--dx", "1/4", "--levels", "2"])
    out = capsys.readouterr().out
    assert "Kind:            planar" in out
    assert "Extrapolated:" in out
    assert cmd.session.ok


def test_unknown_cell_kind(capsys):
    cmd = build(CapacityCommands)
    cmd.handle_command(["cell", "--kind", "toroidal"])
    assert "Unknown capacity kind: toroidal" in capsys.readouterr().out
    assert cmd.session.exit_code == 1


def test_cell_rejects_bad_radius(capsys):
    cmd = build(CapacityCommands)
    cmd.handle_command(["cell", "--radius", "0"])
    assert "Error:" in capsys.readouterr().out
    assert not cmd.session.ok


def test_J_in_zero_regime_is_an_error(capsys):
    cmd = build(CapacityCommands)
    cmd.handle_command(["cell", "--kind", "J", "--h0", "zero", "--dx", "1/4", "--levels", "2"])
    assert "Error:" in capsys.readouterr().out
    assert cmd.session.exit_code == 1


# --- gamma analytic ---

def test_gamma_analytic_prints_value(capsys):
    cmd = build(GammaCommands, {"gamma": SMALL})
    cmd.handle_command(["analytic", "--intensity", "2", "--marks", "1"])
    out = capsys.readouterr().out
    assert "Gamma:" in out
    assert "Regime:          infinite" in out
    assert "Process:         poisson" in out
    assert cmd.session.ok


def test_gamma_analytic_zero_regime_fails(capsys):
    cmd = build(GammaCommands, {"gamma": SMALL})
    cmd.handle_command(["analytic", "--h0", "zero"])
    assert "Error:" in capsys.readouterr().out
    assert cmd.session.exit_code == 1


# --- classify and regimes ---

def test_classify_sample_on_lattice(capsys):
    cmd = build(ClassifyCommands, {"classify": {"process": LATTICE}})
    cmd.handle_command(["sample", "--eps", "1/8"])
    out = capsys.readouterr().out
    assert "Isolated:        64" in out
    assert "Invariants:      all hold" in out
    assert "Contact measure:" in out
    assert cmd.session.ok


@pytest.mark.parametrize("args, regime", [
    (["--N", "3", "--eps", "1/16", "--p", "2"], "infinite"),
    (["--N", "4", "--eps", "1/100", "--p", "3"], "finite:1"),
    (["--N", "4", "--eps", "1/100", "--p", "4"], "zero"),
])
def test_regimes_rule_table(args, regime, capsys):
    build(RegimesCommands).handle_command(["rule"] + args)
    out = capsys.readouterr().out
    assert regime in out
    assert ("eps^2 ln(1/delta)" in out) == (args[1] == "3")
