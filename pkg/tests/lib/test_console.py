#!/usr/bin/env python3

import pytest

import lib.console as console_module
from lib.console import InteractiveConsole
from lib.session import Session


@pytest.fixture
def session(tmp_path):
    return Session(config={}, config_path=str(tmp_path / "missing.toml"), out_dir=str(tmp_path / "out"))


@pytest.fixture
def console(monkeypatch, tmp_path, session):
    monkeypatch.setattr(console_module, "HISTORY_DIR", str(tmp_path / "hist"))
    monkeypatch.setattr(InteractiveConsole, "_setup_readline", lambda self: None)
    return InteractiveConsole(session)


# --- registry ---

def test_every_command_has_a_handler(console):
    for name, entry in console.commands.items():
        assert callable(entry.get("handler")), f"missing handler for '{name}'"


def test_study_commands_are_registered(console):
    for name in ("capacity", "gamma", "classify", "regimes", "solve-homog", "solve-direct", "tf-energy",
                 "convergence", "config"):
        assert name in console.commands, name


def test_help_groups_cover_all_public_commands(console):
    grouped = {name for _, names in InteractiveConsole.HELP_GROUPS for name in names}
    special = {"help", "exit", "quit", "q", "clear", "reset", "history"}
    missing = set(console.commands) - grouped - special
    assert not missing, f"commands missing from HELP_GROUPS: {missing}"


# --- dispatch ---

def test_dispatch_routes_to_registered_handler(console):
    calls = []
    console.commands["gamma"]["handler"] = lambda args: calls.append(args)
    console._dispatch(["gamma", "analytic"])
    assert calls == [["analytic"]]


def test_dispatch_is_case_insensitive(console):
    calls = []
    console.commands["capacity"]["handler"] = lambda args: calls.append(args)
    console._dispatch(["CAPACITY", "show"])
    assert calls == [["show"]]


def test_dispatch_unknown_command_prints_tip_and_fails_session(console, capsys):
    console._dispatch(["nonsense"])
    out = capsys.readouterr().out
    assert "Unknown command: nonsense" in out
    assert "help" in out
    assert console.session.exit_code == 1


def test_exit_commands_stop_the_loop(console):
    for cmd in ("exit", "quit", "q"):
        console.running = True
        console._dispatch([cmd])
        assert console.running is False, cmd


def test_history_dispatch_routes_display_and_clear(console, monkeypatch, capsys):
    called = {}
    monkeypatch.setattr(console.history, "entries", lambda: ["capacity run", "gamma analytic"])
    monkeypatch.setattr(console.history, "clear", lambda: called.setdefault("clear", True))
    console._dispatch(["history"])
    out = capsys.readouterr().out
    assert "   1  capacity run" in out
    assert "   2  gamma analytic" in out
    console._dispatch(["history", "clear"])
    assert called == {"clear": True}
    assert "Command history cleared" in capsys.readouterr().out


# --- completion ---

def test_completion_of_command_names(console):
    assert console.completion_candidates("") == sorted(console.commands)
    assert console.completion_candidates("solve") == ["solve-direct", "solve-homog"]
    assert console.completion_candidates("help conv") == ["convergence"]


def test_completion_of_subcommands_and_default_flags(console):
    candidates = console.completion_candidates("capacity ")
    assert {"run", "cell", "show", "--N", "--dx"} <= set(candidates)
    assert console.completion_candidates("gamma an") == ["analytic"]


def test_completion_of_flags_skips_used_ones(console):
    candidates = console.completion_candidates("regimes rule --N 3 ")
    assert "--N" not in candidates
    assert {"--eps", "--p"} <= set(candidates)
    assert console.completion_candidates("capacity --N 3 --d") == ["--dx"]


def test_completion_of_flag_choices(console):
    assert console.completion_candidates("capacity cell --kind ") == ["strip", "classical", "planar", "J"]
    assert console.completion_candidates("gamma analytic --h0 z") == ["zero"]


def test_completion_for_unknown_input_is_empty(console):
    assert console.completion_candidates("bogus ") == []
    assert console.completion_candidates("gamma bogus ") == []
    assert console.completion_candidates("clear ") == []


# --- one-shot mode ---

def test_run_once_returns_zero_for_passing_command(console, capsys):
    assert console.run_once(["regimes", "rule", "--N", "3", "--eps", "1/16", "--p", "1"]) == 0
    assert "infinite" in capsys.readouterr().out


def test_run_once_returns_one_for_bad_subcommand(console, capsys):
    assert console.run_once(["gamma", "bogus"]) == 1
    assert "Unknown gamma subcommand: bogus" in capsys.readouterr().out


def test_run_once_without_args_prints_help(console, capsys):
    assert console.run_once([]) == 0
    assert "Available commands" in capsys.readouterr().out


# --- generated help ---

def test_general_help_lists_commands_from_registry(console, capsys):
    console.show_help()
    out = capsys.readouterr().out
    for expected in (
        "capacity run",
        "gamma analytic",
        "solve-homog mms",
        "solve-direct sample",
        "config validate",
        "exit, quit, q",
    ):
        assert expected in out, expected


def test_detailed_help_for_single_command(console, capsys):
    console.show_help("convergence")
    out = capsys.readouterr().out
    assert "convergence run" in out
    assert "convergence show" in out


def test_detailed_help_for_unknown_command(console, capsys):
    console.show_help("bogus")
    assert "No help available for 'bogus'" in capsys.readouterr().out


# --- output normalization ---

def test_command_output_starts_with_one_blank_line(console, capsys):
    with console._command_output():
        print("\n\nhello")
    assert capsys.readouterr().out == "\nhello\n"
