#!/usr/bin/env python3
# commands/base.py - Shared base class for command handlers

import json
import os
from typing import Any, Callable, Dict, List, Optional, Tuple

from lib.errors import SieveLabError
from lib.studies import ResultRecord, parse_eps_list, parse_fraction, run_study, steps
from utils.formatting import format_check, format_duration, format_number, format_warning, print_rows, print_table
from utils.spinner import DotsSpinner

Converter = Callable[[str], Any]


def parse_flag(raw: str) -> bool:
    value = str(raw).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw}")


def parse_float_list(raw: str) -> List[float]:
    """'1,2,4' or '1/4,1/2' -> floats"""
    return [parse_fraction(v) for v in str(raw).split(",") if v.strip()]


class BaseCommands:
    """Common dispatch and input-parsing helpers for command handlers.

    Subclasses set `label` (used in the Missing/Unknown messages), `usage`
    (the summary shown when no subcommand is given) and implement
    `_build_actions()` returning a mapping of subcommand name to a callable
    taking the remaining args. With `default_action` set, an empty argument
    list or one starting with an option runs that action instead.
    """

    label = "command"
    usage = ""
    default_action: Optional[str] = None

    def __init__(self, console):
        """Initialize with reference to the console"""
        self.console = console
        self.session = console.session
        self.actions: Dict[str, Callable[[List[str]], None]] = self._build_actions()

    def _build_actions(self) -> Dict[str, Callable[[List[str]], None]]:
        raise NotImplementedError

    def handle_command(self, args: List[str]):
        """Dispatch to the subcommand handler registered in _build_actions()."""
        if self.default_action and (not args or args[0].startswith("-")):
            self.actions[self.default_action](args)
            return

        if not args:
            print(f"Missing {self.label} subcommand. Use '{self.usage}'")
            self.session.fail(f"missing {self.label} subcommand")
            return

        action = self.actions.get(args[0].lower())
        if action is None:
            print(f"Unknown {self.label} subcommand: {args[0].lower()}")
            self.session.fail(f"unknown {self.label} subcommand")
            return

        action(args[1:])

    def parse_options(self, args: List[str], options: Dict[str, Converter], usage: str) -> Optional[Dict[str, Any]]:
        """Parse --key=value / --key value / --flag arguments against `options`.

        Option names use dashes on the command line and underscores as keys.
        Prints a message, marks the session failed and returns None on bad input.
        """
        values: Dict[str, Any] = {}
        i = 0
        while i < len(args):
            arg = args[i]
            if not arg.startswith("--"):
                return self._reject(f"Unexpected argument: {arg}. Use '{usage}'")
            key, has_value, raw = arg[2:].partition("=")
            name = key.replace("-", "_")
            convert = options.get(name)
            if convert is None:
                return self._reject(f"Unknown option: --{key}. Use '{usage}'")
            if not has_value:
                if convert is parse_flag:
                    values[name] = True
                    i += 1
                    continue
                if i + 1 >= len(args):
                    return self._reject(f"Missing value for --{key}")
                i += 1
                raw = args[i]
            try:
                values[name] = convert(raw)
            except (TypeError, ValueError):
                return self._reject(f"Invalid {key} value: {raw}")
            i += 1
        return values

    def _reject(self, message: str) -> None:
        print(message)
        self.session.fail(message)
        return None

    def guarded(self, fn: Callable, *args, **kwargs) -> Any:
        """Run fn; library errors are printed and recorded instead of raised."""
        try:
            return fn(*args, **kwargs)
        except (SieveLabError, ValueError, KeyError, OSError) as e:
            print(f"Error: {e}")
            self.session.fail(str(e))
            return None

    # --- studies ---

    def run_study(self, study: str, flags: Dict[str, Any]) -> Optional[ResultRecord]:
        """Build the experiment, run it on the session pool, write and print the record."""
        config = self.guarded(self.session.experiment, study, flags)
        if config is None:
            return None
        spinner = DotsSpinner(f"Running {study}", total=self.guarded(steps, config))
        record = None
        with self.session.executor(config.threads) as pool:
            spinner.start()
            try:
                record = self.guarded(run_study, config, pool, spinner.advance)
            finally:
                spinner.stop(success=record is not None)
        if record is None:
            return None

        paths = self.guarded(record.write, config.out_dir)
        self.session.add_record(record)
        self.print_record(record, paths)
        return record

    def show_record(self, study: str) -> None:
        """Re-print the latest record of `study`, from this session or its JSON file."""
        for record in reversed(self.session.records):
            if record.study == study:
                self.print_record(record)
                return
        path = os.path.join(self.session.output_dir, f"{study}.json")
        if not os.path.exists(path):
            print(f"No {study} results found. Run '{study}' first.")
            return
        with open(path) as f:
            data = json.load(f)
        data.pop("passed", None)
        self.print_record(ResultRecord(**data))

    @staticmethod
    def print_record(record: ResultRecord, paths: Optional[Tuple[str, str]] = None) -> None:
        tables: Dict[str, List[Dict[str, Any]]] = {}
        for row in record.rows:
            tables.setdefault(str(row.get("table", "")), []).append(row)
        for name, rows in tables.items():
            title = f"{record.study} {name}".strip()
            print_rows([{k: v for k, v in row.items() if k != "table"} for row in rows], title=title)

        if record.metrics:
            print_table(["Metric", "Value", "Claim"],
                        [[m["name"], format_number(m["value"]), m.get("claim", "")] for m in record.metrics],
                        title="Metrics")
        if record.checks:
            print_table(["Check", "Status", "Detail"],
                        [[c["name"], "PASS" if c["passed"] else "FAIL", c.get("detail", "")] for c in record.checks],
                        title="Checks")
        for omission in record.omissions:
            print(format_warning(f"  Omitted {omission['what']}: {omission['reason']}"))

        runtime = record.provenance.get("runtime_s")
        if runtime is not None:
            print(f"\nRuntime:         {format_duration(runtime)}")
        if paths:
            print(f"Results written: {', '.join(paths)}")
        failed = record.failed_checks()
        if failed:
            print(f"\nResult: {format_check(False)} ({len(failed)} of {len(record.checks)} check(s) failed)")
        else:
            print(f"\nResult: {format_check(True)} ({len(record.checks)} check(s))")


# Options shared by the study commands
STUDY_OPTIONS: Dict[str, Converter] = {
    "seed": int,
    "threads": int,
    "out_dir": str,
    "eps": parse_eps_list,
    "N": int,
    "p": parse_fraction,
    "seeds": int,
    "hole_radius": parse_fraction,
}
