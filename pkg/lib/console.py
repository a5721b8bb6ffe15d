#!/usr/bin/env python3
# lib/console.py - Interactive console for sievelab

import logging
import os
import platform
import re
import readline
import sys
from contextlib import contextmanager
from typing import Dict, List, Optional

from commands.capacity import CapacityCommands
from commands.classify import ClassifyCommands, RegimesCommands
from commands.config import ConfigCommands
from commands.convergence import ConvergenceCommands
from commands.direct import SolveDirectCommands
from commands.gamma import GammaCommands
from commands.homogenized import SolveHomogCommands
from commands.tf_energy import TFEnergyCommands
from lib.errors import SieveLabError
from utils.colors import ANSI_RESET, PROMPT_ARROW_COLOR, PROMPT_TEXT_COLOR
from utils.constants import HISTORY_DIR, HISTORY_FILE, HISTORY_MAX_LINES, VERSION
from utils.formatting import get_terminal_width, horizontal_line, print_fields

logger = logging.getLogger(__name__)

STUDY_OPTION_HELP = "--eps 1/8..1/32 --seed N --threads N --out-dir DIR"
FLAG_PATTERN = re.compile(r"--[a-zA-Z][a-zA-Z0-9-]*")


class _FramedStdout:
    """stdout wrapper that opens a response with exactly one blank line and
    holds back trailing newlines until the next write or close()."""

    def __init__(self, stream):
        self.stream = stream
        self.started = False
        self.held = ""

    def write(self, data):
        if not data:
            return
        if not self.started:
            data = data.lstrip("\n")
            if not data:
                return
            self.stream.write("\n")
            self.started = True
        text = self.held + data
        body = text.rstrip("\n")
        self.held = text[len(body):]
        if body:
            self.stream.write(body)

    def close(self):
        self.held = ""
        self.stream.write("\n")
        self.stream.flush()

    def flush(self):
        self.stream.flush()

    def isatty(self):
        return getattr(self.stream, "isatty", lambda: False)()


class CommandHistory:
    """readline history persisted to HISTORY_FILE, capped at HISTORY_MAX_LINES"""

    def __init__(self, path: str = HISTORY_FILE, max_lines: int = HISTORY_MAX_LINES):
        self.path = path
        self.max_lines = max_lines

    def load(self):
        os.makedirs(os.path.dirname(self.path), exist_ok=True)
        if not os.path.exists(self.path):
            return
        readline.read_history_file(self.path)
        excess = readline.get_current_history_length() - self.max_lines
        for _ in range(max(excess, 0)):
            readline.remove_history_item(0)

    def save(self):
        readline.set_history_length(self.max_lines)
        readline.write_history_file(self.path)

    def clear(self):
        readline.clear_history()
        self.save()

    def entries(self) -> List[str]:
        # 1-based; the newest item is the 'history' call itself
        count = readline.get_current_history_length()
        items = (readline.get_history_item(i) for i in range(1, count))
        return [item for item in items if item]


class InteractiveConsole:
    """Interactive console for sievelab"""

    HELP_GROUPS = [
        ("Capacity", ["capacity"]),
        ("Effective Coefficient", ["gamma"]),
        ("Point Process", ["classify", "regimes"]),
        ("Solvers", ["solve-homog", "solve-direct"]),
        ("Limit Studies", ["tf-energy", "convergence"]),
        ("Configuration", ["config"]),
    ]

    def __init__(self, session, debug: bool = False):
        self.session = session
        self.debug = debug or session.debug
        self.running = True
        self.history = CommandHistory(os.path.join(HISTORY_DIR, os.path.basename(HISTORY_FILE)))
        self.prompt_string = f"\n{PROMPT_TEXT_COLOR}sievelab{ANSI_RESET}{PROMPT_ARROW_COLOR}>{ANSI_RESET} "
        self._matches: List[str] = []

        self.handlers = {
            "capacity": CapacityCommands(self),
            "gamma": GammaCommands(self),
            "classify": ClassifyCommands(self),
            "regimes": RegimesCommands(self),
            "solve-homog": SolveHomogCommands(self),
            "solve-direct": SolveDirectCommands(self),
            "tf-energy": TFEnergyCommands(self),
            "convergence": ConvergenceCommands(self),
            "config": ConfigCommands(self),
        }
        self._build_command_registry()

    def _build_command_registry(self):
        """Command tree used for dispatch, completion and the generated help.

        Subcommand help strings carry their syntax after the last ': ';
        completion offers the --flags found there, and `choices` lists the
        values a flag accepts.
        """
        self.commands: Dict[str, Dict] = {
            "capacity": {
                "help": "Cell capacities and the bracketing table",
                "subcommands": {
                    "run": {"help": "Bracketing table, h-sweep, scaling and oracles: capacity run [--N 3] [--l 4] [--dx 1/16]"},
                    "cell": {
                        "help": "One extrapolated cell capacity: capacity cell --kind strip|classical|planar|J [--h 1] [--rho 1]",
                        "choices": {"--kind": ["strip", "classical", "planar", "J"]},
                    },
                    "show": {"help": "Show the latest capacity results"},
                },
            },
            "gamma": {
                "help": "Effective interface coefficient",
                "subcommands": {
                    "run": {
                        "help": f"Ergodic spatial averages over seeds: gamma run [--h0 inf] {STUDY_OPTION_HELP}",
                        "choices": {"--h0": ["inf", "zero"]},
                    },
                    "analytic": {
                        "help": "gamma = intensity * E[J(rho)] / 2: gamma analytic [--h0 inf] [--intensity 2]",
                        "choices": {"--h0": ["inf", "zero"]},
                    },
                    "show": {"help": "Show the latest gamma results"},
                },
            },
            "classify": {
                "help": "Isolated, large and near-cluster holes",
                "subcommands": {
                    "run": {"help": f"Cluster negligibility sweep: classify run [--seeds 20] {STUDY_OPTION_HELP}"},
                    "sample": {"help": "Classify one realization: classify sample [--eps 1/16] [--seed 0]"},
                    "show": {"help": "Show the latest classify results"},
                },
            },
            "regimes": {
                "help": "Critical size and h0 regime per dimension",
                "subcommands": {
                    "run": {"help": "Regime table over N and p: regimes run [--dims 3,4,5] [--powers 0.5,1,2,3,4]"},
                    "rule": {"help": "One scaling rule: regimes rule --N 3 --eps 1/16 --p 1"},
                    "show": {"help": "Show the latest regimes results"},
                },
            },
            "solve-homog": {
                "help": "Coupled limit system on the unit box",
                "subcommands": {
                    "run": {"help": "Solve the coupled pair: solve-homog run [--gamma 1] [--n 64] [--f-plus EXPR] [--f-minus EXPR]"},
                    "mms": {"help": "Manufactured-solution convergence order: solve-homog mms [--sizes 16,32,64]"},
                },
            },
            "solve-direct": {
                "help": "Thin-domain solve through one sieve",
                "subcommands": {
                    "run": {"help": "Sample or load a sieve and solve: solve-direct run [--eps 1/8] [--realization FILE]"},
                    "sample": {"help": "Write a sampled point set: solve-direct sample --out FILE"},
                },
            },
            "tf-energy": {
                "help": "Oscillating test-function energy",
                "subcommands": {
                    "run": {"help": f"Energy and bilinear limits per epsilon: tf-energy run [--psi EXPR] {STUDY_OPTION_HELP}"},
                    "show": {"help": "Show the latest tf-energy results"},
                },
            },
            "convergence": {
                "help": "Direct vs homogenized interface jump",
                "subcommands": {
                    "run": {"help": f"Jump discrepancy per epsilon: convergence run [--no-control] {STUDY_OPTION_HELP}"},
                    "show": {"help": "Show the latest convergence results"},
                },
            },
            "config": {
                "help": "Experiment configuration files",
                "subcommands": {
                    "validate": {"help": "Validate config file: config validate [path]"},
                    "info": {"help": "Show active config info: config info"},
                    "generate": {"help": "Write a sample config: config generate <path>"},
                },
            },
            "history": {"help": "Show command history; 'history clear' empties it", "handler": self._handle_history},
            "clear": {"help": "Clear screen", "handler": self._clear_and_welcome},
            "reset": {"help": "Clear screen", "handler": self._clear_and_welcome},
            "help": {"help": "Show help information", "handler": lambda args: self.show_help(args[0] if args else None)},
        }
        for name in ("exit", "quit", "q"):
            self.commands[name] = {"help": "Exit the program", "handler": self._request_exit}
        for name, commands in self.handlers.items():
            self.commands[name]["handler"] = commands.handle_command

    # --- dispatch ---

    def _dispatch(self, parts: List[str]):
        name = parts[0].lower()
        entry = self.commands.get(name)
        if entry is None:
            print(f"Unknown command: {name}. Tip: type 'help' to list all available commands.")
            self.session.fail(f"unknown command {name}")
            return
        entry["handler"](parts[1:])

    def run_once(self, args: List[str]) -> int:
        """Run one command line non-interactively and return the session exit code."""
        if not args:
            self.show_help()
            return self.session.exit_code
        try:
            self._dispatch(args)
        except SieveLabError as e:
            print(f"Error: {e}")
            self.session.fail(str(e))
        except KeyboardInterrupt:
            print("\nOperation cancelled")
            self.session.fail("cancelled")
        return self.session.exit_code

    def _handle_history(self, args: List[str]):
        try:
            if args and args[0].lower() == "clear":
                self.history.clear()
                print("Command history cleared")
                return
            entries = self.history.entries()
        except OSError as e:
            print(f"Error: history unavailable: {e}")
            return
        print("Command History:")
        print(horizontal_line("-"))
        for i, item in enumerate(entries, start=1):
            print(f"{i:4d}  {item}")
        print(horizontal_line("-"))

    def _request_exit(self, args: List[str]):
        self.running = False

    def _clear_and_welcome(self, args: List[str]):
        os.system("cls" if platform.system() == "Windows" else "clear")
        self._display_welcome_screen()

    # --- completion ---

    def completion_candidates(self, line: str) -> List[str]:
        """Words that may follow `line`, already filtered by its last partial word."""
        tokens = line.split()
        if not tokens or line.endswith(" "):
            tokens.append("")
        partial = tokens[-1]
        done = tokens[:-1]

        if not done:
            pool = sorted(self.commands)
        elif done[0].lower() == "help" and len(done) == 1:
            pool = sorted(self.commands)
        else:
            pool = self._argument_candidates(done)
        return [word for word in pool if word.startswith(partial)]

    def _argument_candidates(self, done: List[str]) -> List[str]:
        entry = self.commands.get(done[0].lower(), {})
        subcommands = entry.get("subcommands", {})
        if not subcommands:
            return []

        commands = self.handlers.get(done[0].lower())
        default = getattr(commands, "default_action", None)
        if len(done) == 1:
            pool = list(subcommands)
            if default:
                pool += FLAG_PATTERN.findall(subcommands[default]["help"])
            return pool

        sub = done[1].lower()
        if sub.startswith("--"):
            sub = default
        meta = subcommands.get(sub)
        if meta is None:
            return []
        choices = meta.get("choices", {})
        if done[-1] in choices:
            return choices[done[-1]]
        flags = dict.fromkeys(FLAG_PATTERN.findall(meta["help"]))
        return [flag for flag in flags if flag not in done]

    def _complete(self, text: str, state: int) -> Optional[str]:
        if state == 0:
            line = readline.get_line_buffer()[:readline.get_endidx()]
            self._matches = [word + " " for word in self.completion_candidates(line)]
        return self._matches[state] if state < len(self._matches) else None

    def _setup_readline(self):
        doc = (readline.__doc__ or "").lower()
        if "libedit" in doc or platform.system() == "Darwin":
            readline.parse_and_bind("bind ^I rl_complete")
        else:
            readline.parse_and_bind("tab: complete")
        readline.set_completer_delims(" \t\n;")
        readline.set_completer(self._complete)
        try:
            self.history.load()
        except OSError as e:
            print(f"Warning: Could not load command history: {e}")

    # --- screen ---

    @contextmanager
    def _command_output(self):
        original = sys.stdout
        framed = _FramedStdout(original)
        sys.stdout = framed
        try:
            yield
        finally:
            sys.stdout = original
            framed.close()

    def _display_welcome_screen(self):
        title = f"sievelab Interactive Console v{VERSION}"
        print(f"\n{horizontal_line('=')}")
        print(title.center(get_terminal_width()).rstrip())
        print(horizontal_line("="))

        overrides = self.session.overrides()
        config_state = "loaded" if self.session.config else "built-in defaults"
        print_fields([
            ("Config", f"{self.session.config_path} ({config_state})"),
            ("Output Dir", self.session.output_dir),
            ("Seed", overrides.get("seed", "from config")),
            ("Threads", overrides.get("threads", "from config")),
        ])
        if self.debug:
            print_fields([("Debug Mode", "\033[1;33mEnabled\033[0m")])
        print(horizontal_line("-"))
        print("Type 'help' for available commands, 'exit' to quit")

    def start(self):
        """Read-eval loop until exit or Ctrl-D; history is saved on the way out."""
        self._setup_readline()
        self._display_welcome_screen()

        while self.running:
            try:
                line = input(self.prompt_string).strip()
                if line:
                    with self._command_output():
                        self._dispatch(line.split())
            except EOFError:
                print("\nExiting on Ctrl-D")
                self.running = False
            except KeyboardInterrupt:
                print("\nOperation cancelled")
            except Exception as e:
                logger.debug("command failed", exc_info=True)
                print(f"Error: {e}")
                self.session.fail(str(e))

        try:
            self.history.save()
        except OSError as e:
            print(f"Warning: Could not save command history: {e}")

    # --- help ---

    def show_help(self, command: Optional[str] = None):
        if command:
            self._show_detailed_help(command.lower())
            return

        print("\nAvailable commands:")
        for title, names in self.HELP_GROUPS:
            print(f"\n  {title}:")
            for name in names:
                for usage, description in self._usage_lines(name):
                    print(f"    {usage:<34}- {description}")

        print("\n  General:")
        for usage, description in (
            ("history [clear]", "Show or clear command history"),
            ("clear, reset", "Clear screen"),
            ("help [command]", "Show general or command-specific help"),
            ("exit, quit, q, Ctrl-D", "Exit the program"),
        ):
            print(f"    {usage:<34}- {description}")
        print("\n  Study commands run their 'run' subcommand when called with options only.")

    def _show_detailed_help(self, name: str):
        entry = self.commands.get(name)
        if not entry:
            print(f"No help available for '{name}'.")
            return
        print(f"\n  {name}: {entry['help']}")
        subcommands = entry.get("subcommands", {})
        if not subcommands:
            return
        width = max(len(f"{name} {sub}") for sub in subcommands)
        for sub, meta in subcommands.items():
            print(f"    {name + ' ' + sub:<{width}}  - {meta['help']}")

    def _usage_lines(self, name: str) -> List[tuple]:
        """(usage, description) rows for one command, split from its help strings."""
        entry = self.commands[name]
        rows = []
        for sub, meta in entry.get("subcommands", {}).items():
            usage, description = f"{name} {sub}", meta["help"]
            head, sep, tail = description.rpartition(": ")
            if sep and tail.startswith(name) and len(tail) <= 33:
                usage, description = tail, head
            rows.append((usage, description))
        return rows
