#!/usr/bin/env python3
# commands/convergence.py - Direct versus homogenized convergence study

from typing import List

from commands.base import STUDY_OPTIONS, BaseCommands, parse_flag
from lib.studies import parse_fraction


class ConvergenceCommands(BaseCommands):
    """Slab-averaged direct jumps against the homogenized jump"""

    label = "convergence"
    usage = "convergence [run] [--eps 1/8..1/32] [--max-unknowns 2000000] [--no-control] | convergence show"
    default_action = "run"

    OPTIONS = {
        **STUDY_OPTIONS,
        "f": str,
        "homog_n": int,
        "n_z": int,
        "growth": parse_fraction,
        "coarse": parse_fraction,
        "fine_fraction": parse_fraction,
        "max_unknowns": int,
        "no_control": parse_flag,
    }

    def _build_actions(self):
        return {
            "run": self.run,
            "show": lambda args: self.show_record("convergence"),
        }

    def run(self, args: List[str]):
        flags = self.parse_options(args, self.OPTIONS, "convergence run [--eps 1/8..1/32] [--max-unknowns N]")
        if flags is None:
            return
        if flags.pop("no_control", False):
            flags["control"] = False
        self.run_study("convergence", flags)
