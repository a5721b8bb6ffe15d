#!/usr/bin/env python3
# commands/tf_energy.py - Oscillating test-function energy study

from typing import List

from commands.base import STUDY_OPTIONS, BaseCommands
from lib.studies import parse_fraction


class TFEnergyCommands(BaseCommands):
    """Energy profile and bilinear limit of the oscillating test functions"""

    label = "tf-energy"
    usage = "tf-energy [run] [--eps 1/8..1/32] [--psi 'sin(pi*x)*sin(pi*y)'] | tf-energy show"
    default_action = "run"

    OPTIONS = {**STUDY_OPTIONS, "psi": str, "cell_dx": parse_fraction}

    def _build_actions(self):
        return {
            "run": self.run,
            "show": lambda args: self.show_record("tf-energy"),
        }

    def run(self, args: List[str]):
        flags = self.parse_options(args, self.OPTIONS, "tf-energy run [--eps 1/8..1/32] [--psi EXPR]")
        if flags is not None:
            self.run_study("tf-energy", flags)
