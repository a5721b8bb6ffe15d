#!/usr/bin/env python3
# commands/capacity.py - Capacity study and single capacity evaluations

from typing import List

from commands.base import STUDY_OPTIONS, BaseCommands, parse_float_list
from lib.capacity import CylinderSpec, GridSchedule, HoleSpec, cap_classical, cap_planar, cap_strip, eval_J
from lib.regime import H0Tag
from lib.studies import parse_fraction
from utils.formatting import format_number, print_fields


class CapacityCommands(BaseCommands):
    """Capacity tables and oracles"""

    label = "capacity"
    usage = "capacity [run] [--N 3] [--l 4] | capacity cell --kind strip|classical|planar|J ... | capacity show"
    default_action = "run"

    RUN_OPTIONS = {**STUDY_OPTIONS, "l": parse_fraction, "h_values": parse_float_list, "dx": parse_fraction,
                   "levels": int}
    CELL_OPTIONS = {
        "kind": str,
        "N": int,
        "radius": parse_fraction,
        "l": parse_fraction,
        "h": parse_fraction,
        "h0": str,
        "rho": parse_fraction,
        "dx": parse_fraction,
        "levels": int,
    }

    def _build_actions(self):
        return {
            "run": self.run,
            "cell": self.cell,
            "show": lambda args: self.show_record("capacity"),
        }

    def run(self, args: List[str]):
        """Run the capacity study"""
        flags = self.parse_options(args, self.RUN_OPTIONS, "capacity run [--N 3] [--l 4] [--h-values 0.25,0.5]")
        if flags is None:
            return
        grid = {k: flags.pop(k) for k in ("dx", "levels") if k in flags}
        if grid:
            flags["grid"] = {**self.session.section("capacity").get("grid", {}), **grid}
        self.run_study("capacity", flags)

    def cell(self, args: List[str]):
        """Evaluate one extrapolated capacity: capacity cell --kind strip --l 4 --h 1"""
        opts = self.parse_options(args, self.CELL_OPTIONS, "capacity cell --kind strip|classical|planar|J ...")
        if opts is None:
            return
        kind = opts.get("kind", "strip")
        N = opts.get("N", 3)
        hole = self.guarded(HoleSpec, "ball", opts.get("radius", 1.0))
        schedule = self.guarded(GridSchedule, opts.get("dx", 0.125), opts.get("levels", 3))
        if hole is None or schedule is None:
            return
        l, h = opts.get("l", 4.0), opts.get("h", 1.0)

        if kind == "J":
            tag = self.guarded(H0Tag.parse, opts.get("h0", "inf"))
            if tag is None:
                return
            value = self.guarded(eval_J, tag, opts.get("rho", 1.0), hole, N, schedule)
            if value is not None:
                print_fields([("J", format_number(value)), ("h0", str(tag)), ("rho", opts.get("rho", 1.0))])
            return

        solvers = {
            "strip": lambda: cap_strip(hole, l, h, schedule, N),
            "classical": lambda: cap_classical(hole, CylinderSpec(l, h, N), schedule),
            "planar": lambda: cap_planar(hole, l, schedule, N),
        }
        solve = solvers.get(kind)
        if solve is None:
            self._reject(f"Unknown capacity kind: {kind}. Use strip, classical, planar or J")
            return
        estimate = self.guarded(solve)
        if estimate is None:
            return
        print_fields([
            ("Kind", kind),
            ("Extrapolated", format_number(estimate.extrapolated)),
            ("Finest grid", format_number(estimate.value)),
            ("Spacings", ", ".join(format_number(s) for s in estimate.spacings)),
            ("Model", estimate.model),
            ("Residual", format_number(estimate.residual, 3)),
        ])
        for warning in estimate.warnings:
            print(f"  WARNING: {warning}")
