#!/usr/bin/env python3
# commands/homogenized.py - Coupled limit system solves

import os
from typing import List

from commands.base import BaseCommands, parse_float_list
from lib.homogenized import (
    GridU,
    SourcePair,
    energy_coupled,
    export_csv,
    jump_l2,
    manufactured_errors,
    solve_coupled,
)
from lib.studies import parse_fraction
from utils.formatting import format_check, format_number, print_fields, print_table
from utils.output import write_json


class SolveHomogCommands(BaseCommands):
    """solve-homog: -Lap u+- +- (gamma/2)(u+ - u-) = f+- on the unit box"""

    label = "solve-homog"
    usage = "solve-homog [run] [--gamma 1] [--n 64] [--f-plus EXPR] [--f-minus EXPR] | solve-homog mms"
    default_action = "run"

    OPTIONS = {
        "gamma": parse_fraction,
        "n": int,
        "dimension": int,
        "f_plus": str,
        "f_minus": str,
        "out_dir": str,
        "method": str,
    }
    MMS_OPTIONS = {"gamma": parse_fraction, "sizes": parse_float_list, "dimension": int}

    def _build_actions(self):
        return {
            "run": self.run,
            "mms": self.mms,
        }

    def run(self, args: List[str]):
        """Solve the coupled system and write u+ and u- to CSV and JSON"""
        opts = self.parse_options(args, self.OPTIONS, self.usage)
        if opts is None:
            return
        params = {**self.session.section("homogenized"), **opts}
        gamma = float(params.get("gamma", 1.0))
        grid = self.guarded(GridU, int(params.get("n", 64)), int(params.get("dimension", 2)))
        if grid is None:
            return
        f_plus = params.get("f_plus", "sin(pi*x)*sin(pi*y)")
        f_minus = params.get("f_minus", f"-({f_plus})")
        sources = self.guarded(SourcePair.from_expressions, f_plus, f_minus, grid)
        if sources is None:
            return
        sol = self.guarded(solve_coupled, gamma, sources, grid, params.get("method", "cg"))
        if sol is None:
            return

        out_dir = params.get("out_dir", self.session.output_dir)
        csv_path = self.guarded(export_csv, sol, os.path.join(out_dir, "solve_homog.csv"))
        json_path = self.guarded(write_json, os.path.join(out_dir, "solve_homog.json"), sol.to_json())
        print_fields([
            ("Gamma", format_number(gamma)),
            ("Grid", f"{grid.n} cells per side, d={grid.dimension}"),
            ("Residual", format_number(sol.residual, 3)),
            ("Iterations", sol.iterations),
            ("Energy", format_number(energy_coupled(sol, sources))),
            ("Jump L2", format_number(jump_l2(sol))),
            ("Max |u+|", format_number(float(abs(sol.u_plus).max()))),
            ("Max |u-|", format_number(float(abs(sol.u_minus).max()))),
        ])
        written = [p for p in (csv_path, json_path) if p]
        if written:
            print(f"Results written: {', '.join(written)}")

    def mms(self, args: List[str]):
        """Manufactured-solution convergence order"""
        opts = self.parse_options(args, self.MMS_OPTIONS, "solve-homog mms [--gamma 1] [--sizes 16,32,64]")
        if opts is None:
            return
        sizes = [int(s) for s in opts.get("sizes", [16, 32, 64])]
        if len(sizes) < 2 or sorted(sizes) != sizes:
            self._reject("mms needs at least two increasing grid sizes")
            return
        result = self.guarded(manufactured_errors, opts.get("gamma", 1.0), sizes, opts.get("dimension", 2))
        if result is None:
            return
        errors, orders = result
        rows = [[n, format_number(e, 4), format_number(o, 3) if k else ""]
                for k, (n, e, o) in enumerate(zip(sizes, errors, [0.0] + orders))]
        print_table(["n", "L2 error", "Order"], rows, title="Manufactured solution")
        passed = min(orders) >= 1.9
        print(f"\nResult: {format_check(passed)} (observed order {min(orders):.3f}, expected 2)")
        if not passed:
            self.session.fail("manufactured-solution order below 1.9")
