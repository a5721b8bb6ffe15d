#!/usr/bin/env python3
# commands/direct.py - Direct thin-domain solves on one sieve realization

import json
import os
from typing import List, Optional

from commands.base import BaseCommands
from lib.effective import ScalingRule
from lib.point_process import (
    Box,
    MarkedPointSet,
    ProcessSpec,
    SieveRealization,
    classify,
    realization_invariants,
    realize_sieve,
    sample_process,
    sampling_window,
)
from lib.sieve_direct import SlabSource, ThinGrid, field_summary, solve_direct
from lib.studies import DEFAULTS, parse_fraction
from utils.constants import DEFAULT_MAX_UNKNOWNS
from utils.formatting import format_number, print_fields
from utils.output import write_json


class SolveDirectCommands(BaseCommands):
    """solve-direct: -Lap u = f on the two slabs joined through the sieve holes"""

    label = "solve-direct"
    usage = ("solve-direct [run] [--eps 1/8] [--p 1] [--realization FILE] [--symmetry none|odd] [--csv FILE] | "
             "solve-direct sample --out FILE")
    default_action = "run"

    OPTIONS = {
        "eps": parse_fraction,
        "p": parse_fraction,
        "seed": int,
        "realization": str,
        "f_plus": str,
        "f_minus": str,
        "symmetry": str,
        "n_z": int,
        "growth": parse_fraction,
        "coarse": parse_fraction,
        "fine_fraction": parse_fraction,
        "max_unknowns": int,
        "hole_radius": parse_fraction,
        "csv": str,
        "out_dir": str,
    }
    SAMPLE_OPTIONS = {"eps": parse_fraction, "p": parse_fraction, "seed": int, "out": str, "hole_radius": parse_fraction}

    def _build_actions(self):
        return {
            "run": self.run,
            "sample": self.sample,
        }

    def _params(self, opts):
        return {**self.session.section("direct"), **opts}

    @staticmethod
    def _domain(params) -> Box:
        return Box.from_json(params["window"]) if params.get("window") else Box.unit(2)

    def _points(self, params, rule: ScalingRule) -> MarkedPointSet:
        path = params.get("realization")
        if path:
            with open(path) as f:
                return MarkedPointSet.from_json(json.load(f))
        process = ProcessSpec.from_config(params.get("process", DEFAULTS["convergence"]["process"]))
        window = sampling_window(self._domain(params), rule.epsilon, rule.a, process.marks.max_mark)
        return sample_process(process, window, [int(params.get("seed", 0)), 0])

    def _realize(self, params) -> Optional[SieveRealization]:
        eps = parse_fraction(params.get("eps", 0.125))
        rule = self.guarded(ScalingRule.from_power, 3, eps, parse_fraction(params.get("p", 1.0)))
        if rule is None:
            return None

        def build():
            points = self._points(params, rule)
            if points.dimension != 2:
                raise ValueError("direct solves need a 2-D point set (N = 3)")
            cls = classify(points, eps, rule.a, rule.delta, rule.h0_tag, self._domain(params))
            seed = [int(params.get("seed", 0)), 0]
            return realize_sieve(cls, "ball", float(params.get("hole_radius", 1.0)), seed=seed)

        return self.guarded(build)

    def run(self, args: List[str]):
        """Sample (or load) a sieve, build the graded grid and solve"""
        opts = self.parse_options(args, self.OPTIONS, self.usage)
        if opts is None:
            return
        params = self._params(opts)
        realization = self._realize(params)
        if realization is None:
            return
        violations = realization_invariants(realization)
        if violations:
            print(f"WARNING: realization invariants violated: {', '.join(violations)}")
            self.session.fail("realization invariants violated")

        grid = self.guarded(
            ThinGrid.build,
            realization,
            fine_fraction=float(params.get("fine_fraction", 0.125)),
            coarse=float(params.get("coarse", 1 / 32)),
            growth=float(params.get("growth", 1.5)),
            n_z=int(params.get("n_z", 6)),
            max_unknowns=int(params.get("max_unknowns", DEFAULT_MAX_UNKNOWNS)),
            symmetry=params.get("symmetry", "none"),
        )
        if grid is None:
            return
        source = SlabSource(params.get("f_plus", "1"), params.get("f_minus", "0"))
        field = self.guarded(solve_direct, realization, source, grid, params.get("symmetry", "none"))
        if field is None:
            return

        summary = field_summary(field)
        counts = realization.classification.counts()
        print_fields([
            ("Epsilon", format_number(realization.epsilon)),
            ("delta", format_number(realization.delta)),
            ("Holes", f"{realization.hole_centers.shape[0]} ({counts['I']} isolated)"),
            ("Grid", " x ".join(str(s) for s in summary["shape"])),
            ("Unknowns", grid.unknowns(field.symmetry)),
            ("Residual", format_number(summary["residual"], 3)),
            ("Energy", format_number(summary["energy"])),
            ("Rescaled energy", format_number(summary["rescaled_energy"])),
            ("Mean u+ - u-", format_number(summary["mean_plus"] - summary["mean_minus"])),
        ])
        out_dir = params.get("out_dir", self.session.output_dir)
        written = [self.guarded(write_json, os.path.join(out_dir, "solve_direct.json"), summary)]
        if params.get("csv"):
            written.append(self.guarded(field.export_csv, params["csv"]))
        written = [p for p in written if p]
        if written:
            print(f"Results written: {', '.join(written)}")

    def sample(self, args: List[str]):
        """Write one sampled point set as JSON for later --realization runs"""
        opts = self.parse_options(args, self.SAMPLE_OPTIONS, "solve-direct sample --out FILE [--eps 1/8] [--seed 0]")
        if opts is None:
            return
        if "out" not in opts:
            self._reject("Missing --out FILE")
            return
        params = self._params(opts)
        eps, p = parse_fraction(params.get("eps", 0.125)), parse_fraction(params.get("p", 1.0))
        rule = self.guarded(ScalingRule.from_power, 3, eps, p)
        if rule is None:
            return
        points = self.guarded(self._points, {k: v for k, v in params.items() if k != "realization"}, rule)
        if points is None:
            return
        path = self.guarded(write_json, opts["out"], points.to_json())
        if path:
            print(f"Wrote {len(points)} points to {path}")
