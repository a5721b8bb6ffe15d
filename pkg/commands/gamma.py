#!/usr/bin/env python3
# commands/gamma.py - Effective coefficient estimation commands

from typing import List

from commands.base import STUDY_OPTIONS, BaseCommands
from lib.effective import gamma_analytic
from lib.regime import H0Tag
from lib.studies import DEFAULTS, parse_fraction
from utils.formatting import format_number, print_fields


class GammaCommands(BaseCommands):
    """Ergodic and analytic gamma"""

    label = "gamma"
    usage = "gamma [run] [--h0 inf] [--eps 1/8..1/64] [--seeds 100] | gamma analytic | gamma show"
    default_action = "run"

    OPTIONS = {**STUDY_OPTIONS, "h0": str, "process": str, "intensity": parse_fraction, "marks": str}

    def _build_actions(self):
        return {
            "run": self.run,
            "analytic": self.analytic,
            "show": lambda args: self.show_record("gamma"),
        }

    def _flags(self, args: List[str], usage: str):
        flags = self.parse_options(args, self.OPTIONS, usage)
        if flags is None:
            return None
        process = {k: flags.pop(k) for k in ("process", "intensity", "marks") if k in flags}
        if process:
            if "process" in process:
                process["kind"] = process.pop("process")
            base = self.session.section("gamma").get("process", DEFAULTS["gamma"]["process"])
            flags["process"] = {**base, **process}
        return flags

    def run(self, args: List[str]):
        """Estimate gamma by spatial averages over seeds and epsilons"""
        flags = self._flags(args, "gamma run [--h0 inf] [--eps 1/8..1/64] [--seeds 100] [--process poisson]")
        if flags is not None:
            self.run_study("gamma", flags)

    def analytic(self, args: List[str]):
        """gamma = intensity * E[J(rho)] / 2 without sampling"""
        flags = self._flags(args, "gamma analytic [--h0 inf] [--N 3] [--intensity 2] [--marks 1]")
        if flags is None:
            return
        config = self.guarded(self.session.experiment, "gamma", flags)
        if config is None:
            return
        process = self.guarded(config.process)
        tag = self.guarded(H0Tag.parse, config.get("h0", "inf"))
        if process is None or tag is None:
            return
        N = int(config.get("N", 3))
        value = self.guarded(gamma_analytic, process.mean_intensity(N - 1), process.marks, tag, config.hole(), N,
                             schedule=config.schedule(), sizes=config.sizes())
        if value is None:
            return
        print_fields([
            ("Gamma", format_number(value)),
            ("Regime", str(tag)),
            ("N", N),
            ("Intensity", format_number(process.mean_intensity(N - 1))),
            ("Process", process.kind),
        ])
