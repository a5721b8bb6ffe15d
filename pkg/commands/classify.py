#!/usr/bin/env python3
# commands/classify.py - Cluster classification and scaling regime commands

from typing import List

from commands.base import STUDY_OPTIONS, BaseCommands, parse_float_list
from lib.effective import ScalingRule, admissibility
from lib.point_process import classify, realization_invariants, realize_sieve, sample_process, sampling_window
from lib.studies import parse_fraction
from utils.formatting import format_number, print_fields, print_table


class ClassifyCommands(BaseCommands):
    """Isolated/cluster classification and the cluster negligibility study"""

    label = "classify"
    usage = "classify [run] [--N 3] [--p 1] [--eps 1/8..1/64] [--seeds 20] | classify sample --eps 1/16 | classify show"
    default_action = "run"

    def _build_actions(self):
        return {
            "run": self.run,
            "sample": self.sample,
            "show": lambda args: self.show_record("classify"),
        }

    def run(self, args: List[str]):
        flags = self.parse_options(args, STUDY_OPTIONS, "classify run [--N 3] [--p 1] [--eps 1/8..1/64]")
        if flags is not None:
            self.run_study("classify", flags)

    def sample(self, args: List[str]):
        """Classify one realization and print its counts and invariants"""
        flags = self.parse_options(args, STUDY_OPTIONS, "classify sample [--eps 1/16] [--seed 0]")
        if flags is None:
            return
        config = self.guarded(self.session.experiment, "classify", flags)
        if config is None:
            return
        N = int(config.get("N", 3))
        eps = config.eps()[0]
        rule = self.guarded(ScalingRule.from_power, N, eps, float(config.get("p", 1.0)))
        process = self.guarded(config.process)
        if rule is None or process is None:
            return
        domain = config.window(N - 1)

        def build():
            window = sampling_window(domain, eps, rule.a, process.marks.max_mark)
            points = sample_process(process, window, [config.seed, 0])
            cls = classify(points, eps, rule.a, rule.delta, rule.h0_tag, domain)
            return realize_sieve(cls, "ball", config.hole().radius, seed=[config.seed, 0])

        realization = self.guarded(build)
        if realization is None:
            return
        counts = realization.classification.counts()
        violations = realization_invariants(realization)
        print_fields([
            ("Epsilon", format_number(eps)),
            ("a", format_number(rule.a)),
            ("delta", format_number(rule.delta)),
            ("Regime", str(rule.h0_tag)),
            ("Isolated", counts["I"]),
            ("Cluster C1", counts["C1"]),
            ("Cluster C2", counts["C2"]),
            ("Shield |S'|", f"{format_number(realization.shield_measure)} ({realization.shield_method})"),
            ("Contact measure", format_number(realization.contact_measure(seed=[config.seed, 0]))),
            ("Invariants", ", ".join(violations) if violations else "all hold"),
        ])
        if violations:
            self.session.fail(f"realization invariants violated: {', '.join(violations)}")


class RegimesCommands(BaseCommands):
    """Scaling regimes over (N, p)"""

    label = "regimes"
    usage = "regimes [run] [--dims 3,4,5] [--powers 0.5,1,2,3,4] | regimes rule --N 3 --eps 1/16 --p 1"
    default_action = "run"

    RUN_OPTIONS = {"seed": int, "out_dir": str, "dims": parse_float_list, "powers": parse_float_list,
                   "eps_checks": parse_float_list}
    RULE_OPTIONS = {"N": int, "eps": parse_fraction, "p": parse_fraction}

    def _build_actions(self):
        return {
            "run": self.run,
            "rule": self.rule,
            "show": lambda args: self.show_record("regimes"),
        }

    def run(self, args: List[str]):
        flags = self.parse_options(args, self.RUN_OPTIONS, "regimes run [--dims 3,4,5] [--powers 0.5,1,2]")
        if flags is None:
            return
        if "dims" in flags:
            flags["dims"] = [int(d) for d in flags["dims"]]
        self.run_study("regimes", flags)

    def rule(self, args: List[str]):
        """Print a_eps, delta, h_eps and the regime for one (N, eps, p)"""
        opts = self.parse_options(args, self.RULE_OPTIONS, "regimes rule --N 3 --eps 1/16 --p 1")
        if opts is None:
            return
        N, eps, p = opts.get("N", 3), opts.get("eps", 1 / 16), opts.get("p", 1.0)
        rule = self.guarded(ScalingRule.from_power, N, eps, p)
        if rule is None:
            return
        rows = [[name, format_number(value)] for name, value in
                (("epsilon", rule.epsilon), ("delta", rule.delta), ("a", rule.a), ("h_eps", rule.h_eps))]
        rows.append(["regime", str(rule.h0_tag)])
        if N == 3:
            rows.append(["eps^2 ln(1/delta)", format_number(admissibility(eps, rule.delta))])
        print_table(["Quantity", "Value"], rows, title=f"Scaling rule N={N}, p={format_number(p)}")
