#!/usr/bin/env python3
# lib/config.py - Configuration manager for sievelab

import os
from typing import Any, Dict, List, Tuple

import toml

from lib.errors import ConfigError
from lib.point_process import ProcessSpec
from lib.studies import parse_eps_list

SECTIONS = ("defaults", "capacity", "gamma", "classify", "regimes", "tf_energy", "convergence", "homogenized", "direct")

# keys every study section accepts through [defaults]
COMMON_KEYS = {"N", "seed", "seeds", "threads", "out_dir", "eps", "window", "hole_radius", "p", "process", "grid",
               "sizes", "max_unknowns"}

KNOWN_KEYS: Dict[str, set] = {
    "defaults": COMMON_KEYS,
    "capacity": COMMON_KEYS | {"l", "h_values", "sweep_factors", "scaling_factors", "scaling_hole", "capacitor",
                                "capacitor_sizes", "thin_height"},
    "gamma": COMMON_KEYS | {"h0"},
    "classify": COMMON_KEYS,
    "regimes": COMMON_KEYS | {"dims", "powers", "eps_checks"},
    "tf_energy": COMMON_KEYS | {"psi", "cell_dx"},
    "convergence": COMMON_KEYS | {"f", "homog_n", "n_z", "growth", "coarse", "fine_fraction", "control",
                                   "max_discrepancy"},
    "homogenized": COMMON_KEYS | {"gamma", "f_plus", "f_minus", "n", "dimension"},
    "direct": COMMON_KEYS | {"realization", "f_plus", "f_minus", "n_z", "growth", "coarse", "fine_fraction", "symmetry"},
}

SAMPLE_HEADER = """\
# sievelab configuration
#
# [defaults] applies to every study; a study section overrides it and
# command-line flags override both. Epsilon lists accept fractions
# ("1/8") or a halving range ("1/8..1/64").
#
# process kinds: poisson, lattice, perturbed_lattice, matern_hardcore
# marks: a number (single atom), {atoms = [...], weights = [...]} or
# {uniform = [lo, hi]}

"""

SAMPLE_CONFIG = {
    "defaults": {
        "seed": 0,
        "threads": 1,
        "out_dir": "results",
        "hole_radius": 1.0,
        "grid": {"dx": 0.125, "levels": 3},
        "sizes": [4, 8, 16],
    },
    "capacity": {
        "N": 3,
        "l": 4.0,
        "h_values": [0.25, 0.5, 1.0, 2.0, 4.0],
        "sweep_factors": [1, 2, 4, 8],
        "scaling_factors": [2, 4],
    },
    "gamma": {
        "N": 3,
        "h0": "inf",
        "eps": "1/8..1/64",
        "seeds": 100,
        "process": {"kind": "poisson", "intensity": 2.0, "marks": 1.0},
    },
    "classify": {
        "N": 3,
        "p": 1.0,
        "eps": "1/8..1/64",
        "seeds": 20,
        "process": {"kind": "poisson", "intensity": 2.0, "marks": {"atoms": [1.0, 2.0], "weights": [0.5, 0.5]}},
    },
    "regimes": {
        "dims": [3, 4, 5],
        "powers": [0.5, 1.0, 2.0, 3.0, 4.0],
        "eps_checks": [1e-3, 1e-4],
    },
    "tf_energy": {
        "p": 1.0,
        "eps": "1/8..1/32",
        "psi": "sin(pi*x)*sin(pi*y)",
        "process": {"kind": "lattice", "intensity": 1.0, "marks": 1.0, "offset": 0.5},
    },
    "convergence": {
        "p": 1.0,
        "eps": "1/8..1/32",
        "f": "sin(pi*x)*sin(pi*y)",
        "homog_n": 64,
        "n_z": 6,
        "max_unknowns": 2000000,
        "process": {"kind": "lattice", "intensity": 1.0, "marks": 1.0, "offset": 0.5},
    },
    "homogenized": {
        "gamma": 1.0,
        "n": 64,
        "dimension": 2,
        "f_plus": "sin(pi*x)*sin(pi*y)",
        "f_minus": "-sin(pi*x)*sin(pi*y)",
    },
    "direct": {
        "eps": "1/8",
        "p": 1.0,
        "symmetry": "none",
        "f_plus": "1",
        "f_minus": "0",
        "process": {"kind": "lattice", "intensity": 1.0, "marks": 1.0, "offset": 0.5},
    },
}


class ConfigManager:
    """Manages configuration loading, generation and validation"""

    @staticmethod
    def load_config(config_path: str) -> Dict:
        """Load configuration from a TOML file"""
        if not os.path.exists(config_path):
            print(f"Configuration file not found: {config_path}")
            return {}

        try:
            return toml.load(config_path)
        except Exception as e:
            print(f"Error loading configuration: {str(e)}")
            return {}

    @staticmethod
    def generate_config(output_path: str) -> bool:
        """Generate a sample configuration file covering every section"""
        try:
            with open(output_path, "w") as f:
                f.write(SAMPLE_HEADER)
                toml.dump(SAMPLE_CONFIG, f)
            print(f"Sample configuration generated at {output_path}")
            return True
        except Exception as e:
            print(f"Error generating configuration: {str(e)}")
            return False

    @staticmethod
    def require(data: Dict, path: str) -> Dict:
        """Validate and raise ConfigError on the first batch of errors."""
        errors, _ = ConfigManager.validate(data)
        if errors:
            raise ConfigError(f"{path}: " + "; ".join(errors))
        return data

    @staticmethod
    def validate(data: Dict[str, Any]) -> Tuple[List[str], List[str]]:
        """Check sections, known keys, types and ranges. Returns (errors, warnings)."""
        errors: List[str] = []
        warnings: List[str] = []

        for name, section in data.items():
            if name not in SECTIONS:
                warnings.append(f"Unknown section [{name}]")
                continue
            if not isinstance(section, dict):
                errors.append(f"[{name}] is not a table/dict")
                continue
            for key in section:
                if key not in KNOWN_KEYS[name]:
                    warnings.append(f"[{name}] unknown key: {key}")
            errors.extend(f"[{name}] {e}" for e in _check_values(name, section))
        return errors, warnings


def _check_values(name: str, section: Dict[str, Any]) -> List[str]:
    errors = []
    if "N" in section and (not isinstance(section["N"], int) or section["N"] < 3):
        errors.append("N must be an integer >= 3")
    if "eps" in section:
        try:
            parse_eps_list(section["eps"])
        except ValueError as e:
            errors.append(f"eps: {e}")
    if "seeds" in section:
        seeds = section["seeds"]
        if not isinstance(seeds, int) or seeds < 1:
            errors.append("seeds must be a positive integer")
        elif name == "gamma" and seeds < 2:
            errors.append("gamma needs at least 2 seeds")
    for key in ("threads", "max_unknowns", "n", "homog_n", "n_z"):
        if key in section and (not isinstance(section[key], int) or section[key] < 1):
            errors.append(f"{key} must be a positive integer")
    for key in ("hole_radius", "p"):
        if key in section and (not isinstance(section[key], (int, float)) or section[key] <= 0):
            errors.append(f"{key} must be positive")
    if "gamma" in section and (not isinstance(section["gamma"], (int, float)) or section["gamma"] < 0):
        errors.append("gamma must be nonnegative")
    process = section.get("process")
    if process is not None:
        if not isinstance(process, dict):
            errors.append("process must be a table")
        else:
            try:
                ProcessSpec.from_config(process)
            except (TypeError, ValueError) as e:
                errors.append(f"process: {e}")
    return errors
