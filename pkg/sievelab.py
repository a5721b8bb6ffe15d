#!/usr/bin/env python3
# sievelab.py - Stochastic Neumann sieve numerical lab
# License: GPLv3

import argparse
import logging
import os
import sys

from lib.config import ConfigManager
from lib.console import InteractiveConsole
from lib.session import Session
from utils.constants import DEFAULT_CONFIG_PATH, VERSION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Stochastic Neumann sieve lab: capacities, effective coefficients and limit studies",
        epilog="Without a command the interactive console starts. Example: sievelab.py --seed 7 gamma --eps 1/8,1/16",
    )
    parser.add_argument("--config", help="Path to configuration file")
    parser.add_argument("--gen-config", help="Generate a sample configuration file")
    parser.add_argument("--seed", type=int, help="Base seed for all randomness (overrides config)")
    parser.add_argument("--threads", type=int, help="Worker threads for realizations and cell problems")
    parser.add_argument("--out-dir", help="Directory for JSON/CSV results (overrides config)")
    parser.add_argument("--version", action="version", version=f"sievelab v{VERSION}")
    parser.add_argument("--debug", action="store_true", help="Enable debug output")
    parser.add_argument("command", nargs=argparse.REMAINDER, help="Command to run once, e.g. 'capacity run --N 3'")
    return parser


def main(argv=None) -> int:
    """Main function"""
    args = build_parser().parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.debug else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    if args.gen_config:
        return 0 if ConfigManager.generate_config(args.gen_config) else 1

    config_path = args.config if args.config else DEFAULT_CONFIG_PATH
    config = {}
    if os.path.exists(config_path):
        config = ConfigManager.load_config(config_path)
        errors, warnings = ConfigManager.validate(config)
        for w in warnings:
            print(f"Warning: {w}")
        if errors:
            for e in errors:
                print(f"Config error: {e}")
            print(f"Fix the config or check it with: sievelab.py --config {config_path} config validate")
            return 1
    elif args.config:
        print(f"No configuration file found at {config_path}")
        print(f"Generate one with: sievelab.py --gen-config {config_path}")
        return 1

    session = Session(
        config=config,
        config_path=config_path,
        seed=args.seed,
        threads=args.threads,
        out_dir=args.out_dir,
        debug=args.debug,
    )
    console = InteractiveConsole(session, debug=args.debug)

    if args.command:
        return console.run_once(args.command)

    console.start()
    return session.exit_code


if __name__ == "__main__":
    sys.exit(main())
