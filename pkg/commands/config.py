#!/usr/bin/env python3
# commands/config.py - Config validation and info commands for sievelab

import os
from typing import List

import toml

from commands.base import BaseCommands
from lib.config import ConfigManager


class ConfigCommands(BaseCommands):
    """Config management commands for Interactive Console."""

    label = "config"
    usage = "config validate [path]|info|generate <path>"

    def _build_actions(self):
        return {
            "validate": self.validate_config,
            "info": lambda args: self.show_config_info(),
            "generate": self.generate_config,
        }

    def validate_config(self, args: List[str]):
        """Validate the config file: existence, TOML syntax, sections, keys and value ranges."""
        config_path = args[0] if args else self.session.config_path

        print(f"Validating config: {config_path}")

        if not os.path.exists(config_path):
            print(f"\n  ERROR: Config file not found: {config_path}")
            print("\nResult: FAILED (1 error)")
            self.session.fail("config file not found")
            return

        try:
            data = toml.load(config_path)
        except Exception as e:
            self._print_result([f"TOML parse error: {e}"], [])
            return

        if not data:
            self._print_result([], ["Config file is empty, built-in defaults apply"])
            return

        errors, warnings = ConfigManager.validate(data)
        self._print_result(errors, warnings)

    def _print_result(self, errors: List[str], warnings: List[str]):
        """Print validation summary."""
        if warnings:
            print("\nWarnings:")
            for w in warnings:
                print(f"  WARNING: {w}")

        if errors:
            print("\nErrors:")
            for e in errors:
                print(f"  ERROR: {e}")
            print(f"\nResult: FAILED ({len(errors)} error(s), {len(warnings)} warning(s))")
            self.session.fail("config validation failed")
        else:
            print(f"\nResult: OK ({len(warnings)} warning(s))")

    def generate_config(self, args: List[str]):
        if not args:
            print(f"Missing output path. Use '{self.usage}'")
            return
        if not ConfigManager.generate_config(args[0]):
            self.session.fail("config generation failed")

    def show_config_info(self):
        """Show the active config path, its sections and the session overrides."""
        path = self.session.config_path
        print(f"Config Path:     {path}")

        exists = os.path.exists(path)
        print(f"File Exists:     {'yes' if exists else 'no'}")

        if exists:
            try:
                sections = list(toml.load(path).keys())
                print(f"Sections ({len(sections)}):    {', '.join(sections) if sections else '(none)'}")
            except Exception as e:
                print(f"Parse Error:     {e}")

        overrides = self.session.overrides()
        print(f"\nSeed:            {overrides.get('seed', '(config)')}")
        print(f"Threads:         {overrides.get('threads', '(config)')}")
        print(f"Output Dir:      {self.session.output_dir}")
        print(f"Debug:           {'on' if self.session.debug else 'off'}")
