#!/usr/bin/env python3
# lib/session.py - Session state shared by all commands

import logging
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from typing import Any, Dict, Iterator, List, Optional

from lib.studies import ExperimentConfig, ResultRecord
from utils.constants import DEFAULT_CONFIG_PATH, DEFAULT_OUT_DIR

logger = logging.getLogger(__name__)


class Session:
    """Loaded config, global overrides and the pass/fail ledger of one sievelab run."""

    def __init__(
        self,
        config: Optional[Dict[str, Any]] = None,
        config_path: str = DEFAULT_CONFIG_PATH,
        seed: Optional[int] = None,
        threads: Optional[int] = None,
        out_dir: Optional[str] = None,
        debug: bool = False,
    ):
        self.config = config or {}
        self.config_path = config_path
        self.seed = seed
        self.threads = threads
        self.out_dir = out_dir
        self.debug = debug
        self.records: List[ResultRecord] = []
        self.failures: List[str] = []

    def overrides(self) -> Dict[str, Any]:
        """Global flags that were given explicitly."""
        values = {"seed": self.seed, "threads": self.threads, "out_dir": self.out_dir}
        return {k: v for k, v in values.items() if v is not None}

    def section(self, name: str) -> Dict[str, Any]:
        """[defaults] merged under [name], then the global overrides."""
        merged = dict(self.config.get("defaults", {}))
        merged.update(self.config.get(name, {}))
        merged.update(self.overrides())
        return merged

    def experiment(self, study: str, flags: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
        return ExperimentConfig.from_dict(study, self.config, {**self.overrides(), **(flags or {})})

    @property
    def output_dir(self) -> str:
        return self.section("defaults").get("out_dir", DEFAULT_OUT_DIR)

    @contextmanager
    def executor(self, threads: Optional[int] = None) -> Iterator[Optional[ThreadPoolExecutor]]:
        """Thread pool for threads > 1, otherwise None (serial map)."""
        threads = threads or self.threads or 1
        if threads <= 1:
            yield None
            return
        with ThreadPoolExecutor(max_workers=threads) as pool:
            yield pool

    def add_record(self, record: ResultRecord) -> None:
        self.records.append(record)
        if not record.passed:
            self.fail(f"{record.study}: failed checks {', '.join(record.failed_checks())}")

    def fail(self, message: str) -> None:
        logger.debug("session failure: %s", message)
        self.failures.append(message)

    @property
    def ok(self) -> bool:
        return not self.failures

    @property
    def exit_code(self) -> int:
        return 0 if self.ok else 1
