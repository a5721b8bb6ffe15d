#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""Dots spinner with an optional step counter for long-running studies."""

import itertools
import sys
import threading
from typing import Optional

DOTS_FRAMES = ["⠋", "⠙", "⠹", "⠸", "⠼", "⠴", "⠦", "⠧", "⠇", "⠏"]


class DotsSpinner:
    """Non-blocking dots spinner next to a status message, e.g. 'Running gamma [3/12] ⠹'."""

    def __init__(self, message: str, total: Optional[int] = None, interval: float = 0.1, enabled: bool = True):
        self.message = message.rstrip()
        self.total = total
        self.interval = interval
        self.enabled = enabled and getattr(sys.stdout, "isatty", lambda: False)()
        self.step = 0
        self._lock = threading.Lock()
        self._stop_event = threading.Event()
        self._thread: Optional[threading.Thread] = None
        self._current_frame = DOTS_FRAMES[0]
        self._last_output_len = 0
        self._stopped = False

    def advance(self, count: int = 1) -> None:
        """Count finished steps; safe to call from worker threads."""
        with self._lock:
            self.step += count

    def _label(self) -> str:
        if self.total:
            return f"{self.message} [{self.step}/{self.total}]"
        return self.message

    def start(self) -> "DotsSpinner":
        if self.enabled and self._thread is None:
            self._thread = threading.Thread(target=self._spin, daemon=True)
            self._thread.start()
        return self

    def _spin(self) -> None:
        wrote_once = False
        for frame in itertools.cycle(DOTS_FRAMES):
            if self._stop_event.is_set():
                break
            self._current_frame = frame
            output = f"{self._label()} {frame}"
            padding = " " * max(self._last_output_len - len(output), 0)
            self._last_output_len = len(output)
            prefix = "\r" if wrote_once else ""
            sys.stdout.write(f"{prefix}{output}{padding}")
            sys.stdout.flush()
            wrote_once = True
            if self._stop_event.wait(self.interval):
                break

    def stop(self, success: bool = True) -> None:
        """Stop the animation and print the final status line."""
        if self._stopped:
            return
        self._stopped = True
        if self._thread and self._thread.is_alive():
            self._stop_event.set()
            self._thread.join()
        if not self.enabled:
            return
        final = f"{self._label()} {self._current_frame}: {'done.' if success else 'failed.'}"
        padding = " " * max(self._last_output_len - len(final), 0)
        sys.stdout.write(f"\r{final}{padding}\n")
        sys.stdout.flush()

    def __enter__(self) -> "DotsSpinner":
        return self.start()

    def __exit__(self, exc_type, exc_val, exc_tb) -> None:
        self.stop(success=exc_type is None)
