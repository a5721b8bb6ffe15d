#!/usr/bin/env python3
# lib/errors.py - Exception hierarchy for sievelab

from typing import List, Optional, Sequence, Tuple


class SieveLabError(Exception):
    """Base class for all errors raised by sievelab itself."""


class ConfigError(SieveLabError):
    """Invalid or inconsistent experiment configuration."""


class SolverError(SieveLabError):
    """A linear solve failed or the system was singular."""

    def __init__(self, message: str, residual: Optional[float] = None, iterations: Optional[int] = None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class ExtrapolationError(SieveLabError):
    """Degenerate least-squares fit while extrapolating a sequence."""


class RegimeError(SieveLabError):
    """A quantity was requested in a scaling regime where it is undefined."""


class UnresolvedHolesError(SieveLabError):
    """The thin-domain grid does not resolve some contact regions."""

    def __init__(self, regions: Sequence[Tuple[float, float, float]]):
        self.regions: List[Tuple[float, float, float]] = list(regions)
        preview = ", ".join(f"({x:.4g}, {y:.4g}; r={r:.3g})" for x, y, r in self.regions[:5])
        more = f" and {len(self.regions) - 5} more" if len(self.regions) > 5 else ""
        super().__init__(f"{len(self.regions)} contact region(s) not resolved by the grid: {preview}{more}")


class BudgetExceededError(SieveLabError):
    """A discretization would exceed the configured number of unknowns."""

    def __init__(self, unknowns: int, budget: int):
        self.unknowns = unknowns
        self.budget = budget
        super().__init__(f"grid needs {unknowns} unknowns, budget is {budget}")
