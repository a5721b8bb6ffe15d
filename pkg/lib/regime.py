#!/usr/bin/env python3
# lib/regime.py - Scaling regime tags shared by the capacity and effective layers

import math
from dataclasses import dataclass
from typing import Optional, Union

KINDS = ("zero", "finite", "infinite")


@dataclass(frozen=True)
class H0Tag:
    """Limit h0 of the rescaled slab height delta/a: zero, a finite value, or infinite."""

    kind: str
    h0: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"Unknown regime kind: {self.kind}")
        if self.kind == "finite":
            if self.h0 is None or not math.isfinite(self.h0) or self.h0 <= 0:
                raise ValueError("finite regime needs a positive h0")
        elif self.h0 is not None:
            raise ValueError(f"regime '{self.kind}' takes no h0 value")

    @property
    def is_infinite(self) -> bool:
        return self.kind == "infinite"

    @classmethod
    def parse(cls, value: Union[str, float, "H0Tag"]) -> "H0Tag":
        """Accept 'inf', 'infinite', 'zero', '0', 'finite:1.5' or a bare number."""
        if isinstance(value, H0Tag):
            return value
        if isinstance(value, (int, float)):
            if value == 0:
                return cls("zero")
            if math.isinf(value):
                return cls("infinite")
            return cls("finite", float(value))

        text = str(value).strip().lower()
        if text in ("inf", "infinite", "infinity", "∞"):
            return cls("infinite")
        if text in ("0", "zero"):
            return cls("zero")
        if text.startswith("finite"):
            _, _, number = text.partition(":")
            return cls("finite", float(number or 1.0))
        try:
            return cls.parse(float(text))
        except ValueError:
            raise ValueError(f"Cannot parse regime tag: {value}") from None

    def __str__(self) -> str:
        if self.kind == "finite":
            return f"finite:{self.h0:g}"
        return self.kind


INFINITE = H0Tag("infinite")
ZERO = H0Tag("zero")
