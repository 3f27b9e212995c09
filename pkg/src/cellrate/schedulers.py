"""Scheduler descriptors."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union


@dataclass(frozen=True)
class RoundRobin:
    name = "rr"


@dataclass(frozen=True)
class Greedy:
    name = "greedy"


@dataclass(frozen=True)
class ProportionalFair:
    name = "pf"


@dataclass(frozen=True)
class TruncatedGaussian:
    """Radial selection density with spread ``sigma`` (meters)."""

    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    @property
    def name(self) -> str:
        return "rr" if math.isinf(self.sigma) else f"tg{self.sigma:g}"


SchedulerSpec = Union[RoundRobin, Greedy, ProportionalFair, TruncatedGaussian]

_NAMES = {"rr": RoundRobin, "round-robin": RoundRobin, "greedy": Greedy,
          "pf": ProportionalFair, "proportional-fair": ProportionalFair}


def parse_scheduler(text: str) -> SchedulerSpec:
    """``rr``, ``greedy``, ``pf`` or ``tg:<sigma>``."""
    key = text.strip().lower()
    if key in _NAMES:
        return _NAMES[key]()
    if key.startswith("tg:"):
        return TruncatedGaussian(float(key[3:]))
    raise ValueError(f"unknown scheduler {text!r}")
