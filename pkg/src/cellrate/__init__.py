"""Downlink cellular rate and intercell-interference distributions."""

from .channel import (CellScenario, FadingModel, NakagamiPowerFading, PathlossParams,
                      RayleighPowerFading, UserLocation)
from .schedulers import Greedy, ProportionalFair, RoundRobin, TruncatedGaussian

__version__ = "0.1.0"

__all__ = [
    "CellScenario", "FadingModel", "NakagamiPowerFading", "PathlossParams",
    "RayleighPowerFading", "UserLocation", "Greedy", "ProportionalFair",
    "RoundRobin", "TruncatedGaussian",
]
