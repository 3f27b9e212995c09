"""Scenario files: INI-style sections with a fixed key set.

Unknown sections or keys are errors. Per-interferer overrides use keys such
as ``power_w_3`` or ``exponent_6`` in ``[interferers]``.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Union

import numpy as np

from .channel import (NUM_INTERFERERS, CellScenario, FadingModel, NakagamiPowerFading,
                      PathlossParams, RayleighPowerFading)
from .errors import ScenarioError

SCHEMA = {
    "cell": {"radius_m": float, "num_users": int, "min_distance_m": float},
    "pathloss": {"exponent": float, "constant_db": float, "reference_m": float, "power_w": float},
    "interferers": {"count": int},
    "noise": {"power_w": float},
    "fading": {"model": str, "mean_power": float, "m": float},
    "grid": {"rate_min": float, "rate_max": float, "points": int},
    "mc": {"seed": int, "drops": int},
}
_OVERRIDABLE = ("exponent", "constant_db", "reference_m", "power_w")


@dataclass(frozen=True)
class ScenarioFile:
    scenario: CellScenario
    fading: FadingModel
    rate_grid: np.ndarray
    seed: int = 1
    drops: int = 1_000_000


def bundled_path(name: str = "paper.scenario") -> Path:
    return Path(str(resources.files("cellrate") / "data" / name))


def _convert(section, key, raw, typ):
    try:
        return typ(raw.strip())
    except ValueError:
        raise ScenarioError(f"[{section}] {key}: cannot parse {raw!r} as {typ.__name__}") from None


def parse_scenario(text: str) -> ScenarioFile:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ScenarioError(f"malformed scenario: {exc}") from None
    values, overrides = {}, {}
    for section in cp.sections():
        if section not in SCHEMA:
            raise ScenarioError(f"unknown section [{section}]")
        for key, raw in cp.items(section):
            if section == "interferers" and key != "count":
                name, _, idx = key.rpartition("_")
                if name not in _OVERRIDABLE or not idx.isdigit() or not 1 <= int(idx) <= NUM_INTERFERERS:
                    raise ScenarioError(f"[interferers] unknown key {key!r}")
                overrides.setdefault(int(idx), {})[name] = _convert(section, key, raw, float)
                continue
            if key not in SCHEMA[section]:
                raise ScenarioError(f"[{section}] unknown key {key!r}")
            values[(section, key)] = _convert(section, key, raw, SCHEMA[section][key])

    def get(section, key, default):
        return values.get((section, key), default)

    count = get("interferers", "count", NUM_INTERFERERS)
    if count != NUM_INTERFERERS:
        raise ScenarioError(f"[interferers] count must be {NUM_INTERFERERS}, got {count}")
    serving = PathlossParams(
        exponent=get("pathloss", "exponent", 2.0),
        constant_db=get("pathloss", "constant_db", -80.0),
        reference_m=get("pathloss", "reference_m", 1.0),
        power_w=get("pathloss", "power_w", 1.0),
    )
    interferers = tuple(replace(serving, **overrides.get(j, {})) for j in range(1, NUM_INTERFERERS + 1))
    scenario = CellScenario(
        radius=get("cell", "radius_m", 1000.0),
        num_users=get("cell", "num_users", 100),
        serving=serving,
        interferers=interferers,
        noise_power=get("noise", "power_w", 1e-14),
        user_min_distance=get("cell", "min_distance_m", serving.reference_m),
    )
    model = get("fading", "model", "rayleigh").lower()
    mean = get("fading", "mean_power", 1.0)
    if model == "rayleigh":
        fading = RayleighPowerFading(mean)
    elif model == "nakagami":
        fading = NakagamiPowerFading(get("fading", "m", 2.0), mean)
    else:
        raise ScenarioError(f"[fading] unknown model {model!r}")
    lo, hi, n = get("grid", "rate_min", 0.0), get("grid", "rate_max", 20.0), get("grid", "points", 801)
    if not (0 <= lo < hi and n >= 2):
        raise ScenarioError("[grid] need 0 <= rate_min < rate_max and points >= 2")
    seed, drops = get("mc", "seed", 1), get("mc", "drops", 1_000_000)
    if drops < 1 or not 0 <= seed < 2**64:
        raise ScenarioError("[mc] need drops >= 1 and a 64-bit unsigned seed")
    return ScenarioFile(scenario, fading, np.linspace(lo, hi, n), seed, drops)


def load_scenario(path: Union[str, Path]) -> ScenarioFile:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc.strerror}") from None
    return parse_scenario(text)
