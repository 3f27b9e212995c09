"""Seeded Monte-Carlo oracle.

Drops are grouped into fixed-size blocks. Block ``b`` draws from a Philox
stream keyed by ``(seed, b)``, so the sample sequence depends only on the
seed and the drop count, never on how many workers run the blocks.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from ._jit import thread_cap
from .channel import CellScenario, FadingModel, RayleighPowerFading, UserLocation
from .schedulers import Greedy, ProportionalFair, RoundRobin, SchedulerSpec

BLOCK = 1 << 14
_MODES = {RoundRobin: _kernels.MODE_RR, Greedy: _kernels.MODE_GREEDY,
          ProportionalFair: _kernels.MODE_PF}


@dataclass(frozen=True)
class SimConfig:
    seed: int
    num_drops: int
    scenario: CellScenario
    fading: FadingModel = field(default_factory=RayleighPowerFading)
    scheduler: SchedulerSpec = field(default_factory=RoundRobin)

    def __post_init__(self):
        if self.num_drops < 1:
            raise ValueError("num_drops must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


def block_rng(seed: int, block: int) -> np.random.Generator:
    """Independent counter-based stream for one block of drops."""
    key = np.array([seed, block], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _run_blocks(cfg: SimConfig, work):
    sizes = [min(BLOCK, cfg.num_drops - s) for s in range(0, cfg.num_drops, BLOCK)]
    jobs = list(enumerate(sizes))
    workers = min(thread_cap(), len(jobs))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda job: work(block_rng(cfg.seed, job[0]), job[1]), jobs))
    else:
        parts = [work(block_rng(cfg.seed, b), n) for b, n in jobs]
    return [np.concatenate(col) for col in zip(*parts)]


def simulate_single_cell(cfg: SimConfig):
    """Rate samples (nats/s/Hz) and served distances (m), one per drop.

    Each drop places N users uniformly over the disc, draws iid fading and
    serves one user: uniformly at random (round-robin), the largest SNR
    (greedy) or the largest fading normalised by its mean (proportional
    fair).
    """
    sc = cfg.scenario
    mode = _MODES.get(type(cfg.scheduler))
    if mode is None:
        raise TypeError(f"single-cell simulation does not support {cfg.scheduler!r}")
    n_users, rho, alpha, xp = sc.num_users, sc.radius, sc.alpha, sc.snr_composite
    mean = cfg.fading.mean

    def work(rng, n):
        delta = rho * np.sqrt(rng.random((n, n_users)))
        fading = cfg.fading.sample(rng, (n, n_users)) / mean
        pick = rng.integers(0, n_users, size=n)
        return _kernels.select_served(delta, fading, xp * mean, alpha, mode, pick)

    rate, dist = _run_blocks(cfg, work)
    return rate, dist


def _interference_means(sc: CellScenario, u, v):
    pos = sc.interferer_positions()
    d = np.hypot(u[:, None] - pos[None, :, 0], v[:, None] - pos[None, :, 1])
    xi = np.array([p.xi for p in sc.interferers])
    alpha = np.array([p.exponent for p in sc.interferers])
    return xi[None, :] * d ** (-alpha[None, :])


def simulate_multi_cell(cfg: SimConfig, loc: Optional[UserLocation] = None, density=None):
    """SINR, total interference (W) and rate samples.

    With ``loc`` the user sits at a fixed location. Otherwise ``density`` (a
    :class:`~cellrate.multicell.SchedulerDensity`) supplies the distance of
    the scheduled user and the angle is uniform.
    """
    if (loc is None) == (density is None):
        raise ValueError("give exactly one of loc or density")
    sc = cfg.scenario
    xi, alpha = sc.serving.xi, sc.alpha

    def work(rng, n):
        if loc is not None:
            u = np.full(n, loc.u)
            v = np.full(n, loc.v)
        else:
            d = density.sample(rng, n)
            th = rng.uniform(0.0, 2.0 * np.pi, n)
            u, v = d * np.cos(th), d * np.sin(th)
        sig = xi * np.hypot(u, v) ** (-alpha)
        imeans = _interference_means(sc, u, v)
        fading = cfg.fading.sample(rng, (n, 7))
        sinr, tot = _kernels.sinr_draws(sig, imeans, np.ascontiguousarray(fading), sc.noise_power)
        return sinr, tot, np.log1p(sinr)

    return tuple(_run_blocks(cfg, work))
