"""Box-constrained particle swarm maximiser and the SKR fitness wrapper."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from .channel import LinkChannels
from .noise import NoiseVariances
from .skr_global import skr_global
from .skr_localized import (
    SCENARIOS,
    DilatedLink,
    SplitterSettings,
    effective_signal_channel,
    skr_localized,
)

__all__ = [
    "SwarmConfig",
    "SearchSpace",
    "OptimizationResult",
    "optimize",
    "skr_search_space",
    "decode_position",
    "skr_objective",
]

log = logging.getLogger(__name__)

Objective = Callable[[np.ndarray], float]


@dataclass(frozen=True)
class SwarmConfig:
    particle_count: int = 30
    iteration_count: int = 100
    inertia: float = 0.72
    cognitive_weight: float = 1.49
    social_weight: float = 1.49
    velocity_clamp: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.particle_count < 1 or self.iteration_count < 1:
            raise ValueError("particle_count and iteration_count must be >= 1")
        if min(self.inertia, self.cognitive_weight, self.social_weight) < 0:
            raise ValueError("PSO weights must be non-negative")
        if not 0 < self.velocity_clamp <= 1:
            raise ValueError("velocity_clamp must lie in (0, 1]")


@dataclass(frozen=True)
class SearchSpace:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("bounds must be 1-D arrays of equal length")
        if not np.all(lo < hi):
            raise ValueError("every lower bound must be below its upper bound")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dimension(self) -> int:
        return self.lower.size


@dataclass
class OptimizationResult:
    best_position: np.ndarray
    best_value: float
    history: list[float] = field(default_factory=list)
    evaluations: int = 0


def _safe(objective: Objective, x: np.ndarray) -> float:
    try:
        v = float(objective(x))
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        log.debug("objective failed at %s: %s", x, exc)
        return -np.inf
    return v if np.isfinite(v) else -np.inf


def optimize(
    objective: Objective,
    space: SearchSpace,
    config: SwarmConfig = SwarmConfig(),
    mapper: Optional[Callable[[Callable, Iterable], Iterable]] = None,
) -> OptimizationResult:
    """Maximise ``objective`` over the box ``space``.

    ``mapper`` (e.g. ``executor.map``) may evaluate one iteration's
    particles concurrently; results are consumed in particle order so the
    outcome does not depend on it. Positions leaving the box are clipped
    and the offending velocity component is zeroed.
    """
    rng = np.random.default_rng(config.seed)
    lo, hi = space.lower, space.upper
    span = hi - lo
    vmax = config.velocity_clamp * span
    n, dim = config.particle_count, space.dimension
    mapper = mapper or map

    x = lo + rng.random((n, dim)) * span
    v = rng.uniform(-vmax, vmax, size=(n, dim))
    pbest = x.copy()
    pbest_val = np.full(n, -np.inf)
    gbest = x[0].copy()
    gbest_val = -np.inf
    history: list[float] = []
    evaluations = 0

    for _ in range(config.iteration_count):
        fitness = np.fromiter(mapper(lambda p: _safe(objective, p), list(x)), dtype=float, count=n)
        evaluations += n
        improved = fitness > pbest_val
        pbest[improved] = x[improved]
        pbest_val[improved] = fitness[improved]
        i = int(np.argmax(pbest_val))  # first maximum wins ties
        if pbest_val[i] > gbest_val:
            gbest_val = float(pbest_val[i])
            gbest = pbest[i].copy()
        history.append(gbest_val)

        r1 = rng.random((n, dim))
        r2 = rng.random((n, dim))
        v = (config.inertia * v
             + config.cognitive_weight * r1 * (pbest - x)
             + config.social_weight * r2 * (gbest - x))
        v = np.clip(v, -vmax, vmax)
        x = x + v
        out = (x < lo) | (x > hi)
        x = np.clip(x, lo, hi)
        v[out] = 0.0

    return OptimizationResult(gbest, gbest_val, history, evaluations)


def skr_search_space(ris_elements: int) -> SearchSpace:
    """K phases in [-pi, pi] followed by eta_a, eta_b in [0, 1]."""
    lower = np.concatenate([np.full(ris_elements, -np.pi), [0.0, 0.0]])
    upper = np.concatenate([np.full(ris_elements, np.pi), [1.0, 1.0]])
    return SearchSpace(lower, upper)


def decode_position(position: np.ndarray) -> tuple[np.ndarray, SplitterSettings]:
    position = np.asarray(position, dtype=float)
    eta_a, eta_b = np.clip(position[-2:], 0.0, 1.0)
    return position[:-2], SplitterSettings(float(eta_a), float(eta_b))


def skr_objective(scenario: str, channels: LinkChannels | DilatedLink, noise: NoiseVariances) -> Objective:
    """Raw SKR of ``scenario`` ('d', 't', 'r' or 'global') as a function of the position.

    Segment dilations are computed once here; only the phase- and
    splitter-dependent part is redone per evaluation.
    """
    if scenario not in SCENARIOS and scenario != "global":
        raise ValueError(f"unknown scenario {scenario!r}")
    link = channels if isinstance(channels, DilatedLink) else DilatedLink(channels)
    link.dilations  # noqa: B018  (warm the cache before any concurrent use)
    cache: dict[bytes, float] = {}

    def fitness(position: np.ndarray) -> float:
        key = np.asarray(position, dtype=float).tobytes()
        if key in cache:
            return cache[key]
        phases, splitters = decode_position(position)
        if scenario == "global":
            value = skr_global(effective_signal_channel(link, phases, splitters), noise).skr
        else:
            value = skr_localized(scenario, link, phases, splitters, noise).skr
        if len(cache) < 4096:
            cache[key] = value
        return value

    return fitness
