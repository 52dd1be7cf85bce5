"""Config-driven sweeps, secure-distance search and result files."""

from __future__ import annotations

import csv
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import IO, Any, Optional

import numpy as np

from .channel import InvalidGeometryError, PassivityError, ThzLink
from .gaussian import UnphysicalStateError
from .noise import NoiseVariances, vacuum_variance
from .pso import SwarmConfig, decode_position, optimize, skr_objective, skr_search_space
from .skr_global import skr_global
from .skr_localized import SCENARIOS, DilatedLink, SplitterSettings, effective_signal_channel, skr_localized

log = logging.getLogger(__name__)

ALL_SCENARIOS = SCENARIOS + ("global",)
SWEEP_VARIABLES = ("distance_m", "n_antennas", "ris_elements", "detector_noise")
PHASE_SOURCES = ("random", "zero", "optimized")
CSV_HEADER = (
    "sweep_var", "sweep_value", "scenario", "phase_source",
    "mi_bits", "holevo_bits", "skr_raw", "skr_clamped", "wall_ms", "error",
)
NUMERIC_ERRORS = (PassivityError, UnphysicalStateError, np.linalg.LinAlgError)


class ConfigError(ValueError):
    pass


class BracketError(ValueError):
    pass


@dataclass(frozen=True)
class SystemConfig:
    n_tx: int = 8
    n_rx: int = 8
    ris_x: int = 8
    ris_y: int = 8
    freq_thz: float = 15.0
    spacing_wavelengths: float = 0.5
    ris_spacing_wavelengths: float = 0.5
    ris_elevation_rad: float = math.pi / 4
    antenna_gain_dbi: float = 30.0
    absorption_db_per_km: float = 50.0
    temperature_k: float = 296.0
    ris_tx_fraction: float = 0.3
    ris_rx_fraction: float = 0.8
    angle_seed: int = 7
    distance_m: float = 5.0
    eta_a: float = 0.5
    eta_b: float = 0.5

    def link(self) -> ThzLink:
        return ThzLink(
            n_tx=self.n_tx, n_rx=self.n_rx, ris_x=self.ris_x, ris_y=self.ris_y,
            carrier_frequency=self.freq_thz * 1e12,
            spacing_wavelengths=self.spacing_wavelengths,
            ris_spacing_wavelengths=self.ris_spacing_wavelengths,
            ris_elevation=self.ris_elevation_rad,
            antenna_gain_dbi=self.antenna_gain_dbi,
            absorption_db_per_km=self.absorption_db_per_km,
            ris_tx_fraction=self.ris_tx_fraction,
            ris_rx_fraction=self.ris_rx_fraction,
            angle_seed=self.angle_seed,
        )


@dataclass(frozen=True)
class NoiseConfig:
    signal_variance: float = 1000.0
    detector_noise: float = 0.01
    splitter_vacuum: float = 1.0
    eve_d: float = 1.0
    eve_t: float = 1.0
    eve_r: float = 1.0
    eve_global: float = 1.0


@dataclass(frozen=True)
class SweepConfig:
    variable: str = "distance_m"
    values: tuple = (1.0, 2.0, 5.0, 10.0, 20.0)


@dataclass(frozen=True)
class PhaseConfig:
    source: str = "random"
    seed: int = 0


@dataclass(frozen=True)
class PsoConfig:
    particle_count: int = 30
    iteration_count: int = 100
    inertia: float = 0.72
    cognitive_weight: float = 1.49
    social_weight: float = 1.49
    velocity_clamp: float = 0.5
    seed: int = 0

    def swarm(self) -> SwarmConfig:
        return SwarmConfig(**asdict(self))


@dataclass(frozen=True)
class SecureDistanceConfig:
    threshold_bits: float = 1e-3
    min_m: float = 0.5
    max_m: float = 1000.0
    tolerance_m: float = 0.1
    check_points: int = 16


@dataclass(frozen=True)
class OutputConfig:
    path: Optional[str] = None
    format: str = "csv"


@dataclass(frozen=True)
class ExperimentConfig:
    system: SystemConfig = SystemConfig()
    noise: NoiseConfig = NoiseConfig()
    sweep: SweepConfig = SweepConfig()
    scenarios: tuple = ALL_SCENARIOS
    phases: PhaseConfig = PhaseConfig()
    pso: PsoConfig = PsoConfig()
    secure_distance: SecureDistanceConfig = SecureDistanceConfig()
    output: OutputConfig = OutputConfig()

    @property
    def vacuum_variance(self) -> float:
        return vacuum_variance(self.system.freq_thz * 1e12, self.system.temperature_k)

    def noise_variances(self) -> NoiseVariances:
        n = self.noise
        return NoiseVariances(
            signal_variance=n.signal_variance,
            vacuum_variance=self.vacuum_variance,
            splitter_vacuum=n.splitter_vacuum,
            eve_segment={"d": n.eve_d, "t": n.eve_t, "r": n.eve_r},
            eve_global=n.eve_global,
            detector_noise=n.detector_noise,
            temperature=self.system.temperature_k,
        )

    def splitters(self) -> SplitterSettings:
        return SplitterSettings(self.system.eta_a, self.system.eta_b)

    def resolved(self) -> dict:
        """Full config with defaults filled in and derived quantities attached."""
        d = to_dict(self)
        d["derived"] = {
            "vacuum_variance": self.vacuum_variance,
            "thermal_occupation": (self.vacuum_variance - 1) / 2,
            "alice_variance": self.noise.signal_variance + self.vacuum_variance,
            "ris_elements": self.system.ris_x * self.system.ris_y,
        }
        return d


# ---------------------------------------------------------------- parsing

_SECTIONS = {
    "system": SystemConfig,
    "noise": NoiseConfig,
    "sweep": SweepConfig,
    "phases": PhaseConfig,
    "pso": PsoConfig,
    "secure_distance": SecureDistanceConfig,
    "output": OutputConfig,
}


def _section(name: str, cls, raw: Any):
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        raise ConfigError(f"{name}: expected an object")
    known = {f.name: f for f in fields(cls)}
    unknown = set(raw) - set(known)
    if unknown:
        raise ConfigError(f"{name}.{sorted(unknown)[0]}: unknown key")
    kwargs = {}
    for key, value in raw.items():
        default = getattr(cls(), key)
        path = f"{name}.{key}"
        try:
            if isinstance(default, bool):
                value = bool(value)
            elif isinstance(default, int):
                if float(value) != int(value):
                    raise ValueError
                value = int(value)
            elif isinstance(default, float):
                value = float(value)
            elif isinstance(default, tuple):
                value = tuple(float(v) for v in value)
            elif default is None or isinstance(default, str):
                value = None if value is None else str(value)
        except (TypeError, ValueError):
            raise ConfigError(f"{path}: cannot interpret {value!r}") from None
        kwargs[key] = value
    return cls(**kwargs)


def from_dict(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")
    unknown = set(raw) - set(_SECTIONS) - {"scenarios"}
    if unknown:
        raise ConfigError(f"{sorted(unknown)[0]}: unknown section")
    parts = {name: _section(name, cls, raw.get(name)) for name, cls in _SECTIONS.items()}
    scenarios = tuple(raw.get("scenarios", ALL_SCENARIOS))
    cfg = ExperimentConfig(scenarios=scenarios, **parts)
    validate(cfg)
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return from_dict(raw)


def to_dict(cfg: ExperimentConfig) -> dict:
    d = asdict(cfg)
    d["sweep"]["values"] = list(cfg.sweep.values)
    d["scenarios"] = list(cfg.scenarios)
    return d


def validate(cfg: ExperimentConfig) -> None:
    s = cfg.system
    for key in ("n_tx", "n_rx", "ris_x", "ris_y"):
        if getattr(s, key) < 1:
            raise ConfigError(f"system.{key}: must be >= 1")
    for key in ("freq_thz", "spacing_wavelengths", "ris_spacing_wavelengths", "temperature_k", "distance_m"):
        if not getattr(s, key) > 0:
            raise ConfigError(f"system.{key}: must be positive")
    for key in ("eta_a", "eta_b"):
        if not 0 <= getattr(s, key) <= 1:
            raise ConfigError(f"system.{key}: must lie in [0, 1]")
    if s.absorption_db_per_km < 0:
        raise ConfigError("system.absorption_db_per_km: must be >= 0")
    n = cfg.noise
    if n.signal_variance < 0:
        raise ConfigError("noise.signal_variance: must be >= 0")
    if n.detector_noise < 0:
        raise ConfigError("noise.detector_noise: must be >= 0")
    for key in ("splitter_vacuum", "eve_d", "eve_t", "eve_r", "eve_global"):
        if getattr(n, key) < 1:
            raise ConfigError(f"noise.{key}: variance must be >= 1")
    sw = cfg.sweep
    if sw.variable not in SWEEP_VARIABLES:
        raise ConfigError(f"sweep.variable: must be one of {SWEEP_VARIABLES}")
    if len(sw.values) == 0:
        raise ConfigError("sweep.values: grid must be non-empty")
    if any(b <= a for a, b in zip(sw.values, sw.values[1:])):
        raise ConfigError("sweep.values: grid must be strictly increasing")
    if sw.variable in ("n_antennas", "ris_elements"):
        for v in sw.values:
            if v != int(v) or v < 1:
                raise ConfigError(f"sweep.values: {sw.variable} needs positive integers")
            if sw.variable == "ris_elements" and math.isqrt(int(v)) ** 2 != int(v):
                raise ConfigError(f"sweep.values: ris_elements {int(v)} is not a square number")
    if sw.variable == "distance_m" and sw.values[0] <= 0:
        raise ConfigError("sweep.values: distances must be positive")
    if sw.variable == "detector_noise" and sw.values[0] < 0:
        raise ConfigError("sweep.values: detector noise must be >= 0")
    if not cfg.scenarios:
        raise ConfigError("scenarios: list must be non-empty")
    for name in cfg.scenarios:
        if name not in ALL_SCENARIOS:
            raise ConfigError(f"scenarios: unknown scenario {name!r}")
    if cfg.phases.source not in PHASE_SOURCES:
        raise ConfigError(f"phases.source: must be one of {PHASE_SOURCES}")
    try:
        cfg.pso.swarm()
    except ValueError as exc:
        raise ConfigError(f"pso: {exc}") from None
    sd = cfg.secure_distance
    if not 0 < sd.min_m < sd.max_m:
        raise ConfigError("secure_distance: need 0 < min_m < max_m")
    if not sd.tolerance_m > 0 or sd.check_points < 2:
        raise ConfigError("secure_distance: tolerance_m must be positive and check_points >= 2")
    if cfg.output.format not in ("csv", "json"):
        raise ConfigError("output.format: must be 'csv' or 'json'")


def with_sweep_value(cfg: ExperimentConfig, value: float) -> ExperimentConfig:
    """Config with the sweep variable pinned to ``value``."""
    var = cfg.sweep.variable
    if var == "distance_m":
        return replace(cfg, system=replace(cfg.system, distance_m=float(value)))
    if var == "n_antennas":
        return replace(cfg, system=replace(cfg.system, n_tx=int(value), n_rx=int(value)))
    if var == "ris_elements":
        side = math.isqrt(int(value))
        return replace(cfg, system=replace(cfg.system, ris_x=side, ris_y=side))
    return replace(cfg, noise=replace(cfg.noise, detector_noise=float(value)))


# ---------------------------------------------------------------- evaluation

@dataclass
class SweepRow:
    sweep_var: str
    sweep_value: float
    scenario: str
    phase_source: str
    mutual_information: float = math.nan
    holevo: float = math.nan
    skr_raw: float = math.nan
    wall_time: float = 0.0
    error: str = ""
    position: Optional[list] = field(default=None, repr=False)

    @property
    def skr_clamped(self) -> float:
        return max(0.0, self.skr_raw) if not math.isnan(self.skr_raw) else math.nan


def random_phases(cfg: ExperimentConfig) -> np.ndarray:
    k = cfg.system.ris_x * cfg.system.ris_y
    if cfg.phases.source == "zero":
        return np.zeros(k)
    return np.random.default_rng(cfg.phases.seed).uniform(-np.pi, np.pi, k)


def scenario_skr(scenario: str, link: DilatedLink, phases, splitters, noise):
    if scenario == "global":
        return skr_global(effective_signal_channel(link, phases, splitters), noise)
    return skr_localized(scenario, link, phases, splitters, noise)


def evaluate(cfg: ExperimentConfig, scenario: str, distance: float | None = None):
    """SKR breakdown and position for one scenario at the config's operating point."""
    distance = cfg.system.distance_m if distance is None else distance
    link = DilatedLink(cfg.system.link().segments(distance))
    noise = cfg.noise_variances()
    if cfg.phases.source == "optimized":
        k = cfg.system.ris_x * cfg.system.ris_y
        result = optimize(skr_objective(scenario, link, noise), skr_search_space(k), cfg.pso.swarm())
        phases, splitters = decode_position(result.best_position)
        position = result.best_position
    else:
        phases, splitters = random_phases(cfg), cfg.splitters()
        position = np.concatenate([phases, [splitters.eta_a, splitters.eta_b]])
    return scenario_skr(scenario, link, phases, splitters, noise), position


def _point_rows(cfg: ExperimentConfig, value: float) -> list[SweepRow]:
    point = with_sweep_value(cfg, value)
    rows = []
    for scenario in cfg.scenarios:
        row = SweepRow(cfg.sweep.variable, float(value), scenario, cfg.phases.source)
        t0 = time.perf_counter()
        try:
            res, position = evaluate(point, scenario)
            row.mutual_information, row.holevo, row.skr_raw = res.mutual_information, res.holevo, res.skr
            row.position = [float(p) for p in position]
        except NUMERIC_ERRORS + (InvalidGeometryError,) as exc:
            row.error = f"{type(exc).__name__}: {exc}"
            log.warning("%s=%s scenario %s failed: %s", cfg.sweep.variable, value, scenario, exc)
        row.wall_time = time.perf_counter() - t0
        rows.append(row)
    return rows


def run_sweep(cfg: ExperimentConfig, jobs: int = 1) -> list[SweepRow]:
    """Rows ordered by grid index, then scenario order, whatever ``jobs`` is."""
    values = list(cfg.sweep.values)
    if jobs > 1 and len(values) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_point_rows, [cfg] * len(values), values))
    else:
        chunks = [_point_rows(cfg, v) for v in values]
    return [row for chunk in chunks for row in chunk]


def max_secure_distance(cfg: ExperimentConfig, scenario: str, threshold: float | None = None) -> float:
    """Largest distance (m) whose SKR stays at or above ``threshold`` bits/use.

    Bisection on [min_m, max_m]; the returned value is the last distance
    known to meet the threshold, within ``tolerance_m`` of the crossing.
    Returns 0 when even ``min_m`` falls short.
    """
    sd = cfg.secure_distance
    thr = sd.threshold_bits if threshold is None else threshold

    def skr(d: float) -> float:
        return evaluate(cfg, scenario, d)[0].skr

    grid = np.geomspace(sd.min_m, sd.max_m, sd.check_points)
    values = [skr(d) for d in grid]
    for (d0, s0), (d1, s1) in zip(zip(grid, values), zip(grid[1:], values[1:])):
        if s1 > s0 + 1e-12 * max(1.0, abs(s0)):
            raise BracketError(
                f"SKR of scenario {scenario} increases between {d0:.4g} m and {d1:.4g} m "
                f"({s0:.6g} -> {s1:.6g}); bisection needs a decreasing curve"
            )
    if values[0] < thr:
        return 0.0
    if values[-1] >= thr:
        raise BracketError(
            f"SKR at max_m={sd.max_m} m is still {values[-1]:.4g} >= threshold {thr}; widen the bracket"
        )
    idx = int(np.argmax(np.asarray(values) < thr))
    lo, hi = float(grid[idx - 1]), float(grid[idx])
    while hi - lo > sd.tolerance_m:
        mid = 0.5 * (lo + hi)
        if skr(mid) >= thr:
            lo = mid
        else:
            hi = mid
    return lo


@dataclass(frozen=True)
class SecureDistanceRow:
    sweep_var: str
    sweep_value: float
    scenario: str
    phase_source: str
    threshold_bits: float
    distance_m: float


def _secure_row(cfg: ExperimentConfig, value: float, scenario: str) -> SecureDistanceRow:
    point = with_sweep_value(cfg, value)
    d = max_secure_distance(point, scenario)
    return SecureDistanceRow(cfg.sweep.variable, float(value), scenario, cfg.phases.source,
                             cfg.secure_distance.threshold_bits, d)


def secure_distance_table(cfg: ExperimentConfig, jobs: int = 1) -> list[SecureDistanceRow]:
    """Secure distance for every non-distance grid value and scenario.

    A distance sweep variable is meaningless here, so the grid collapses
    to the configured operating point.
    """
    values = [cfg.system.distance_m] if cfg.sweep.variable == "distance_m" else list(cfg.sweep.values)
    tasks = [(v, s) for v in values for s in cfg.scenarios]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_secure_row, [cfg] * len(tasks), *zip(*tasks)))
    return [_secure_row(cfg, v, s) for v, s in tasks]


# ---------------------------------------------------------------- output

def _fmt(x: float) -> str:
    return "" if isinstance(x, float) and math.isnan(x) else repr(float(x))


def write_results(rows: list[SweepRow], fh: IO[str], fmt: str = "csv",
                  cfg: Optional[ExperimentConfig] = None) -> None:
    if fmt == "csv":
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in rows:
            w.writerow([
                r.sweep_var, _fmt(r.sweep_value), r.scenario, r.phase_source,
                _fmt(r.mutual_information), _fmt(r.holevo), _fmt(r.skr_raw),
                _fmt(r.skr_clamped), f"{r.wall_time * 1e3:.3f}", r.error,
            ])
    elif fmt == "json":
        payload = {
            "config": cfg.resolved() if cfg is not None else None,
            "rows": [row_to_dict(r) for r in rows],
        }
        fh.write(json.dumps(payload, indent=2, allow_nan=False, default=_json_default) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")


def emit_results(rows: list[SweepRow], path: str | Path, fmt: str = "csv",
                 cfg: Optional[ExperimentConfig] = None) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        write_results(rows, fh, fmt, cfg)
    return path


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def row_to_dict(r: SweepRow) -> dict:
    def num(x):
        return None if math.isnan(x) else float(x)

    return {
        "sweep_var": r.sweep_var,
        "sweep_value": r.sweep_value,
        "scenario": r.scenario,
        "phase_source": r.phase_source,
        "mi_bits": num(r.mutual_information),
        "holevo_bits": num(r.holevo),
        "skr_raw": num(r.skr_raw),
        "skr_clamped": num(r.skr_clamped),
        "wall_ms": r.wall_time * 1e3,
        "error": r.error,
        "position": r.position,
    }


def read_csv(path: str | Path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))
