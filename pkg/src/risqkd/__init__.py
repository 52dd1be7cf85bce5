"""Secret-key-rate simulation for RIS-assisted terahertz MIMO CV-QKD links."""

from .channel import LinkChannels, PassivityError, ThzLink, compose_effective
from .experiment import ExperimentConfig, load_config, max_secure_distance, run_sweep
from .noise import NoiseVariances
from .pso import SwarmConfig, optimize
from .skr_global import skr_global
from .skr_localized import DilatedLink, SplitterSettings, skr_localized

__all__ = [
    "DilatedLink",
    "ExperimentConfig",
    "LinkChannels",
    "NoiseVariances",
    "PassivityError",
    "SplitterSettings",
    "SwarmConfig",
    "ThzLink",
    "compose_effective",
    "load_config",
    "max_secure_distance",
    "optimize",
    "run_sweep",
    "skr_global",
    "skr_localized",
]
