"""Synthetic sinc / cosine regression data with heteroscedastic noise."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset

# noise type -> (distribution, scale): normal uses the std dev, uniform the half-width
NOISE_TYPES = {
    1: ("normal", 0.15),
    2: ("uniform", 0.25),
    3: ("normal", 0.02),
    4: ("uniform", 0.02),
    5: ("normal", 0.12),
    6: ("uniform", 0.2),
}

FAMILIES = {"A": (-4.0, 4.0), "B": (-1.0, 1.0)}


def rng_for(seed) -> np.random.Generator:
    """Counter-based 64-bit generator (Philox 4x64)."""
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True)
class NoiseSpec:
    noise_type: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.noise_type not in NOISE_TYPES:
            raise ValueError(f"noise type must be 1..6, got {self.noise_type}")


@dataclass(frozen=True)
class SyntheticSpec:
    family: str = "A"
    m: int = 1000
    noise: NoiseSpec = NoiseSpec()
    noise_scale: float = 1.0  # multiplies eta; 0 gives the clean function

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"family must be 'A' or 'B', got {self.family!r}")
        if self.m < 1:
            raise ValueError("m must be >= 1")


def clean_function(family: str, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if family == "A":
        return np.sinc(x)  # sin(pi x)/(pi x), equal to 1 at x = 0
    if family == "B":
        return np.cos(np.pi * x)
    raise ValueError(f"unknown family {family!r}")


def envelope(x) -> np.ndarray:
    return -np.abs(np.asarray(x, dtype=float)) / 8.0 + 0.5


def draw_noise(noise_type: int, size: int, rng: np.random.Generator) -> np.ndarray:
    kind, scale = NOISE_TYPES[noise_type]
    if kind == "normal":
        return rng.normal(0.0, scale, size)
    return rng.uniform(-scale, scale, size)


def gen_synthetic(spec: SyntheticSpec) -> Dataset:
    rng = rng_for(spec.noise.seed)
    lo, hi = FAMILIES[spec.family]
    x = rng.uniform(lo, hi, spec.m)
    e = draw_noise(spec.noise.noise_type, spec.m, rng)
    y = clean_function(spec.family, x) + spec.noise_scale * envelope(x) * e
    return Dataset(x.reshape(-1, 1), y, ("x",))


def inject_target_noise(d: Dataset, fraction: float, sigma: float = 0.2, seed=0) -> Dataset:
    """Add N(0, sigma^2) to exactly round(fraction * m) distinct targets."""
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"fraction must lie in [0, 1], got {fraction}")
    count = int(math.floor(fraction * d.m + 0.5))
    if count == 0:
        return d
    rng = rng_for(seed)
    rows = rng.choice(d.m, size=count, replace=False)
    y = np.array(d.targets)
    y[rows] += rng.normal(0.0, sigma, count)
    return d.with_targets(y)
