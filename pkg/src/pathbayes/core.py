"""
Grid and density primitives shared by every backend.

All quadrature is the composite trapezoid rule on a uniform grid. Values
outside ``[q_min, q_max]`` are taken to be zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DeadPosteriorError, GridMismatchError

MIN_GRID_POINTS = 8
NORMALIZATION_TOL = 1e-9
STABILITY_LIMIT = 0.5


@dataclass(frozen=True)
class Grid:
    """Uniform 1-D grid ``q_i = q_min + i * dq``."""

    q_min: float
    q_max: float
    n_points: int

    def __post_init__(self):
        if not (math.isfinite(self.q_min) and math.isfinite(self.q_max)):
            raise ValueError("grid bounds must be finite")
        if not self.q_min < self.q_max:
            raise ValueError(f"q_min={self.q_min} must be below q_max={self.q_max}")
        if int(self.n_points) != self.n_points or self.n_points < MIN_GRID_POINTS:
            raise ValueError(f"n_points must be an integer >= {MIN_GRID_POINTS}, got {self.n_points}")
        object.__setattr__(self, "n_points", int(self.n_points))

    @property
    def dq(self) -> float:
        return (self.q_max - self.q_min) / (self.n_points - 1)

    @property
    def width(self) -> float:
        return self.q_max - self.q_min

    @property
    def points(self) -> np.ndarray:
        return self.q_min + np.arange(self.n_points) * self.dq

    @property
    def weights(self) -> np.ndarray:
        """Trapezoid quadrature weights."""
        w = np.full(self.n_points, self.dq)
        w[0] = w[-1] = 0.5 * self.dq
        return w

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


def grid_new(q_min: float, q_max: float, n_points: int) -> Grid:
    return Grid(float(q_min), float(q_max), n_points)


@dataclass(frozen=True)
class ModelParams:
    """Diffusion constant ``D``, likelihood width ``delta`` and time step ``eps``.

    The constructor rejects ``eps * sqrt(D) / delta > 0.5``.
    """

    diffusion_d: float
    delta: float
    eps: float

    def __post_init__(self):
        for name in ("diffusion_d", "delta", "eps"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value}")
        if self.eps * math.sqrt(self.diffusion_d) / self.delta > STABILITY_LIMIT + 1e-12:
            raise ValueError(
                f"eps*sqrt(D)/delta = {self.eps * math.sqrt(self.diffusion_d) / self.delta:.4g} "
                f"exceeds {STABILITY_LIMIT}"
            )

    @property
    def omega(self) -> float:
        """Oscillator rate ``sqrt(D)/delta`` (1/time)."""
        return math.sqrt(self.diffusion_d) / self.delta

    @property
    def length(self) -> float:
        """Oscillator length ``sqrt(delta*sqrt(D))`` (state units)."""
        return math.sqrt(self.delta * math.sqrt(self.diffusion_d))


@dataclass(frozen=True)
class Density:
    """Nonnegative samples of a density on ``grid``.

    ``normalized=True`` is only accepted when the trapezoid integral is 1
    within ``NORMALIZATION_TOL``.
    """

    grid: Grid
    values: np.ndarray = field(repr=False)
    normalized: bool = False

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.n_points,):
            raise ValueError(f"expected {self.grid.n_points} values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("density values must be finite")
        if np.any(values < 0):
            raise ValueError(f"density values must be nonnegative (min {values.min():.3g})")
        if self.normalized and abs(self.grid.integrate(values) - 1.0) > NORMALIZATION_TOL:
            raise ValueError("density flagged normalized but does not integrate to 1")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def mass(self) -> float:
        return self.grid.integrate(self.values)

    @classmethod
    def from_function(cls, grid: Grid, fn, normalize: bool = True) -> "Density":
        d = cls(grid, fn(grid.points))
        return renormalize(d) if normalize else d


def renormalize(d: Density) -> Density:
    mass = d.mass
    if not (math.isfinite(mass) and mass > 0):
        raise DeadPosteriorError(f"cannot renormalize density with mass {mass}")
    return Density(d.grid, d.values / mass, normalized=True)


def moments(d: Density) -> tuple[float, float]:
    """Mean and variance by trapezoid rule."""
    if not d.normalized:
        raise ValueError("moments require a normalized density")
    q = d.grid.points
    w = d.grid.weights * d.values
    mean = float(np.dot(w, q))
    var = float(np.dot(w, (q - mean) ** 2))
    return mean, var


def l1_distance(a: Density, b: Density) -> float:
    if a.grid != b.grid:
        raise GridMismatchError("l1_distance needs densities on identical grids")
    if not (a.normalized and b.normalized):
        raise ValueError("l1_distance requires normalized densities")
    return a.grid.integrate(np.abs(a.values - b.values))


def gaussian_density(grid: Grid, mean: float, std: float) -> Density:
    """Grid-sampled normal density, renormalized on the grid."""
    return Density.from_function(
        grid, lambda q: np.exp(-0.5 * ((q - mean) / std) ** 2) / (std * math.sqrt(2 * math.pi))
    )
