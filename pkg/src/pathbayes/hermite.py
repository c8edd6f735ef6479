"""
Harmonic-oscillator eigenfunctions with length ``sqrt(delta sqrt(D))``.

``f_n(q) = (pi delta sqrt(D))^(-1/4) (2^n n!)^(-1/2) exp(-q^2 / 2 l^2) H_n(q / l)``
are evaluated with the normalized three-term recurrence, which carries the
Gaussian factor along and so never forms a raw ``H_n``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Density, Grid
from .errors import TruncationError

MAX_PROJECTION_RESIDUAL = 1e-3


@dataclass(frozen=True)
class HermiteBasis:
    delta: float
    diffusion_d: float
    n_max: int

    def __post_init__(self):
        if not (self.delta > 0 and self.diffusion_d > 0):
            raise ValueError("delta and diffusion_d must be positive")
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError(f"n_max must be a positive integer, got {self.n_max}")
        object.__setattr__(self, "n_max", int(self.n_max))

    @property
    def length(self) -> float:
        return math.sqrt(self.delta * math.sqrt(self.diffusion_d))

    @property
    def omega(self) -> float:
        return math.sqrt(self.diffusion_d) / self.delta

    @classmethod
    def for_params(cls, params, n_max: int) -> "HermiteBasis":
        return cls(params.delta, params.diffusion_d, n_max)


def hermite_table(basis: HermiteBasis, q, n_terms: int | None = None) -> np.ndarray:
    """Rows ``f_0(q) .. f_{n_terms-1}(q)``; shape ``(n_terms,) + q.shape``."""
    n_terms = basis.n_max if n_terms is None else n_terms
    z = np.asarray(q, dtype=float) / basis.length
    out = np.empty((n_terms,) + z.shape)
    out[0] = math.pi**-0.25 / math.sqrt(basis.length) * np.exp(-0.5 * z * z)
    if n_terms > 1:
        out[1] = math.sqrt(2.0) * z * out[0]
    for n in range(1, n_terms - 1):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * z * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


def hermite_fn(basis: HermiteBasis, n: int, q):
    if not 0 <= n < basis.n_max:
        raise IndexError(f"mode {n} outside basis of size {basis.n_max}")
    values = hermite_table(basis, q, n + 1)[n]
    return float(values) if np.ndim(values) == 0 else values


@dataclass(frozen=True)
class FockState:
    """Expansion coefficients ``c_n`` over ``basis``."""

    coeffs: np.ndarray = field(repr=False)
    basis: HermiteBasis

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float).reshape(-1)
        if c.size != self.basis.n_max:
            raise ValueError(f"expected {self.basis.n_max} coefficients, got {c.size}")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def tail_ratio(self) -> float:
        peak = np.max(np.abs(self.coeffs))
        return float(abs(self.coeffs[-1]) / peak) if peak > 0 else 0.0

    def evaluate(self, grid: Grid) -> np.ndarray:
        return self.coeffs @ hermite_table(self.basis, grid.points)


def project_prior(
    prior: Density,
    basis: HermiteBasis,
    max_residual: float = MAX_PROJECTION_RESIDUAL,
) -> tuple[FockState, float]:
    """Project ``prior`` onto the basis by trapezoid rule.

    Returns the state and the relative L2 reconstruction residual; raises
    ``TruncationError`` if the residual exceeds ``max_residual``.
    """
    if not prior.normalized:
        raise ValueError("project_prior needs a normalized prior")
    grid = prior.grid
    table = hermite_table(basis, grid.points)
    w = grid.weights
    coeffs = table @ (w * prior.values)
    recon = coeffs @ table
    residual = math.sqrt(grid.integrate((prior.values - recon) ** 2) / grid.integrate(prior.values**2))
    if residual > max_residual:
        raise TruncationError(
            f"prior reconstruction residual {residual:.3g} > {max_residual:.3g}; "
            f"increase n_max (now {basis.n_max}) or refine the grid"
        )
    return FockState(coeffs, basis), residual
