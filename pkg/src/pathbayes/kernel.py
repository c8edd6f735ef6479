"""
Discrete Bayesian update chain for a driftless Wiener process.

One update diffuses the current density with the Gaussian transition kernel
and multiplies it by the exponential likelihood ``exp(-eps * V(q - x))``.
The q-independent evidence term is removed by renormalizing every step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import Density, Grid, ModelParams, renormalize
from .errors import GridTooSmallError, RangeError

KERNEL_HALF_WIDTH = 8.0  # in units of sqrt(D * eps)


@dataclass(frozen=True)
class ObservationSeries:
    """Evidence ``x(t_1) .. x(t_N)`` at ``t_i = i * eps``.

    The signal is piecewise constant: ``values[i-1]`` holds on ``(t_{i-1}, t_i]``.
    """

    eps: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float).reshape(-1)
        if not (math.isfinite(self.eps) and self.eps > 0):
            raise ValueError(f"eps must be positive, got {self.eps}")
        if not np.all(np.isfinite(values)):
            raise ValueError("observations must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size

    @property
    def t_final(self) -> float:
        return len(self) * self.eps

    @property
    def times(self) -> np.ndarray:
        return self.eps * np.arange(1, len(self) + 1)

    def __getitem__(self, item: slice) -> "ObservationSeries":
        return ObservationSeries(self.eps, self.values[item])

    def value_at(self, t: float) -> float:
        """Observation in force at time ``t`` (right-endpoint convention)."""
        n = len(self)
        if n == 0 or t < -1e-12 or t > self.t_final * (1 + 1e-12) + 1e-12:
            raise RangeError(f"t={t} outside observed range [0, {self.t_final}]")
        i = int(math.ceil(t / self.eps - 1e-9))
        return float(self.values[min(max(i, 1), n) - 1])


@dataclass(frozen=True)
class Potential:
    """Negative log-likelihood rate ``V(u)``, ``u = q - x``.

    ``kind="gaussian"`` gives ``u**2 / (2 delta**2)``. ``kind="tabulated"``
    linearly interpolates ``(table_u, table_v)`` and holds the end values
    outside the table, so it stays bounded.
    """

    kind: str
    delta: Optional[float] = None
    table_u: Optional[np.ndarray] = field(default=None, repr=False)
    table_v: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind == "gaussian":
            if self.delta is None or not self.delta > 0:
                raise ValueError("gaussian potential needs a positive delta")
        elif self.kind == "tabulated":
            u = np.asarray(self.table_u, dtype=float)
            v = np.asarray(self.table_v, dtype=float)
            if u.ndim != 1 or u.shape != v.shape or u.size < 1:
                raise ValueError("tabulated potential needs matching 1-D tables")
            if np.any(np.diff(u) <= 0):
                raise ValueError("table_u must be strictly increasing")
            if not np.all(np.isfinite(v)) or np.any(v < 0):
                raise ValueError("tabulated V must be finite and nonnegative")
            object.__setattr__(self, "table_u", u)
            object.__setattr__(self, "table_v", v)
        else:
            raise ValueError(f"unknown potential kind {self.kind!r}")

    @classmethod
    def gaussian(cls, delta: float) -> "Potential":
        return cls("gaussian", delta=float(delta))

    @classmethod
    def tabulated(cls, u, v) -> "Potential":
        return cls("tabulated", table_u=u, table_v=v)

    @classmethod
    def zero(cls) -> "Potential":
        return cls("tabulated", table_u=np.array([0.0]), table_v=np.array([0.0]))

    @property
    def is_gaussian(self) -> bool:
        return self.kind == "gaussian"

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "gaussian":
            return u * u / (2.0 * self.delta**2)
        return np.interp(u, self.table_u, self.table_v)


def free_propagator_value(q_to, q_from, eps: float, diffusion_d: float):
    """Short-time Wiener transition density ``(2 pi D eps)^-1/2 exp(-(dq)^2 / 2 D eps)``."""
    if not (eps > 0 and diffusion_d > 0):
        raise ValueError("eps and diffusion_d must be positive")
    du = np.subtract(q_to, q_from)
    return np.exp(-du * du / (2.0 * diffusion_d * eps)) / math.sqrt(2.0 * math.pi * diffusion_d * eps)


def _check_kernel_fits(grid: Grid, half_width: float) -> None:
    if half_width > 0.5 * grid.width:
        raise GridTooSmallError(
            f"kernel half-width {half_width:.4g} exceeds half the grid width {0.5 * grid.width:.4g}"
        )


def diffusion_stencil(grid: Grid, eps: float, diffusion_d: float) -> np.ndarray:
    """Sampled heat kernel over ``+-8 sqrt(D eps)``, scaled to unit discrete mass."""
    sigma = math.sqrt(diffusion_d * eps)
    _check_kernel_fits(grid, KERNEL_HALF_WIDTH * sigma)
    h = max(1, int(math.ceil(KERNEL_HALF_WIDTH * sigma / grid.dq)))
    k = free_propagator_value(np.arange(-h, h + 1) * grid.dq, 0.0, eps, diffusion_d)
    return k / k.sum()


def diffuse(d: Density, eps: float, params: ModelParams) -> Density:
    """Convolve ``d`` with the free propagator over ``eps`` (direct summation)."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    grid = d.grid
    k = diffusion_stencil(grid, eps, params.diffusion_d)
    # trapezoid weights relative to dq, so interior points enter with weight 1
    weighted = d.values * (grid.weights / grid.dq)
    out = np.convolve(weighted, k, mode="same")
    return Density(grid, np.maximum(out, 0.0))


def likelihood_weight(d: Density, x: float, eps: float, v: Potential) -> Density:
    """Multiply by ``exp(-eps V(q - x))``; the result is left unnormalized."""
    if eps == 0:
        return d
    w = np.exp(-eps * v(d.grid.points - x))
    if not np.all(np.isfinite(w)):
        raise ArithmeticError("non-finite likelihood weight")
    return Density(d.grid, d.values * w)


def chain_step(d: Density, x: float, params: ModelParams, v: Potential) -> Density:
    return renormalize(likelihood_weight(diffuse(d, params.eps, params), x, params.eps, v))


def _check_eps(obs: ObservationSeries, params: ModelParams) -> None:
    if not math.isclose(obs.eps, params.eps, rel_tol=1e-12, abs_tol=0.0):
        raise ValueError(f"observation spacing {obs.eps} differs from model eps {params.eps}")


def chain_run(
    prior: Density,
    obs: ObservationSeries,
    params: ModelParams,
    v: Potential,
    snapshot_every: int = 0,
):
    """Fold ``chain_step`` over every observation.

    Returns the final density, or ``(density, snapshots)`` when
    ``snapshot_every > 0``; snapshots are ``(t, Density)`` pairs taken every
    ``snapshot_every`` steps, starting with the prior at ``t = 0`` and always
    ending with the final density.
    """
    _check_eps(obs, params)
    d = prior
    snaps = [(0.0, prior)] if snapshot_every > 0 else None
    for i, x in enumerate(obs.values, start=1):
        d = chain_step(d, x, params, v)
        if snaps is not None and i % snapshot_every == 0:
            snaps.append((i * params.eps, d))
    if snaps is not None and len(obs) % snapshot_every:
        snaps.append((obs.t_final, d))
    return (d, snaps) if snaps is not None else d


def chapman_kolmogorov_check(
    eps: float,
    params: ModelParams,
    grid: Grid,
    kernel: Callable = free_propagator_value,
) -> float:
    """Max |int k_eps(a, m) k_eps(m, b) dm - k_2eps(a, b)| over interior pairs.

    The intermediate integral is the trapezoid rule on ``grid``. Pairs are
    restricted to points at least 8 sqrt(2 D eps) inside the boundary so
    that truncation of the m-integral does not enter.
    """
    D = params.diffusion_d
    margin = KERNEL_HALF_WIDTH * math.sqrt(2.0 * D * eps)
    _check_kernel_fits(grid, margin)
    q = grid.points
    interior = q[(q >= grid.q_min + margin - 1e-12) & (q <= grid.q_max - margin + 1e-12)]
    if interior.size == 0:
        raise GridTooSmallError("no interior points for the Chapman-Kolmogorov check")
    k1 = kernel(q[None, :], interior[:, None], eps, D)  # (interior, m)
    composed = (k1 * grid.weights[None, :]) @ k1.T
    direct = kernel(interior[:, None], interior[None, :], 2.0 * eps, D)
    return float(np.max(np.abs(composed - direct)))
