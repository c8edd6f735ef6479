"""
Closed-form posterior for the Gaussian likelihood ``V(u) = u^2 / 2 delta^2``.

The unnormalized solution of the imaginary-time equation with prior
``sum_n c_n f_n`` is

    exp(s(t)) * exp(+x''(t) q) * sum_n c_n exp(-omega (n + 1/2) t) f_n(q + x'(t))

with ``x'`` and ``x''`` the hyperbolic-kernel integrals of the evidence
signal below and ``s(t)`` a q-independent scalar. Evidence enters as a
shift of the oscillator modes plus an exponential tilt.

Time integrals treat ``x(t)`` as piecewise constant on each observation
interval and integrate the hyperbolic kernels exactly over every piece.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Density, Grid, ModelParams
from .errors import RangeError, TruncationError
from .hermite import FockState, HermiteBasis, hermite_table
from .kernel import ObservationSeries

MAX_OMEGA_T = 6.0
NEGATIVE_TOL = 1e-9


@dataclass(frozen=True)
class AuxIntegrals:
    """Evidence integrals at time ``t``.

    x_prime
        ``omega * int_0^t x(s) sinh(omega (t - s)) ds`` (state units).
    x_dprime
        ``delta^-2 int_0^t x(s) cosh(omega (t - s)) ds`` (1/state).
    f_of_t
        ``(sqrt(D) / 2 delta^3) int_0^t ds int_0^s du x(s) x(u) sinh(omega (s - u))``.
    g_of_t
        ``(sqrt(D) / 2 delta^3) int int x(s) x(u) cosh(omega (t - s)) sinh(omega (t - u))``,
        which factorizes to ``x_prime * x_dprime / 2``.
    neg_log_evidence
        ``int_0^t x(s)^2 / (2 delta^2) ds``.
    """

    x_prime: float
    x_dprime: float
    f_of_t: float
    g_of_t: float
    neg_log_evidence: float

    @property
    def log_prefactor(self) -> float:
        """``f + g - int x^2 / 2 delta^2``."""
        return self.f_of_t + self.g_of_t - self.neg_log_evidence

    @property
    def log_scale(self) -> float:
        """``-f + g - int x^2 / 2 delta^2``: the scalar that reproduces the PDE's mass.

        The ordered-commutator term of the second-order Magnus expansion of
        ``dc/dt = -H c`` is ``+1/2 int int [H(s), H(u)]``, which equals ``-f``.
        """
        return -self.f_of_t + self.g_of_t - self.neg_log_evidence


def _sinh_minus_x(y: np.ndarray) -> np.ndarray:
    """``sinh(y) - y`` without cancellation for small ``y``."""
    y = np.asarray(y, dtype=float)
    small = np.abs(y) < 1e-2
    y2 = y * y
    series = y * y2 * (1 / 6 + y2 * (1 / 120 + y2 / 5040))
    return np.where(small, series, np.sinh(y) - y)


def _intervals(obs: ObservationSeries, t: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Observation values and clipped interval ends ``(x_i, a_i, b_i)`` covering ``[0, t]``."""
    if t < 0 or t > obs.t_final * (1 + 1e-12) + 1e-12:
        raise RangeError(f"t={t} outside observed range [0, {obs.t_final}]")
    n = min(len(obs), int(math.ceil(t / obs.eps - 1e-9)))
    a = obs.eps * np.arange(n)
    b = np.minimum(obs.eps * np.arange(1, n + 1), t)
    return obs.values[:n], a, b


def aux_integrals(obs: ObservationSeries, params: ModelParams, t: float) -> AuxIntegrals:
    omega = params.omega
    if omega * t > MAX_OMEGA_T + 1e-12:
        raise RangeError(f"omega*t = {omega * t:.3g} beyond the closed-form range {MAX_OMEGA_T}")
    x, a, b = _intervals(obs, t)
    if x.size == 0:
        return AuxIntegrals(0.0, 0.0, 0.0, 0.0, 0.0)
    delta, D = params.delta, params.diffusion_d
    h = b - a
    half = 0.5 * omega * h

    # integrals of sinh/cosh(omega (t - s)) over each piece, in product form
    mid_back = omega * (t - 0.5 * (a + b))
    sinh_back = 2.0 * np.sinh(mid_back) * np.sinh(half) / omega
    cosh_back = 2.0 * np.cosh(mid_back) * np.sinh(half) / omega
    # same for sinh/cosh(omega s), used by the ordered double integral
    mid_fwd = 0.5 * omega * (a + b)
    sinh_fwd = 2.0 * np.sinh(mid_fwd) * np.sinh(half) / omega
    cosh_fwd = 2.0 * np.cosh(mid_fwd) * np.sinh(half) / omega

    x_prime = omega * float(np.dot(x, sinh_back))
    x_dprime = float(np.dot(x, cosh_back)) / delta**2

    coupling = math.sqrt(D) / (2.0 * delta**3)
    # sinh(omega (s - u)) = sinh(omega s) cosh(omega u) - cosh(omega s) sinh(omega u), u < s
    earlier_cosh = np.concatenate(([0.0], np.cumsum(x * cosh_fwd)[:-1]))
    earlier_sinh = np.concatenate(([0.0], np.cumsum(x * sinh_fwd)[:-1]))
    cross = np.dot(x * sinh_fwd, earlier_cosh) - np.dot(x * cosh_fwd, earlier_sinh)
    same_piece = np.dot(x * x, _sinh_minus_x(omega * h)) / omega**2
    f_of_t = coupling * float(cross + same_piece)

    g_of_t = coupling * float(np.dot(x, cosh_back) * np.dot(x, sinh_back))
    neg_log_evidence = float(np.dot(x * x, h)) / (2.0 * delta**2)
    return AuxIntegrals(x_prime, x_dprime, f_of_t, g_of_t, neg_log_evidence)


@dataclass(frozen=True)
class ClosedFormPosterior:
    """Renormalized closed-form posterior.

    ``log_mass`` is the log of the grid integral of the unnormalized mode sum
    (tilt included, scalar prefactor excluded); ``log_prefactor`` is the
    q-independent exponent ``f + g - int x^2 / 2 delta^2``.
    """

    density: Density
    log_prefactor: float
    log_mass: float
    log_scale: float = float("nan")

    @property
    def log_norm(self) -> float:
        """Log mass of the unnormalized posterior, comparable to ``pde_run``'s ``log_norm``."""
        return self.log_scale + self.log_mass


def unnormalized_mode_sum(c: FockState, aux: AuxIntegrals, t: float, q) -> tuple[np.ndarray, float]:
    """``exp(x'' q) sum_n c_n e^{-omega(n+1/2)t} f_n(q + x')`` as ``(values * e^{-scale}, scale)``."""
    basis = c.basis
    q = np.asarray(q, dtype=float)
    decay = np.exp(-basis.omega * (np.arange(basis.n_max) + 0.5) * t)
    s = (c.coeffs * decay) @ hermite_table(basis, q + aux.x_prime)
    with np.errstate(divide="ignore"):
        log_abs = np.log(np.abs(s)) + aux.x_dprime * q
    scale = float(np.max(log_abs))
    if not math.isfinite(scale):
        raise TruncationError("mode sum vanished on the whole grid")
    return np.sign(s) * np.exp(log_abs - scale), scale


def posterior_closed_form(
    c: FockState,
    aux: AuxIntegrals,
    basis: HermiteBasis,
    t: float,
    grid: Grid,
) -> ClosedFormPosterior:
    if c.basis != basis:
        raise ValueError("FockState basis differs from the requested basis")
    if basis.omega * t > MAX_OMEGA_T + 1e-12:
        raise RangeError(f"omega*t = {basis.omega * t:.3g} beyond the closed-form range {MAX_OMEGA_T}")
    values, scale = unnormalized_mode_sum(c, aux, t, grid.points)
    peak = values.max()
    if values.min() < -NEGATIVE_TOL * peak:
        raise TruncationError(
            f"closed-form posterior has negative values ({values.min() / peak:.3g} of max); "
            f"increase n_max (now {basis.n_max})"
        )
    values = np.maximum(values, 0.0)
    mass = grid.integrate(values)
    density = Density(grid, values / mass, normalized=True)
    return ClosedFormPosterior(density, aux.log_prefactor, scale + math.log(mass), aux.log_scale)


def analytic_run(prior_state: FockState, obs: ObservationSeries, params: ModelParams, grid: Grid, t=None):
    """Closed-form posterior at ``t`` (default: end of the series)."""
    t = obs.t_final if t is None else t
    return posterior_closed_form(prior_state, aux_integrals(obs, params, t), prior_state.basis, t, grid)
