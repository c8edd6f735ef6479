"""
Truncated ladder-operator backend.

The oscillator part of the generator is diagonal in the Hermite basis, so the
state is evolved in the interaction picture, where only the linear drive

    H(t) = -x(t) sqrt(sqrt(D) / 2 delta^3) (exp(-omega t) a + exp(+omega t) a_dag)

remains. Classical RK4 integrates ``dc/dt = -H(t) c``; the free decay
``exp(-omega (n + 1/2) T)`` is applied afterwards.

The drive carries a minus sign because expanding ``(q - x)^2 / 2 delta^2``
gives ``-q x / delta^2`` and ``q = l (a + a_dag) / sqrt(2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Density, Grid, ModelParams
from .errors import RangeError, TruncationError, VerificationError
from .hermite import FockState, hermite_table
from .kernel import ObservationSeries

MAX_OMEGA_T = 3.0
MAX_BCH_OMEGA_T = 4.0
TAIL_LIMIT = 0.01
INTERIOR_DROP = 4
TAYLOR_DEGREE = 16


@dataclass(frozen=True)
class LadderMatrices:
    n_max: int
    a: np.ndarray = field(repr=False)
    a_dag: np.ndarray = field(repr=False)

    @property
    def number(self) -> np.ndarray:
        return self.a_dag @ self.a


def ladder_matrices(n_max: int) -> LadderMatrices:
    """Annihilation ``a`` with ``sqrt(n)`` on the first superdiagonal, and its transpose."""
    if int(n_max) != n_max or n_max < 2:
        raise ValueError(f"n_max must be an integer >= 2, got {n_max}")
    a = np.diag(np.sqrt(np.arange(1.0, n_max)), k=1)
    return LadderMatrices(int(n_max), a, a.T.copy())


def expm(m: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a degree-16 Taylor polynomial."""
    m = np.asarray(m, dtype=float)
    norm = np.linalg.norm(m, 1)
    squarings = max(0, int(math.ceil(math.log2(norm / 0.5)))) if norm > 0.5 else 0
    x = m / 2.0**squarings
    ident = np.eye(m.shape[0])
    # Horner evaluation of sum_k x^k / k!
    result = ident.copy()
    for k in range(TAYLOR_DEGREE, 0, -1):
        result = ident + (x @ result) / k
    for _ in range(squarings):
        result = result @ result
    return result


def drive_coupling(params: ModelParams) -> float:
    """``sqrt(sqrt(D) / 2 delta^3)``."""
    return math.sqrt(math.sqrt(params.diffusion_d) / (2.0 * params.delta**3))


def drive_matrix(x: float, t: float, params: ModelParams, ladder: LadderMatrices) -> np.ndarray:
    """Interaction-picture generator ``H(t)`` for observation value ``x``."""
    w = params.omega * t
    return -x * drive_coupling(params) * (math.exp(-w) * ladder.a + math.exp(w) * ladder.a_dag)


def _interior(m: np.ndarray) -> np.ndarray:
    k = m.shape[0] - INTERIOR_DROP
    return m[:k, :k]


def bch_conjugation_check(params: ModelParams, t: float, n_max: int) -> float:
    """Relative interior error of ``e^{A}(a + a_dag)e^{-A}`` against ``e^{-wt} a + e^{wt} a_dag``.

    ``A = omega t (a_dag a + 1/2)``; both exponentials come from ``expm``.
    """
    w = params.omega * t
    if w > MAX_BCH_OMEGA_T + 1e-12:
        raise RangeError(f"omega*t = {w:.3g} beyond {MAX_BCH_OMEGA_T}")
    lad = ladder_matrices(n_max)
    gen = w * (lad.number + 0.5 * np.eye(n_max))
    conj = expm(gen) @ (lad.a + lad.a_dag) @ expm(-gen)
    expected = math.exp(-w) * lad.a + math.exp(w) * lad.a_dag
    err = np.max(np.abs(_interior(conj - expected)))
    return float(err / np.max(np.abs(_interior(expected))))


def commutator(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return x @ y - y @ x


def magnus_scalar(obs: ObservationSeries, params: ModelParams, t1: float, t2: float) -> float:
    """``-x(t1) x(t2) (sqrt(D) / delta^3) sinh(omega (t1 - t2))``."""
    x1, x2 = obs.value_at(t1), obs.value_at(t2)
    return -x1 * x2 * math.sqrt(params.diffusion_d) / params.delta**3 * math.sinh(params.omega * (t1 - t2))


def magnus_matrix_deviation(
    obs: ObservationSeries, params: ModelParams, t1: float, t2: float, n_max: int = 32
) -> float:
    """Interior max of ``|[H(t1), H(t2)] - scalar * I|`` for the truncated matrices."""
    lad = ladder_matrices(n_max)
    h1 = drive_matrix(obs.value_at(t1), t1, params, lad)
    h2 = drive_matrix(obs.value_at(t2), t2, params, lad)
    comm = _interior(commutator(h1, h2))
    return float(np.max(np.abs(comm - magnus_scalar(obs, params, t1, t2) * np.eye(comm.shape[0]))))


def magnus_commutator(
    obs: ObservationSeries,
    params: ModelParams,
    t1: float,
    t2: float,
    n_max: int = 32,
    tol: float = 1e-8,
) -> float:
    """Scalar value of ``[H(t1), H(t2)]``, cross-checked against the ladder matrices.

    Raises ``VerificationError`` if the interior block of the matrix
    commutator differs from the scalar times identity by more than ``tol``.
    """
    scalar = magnus_scalar(obs, params, t1, t2)
    dev = magnus_matrix_deviation(obs, params, t1, t2, n_max)
    if dev > tol:
        raise VerificationError(f"matrix commutator deviates from the scalar by {dev:.3g}")
    return scalar


def nested_commutator_norm(
    obs: ObservationSeries, params: ModelParams, t: float, t1: float, t2: float, n_max: int = 32
) -> float:
    """Interior max of ``[H(t), [H(t1), H(t2)]]``; zero up to rounding."""
    lad = ladder_matrices(n_max)
    h = lambda s: drive_matrix(obs.value_at(s), s, params, lad)  # noqa: E731
    return float(np.max(np.abs(_interior(commutator(h(t), commutator(h(t1), h(t2)))))))


def rk4_step(c: np.ndarray, x: float, t: float, h: float, params: ModelParams, ladder: LadderMatrices) -> np.ndarray:
    """One RK4 step of ``dc/dt = -H(t) c`` with ``x`` held fixed over the step."""
    rhs = lambda s, y: -drive_matrix(x, s, params, ladder) @ y  # noqa: E731
    k1 = rhs(t, c)
    k2 = rhs(t + 0.5 * h, c + 0.5 * h * k1)
    k3 = rhs(t + 0.5 * h, c + 0.5 * h * k2)
    k4 = rhs(t + h, c + h * k3)
    return c + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _evolve(c: np.ndarray, obs: ObservationSeries, params: ModelParams, substeps: int):
    """Yield ``(step, coefficients)`` after each observation interval."""
    ladder = ladder_matrices(c.size)
    h = params.eps / substeps
    for i, x in enumerate(obs.values):
        for k in range(substeps):
            c = rk4_step(c, float(x), i * params.eps + k * h, h, params, ladder)
        _check_tail(c, i + 1)
        yield i + 1, c


def interaction_coefficients(
    prior_coeffs: FockState, obs: ObservationSeries, params: ModelParams, substeps: int = 1
) -> np.ndarray:
    """Interaction-picture coefficients at the end of the series."""
    c = np.array(prior_coeffs.coeffs)
    for _, c in _evolve(c, obs, params, substeps):
        pass
    return c


def _check_tail(c: np.ndarray, step: int) -> None:
    peak = np.max(np.abs(c))
    if not np.all(np.isfinite(c)) or (peak > 0 and abs(c[-1]) / peak >= TAIL_LIMIT):
        raise TruncationError(f"Fock tail mass reached {abs(c[-1]) / peak:.3g} at step {step}; increase n_max")


def free_decay(coeffs: np.ndarray, omega: float, t: float) -> np.ndarray:
    return coeffs * np.exp(-omega * (np.arange(coeffs.size) + 0.5) * t)


def reconstruct(coeffs: np.ndarray, state_like: FockState, grid: Grid) -> Density:
    values = coeffs @ hermite_table(state_like.basis, grid.points)
    peak = values.max()
    if not peak > 0 or values.min() < -1e-9 * peak:
        raise TruncationError("Fock reconstruction is not a nonnegative density; increase n_max")
    values = np.maximum(values, 0.0)
    return Density(grid, values / grid.integrate(values), normalized=True)


def fock_run(
    prior_coeffs: FockState,
    obs: ObservationSeries,
    params: ModelParams,
    grid: Grid,
    substeps: int = 1,
    snapshot_every: int = 0,
):
    """Posterior at the end of the series from the truncated ladder algebra.

    ``substeps`` RK4 steps are taken per observation interval. Returns the
    renormalized density, or ``(density, snapshots)`` when
    ``snapshot_every > 0``.
    """
    if prior_coeffs.tail_ratio >= TAIL_LIMIT:
        raise TruncationError(f"prior tail ratio {prior_coeffs.tail_ratio:.3g}; increase n_max")
    omega = params.omega
    if omega * obs.t_final > MAX_OMEGA_T + 1e-12:
        raise RangeError(f"omega*T = {omega * obs.t_final:.3g} beyond {MAX_OMEGA_T}")
    if not math.isclose(obs.eps, params.eps, rel_tol=1e-12):
        raise ValueError(f"observation spacing {obs.eps} differs from model eps {params.eps}")

    c = np.array(prior_coeffs.coeffs)
    snaps = [(0.0, reconstruct(free_decay(c, omega, 0.0), prior_coeffs, grid))] if snapshot_every > 0 else None
    for step, c in _evolve(c, obs, params, substeps):
        if snaps is not None and step % snapshot_every == 0:
            t = step * params.eps
            snaps.append((t, reconstruct(free_decay(c, omega, t), prior_coeffs, grid)))
    final = reconstruct(free_decay(c, omega, obs.t_final), prior_coeffs, grid)
    if snaps is None:
        return final
    if len(obs) % snapshot_every:
        snaps.append((obs.t_final, final))
    return final, snaps
