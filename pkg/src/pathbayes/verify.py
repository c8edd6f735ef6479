"""Numerical property suites behind ``pathbayes verify``."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import Density, Grid, ModelParams, gaussian_density, moments, renormalize
from .fock import bch_conjugation_check, commutator, expm, ladder_matrices, magnus_matrix_deviation
from .hermite import HermiteBasis, hermite_table
from .kernel import ObservationSeries, Potential, chain_run, chapman_kolmogorov_check, free_propagator_value
from .schrodinger import pde_run

DESK = ModelParams(1.0, 1.0, 0.005)
DESK_GRID = Grid(-8.0, 8.0, 513)


@dataclass(frozen=True)
class SuiteResult:
    name: str
    deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.deviation) and self.deviation < self.tolerance)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<24} max deviation {self.deviation:.3e}  (tol {self.tolerance:.0e})"


def chapman_kolmogorov(kernel: Callable = free_propagator_value) -> SuiteResult:
    dev = chapman_kolmogorov_check(DESK.eps, DESK, DESK_GRID, kernel=kernel)
    return SuiteResult("chapman_kolmogorov", dev, 1e-4)


def diffusion_law() -> SuiteResult:
    """Free propagation of N(0, 0.25) over T = 0.5 must give variance 0.75."""
    prior = gaussian_density(DESK_GRID, 0.0, 0.5)
    obs = ObservationSeries(DESK.eps, np.zeros(100))
    _, var = moments(chain_run(prior, obs, DESK, Potential.zero()))
    return SuiteResult("diffusion_law", abs(var - 0.75) / 0.75, 5e-3)


def hermite_orthonormality(n_modes: int = 21) -> SuiteResult:
    basis = HermiteBasis(1.0, 1.0, n_modes)
    ell = basis.length
    grid = Grid(-10 * ell, 10 * ell, 1025)
    table = hermite_table(basis, grid.points)
    gram = (table * grid.weights) @ table.T
    return SuiteResult("hermite_orthonormality", float(np.max(np.abs(gram - np.eye(n_modes)))), 1e-6)


def ladder_commutator(n_max: int = 32) -> SuiteResult:
    lad = ladder_matrices(n_max)
    expected = np.diag(np.r_[np.ones(n_max - 1), -(n_max - 1)])
    dev = float(np.max(np.abs(commutator(lad.a, lad.a_dag) - expected)))
    return SuiteResult("ladder_commutator", dev, 1e-13)


def bch_conjugation() -> SuiteResult:
    return SuiteResult("bch_conjugation", bch_conjugation_check(DESK, 0.5, 32), 1e-8)


def magnus_scalar() -> SuiteResult:
    rng = np.random.default_rng(7)
    obs = ObservationSeries(DESK.eps, rng.normal(size=200))
    pairs = [(0.2, 0.1), (0.9, 0.35), (0.05, 0.6), (0.5, 0.5)]
    worst = max(magnus_matrix_deviation(obs, DESK, t1, t2) for t1, t2 in pairs)
    return SuiteResult("magnus_commutator", worst, 1e-8)


def ground_state_stationarity() -> list[SuiteResult]:
    """Renormalized f_0 under x = 0 is invariant; log-norm decays at omega / 2."""
    basis = HermiteBasis(1.0, 1.0, 1)
    f0 = renormalize(Density(DESK_GRID, hermite_table(basis, DESK_GRID.points)[0]))
    obs = ObservationSeries(DESK.eps, np.zeros(200))
    d, log_norm = pde_run(f0, obs, DESK, Potential.gaussian(1.0))
    return [
        SuiteResult("stationary_profile", float(np.max(np.abs(d.values - f0.values))), 1e-5),
        SuiteResult("ground_state_decay", abs(log_norm + 0.5), 1e-3),
    ]


def expm_spot_check() -> SuiteResult:
    rng = np.random.default_rng(3)
    m = rng.normal(size=(24, 24))
    m = 0.3 * (m + m.T)
    evals, evecs = np.linalg.eigh(m)
    ref = (evecs * np.exp(evals)) @ evecs.T
    return SuiteResult("expm_spot_check", float(np.max(np.abs(expm(m) - ref)) / np.max(np.abs(ref))), 1e-10)


def run_suites(kernel: Callable = free_propagator_value) -> list[SuiteResult]:
    return [
        chapman_kolmogorov(kernel),
        diffusion_law(),
        hermite_orthonormality(),
        ladder_commutator(),
        bch_conjugation(),
        magnus_scalar(),
        *ground_state_stationarity(),
        expm_spot_check(),
    ]
