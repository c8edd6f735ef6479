"""
Imaginary-time Schrodinger integrator for the unnormalized posterior.

Solves ``dp/dt = (D/2) d2p/dq2 - V(q - x(t)) p`` with Strang splitting:
a half-step likelihood weight, the exact heat kernel over a full step,
and another half-step weight. The diffusion substep reuses the chain's
convolution, so the two backends differ only in where the weight sits.
"""
from __future__ import annotations

import math

import numpy as np

from .core import Density, ModelParams
from .errors import DeadPosteriorError
from .kernel import ObservationSeries, Potential, _check_eps, diffuse


def pde_step(d: Density, x: float, params: ModelParams, v: Potential) -> Density:
    """One Strang step over ``params.eps``; the result is not renormalized."""
    half = np.exp(-0.5 * params.eps * v(d.grid.points - x))
    inner = Density(d.grid, d.values * half)
    return Density(d.grid, diffuse(inner, params.eps, params).values * half)


def pde_run(
    prior: Density,
    obs: ObservationSeries,
    params: ModelParams,
    v: Potential,
    renorm_each_step: bool = True,
    snapshot_every: int = 0,
):
    """Evolve ``prior`` through every observation.

    Returns ``(density, log_norm)``, where ``density`` is normalized and
    ``exp(log_norm) * density`` is the unnormalized solution started from
    ``prior`` as given. With ``renorm_each_step=False`` the mass is only
    removed at the end, which can underflow on long runs. When
    ``snapshot_every > 0`` a third element lists ``(t, Density)`` snapshots,
    as in ``chain_run``.
    """
    _check_eps(obs, params)
    if len(obs) == 0:
        return (prior, 0.0, [(0.0, prior)]) if snapshot_every > 0 else (prior, 0.0)

    d = prior
    log_norm = 0.0
    snaps = [(0.0, prior)] if snapshot_every > 0 else None
    for i, x in enumerate(obs.values, start=1):
        d = pde_step(d, x, params, v)
        if renorm_each_step or (snaps is not None and i % snapshot_every == 0):
            mass = d.mass
            if not (mass > 0 and math.isfinite(mass)):
                raise DeadPosteriorError(f"posterior mass {mass} at step {i}")
            log_norm += math.log(mass)
            d = Density(d.grid, d.values / mass, normalized=True)
        if snaps is not None and i % snapshot_every == 0:
            snaps.append((i * params.eps, d))

    mass = d.mass
    if not (mass > 0 and math.isfinite(mass)):
        raise DeadPosteriorError(f"posterior mass {mass} at final step")
    log_norm += math.log(mass)
    d = Density(d.grid, d.values / mass, normalized=True)
    if snaps is None:
        return d, log_norm
    if len(obs) % snapshot_every:
        snaps.append((obs.t_final, d))
    return d, log_norm, snaps
