"""
Synthetic scenarios and the four-backend comparison harness.

Random numbers come from Philox, a counter-based generator, keyed by the
scenario seed and a fixed stream id. Each named stream draws independently
of the others.
"""
from __future__ import annotations

import math
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .analytic import analytic_run
from .core import Density, Grid, ModelParams, l1_distance, moments, renormalize
from .errors import IncompatiblePotentialError, PathBayesError
from .fock import fock_run
from .hermite import HermiteBasis, project_prior
from .kernel import ObservationSeries, Potential, chain_run
from .schrodinger import pde_run

BACKENDS = ("chain", "pde", "analytic", "fock")
STREAMS = {"latent": 1, "observation": 2, "initial": 3}
MAX_PRIOR_LEAK = 1e-10


def stream(seed: int, name: str) -> np.random.Generator:
    """Independent generator for ``name`` under ``seed``."""
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.Generator(np.random.Philox(key=int(seed) + (STREAMS[name] << 64)))


@dataclass(frozen=True)
class PriorSpec:
    """Mixture of normals ``(weight, mean, std)``; weights are normalized on use."""

    components: tuple

    def __post_init__(self):
        comps = tuple((float(w), float(m), float(s)) for w, m, s in self.components)
        if not comps:
            raise ValueError("prior needs at least one component")
        for w, m, s in comps:
            if not (w > 0 and s > 0 and math.isfinite(m)):
                raise ValueError(f"bad prior component weight={w} mean={m} std={s}")
        object.__setattr__(self, "components", comps)

    @classmethod
    def gaussian(cls, mean: float, std: float) -> "PriorSpec":
        return cls(((1.0, mean, std),))

    @classmethod
    def parse(cls, text: str) -> "PriorSpec":
        """Parse ``gaussian(m, s)`` or ``mix(w1*gaussian(m1, s1) + ...)``."""
        num = r"\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*"
        gauss = rf"gaussian\({num},{num}\)"
        text = text.strip()
        single = re.fullmatch(gauss, text)
        if single:
            return cls.gaussian(float(single.group(1)), float(single.group(2)))
        mix = re.fullmatch(r"mix\((.*)\)", text)
        if mix:
            term = rf"{num}\*\s*{gauss}"
            if not re.fullmatch(rf"\s*{term}(?:\s*\+{term})*\s*", mix.group(1)):
                raise ValueError(f"cannot parse mixture {text!r}")
            comps = [tuple(float(g) for g in m.groups()) for m in re.finditer(term, mix.group(1))]
            return cls(tuple(comps))
        raise ValueError(f"cannot parse prior {text!r}")

    def __str__(self) -> str:
        if len(self.components) == 1:
            _, m, s = self.components[0]
            return f"gaussian({m!r},{s!r})"
        return "mix(" + "+".join(f"{w!r}*gaussian({m!r},{s!r})" for w, m, s in self.components) + ")"

    @property
    def weights(self) -> np.ndarray:
        w = np.array([c[0] for c in self.components])
        return w / w.sum()

    def leak(self, grid: Grid) -> float:
        """Prior mass outside ``[q_min, q_max]``."""
        out = 0.0
        for w, (_, m, s) in zip(self.weights, self.components):
            out += w * 0.5 * (math.erfc((m - grid.q_min) / (s * math.sqrt(2))) +
                              math.erfc((grid.q_max - m) / (s * math.sqrt(2))))
        return out

    def density(self, grid: Grid) -> Density:
        q = grid.points
        values = np.zeros_like(q)
        for w, (_, m, s) in zip(self.weights, self.components):
            values += w * np.exp(-0.5 * ((q - m) / s) ** 2) / (s * math.sqrt(2 * math.pi))
        return renormalize(Density(grid, values))

    def sample(self, rng: np.random.Generator) -> float:
        k = int(rng.choice(len(self.components), p=self.weights))
        _, m, s = self.components[k]
        return float(m + s * rng.standard_normal())


@dataclass(frozen=True)
class Scenario:
    """One filtering problem.

    ``obs_noise_std`` selects synthetic mode; otherwise ``observations``
    must be supplied (external-file mode).
    """

    params: ModelParams
    grid: Grid
    prior: PriorSpec
    t_final: float
    seed: int = 0
    obs_noise_std: Optional[float] = None
    observations: Optional[ObservationSeries] = field(default=None, repr=False)
    n_max: int = 48
    potential: Optional[Potential] = None

    def __post_init__(self):
        n = self.t_final / self.params.eps
        if self.t_final < 0 or abs(n - round(n)) > 1e-9 * max(1.0, n):
            raise ValueError(f"t_final={self.t_final} is not a multiple of eps={self.params.eps}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.prior.leak(self.grid) > MAX_PRIOR_LEAK:
            raise ValueError(f"prior leaks {self.prior.leak(self.grid):.3g} of its mass outside the grid")
        if self.obs_noise_std is None:
            if self.observations is None:
                raise ValueError("need obs_noise_std (synthetic) or observations (external)")
            if len(self.observations) != self.n_steps:
                raise ValueError(f"expected {self.n_steps} observations, got {len(self.observations)}")
        elif self.obs_noise_std < 0:
            raise ValueError("obs_noise_std must be nonnegative")
        if self.potential is None:
            object.__setattr__(self, "potential", Potential.gaussian(self.params.delta))

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.params.eps))

    def latent_path(self) -> Optional[np.ndarray]:
        if self.obs_noise_std is None:
            return None
        q0 = self.prior.sample(stream(self.seed, "initial"))
        return sample_latent_path(self.params, q0, self.n_steps, self.seed)

    def evidence(self) -> ObservationSeries:
        if self.obs_noise_std is None:
            return self.observations
        return sample_observations(self.latent_path(), self.obs_noise_std, self.params.eps, self.seed)


def sample_latent_path(params: ModelParams, q0: float, n_steps: int, seed: int) -> np.ndarray:
    """Euler-Maruyama Wiener path ``q_0 .. q_N`` with increments ``sqrt(D eps) xi``."""
    if n_steps < 0:
        raise ValueError("n_steps must be nonnegative")
    xi = stream(seed, "latent").standard_normal(n_steps)
    steps = math.sqrt(params.diffusion_d * params.eps) * xi
    return q0 + np.concatenate(([0.0], np.cumsum(steps)))


def sample_observations(path: np.ndarray, obs_noise_std: float, eps: float, seed: int) -> ObservationSeries:
    """``x_i = q_i + obs_noise_std * zeta_i`` for ``i = 1 .. N`` (``path[0]`` is the start)."""
    if obs_noise_std < 0:
        raise ValueError("obs_noise_std must be nonnegative")
    path = np.asarray(path, dtype=float)
    zeta = stream(seed, "observation").standard_normal(path.size - 1)
    return ObservationSeries(eps, path[1:] + obs_noise_std * zeta)


@dataclass
class ComparisonReport:
    backends: tuple
    densities: dict
    means: dict
    variances: dict
    l1: np.ndarray
    seconds: dict
    log_norms: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)

    def pair(self, a: str, b: str) -> float:
        return float(self.l1[self.backends.index(a), self.backends.index(b)])

    def max_l1(self) -> float:
        return float(self.l1.max()) if self.l1.size else 0.0


def run_backend(name: str, scn: Scenario, prior: Density, obs: ObservationSeries):
    """Run one backend; returns ``(density, log_norm or None)``."""
    params, v = scn.params, scn.potential
    if name == "chain":
        return chain_run(prior, obs, params, v), None
    if name == "pde":
        return pde_run(prior, obs, params, v)
    if name in ("analytic", "fock"):
        if not v.is_gaussian:
            raise IncompatiblePotentialError(f"backend {name!r} needs the gaussian potential")
        if not math.isclose(v.delta, params.delta):
            raise IncompatiblePotentialError("gaussian potential width differs from model delta")
        state, _ = project_prior(prior, HermiteBasis.for_params(params, scn.n_max))
        if name == "analytic":
            result = analytic_run(state, obs, params, scn.grid)
            return result.density, result.log_norm
        return fock_run(state, obs, params, scn.grid), None
    raise ValueError(f"unknown backend {name!r}")


def run_comparison(scn: Scenario, backends=BACKENDS, max_workers: int = 1) -> ComparisonReport:
    """Run the requested backends on identical inputs.

    Backend failures are collected in ``report.errors`` instead of aborting
    the others. Results are ordered as in ``BACKENDS`` regardless of
    ``max_workers``.
    """
    unknown = set(backends) - set(BACKENDS)
    if unknown:
        raise ValueError(f"unknown backends {sorted(unknown)}")
    order = [b for b in BACKENDS if b in set(backends)]
    prior = scn.prior.density(scn.grid)
    obs = scn.evidence()

    def timed(name):
        start = time.perf_counter()
        try:
            out = run_backend(name, scn, prior, obs)
        except (PathBayesError, ValueError, ArithmeticError) as exc:
            return name, None, exc, time.perf_counter() - start
        return name, out, None, time.perf_counter() - start

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(timed, order))
    else:
        results = [timed(name) for name in order]

    ok = tuple(name for name, out, _, _ in results if out is not None)
    densities, log_norms, seconds, errors = {}, {}, {}, {}
    for name, out, exc, dt in results:
        seconds[name] = dt
        if exc is not None:
            errors[name] = exc
            continue
        densities[name] = out[0]
        if out[1] is not None:
            log_norms[name] = out[1]
    means, variances = {}, {}
    for name in ok:
        means[name], variances[name] = moments(densities[name])
    l1 = np.zeros((len(ok), len(ok)))
    for i, a in enumerate(ok):
        for j in range(i + 1, len(ok)):
            l1[i, j] = l1[j, i] = l1_distance(densities[a], densities[ok[j]])
    return ComparisonReport(ok, densities, means, variances, l1, seconds, log_norms, errors)


def desk_scenario(seed: int = 42, **overrides) -> Scenario:
    """Default desk-scale scenario: D = delta = 1, eps = 0.005, T = 1, grid [-8, 8] x 513."""
    params = overrides.pop("params", ModelParams(1.0, 1.0, 0.005))
    kwargs = dict(
        params=params,
        grid=Grid(-8.0, 8.0, 513),
        prior=PriorSpec.gaussian(0.0, 1.0),
        t_final=1.0,
        seed=seed,
        obs_noise_std=params.delta,
        n_max=48,
    )
    kwargs.update(overrides)
    return Scenario(**kwargs)
