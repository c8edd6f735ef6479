"""Property-based checks of the invariants the modules promise."""
import math

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from pathbayes.analytic import aux_integrals
from pathbayes.config import fmt
from pathbayes.core import Density, Grid, ModelParams, gaussian_density, l1_distance, moments, renormalize
from pathbayes.fock import commutator, ladder_matrices, magnus_scalar
from pathbayes.kernel import ObservationSeries, Potential, chain_run, diffuse, likelihood_weight

GRID = Grid(-8.0, 8.0, 257)

positive_profiles = st.lists(
    st.floats(0.0, 1e3, allow_nan=False), min_size=GRID.n_points, max_size=GRID.n_points
).filter(lambda v: sum(v) > 1e-6)


def density(values):
    return renormalize(Density(GRID, np.array(values)))


@given(positive_profiles)
def test_renormalize_idempotent(values):
    d = density(values)
    np.testing.assert_allclose(renormalize(d).values, d.values, rtol=0, atol=1e-12 * max(1.0, d.values.max()))


@given(positive_profiles, positive_profiles, positive_profiles)
def test_l1_is_a_metric(a, b, c):
    a, b, c = density(a), density(b), density(c)
    ab, bc, ac = l1_distance(a, b), l1_distance(b, c), l1_distance(a, c)
    assert abs(ab - l1_distance(b, a)) < 1e-10
    assert ac <= ab + bc + 1e-10
    assert -1e-12 <= ab <= 2 + 1e-9


@given(st.floats(-2.0, 2.0), st.floats(0.3, 1.0))
def test_gaussian_moments_to_grid_accuracy(mean, std):
    m, v = moments(gaussian_density(Grid(-10.0, 10.0, 801), mean, std))
    assert abs(m - mean) < 1e-8
    assert abs(v - std * std) < 1e-8


@given(positive_profiles, st.floats(-20, 20), st.floats(0, 0.5), st.floats(0.05, 5))
def test_likelihood_weight_keeps_positivity(values, x, eps, delta):
    d = density(values)
    out = likelihood_weight(d, x, eps, Potential.gaussian(delta))
    assert np.all(out.values >= 0)
    assert np.all(out.values <= d.values)


@given(st.floats(-1.0, 1.0), st.floats(0.3, 1.0), st.floats(0.01, 0.2))
def test_diffusion_adds_d_eps_to_variance(mean, std, eps):
    g = Grid(-10.0, 10.0, 801)
    p = ModelParams(1.0, 1.0, min(eps, 0.5))
    d = gaussian_density(g, mean, std)
    out = diffuse(d, eps, p)
    assert abs(out.mass - 1.0) < 1e-8
    _, var = moments(renormalize(out))
    assert abs(var - (std * std + eps)) / (std * std + eps) < 5e-3


@given(st.integers(0, 30), st.integers(0, 2**32 - 1))
def test_chain_run_split_invariance(k, seed):
    p = ModelParams(1.0, 1.0, 0.01)
    obs = ObservationSeries(p.eps, np.random.default_rng(seed).normal(size=30))
    prior = gaussian_density(GRID, 0.0, 1.0)
    v = Potential.gaussian(1.0)
    whole = chain_run(prior, obs, p, v)
    split = chain_run(chain_run(prior, obs[:k], p, v), obs[k:], p, v)
    np.testing.assert_allclose(whole.values, split.values, rtol=0, atol=1e-12)


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_seventeen_digits_round_trip(x):
    assert float(fmt(x)) == x


@given(st.floats(0.0, 0.99), st.floats(0.0, 0.99), st.floats(0.3, 3.0), st.floats(0.3, 3.0))
def test_magnus_scalar_antisymmetric(t1, t2, D, delta):
    p = ModelParams(D, delta, 0.01 * min(1.0, delta / math.sqrt(D)))
    n = int(math.ceil(1.0 / p.eps))
    obs = ObservationSeries(p.eps, np.linspace(-1, 1, n))
    assert magnus_scalar(obs, p, t1, t2) == -magnus_scalar(obs, p, t2, t1)


@given(st.integers(2, 80))
def test_truncated_commutator_identity(n):
    lad = ladder_matrices(n)
    c = commutator(lad.a, lad.a_dag)
    np.testing.assert_allclose(c[:-1, :-1], np.eye(n - 1), atol=1e-12)
    assert abs(c[-1, -1] + (n - 1)) < 1e-12


@given(st.floats(-3, 3), st.integers(0, 2**32 - 1))
def test_aux_integrals_scale_with_evidence(scale, seed):
    p = ModelParams(1.0, 1.0, 0.01)
    x = np.random.default_rng(seed).normal(size=100)
    base = aux_integrals(ObservationSeries(p.eps, x), p, 0.73)
    scaled = aux_integrals(ObservationSeries(p.eps, scale * x), p, 0.73)
    assert math.isclose(scaled.x_prime, scale * base.x_prime, rel_tol=1e-12, abs_tol=1e-14)
    assert math.isclose(scaled.x_dprime, scale * base.x_dprime, rel_tol=1e-12, abs_tol=1e-14)
    assert math.isclose(scaled.f_of_t, scale**2 * base.f_of_t, rel_tol=1e-12, abs_tol=1e-14)
    assert math.isclose(scaled.neg_log_evidence, scale**2 * base.neg_log_evidence, rel_tol=1e-12, abs_tol=1e-14)
