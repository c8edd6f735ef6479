import math

import numpy as np
import pytest

from pathbayes.analytic import analytic_run
from pathbayes.core import Density, ModelParams, gaussian_density, l1_distance, renormalize
from pathbayes.errors import RangeError, TruncationError, VerificationError
from pathbayes.fock import (
    bch_conjugation_check,
    commutator,
    drive_matrix,
    expm,
    fock_run,
    interaction_coefficients,
    ladder_matrices,
    magnus_commutator,
    magnus_matrix_deviation,
    nested_commutator_norm,
    rk4_step,
)
from pathbayes.hermite import FockState, HermiteBasis, hermite_table, project_prior
from pathbayes.kernel import ObservationSeries


def test_ladder_small():
    np.testing.assert_array_equal(ladder_matrices(2).a, [[0.0, 1.0], [0.0, 0.0]])
    lad = ladder_matrices(3)
    assert lad.a[0, 1] == 1.0 and lad.a[1, 2] == pytest.approx(math.sqrt(2))
    assert np.count_nonzero(lad.a) == 2
    np.testing.assert_array_equal(lad.a_dag, lad.a.T)
    with pytest.raises(ValueError):
        ladder_matrices(1)


@pytest.mark.parametrize("n", [2, 5, 32, 64])
def test_truncated_commutator(n):
    lad = ladder_matrices(n)
    expected = np.diag(np.r_[np.ones(n - 1), -(n - 1.0)])
    assert np.max(np.abs(commutator(lad.a, lad.a_dag) - expected)) < 1e-13
    np.testing.assert_allclose(np.diag(lad.number), np.arange(n), atol=1e-13)


def test_expm_against_eigh():
    rng = np.random.default_rng(0)
    for scale in (0.1, 1.0, 4.0):
        m = rng.normal(size=(20, 20))
        m = scale * (m + m.T) / math.sqrt(40)
        evals, evecs = np.linalg.eigh(m)
        ref = (evecs * np.exp(evals)) @ evecs.T
        assert np.max(np.abs(expm(m) - ref)) / np.max(np.abs(ref)) < 1e-10


def test_expm_nilpotent_and_zero():
    np.testing.assert_array_equal(expm(np.zeros((4, 4))), np.eye(4))
    a = ladder_matrices(3).a
    np.testing.assert_allclose(expm(a), np.eye(3) + a + a @ a / 2, atol=1e-15)


def test_bch_conjugation(desk_params):
    assert bch_conjugation_check(desk_params, 0.0, 32) < 1e-15
    assert bch_conjugation_check(desk_params, 0.5, 32) < 1e-8
    with pytest.raises(RangeError):
        bch_conjugation_check(desk_params, 4.5, 32)


def test_bch_error_stays_at_round_off_across_range():
    # the diagonal generator makes the truncated conjugation exact, so no level degrades
    p = ModelParams(1.0, 1.0, 0.01)
    errs = [bch_conjugation_check(p, t, 32) for t in (0.5, 1.0, 2.0, 4.0)]
    assert max(errs) < 1e-12


def test_magnus_scalar_examples(desk_params):
    obs = ObservationSeries(desk_params.eps, np.ones(200))
    assert magnus_commutator(obs, desk_params, 0.3, 0.3) == 0.0
    assert magnus_commutator(obs, desk_params, 0.2, 0.1) == pytest.approx(-math.sinh(0.1), rel=1e-12)
    assert magnus_commutator(obs, desk_params, 0.2, 0.1) == pytest.approx(-0.100167, abs=1e-6)
    assert magnus_commutator(obs, desk_params, 0.1, 0.2) == -magnus_commutator(obs, desk_params, 0.2, 0.1)


def test_magnus_matches_matrix_commutator():
    p = ModelParams(2.0, 0.8, 0.01)
    rng = np.random.default_rng(1)
    obs = ObservationSeries(p.eps, rng.normal(size=100))
    for t1, t2 in [(0.05, 0.9), (0.5, 0.33), (0.99, 0.01)]:
        assert magnus_matrix_deviation(obs, p, t1, t2) < 1e-8
        magnus_commutator(obs, p, t1, t2)


def test_magnus_mismatch_raises(desk_params):
    obs = ObservationSeries(desk_params.eps, np.ones(200))
    with pytest.raises(VerificationError):
        magnus_commutator(obs, desk_params, 0.9, 0.1, tol=-1.0)


def test_magnus_out_of_range(desk_params):
    obs = ObservationSeries(desk_params.eps, np.ones(10))
    with pytest.raises(RangeError):
        magnus_commutator(obs, desk_params, 0.2, 0.01)


def test_nested_commutator_vanishes():
    p = ModelParams(1.0, 1.0, 0.01)
    obs = ObservationSeries(p.eps, np.random.default_rng(2).normal(size=100))
    assert nested_commutator_norm(obs, p, 0.7, 0.2, 0.45) < 1e-10


def test_drive_is_real_and_time_reflected(desk_params):
    lad = ladder_matrices(16)
    h = drive_matrix(0.8, 0.3, desk_params, lad)
    assert h.dtype == np.float64
    np.testing.assert_allclose(h.T, drive_matrix(0.8, -0.3, desk_params, lad), rtol=1e-14)
    h0 = drive_matrix(0.8, 0.0, desk_params, lad)
    np.testing.assert_array_equal(h0, h0.T)


def test_single_step_first_order(desk_params):
    lad = ladder_matrices(24)
    c = np.exp(-0.5 * np.arange(24))
    errs = []
    for h in (1e-3, 5e-4):
        linear = c - h * drive_matrix(1.2, 0.1, desk_params, lad) @ c
        errs.append(np.max(np.abs(rk4_step(c, 1.2, 0.1, h, desk_params, lad) - linear)))
    assert errs[0] < 1e-4
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.02)


def test_free_decay_keeps_ground_state(desk_grid, desk_params):
    b = HermiteBasis.for_params(desk_params, 12)
    f0 = renormalize(Density(desk_grid, hermite_table(b, desk_grid.points)[0]))
    state, _ = project_prior(f0, b)
    d = fock_run(state, ObservationSeries(desk_params.eps, np.zeros(200)), desk_params, desk_grid)
    assert np.max(np.abs(d.values - f0.values)) < 1e-10


def test_fock_matches_closed_form(desk_grid, desk_params):
    rng = np.random.default_rng(6)
    path = np.cumsum(rng.normal(scale=math.sqrt(desk_params.eps), size=200))
    obs = ObservationSeries(desk_params.eps, path + rng.normal(size=200))
    state, _ = project_prior(gaussian_density(desk_grid, 0, 1), HermiteBasis.for_params(desk_params, 48))
    d = fock_run(state, obs, desk_params, desk_grid)
    closed = analytic_run(state, obs, desk_params, desk_grid).density
    assert l1_distance(d, closed) < 1e-2
    assert l1_distance(d, closed) < 1e-6


def test_rk4_self_convergence(desk_grid, desk_params):
    rng = np.random.default_rng(7)
    obs = ObservationSeries(desk_params.eps, rng.normal(size=200))
    state, _ = project_prior(gaussian_density(desk_grid, 0, 1), HermiteBasis.for_params(desk_params, 40))
    ref = interaction_coefficients(state, obs, desk_params, substeps=16)
    errs = np.array([np.max(np.abs(interaction_coefficients(state, obs, desk_params, substeps=k) - ref))
                     for k in (1, 2, 4)])
    np.testing.assert_array_less(12 * np.ones(2), errs[:-1] / errs[1:])


def test_tail_violation(desk_grid, desk_params):
    state, _ = project_prior(gaussian_density(desk_grid, 0, 1), HermiteBasis.for_params(desk_params, 8))
    with pytest.raises(TruncationError):
        fock_run(state, ObservationSeries(desk_params.eps, np.full(200, 6.0)), desk_params, desk_grid)
    bad = FockState(np.r_[np.ones(7), 0.5], state.basis)
    with pytest.raises(TruncationError):
        fock_run(bad, ObservationSeries(desk_params.eps, np.zeros(2)), desk_params, desk_grid)


def test_fock_range_guard(desk_grid):
    p = ModelParams(1.0, 1.0, 0.05)
    state, _ = project_prior(gaussian_density(desk_grid, 0, 1), HermiteBasis.for_params(p, 16))
    with pytest.raises(RangeError):
        fock_run(state, ObservationSeries(p.eps, np.zeros(61)), p, desk_grid)


def test_fock_snapshots(desk_grid, desk_params):
    state, _ = project_prior(gaussian_density(desk_grid, 0, 1), HermiteBasis.for_params(desk_params, 24))
    d, snaps = fock_run(state, ObservationSeries(desk_params.eps, np.ones(9)), desk_params, desk_grid,
                        snapshot_every=4)
    assert [round(t / desk_params.eps) for t, _ in snaps] == [0, 4, 8, 9]
    np.testing.assert_array_equal(snaps[-1][1].values, d.values)
