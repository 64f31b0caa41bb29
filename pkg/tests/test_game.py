"""Game construction, validation, derived quantities, and outcome moments."""

import numpy as np
import pytest

from browniangame import (
    ValidationError,
    build_game,
    exploration_load,
    followership_consistent,
    followership_roles,
    followership_skew_complementary,
    outcome_moments,
    validate_profile,
)
from conftest import random_game


def test_derived_quantities(two_player_game):
    game = two_player_game
    assert game.k == pytest.approx(0.6, abs=1e-12)
    np.testing.assert_allclose(game.beta, [2.625, 1.875], atol=1e-12)
    np.testing.assert_allclose(game.u, [1.5, 1.5], atol=1e-12)
    np.testing.assert_allclose(game.K, 0.6 * np.ones((2, 2)), atol=1e-12)
    eye = np.eye(2)
    np.testing.assert_allclose((eye - game.G) @ game.M, eye, atol=1e-12)


def test_zero_network_is_identity():
    game = build_game(G=np.zeros((3, 3)), d=[2, 1, 0.5], mu=-1, sigma2=1, X0=5)
    np.testing.assert_allclose(game.M, np.eye(3), atol=1e-14)
    np.testing.assert_allclose(game.beta, [2, 1, 0.5], atol=1e-14)


def test_uniform_three_player_centralities():
    g = 1 / 3
    G = np.full((3, 3), g)
    np.fill_diagonal(G, 0)
    game = build_game(G=G, d=[1, 1, 1], mu=-1, sigma2=1, X0=10)
    np.testing.assert_allclose(game.u, [3, 3, 3], atol=1e-10)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(G=[[0, -0.1], [0.2, 0]], d=[1, 1], mu=-1, sigma2=1),
        dict(G=[[0.1, 0.2], [0.2, 0]], d=[1, 1], mu=-1, sigma2=1),
        dict(G=[[0, 0.2], [0.2, 0]], d=[1, 1], mu=0.5, sigma2=1),
        dict(G=[[0, 0.2], [0.2, 0]], d=[1, 1], mu=-1, sigma2=0.0),
        dict(G=[[0, 1.0], [1.0, 0]], d=[1, 1], mu=-1, sigma2=1),  # singular I - G
        dict(G=[[0, 0.2], [0.2, 0]], d=[1, 1], mu=-1, sigma2=1, mu_vec=[-1, 0.1]),
        dict(G=[[0, 0.2], [0.2, 0]], d=[1, 1], mu=-1, sigma2=1,
             sigma_pairs=[[1, 0.5], [0.4, 1]]),  # asymmetric
        dict(G=[[0, 0.2], [0.2, 0]], d=[1, 1], mu=-1, sigma2=1,
             sigma_pairs=[[0.0, 0.0], [0.0, 1.0]]),  # zero own variance
    ],
)
def test_invalid_parameters_rejected(kwargs):
    with pytest.raises(ValidationError):
        build_game(**kwargs)


def test_moments_match_closed_forms(two_player_game):
    mom = outcome_moments(two_player_game, [0.5, 1.0])
    np.testing.assert_allclose(mom.mean, [3.0, 2.0], atol=1e-12)
    np.testing.assert_allclose(np.diag(mom.cov), [1.2, 2.4], atol=1e-12)
    assert mom.cov[0, 1] == pytest.approx(1.2, abs=1e-12)


def test_status_quo_profile_is_certain(two_player_game):
    mom = outcome_moments(two_player_game, [0.0, 0.0])
    np.testing.assert_allclose(mom.mean, [4.0, 4.0], atol=1e-12)
    np.testing.assert_allclose(mom.cov, 0.0, atol=1e-15)


def test_generalized_independent_noise_has_zero_cross_cov():
    g = 1 / 3
    game = build_game(G=[[0, g], [g, 0]], d=[2, 1], mu=-2, sigma2=2.4,
                      sigma_pairs=[[2.4, 0.0], [0.0, 2.4]], X0=4)
    mom = outcome_moments(game, [0.5, 1.0])
    assert mom.cov[0, 1] == 0.0
    assert game.generalized
    assert game.k is None


def test_moments_are_psd_and_permutation_consistent():
    rng = np.random.default_rng(11)
    for _ in range(20):
        n = int(rng.integers(2, 5))
        game = random_game(rng, n)
        p = game.p0 + rng.uniform(0, 2, size=n)
        mom = outcome_moments(game, p)
        assert np.min(np.linalg.eigvalsh(mom.cov)) >= -1e-9
        perm = rng.permutation(n)
        gp = build_game(G=game.G[np.ix_(perm, perm)], d=game.d[perm],
                        mu=float(game.mu[0]), sigma2=game.sigma2,
                        p0=game.p0, X0=game.X0)
        mom_p = outcome_moments(gp, p[perm])
        np.testing.assert_allclose(mom_p.mean, mom.mean[perm], atol=1e-12)
        np.testing.assert_allclose(mom_p.cov, mom.cov[np.ix_(perm, perm)], atol=1e-12)


def test_covariance_concave_nondecreasing_in_each_policy(two_player_game):
    grid = np.linspace(0.0, 2.0, 21)
    vals = np.array(
        [outcome_moments(two_player_game, [t, 0.9]).cov[0, 1] for t in grid]
    )
    diffs = np.diff(vals)
    assert np.all(diffs >= -1e-12)
    assert np.all(np.diff(diffs) <= 1e-12)


def test_profile_validation(two_player_game):
    with pytest.raises(ValidationError):
        validate_profile(two_player_game, [-0.5, 0.2])
    with pytest.raises(ValidationError):
        validate_profile(two_player_game, [0.1, np.inf])
    with pytest.raises(ValidationError):
        validate_profile(two_player_game, [0.1])
    out = validate_profile(two_player_game, [-1e-12, 0.3])
    assert out[0] == two_player_game.p0


def test_game_arrays_immutable(two_player_game):
    with pytest.raises(ValueError):
        two_player_game.G[0, 1] = 0.5
    with pytest.raises(ValueError):
        two_player_game.derived.M[0, 0] = 2.0


def test_followership_predicates():
    p = np.array([0.2, 0.7, 0.7])
    F = np.array([[0.0, 1.0, 1.0], [0.0, 0.0, 0.3], [0.0, 0.3, 0.0]])
    assert followership_consistent(p, F)
    assert not followership_skew_complementary(F)  # tie entries sum to 0.6
    F_skew = F.copy()
    F_skew[2, 1] = 0.7
    assert followership_consistent(p, F_skew)
    assert followership_skew_complementary(F_skew)
    bad = F.copy()
    bad[0, 1] = 0.2  # strictly below an opponent but not a full follower
    assert not followership_consistent(p, bad)


def test_followership_loads(two_player_game):
    F = np.array([[0.0, 1.0], [0.0, 0.0]])
    np.testing.assert_allclose(followership_roles(two_player_game.G, F), [1 / 3, 0.0])
    np.testing.assert_allclose(exploration_load(two_player_game, F), [0.2, 0.0])
