"""Shared fixtures and randomized instance generators for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from browniangame import build_game, build_org


@pytest.fixture
def two_player_game():
    """Two players, uniform g = 1/3, d = (2, 1): unique interior equilibrium."""
    g = 1 / 3
    return build_game(G=[[0, g], [g, 0]], d=[2, 1], mu=-2, sigma2=2.4, p0=0, X0=4)


@pytest.fixture
def symmetric_tie_game():
    """Zero favorites, uniform g = 1/3: a one-parameter tie segment."""
    g = 1 / 3
    return build_game(G=[[0, g], [g, 0]], d=[0, 0], mu=-2, sigma2=2.4, p0=0, X0=4)


@pytest.fixture
def isolated_game():
    """No coordination motives: each player solves a mean-variance tradeoff."""
    return build_game(G=np.zeros((2, 2)), d=[2, 1], mu=-2, sigma2=2.4, p0=0, X0=4)


@pytest.fixture
def demo_org():
    """Two-division organization mapping to d = (2, 1), coupling 1/3."""
    return build_org(a1=5, a2=3, b=1, c1=1, c2=1, g_org=2 / 3, mu=-0.7,
                     sigma2=9.8, p0=0, X0=15)


def random_game(rng, n, *, uniform_g=False, symmetric=False, max_row_sum=0.6,
                sigma2_range=(0.3, 3.0), spread_d=True, p0_range=(-0.5, 0.5)):
    """A validated random instance with interior equilibria.

    Row sums of G stay below ``max_row_sum`` so best-response iteration
    contracts comfortably; X0 sits above the independent-noise outcomes so
    equilibria are interior.
    """
    if uniform_g:
        g = rng.uniform(0.05, max_row_sum / max(n - 1, 1))
        G = np.full((n, n), g)
    else:
        G = rng.uniform(0.0, max_row_sum / max(n - 1, 1), size=(n, n))
        if symmetric:
            G = 0.5 * (G + G.T)
    np.fill_diagonal(G, 0.0)
    if spread_d:
        d = np.sort(rng.uniform(0.5, 3.0, size=n))[::-1]
    else:
        d = rng.uniform(0.5, 1.5, size=n)
    mu = -rng.uniform(0.5, 2.0)
    sigma2 = rng.uniform(*sigma2_range)
    k = sigma2 / (2 * abs(mu))
    M = np.linalg.inv(np.eye(n) - G)
    p0 = rng.uniform(*p0_range)
    X0 = float(np.max(M @ (d + k))) + rng.uniform(0.5, 2.0)
    return build_game(G=G, d=d, mu=mu, sigma2=sigma2, p0=p0, X0=X0)


def random_ordered_uniform_game(rng, n, *, max_row_sum=0.6):
    """Uniform-g instance whose equilibrium is interior and strictly ordered.

    Favorite-outcome gaps exceed ``2 g k``, which keeps the followership
    pattern strict in every equilibrium.
    """
    g = rng.uniform(0.05, max_row_sum / max(n - 1, 1))
    G = np.full((n, n), g)
    np.fill_diagonal(G, 0.0)
    mu = -rng.uniform(0.5, 2.0)
    sigma2 = rng.uniform(0.3, 3.0)
    k = sigma2 / (2 * abs(mu))
    base = rng.uniform(0.5, 1.0)
    gaps = 2 * g * k + rng.uniform(0.1, 0.8, size=n - 1)
    d = base + np.concatenate([[0.0], np.cumsum(gaps)])[::-1].copy()
    M = np.linalg.inv(np.eye(n) - G)
    p0 = rng.uniform(-0.5, 0.5)
    X0 = float(np.max(M @ (d + k))) + rng.uniform(0.5, 2.0)
    return build_game(G=G, d=d, mu=mu, sigma2=sigma2, p0=p0, X0=X0)


def random_profile(rng, game, width=2.0):
    return game.p0 + rng.uniform(0.0, width, size=game.n)


def polish_fixed_point(game, start, sweeps=200, tol=1e-11):
    """Round-robin best-response sweeps from ``start``.

    Sequential updates avoid the two-cycles that simultaneous best response
    exhibits inside tie bands (where each player would keep jumping onto the
    other's policy).  Returns the final profile and whether it is fixed.
    """
    from browniangame import best_response

    p = np.asarray(start, dtype=float).copy()
    for _ in range(sweeps):
        delta = 0.0
        for i in range(game.n):
            new = best_response(game, i, p).policy
            delta = max(delta, abs(new - p[i]))
            p[i] = new
        if delta < tol:
            return p, True
    return p, False


def two_player_br_tables(game, step):
    """Vectorized full-grid best responses for a two-player game.

    Returns the shared policy grid and, per player, the own grid argmax of
    the exact payoff against every opponent grid value.  Brute force only:
    nothing here reuses the regime-scanning solver.
    """
    from browniangame import policy_upper_bound

    hi = policy_upper_bound(game) + step
    grid = np.arange(game.p0, hi + 0.5 * step, step)
    tau = grid - game.p0
    tables = []
    for i in (0, 1):
        j = 1 - i
        m_own = game.X0 + game.mu[i] * tau
        m_opp = game.X0 + game.mu[j] * tau
        g = float(game.G[i, j])
        s_own = float(game.sigma[i, i])
        s_opp = float(game.sigma[j, j])
        s_x = float(game.sigma[i, j])
        br = np.empty(grid.size)
        chunk = max(1, 4_000_000 // grid.size)
        for lo in range(0, grid.size, chunk):
            opp = slice(lo, min(lo + chunk, grid.size))
            gap = game.d[i] + g * m_opp[opp][None, :] - m_own[:, None]
            u = (
                -gap * gap
                - (s_own * tau)[:, None]
                - (g * g * s_opp * tau[opp])[None, :]
                + 2.0 * g * s_x * np.minimum(tau[:, None], tau[opp][None, :])
            )
            br[opp] = grid[np.argmax(u, axis=0)]
        tables.append(br)
    return grid, tables[0], tables[1]


def two_player_grid_fixed_points(game, step=1e-3):
    """Grid profiles fixed (within a step) under simultaneous best response."""
    grid, br0, br1 = two_player_br_tables(game, step)
    idx1 = np.clip(np.round((br1 - game.p0) / step).astype(int), 0, grid.size - 1)
    resid = np.abs(br0[idx1] - grid)
    hits = np.flatnonzero(resid <= 2 * step)
    return [np.array([grid[a], br1[a]]) for a in hits]
