"""Coordination games on a common Brownian outcome function.

Players choose policies on ``[p0, inf)``.  A latent outcome function maps
each policy to an outcome; only its law is known -- a Brownian motion with
strictly negative drift pinned at the status quo ``(p0, X0)``.  Expected
outcomes therefore fall linearly in the policy while outcome variance grows
linearly with the distance from the status-quo policy, and the covariance
between two players' outcomes is controlled by whichever policy is closer to
the status quo.  Each player wants her own outcome near a target that mixes
a fixed favorite outcome with her network-weighted view of the opponents'
outcomes.

This module owns the validated game description, the derived linear-algebra
quantities used everywhere else, and the exact Gaussian moments of the
outcome vector at a policy profile.  A generalized mode with per-player
drifts and a per-pair covariance scale matrix nests the main model as the
special case ``sigma[i, j] = sigma2`` and ``mu[i] = mu``.

All returned objects are immutable (arrays are marked read-only) and safe to
share across threads or worker processes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SolverError, ValidationError

#: Absolute tolerance used for equality tests in policy and outcome space.
DEFAULT_TOL = 1e-9

#: Reject games whose interaction matrix makes I - G this ill conditioned.
COND_LIMIT = 1e12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DerivedQuantities:
    """Linear-algebra quantities implied by the game parameters.

    ``M`` is ``(I - G)^{-1}``; ``beta = M @ d`` are the no-uncertainty
    equilibrium expected outcomes (weighted network centralities);
    ``k = sigma2 / (2 |mu|)`` measures how fast variance accrues per unit of
    expected-outcome movement (``None`` in generalized mode where it is not a
    single scalar); ``K[i, j] = -sigma[i, j] / (2 mu[i])`` is its pairwise
    counterpart; ``u = M @ 1`` are the unweighted centralities.
    """

    M: np.ndarray
    beta: np.ndarray
    k: float | None
    K: np.ndarray
    u: np.ndarray


@dataclass(frozen=True)
class NetworkGame:
    """A validated game: players, network, favorites, and the environment.

    ``mu`` and ``sigma`` are stored in generalized form (a drift vector and a
    pairwise scale matrix); ``generalized`` records whether the caller
    actually supplied heterogeneous values.
    """

    n: int
    G: np.ndarray
    d: np.ndarray
    mu: np.ndarray
    sigma: np.ndarray
    sigma2: float
    p0: float
    X0: float
    generalized: bool
    derived: DerivedQuantities

    @property
    def k(self) -> float | None:
        return self.derived.k

    @property
    def M(self) -> np.ndarray:
        return self.derived.M

    @property
    def beta(self) -> np.ndarray:
        return self.derived.beta

    @property
    def K(self) -> np.ndarray:
        return self.derived.K

    @property
    def u(self) -> np.ndarray:
        return self.derived.u


@dataclass(frozen=True)
class OutcomeMoments:
    """Exact mean vector and covariance matrix of the outcomes at a profile."""

    mean: np.ndarray
    cov: np.ndarray


def build_game(
    G,
    d,
    mu,
    sigma2,
    p0: float = 0.0,
    X0: float = 0.0,
    *,
    sigma_pairs=None,
    mu_vec=None,
    cond_limit: float = COND_LIMIT,
) -> NetworkGame:
    """Validate raw parameters and assemble a :class:`NetworkGame`.

    Generalized mode is activated iff ``sigma_pairs`` (a symmetric
    nonnegative matrix of pairwise covariance scales) or ``mu_vec`` (a vector
    of strictly negative per-player drifts) is supplied.

    Raises :class:`ValidationError` on negative interaction weights, nonzero
    diagonal, drift >= 0, nonpositive variance, or an ``I - G`` whose
    condition number exceeds ``cond_limit``.
    """
    G = np.atleast_2d(np.asarray(G, dtype=float))
    n = G.shape[0]
    if G.shape != (n, n):
        raise ValidationError(f"G must be square, got shape {G.shape}")
    d = np.asarray(d, dtype=float).reshape(-1)
    if d.shape != (n,):
        raise ValidationError(f"d must have length {n}, got {d.shape}")
    if not np.all(np.isfinite(G)) or not np.all(np.isfinite(d)):
        raise ValidationError("G and d must be finite")
    if np.any(G < 0):
        raise ValidationError("interaction weights g_ij must be nonnegative")
    if np.any(np.diag(G) != 0):
        raise ValidationError("interaction matrix must have a zero diagonal")

    sigma2 = float(sigma2)
    if not np.isfinite(sigma2) or sigma2 <= 0:
        raise ValidationError("sigma2 must be a strictly positive scalar")
    p0 = float(p0)
    X0 = float(X0)
    if not (np.isfinite(p0) and np.isfinite(X0)):
        raise ValidationError("p0 and X0 must be finite")

    generalized = sigma_pairs is not None or mu_vec is not None

    if mu_vec is not None:
        mu_arr = np.asarray(mu_vec, dtype=float).reshape(-1)
        if mu_arr.shape != (n,):
            raise ValidationError(f"mu_vec must have length {n}")
    else:
        mu_arr = np.full(n, float(mu))
    if not np.all(np.isfinite(mu_arr)) or np.any(mu_arr >= 0):
        raise ValidationError("drift mu must be strictly negative")

    if sigma_pairs is not None:
        sigma = np.atleast_2d(np.asarray(sigma_pairs, dtype=float))
        if sigma.shape != (n, n):
            raise ValidationError(f"sigma_pairs must be {n}x{n}")
        if not np.all(np.isfinite(sigma)):
            raise ValidationError("sigma_pairs must be finite")
        if np.max(np.abs(sigma - sigma.T)) > 1e-12 * max(1.0, np.max(np.abs(sigma))):
            raise ValidationError("sigma_pairs must be symmetric")
        if np.any(sigma < 0):
            raise ValidationError("pairwise covariance scales must be nonnegative")
        if np.any(np.diag(sigma) <= 0):
            raise ValidationError("own-variance scales sigma_ii must be positive")
    else:
        sigma = np.full((n, n), sigma2)

    eye = np.eye(n)
    if np.linalg.cond(eye - G) > cond_limit:
        raise ValidationError("I - G is numerically singular")
    M = np.linalg.solve(eye - G, eye)
    # guard against a silently bad solve; cheap for the sizes we handle
    if np.max(np.abs((eye - G) @ M - eye)) > 1e-8:
        raise SolverError("inversion of I - G failed its residual check")

    k = None if generalized else sigma2 / (2.0 * abs(float(mu)))
    K = -sigma / (2.0 * mu_arr[:, None])
    derived = DerivedQuantities(
        M=_frozen(M),
        beta=_frozen(M @ d),
        k=k,
        K=_frozen(K),
        u=_frozen(M @ np.ones(n)),
    )
    return NetworkGame(
        n=n,
        G=_frozen(G),
        d=_frozen(d),
        mu=_frozen(mu_arr),
        sigma=_frozen(sigma),
        sigma2=sigma2,
        p0=p0,
        X0=X0,
        generalized=generalized,
        derived=derived,
    )


def validate_profile(game: NetworkGame, p, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Coerce ``p`` to a float vector and enforce the policy-space lower bound."""
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.shape != (game.n,):
        raise ValidationError(f"profile must have length {game.n}, got {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValidationError("policies must be finite")
    if np.any(p < game.p0 - tol):
        raise ValidationError(f"policies must lie in [{game.p0}, inf)")
    return np.maximum(p, game.p0)


def expected_outcomes(game: NetworkGame, p) -> np.ndarray:
    """Mean outcome per player: ``X0 + mu_i (p_i - p0)``."""
    p = validate_profile(game, p)
    return game.X0 + game.mu * (p - game.p0)


def policy_for_outcome(game: NetworkGame, mean, i: int | None = None) -> np.ndarray | float:
    """Invert the drift line: the policy at which player ``i`` expects ``mean``."""
    mu = game.mu if i is None else game.mu[i]
    return game.p0 + (game.X0 - np.asarray(mean, dtype=float)) / (-mu)


def outcome_moments(game: NetworkGame, p, tol: float = DEFAULT_TOL) -> OutcomeMoments:
    """Exact joint-Gaussian moments of the outcome vector at profile ``p``.

    The covariance between two players' outcomes is the pairwise scale times
    the smaller distance from the status quo, which makes the matrix positive
    semidefinite by construction in the main model (asserted here).  In
    generalized mode the caller may supply scales for which the min-structure
    is not a valid covariance; consumers that need PSD check it themselves.
    """
    p = validate_profile(game, p, tol)
    tau = p - game.p0
    mean = game.X0 + game.mu * tau
    cov = game.sigma * np.minimum.outer(tau, tau)
    if not game.generalized:
        lo = float(np.min(np.linalg.eigvalsh(cov))) if game.n > 1 else float(cov[0, 0])
        if lo < -tol * max(1.0, float(np.max(np.abs(cov)))):
            raise SolverError("outcome covariance lost positive semidefiniteness")
    return OutcomeMoments(mean=_frozen(mean), cov=_frozen(cov))


# ---------------------------------------------------------------------------
# Followership matrices
#
# F[i, j] in [0, 1] records whether player i acts as the follower of j (the
# one with the policy closer to the status quo).  Strict policy orderings pin
# the entries; ties leave them free, which is exactly the slack the
# equilibrium characterization exploits.
# ---------------------------------------------------------------------------


def followership_consistent(p, F, p0: float | None = None, tol: float = DEFAULT_TOL) -> bool:
    """True iff ``F`` is consistent with profile ``p``: ``p_i < p_j`` forces
    ``F[i, j] = 1`` and ``F[j, i] = 0``; tied pairs are unconstrained."""
    p = np.asarray(p, dtype=float).reshape(-1)
    F = np.asarray(F, dtype=float)
    n = p.size
    if F.shape != (n, n):
        return False
    if np.any(F < -tol) or np.any(F > 1 + tol):
        return False
    below = p[:, None] < p[None, :] - tol
    return bool(np.all(F[below] >= 1 - tol) and np.all(F[below.T] <= tol))


def followership_skew_complementary(F, tol: float = DEFAULT_TOL) -> bool:
    """True iff ``F[i, j] + F[j, i] = 1`` for every off-diagonal pair."""
    F = np.asarray(F, dtype=float)
    s = F + F.T
    off = ~np.eye(F.shape[0], dtype=bool)
    return bool(np.all(np.abs(s[off] - 1.0) <= tol))


def followership_roles(G, F) -> np.ndarray:
    """Average followership load per player: row sums of ``G * F``."""
    return (np.asarray(G, dtype=float) * np.asarray(F, dtype=float)).sum(axis=1)


def exploration_load(game: NetworkGame, F) -> np.ndarray:
    """Pairwise-scaled followership load: row sums of ``G * K * F``.

    This is the quantity that shifts a player's interior first-order
    condition: the expected-outcome target drops by twice this load.
    """
    return (game.G * game.K * np.asarray(F, dtype=float)).sum(axis=1)
