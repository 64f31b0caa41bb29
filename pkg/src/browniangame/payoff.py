"""Exact expected utilities, their kink structure, and covariance kernels.

A player's expected utility decomposes into a squared distance between the
expected target and her expected outcome, minus her own outcome variance,
minus the variance of the network-weighted opponent bundle, plus a covariance
bonus ``2 sum_j g_ij sigma_ij min(p_i - p0, p_j - p0)``.  The bonus is the
only term that couples policies nonsmoothly: its min-structure puts a concave
kink in a player's payoff at every opponent policy.

The module also evaluates the game's potential function (exact up to the
factor two that makes it an exact potential) and provides a grid-based
increasing-differences check for covariance kernels, used to separate kernels
that preserve strategic complementarities from those that do not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .game import DEFAULT_TOL, NetworkGame, outcome_moments, validate_profile


@dataclass(frozen=True)
class PayoffBreakdown:
    """Additive pieces of one player's expected utility.

    ``total = mean_term - own_var - cross_var + cov_bonus``.
    """

    mean_term: float
    own_var: float
    cross_var: float
    cov_bonus: float
    total: float


def payoff_breakdown(game: NetworkGame, p, i: int, tol: float = DEFAULT_TOL) -> PayoffBreakdown:
    """Closed-form expected utility of player ``i`` at profile ``p``, itemized."""
    moments = outcome_moments(game, p, tol)
    m, cov = moments.mean, moments.cov
    g = game.G[i]
    gap = game.d[i] + g @ m - m[i]
    mean_term = -float(gap * gap)
    own_var = float(cov[i, i])
    cross_var = float(g @ cov @ g)
    cov_bonus = float(2.0 * g @ cov[i])
    return PayoffBreakdown(
        mean_term=mean_term,
        own_var=own_var,
        cross_var=cross_var,
        cov_bonus=cov_bonus,
        total=mean_term - own_var - cross_var + cov_bonus,
    )


def expected_utility(game: NetworkGame, p, i: int, tol: float = DEFAULT_TOL) -> float:
    """Closed-form expected utility of player ``i`` at profile ``p``."""
    return payoff_breakdown(game, p, i, tol).total


def own_policy_utilities(game: NetworkGame, i: int, p, grid) -> np.ndarray:
    """Vectorized ``U_i`` along player ``i``'s own policy.

    ``p`` fixes the opponents (entry ``i`` is ignored); ``grid`` is an array
    of candidate policies for ``i``.  Used by brute-force oracles and figure
    rendering, so it avoids per-point profile construction.
    """
    p = validate_profile(game, p)
    t = np.asarray(grid, dtype=float)
    tau_own = t - game.p0
    tau_others = p - game.p0
    m_others = game.X0 + game.mu * tau_others
    m_own = game.X0 + game.mu[i] * tau_own

    g = game.G[i].copy()
    g[i] = 0.0
    target_const = game.d[i] + g @ m_others - g[i] * m_others[i]
    gap = target_const - m_own

    own_var = game.sigma[i, i] * tau_own

    # Var of the weighted opponent bundle does not involve player i's policy.
    cov_others = game.sigma * np.minimum.outer(tau_others, tau_others)
    mask = np.arange(game.n) != i
    gm = g[mask]
    cross_var = float(gm @ cov_others[np.ix_(mask, mask)] @ gm)

    w = 2.0 * g * game.sigma[i]
    bonus = np.minimum(tau_own[..., None], tau_others[None, :]) @ w
    return -(gap * gap) - own_var - cross_var + bonus


@dataclass(frozen=True)
class Kink:
    """A concave kink of ``U_i`` in the own policy: location and the drop
    ``left slope - right slope`` (equal to ``2 sum g_ij sigma_ij`` over the
    opponents parked at that location)."""

    location: float
    slope_drop: float


def payoff_kinks(game: NetworkGame, p, i: int, tol: float = DEFAULT_TOL) -> list[Kink]:
    """Kinks of player ``i``'s payoff in her own policy, opponents fixed at ``p``.

    Opponents sharing a policy are merged into a single kink with the summed
    slope drop; policies at the status quo produce no interior kink.
    """
    p = validate_profile(game, p, tol)
    weights: dict[float, float] = {}
    locations: list[float] = []
    for j in range(game.n):
        if j == i or p[j] <= game.p0 + tol:
            continue
        w = 2.0 * game.G[i, j] * game.sigma[i, j]
        if w == 0.0:
            continue
        for loc in locations:
            if abs(loc - p[j]) <= tol:
                weights[loc] += w
                break
        else:
            locations.append(float(p[j]))
            weights[float(p[j])] = w
    return [Kink(location=loc, slope_drop=weights[loc]) for loc in sorted(weights)]


def potential_value(game: NetworkGame, p, tol: float = DEFAULT_TOL) -> float:
    """Exact value of the game's potential function at profile ``p``.

    Defined only for symmetric interaction matrices.  Twice this function is
    an exact potential, so all equilibrium and maximizer logic compares values
    (argmax is invariant to the factor).
    """
    _require_symmetric(game, tol)
    moments = outcome_moments(game, p, tol)
    m, cov = moments.mean, moments.cov
    second = m * m + np.diag(cov)
    cross = np.outer(m, m) + cov
    return float(game.d @ m - 0.5 * second.sum() + 0.5 * np.sum(game.G * cross))


def potential_batch(game: NetworkGame, profiles: np.ndarray) -> np.ndarray:
    """Potential values for a batch of profiles (rows), vectorized."""
    _require_symmetric(game, DEFAULT_TOL)
    P = np.asarray(profiles, dtype=float)
    tau = P - game.p0
    m = game.X0 + tau * game.mu
    vals = m @ game.d - 0.5 * ((m * m) @ np.ones(game.n) + tau @ np.diag(game.sigma))
    vals = vals + 0.5 * np.einsum("si,ij,sj->s", m, game.G, m)
    for i in range(game.n):
        for j in range(i + 1, game.n):
            w = game.G[i, j] * game.sigma[i, j]
            if w != 0.0:
                vals = vals + w * np.minimum(tau[:, i], tau[:, j])
    return vals


def _require_symmetric(game: NetworkGame, tol: float) -> None:
    scale = max(1.0, float(np.max(np.abs(game.G))))
    if np.max(np.abs(game.G - game.G.T)) > tol * scale:
        raise ValidationError("the potential is defined only for symmetric G")


# ---------------------------------------------------------------------------
# Covariance kernels and the increasing-differences (supermodularity) check
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CovKernel:
    """A symmetric covariance kernel ``c(p, q)`` on policies.

    ``kind`` is one of ``brownian-min``, ``polynomial-integral`` (with integer
    order parameter) and ``squared-exponential`` (with a length scale).
    """

    kind: str
    param: float | None = None

    def __call__(self, p, q) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        if self.kind == "brownian-min":
            return np.minimum(p, q)
        if self.kind == "squared-exponential":
            ls = float(self.param)
            diff = (p - q) / ls
            return np.exp(-diff * diff)
        if self.kind == "polynomial-integral":
            return _poly_integral(p, q, int(self.param))
        raise ValidationError(f"unknown kernel kind {self.kind!r}")


def brownian_min_kernel() -> CovKernel:
    """The Brownian kernel ``c(p, q) = min(p, q)`` on nonnegative policies."""
    return CovKernel(kind="brownian-min")


def squared_exponential_kernel(length_scale: float = 1.0) -> CovKernel:
    """``c(p, q) = exp(-((p - q) / length_scale)^2)``; not supermodular."""
    if length_scale <= 0:
        raise ValidationError("length_scale must be positive")
    return CovKernel(kind="squared-exponential", param=float(length_scale))


def polynomial_integral_kernel(m: int = 2) -> CovKernel:
    """``c(p, q) = int_0^1 ((p-u)_+ (q-u)_+)^(m-1) / (m-1)! du`` for m in 1..4.

    ``m = 1`` reduces to ``min(p, q, 1)``; all orders are supermodular.
    """
    if not 1 <= int(m) <= 4:
        raise ValidationError("polynomial-integral order m must be in 1..4")
    return CovKernel(kind="polynomial-integral", param=int(m))


def _poly_integral(p, q, m: int) -> np.ndarray:
    p, q = np.broadcast_arrays(np.asarray(p, float), np.asarray(q, float))
    out = np.zeros(p.shape)
    it = np.nditer([p, q], flags=["multi_index"])
    for a, b in it:
        out[it.multi_index] = _poly_integral_scalar(float(a), float(b), m)
    return out if out.shape else float(out)


def _poly_integral_scalar(p: float, q: float, m: int) -> float:
    w = min(p, q, 1.0)
    if w <= 0:
        return 0.0
    if m == 1:
        return w
    # integrate the polynomial (p-u)^(m-1) (q-u)^(m-1) exactly on [0, w]
    one = np.polynomial.polynomial
    base_p = one.polypow([p, -1.0], m - 1)
    base_q = one.polypow([q, -1.0], m - 1)
    prod = one.polymul(base_p, base_q)
    anti = one.polyint(prod)
    return float(one.polyval(w, anti)) / math.factorial(m - 1)


@dataclass(frozen=True)
class IdCheckResult:
    """Outcome of the grid increasing-differences scan.

    On failure ``witness`` holds the first violating quadruple
    ``(p, p_hi, q, q_hi)`` in lexicographic scan order together with the
    (negative) double difference.
    """

    passed: bool
    witness: tuple[float, float, float, float] | None
    double_difference: float | None
    checked: int


def increasing_differences_check(kernel: CovKernel, grid, tol: float = DEFAULT_TOL) -> IdCheckResult:
    """Check ``c(p', q') - c(p, q') - c(p', q) + c(p, q) >= -tol`` on a grid.

    All quadruples with ``p < p'`` and ``q < q'`` drawn from the grid are
    scanned; the first violation (if any) is returned as a witness.
    """
    g = np.unique(np.asarray(grid, dtype=float))
    if g.size < 2:
        raise ValidationError("the grid needs at least two distinct points")
    C = kernel(g[:, None], g[None, :])
    checked = 0
    for a in range(g.size - 1):
        for b in range(a + 1, g.size):
            for c in range(g.size - 1):
                for e in range(c + 1, g.size):
                    dd = C[b, e] - C[a, e] - C[b, c] + C[a, c]
                    checked += 1
                    if dd < -tol:
                        return IdCheckResult(
                            passed=False,
                            witness=(float(g[a]), float(g[b]), float(g[c]), float(g[e])),
                            double_difference=float(dd),
                            checked=checked,
                        )
    return IdCheckResult(passed=True, witness=None, double_difference=None, checked=checked)
