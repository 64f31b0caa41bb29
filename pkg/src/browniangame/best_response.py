"""Exact single-player best responses via followership-regime scanning.

A player's payoff in her own policy is strictly quasiconcave and piecewise
smooth, with kinks exactly at the opponents' policies.  On each smooth piece
the follower pattern toward every opponent is fixed, so the interior optimum
solves a linear equation in the expected outcome:

    E X_i = d_i + sum_j g_ij E X_j + K_ii - 2 * sum_j g_ij K_ij f_ij,

with ``f_ij = 1`` on opponents above the piece and ``0`` below.  The scan
walks the pieces in increasing policy order, checks each kink (where the tied
opponents' ``f`` entries are free in a box, so optimality reduces to an
interval-membership test for the required load), and the status-quo corner
(inequality version).  Strict quasiconcavity means exactly one regime admits
a solution up to tolerance; the acceptance windows overlap slightly and the
exact-utility argmax over the admitted candidates settles boundary cases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SolverError
from .game import DEFAULT_TOL, NetworkGame, validate_profile
from .payoff import expected_utility, own_policy_utilities


@dataclass(frozen=True)
class BestResponseResult:
    """The optimal policy together with its supporting regime.

    ``regime`` is the player's followership row at the optimum (own entry 0);
    ``at_corner`` marks the status-quo solution, ``at_kink`` holds the lowest
    opponent index whose policy the optimum lands on (``None`` otherwise).
    """

    policy: float
    expected_outcome: float
    regime: np.ndarray
    at_corner: bool
    at_kink: int | None
    utility: float


def _fill_tie_row(required: float, weights: np.ndarray, members: np.ndarray) -> np.ndarray:
    """Lexicographically minimal box-constrained fill of a tie load.

    Raises entries in increasing player order until ``sum w_j f_j`` meets
    ``required`` (clipped into the feasible box first).
    """
    f = np.zeros(weights.shape[0])
    total = float(weights[members].sum())
    remaining = min(max(required, 0.0), total)
    for j in np.flatnonzero(members):
        w = float(weights[j])
        if w <= 0:
            continue
        take = min(1.0, remaining / w)
        f[j] = take
        remaining -= take * w
        if remaining <= 1e-15 * max(1.0, total):
            break
    return f


def best_response(game: NetworkGame, i: int, p, tol: float = DEFAULT_TOL) -> BestResponseResult:
    """Best response of player ``i`` to the opponents' policies in ``p``.

    ``p`` is a full-length profile; entry ``i`` is ignored.
    """
    p = validate_profile(game, p, tol)
    mu_i = game.mu[i]
    others = np.arange(game.n) != i
    m = game.X0 + game.mu * (p - game.p0)
    base = float(game.d[i] + game.G[i] @ np.where(others, m, 0.0) + game.K[i, i])
    w = game.G[i] * game.K[i]  # per-opponent load weights, own entry is zero

    # distinct opponent policy levels strictly above the status quo
    levels: list[float] = []
    for j in range(game.n):
        if not others[j] or p[j] <= game.p0 + tol:
            continue
        if not any(abs(p[j] - t) <= tol for t in levels):
            levels.append(float(p[j]))
    levels.sort()

    candidates: list[BestResponseResult] = []

    def load_above(threshold: float) -> float:
        sel = others & (p > threshold + tol)
        return float(w[sel].sum())

    # corner: opponents tied at the status quo contribute at their minimal load
    corner_rhs = base - 2.0 * load_above(game.p0)
    if game.X0 <= corner_rhs + tol:
        f = np.where(others & (p > game.p0 + tol), 1.0, 0.0)
        candidates.append(
            BestResponseResult(
                policy=game.p0,
                expected_outcome=game.X0,
                regime=f,
                at_corner=True,
                at_kink=None,
                utility=float("nan"),
            )
        )

    # segments between consecutive levels (and beyond the last one); the
    # acceptance windows carry +-tol slack so they overlap the kink checks
    # instead of leaving tolerance gaps -- the exact-utility argmax below
    # resolves any near-duplicate candidates
    bounds = [game.p0] + levels + [np.inf]
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        sel_above = others & (p >= hi - tol) if np.isfinite(hi) else np.zeros(game.n, dtype=bool)
        target = base - 2.0 * float(w[sel_above].sum())
        policy = game.p0 + (game.X0 - target) / (-mu_i)
        if lo - tol <= policy and (not np.isfinite(hi) or policy <= hi + tol):
            policy = max(policy, lo)
            if np.isfinite(hi):
                policy = min(policy, hi)
            target = game.X0 + mu_i * (policy - game.p0)
            f = np.where(sel_above, 1.0, 0.0)
            candidates.append(
                BestResponseResult(
                    policy=float(policy),
                    expected_outcome=float(target),
                    regime=f,
                    at_corner=False,
                    at_kink=None,
                    utility=float("nan"),
                )
            )

    # kinks: the optimum sits exactly on an opponent's policy when the
    # required tie load falls inside its feasible box
    for t in levels:
        tied = others & (np.abs(p - t) <= tol)
        cap = float(w[tied].sum())
        m_at = game.X0 + mu_i * (t - game.p0)
        required = 0.5 * (base - 2.0 * load_above(t) - m_at)
        if -tol / 2 <= required <= cap + tol / 2:
            f = np.where(others & (p > t + tol), 1.0, 0.0)
            f = f + _fill_tie_row(required, w, tied)
            candidates.append(
                BestResponseResult(
                    policy=float(t),
                    expected_outcome=float(m_at),
                    regime=f,
                    at_corner=False,
                    at_kink=int(np.flatnonzero(tied)[0]),
                    utility=float("nan"),
                )
            )

    if not candidates:
        raise SolverError(
            f"no admissible best-response regime for player {i}; "
            "this indicates numerically inconsistent inputs"
        )
    scored = []
    for cand in candidates:
        q = p.copy()
        q[i] = cand.policy
        scored.append(
            BestResponseResult(
                policy=cand.policy,
                expected_outcome=cand.expected_outcome,
                regime=cand.regime,
                at_corner=cand.at_corner,
                at_kink=cand.at_kink,
                utility=expected_utility(game, q, i, tol),
            )
        )
    best = max(scored, key=lambda r: r.utility)
    if not best.at_corner and best.at_kink is None:
        # a segment winner that landed on an opponent's policy is really the
        # kink solution; report it with the consistent tie regime
        for t in levels:
            if abs(best.policy - t) <= tol:
                tied = others & (np.abs(p - t) <= tol)
                required = 0.5 * (base - 2.0 * load_above(t) - best.expected_outcome)
                f = np.where(others & (p > t + tol), 1.0, 0.0)
                f = f + _fill_tie_row(required, w, tied)
                best = BestResponseResult(
                    policy=best.policy,
                    expected_outcome=best.expected_outcome,
                    regime=f,
                    at_corner=False,
                    at_kink=int(np.flatnonzero(tied)[0]),
                    utility=best.utility,
                )
                break
    return best


def policy_upper_bound(game: NetworkGame) -> float:
    """A policy bound above every equilibrium.

    Any equilibrium outcome vector m satisfies ``m >= min(X0, c + G m)``
    componentwise, where ``c`` collects the interior targets under maximal
    followership loads; the least fixed point of that monotone clipped map is
    therefore a lower bound on every equilibrium outcome (clipping matters:
    a player parked at the status quo props up her opponents' targets).  The
    bound is translated to policy space along the steepest drift line.
    """
    c = game.d + np.diag(game.K) - 2.0 * (game.G * game.K).sum(axis=1)
    row = float(game.G.sum(axis=1).max()) if game.n else 0.0
    if row < 1.0:
        start = min(0.0, game.X0, float(np.min(c)) / (1.0 - row)) - 1.0
    else:
        start = -1e3 * (abs(game.X0) + float(np.sum(np.abs(c))) + 1.0)
    m = np.full(game.n, start)
    for _ in range(10_000):
        nxt = np.minimum(game.X0, c + game.G @ m)
        if np.max(np.abs(nxt - m)) < 1e-13 * max(1.0, abs(game.X0)):
            m = nxt
            break
        m = nxt
    x_bar = float(np.min(m))
    span = max(game.X0 - x_bar, 0.0) / float(np.min(-game.mu))
    return game.p0 + span


def br_grid_oracle(
    game: NetworkGame,
    i: int,
    p,
    step: float = 1e-3,
    radius: float = 0.0,
) -> float:
    """Brute-force argmax of ``U_i`` over a policy grid, opponents fixed.

    The grid runs from the status quo to the equilibrium policy bound,
    extended by a direct bound on this specific best response (the interior
    target can fall below the equilibrium range when opponents sit far out)
    and by ``radius``.  Independent of the regime-scanning solver.
    """
    if step <= 0:
        raise SolverError("grid step must be positive")
    p = validate_profile(game, p)
    others = np.arange(game.n) != i
    m = game.X0 + game.mu * (p - game.p0)
    w = game.G[i] * game.K[i]
    lowest_target = float(
        game.d[i] + game.G[i] @ np.where(others, m, 0.0) + game.K[i, i] - 2.0 * w[others].sum()
    )
    direct = game.p0 + max(game.X0 - lowest_target, 0.0) / (-game.mu[i])
    hi = max(policy_upper_bound(game), direct) + radius
    grid = np.arange(game.p0, hi + 0.5 * step, step)
    vals = own_policy_utilities(game, i, p, grid)
    return float(grid[int(np.argmax(vals))])
