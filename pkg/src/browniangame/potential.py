"""Exact maximization of the game's nonsmooth concave potential.

For a symmetric network with ``I - G`` positive definite the potential is
strictly concave but kinked at policy ties, and it has a unique maximizer
characterized by the same first-order system as an equilibrium with one
extra restriction: the followership witness must be skew-complementary
(``f_ij + f_ji = 1``), so tied pairs share one free parameter instead of two.

The solver enumerates tie configurations exactly as the equilibrium module
does.  Within a configuration the interior first-order equalities are linear
in the block policies and the tie parameters, which live in boxes; a bounded
least-squares solve finds the unique feasible profile (the witness itself may
be underdetermined, in which case the least-squares representative is
returned).  Status-quo ties couple players only through inequalities and are
resolved by a small feasibility LP.  The result carries a superdifferential
certificate built from one-sided difference quotients of the potential, kept
independent of the algebra that produced the profile.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog, lsq_linear

from .best_response import policy_upper_bound
from .equilibrium import _configurations, _LP_OPTIONS, verify_equilibrium
from .errors import SolverError, ValidationError
from .game import DEFAULT_TOL, NetworkGame
from .payoff import potential_batch, potential_value


@dataclass(frozen=True)
class SlopeCertificate:
    """One-sided difference quotients of the potential at the maximizer.

    At an interior coordinate the right quotient must be <= 0 <= the left
    quotient; at the status quo only the right condition applies.
    ``analytic_residual`` is the largest violation of the closed-form
    first-order system by the returned profile and witness, reported so a
    disagreement between the two routes is visible rather than assumed away.
    """

    right_slopes: np.ndarray
    left_slopes: np.ndarray
    step: float
    max_violation: float
    analytic_residual: float
    ok: bool


@dataclass(frozen=True)
class PotentialResult:
    profile: np.ndarray
    value: float
    followership: np.ndarray
    certificate: SlopeCertificate
    is_equilibrium: bool


def _require_maximizable(game: NetworkGame, tol: float) -> None:
    scale = max(1.0, float(np.max(np.abs(game.G))))
    if np.max(np.abs(game.G - game.G.T)) > tol * scale:
        raise ValidationError("potential maximization requires a symmetric G")
    eigs = np.linalg.eigvalsh(np.eye(game.n) - game.G)
    if np.min(eigs) <= 0:
        raise ValidationError("potential maximization requires I - G positive definite")


def maximize_potential(
    game: NetworkGame,
    tol: float = DEFAULT_TOL,
    config_seed: int | None = None,
) -> PotentialResult:
    """Find the unique potential maximizer with a skew-complementary witness.

    ``config_seed`` shuffles the configuration scan order; the result does not
    depend on it (uniqueness), which the test suite exercises.
    """
    _require_maximizable(game, tol)
    tau_cap = max(policy_upper_bound(game) - game.p0, 0.0) + 1.0
    W = game.G * game.K

    configs = list(_configurations(game.n))
    if config_seed is not None:
        rng = np.random.default_rng(config_seed)
        rng.shuffle(configs)

    candidates: list[tuple[np.ndarray, float, np.ndarray]] = []
    for corner, blocks in configs:
        cand = _solve_config(game, corner, blocks, W, tau_cap, tol)
        if cand is not None:
            candidates.append(cand)
    if not candidates:
        raise SolverError("no feasible first-order configuration found for the potential")

    # uniqueness: pick the best value, break exact ties lexicographically
    candidates.sort(key=lambda c: (-c[1], tuple(np.round(c[0], 12))))
    profile, value, F = candidates[0]
    cert = _certificate(game, profile, F, tol)
    check = verify_equilibrium(game, profile, max(tol, 1e-7))
    F = np.asarray(F)
    F.setflags(write=False)
    return PotentialResult(
        profile=profile,
        value=value,
        followership=F,
        certificate=cert,
        is_equilibrium=check.is_equilibrium,
    )


def _solve_config(game, corner, blocks, W, tau_cap, tol):
    n = game.n
    m = len(blocks)
    block_of = {i: a for a, block in enumerate(blocks) for i in block}
    interior = sorted(block_of)

    tie_pairs = []  # interior tied unordered pairs carrying one parameter each
    for block in blocks:
        for i, j in itertools.combinations(block, 2):
            tie_pairs.append((i, j))
    corner_pairs = list(itertools.combinations(corner, 2))

    nvar = m + len(tie_pairs)
    A = np.zeros((len(interior), nvar))
    b = np.zeros(len(interior))
    for row, i in enumerate(interior):
        a = block_of[i]
        const = game.d[i] + game.X0 * float(game.G[i].sum()) + game.K[i, i] - game.X0
        for j in block_of:
            if block_of[j] > a:
                const -= 2.0 * W[i, j]
            A[row, block_of[j]] += game.G[i, j] * game.mu[j]
        A[row, a] -= game.mu[i]
        for e, (x, y) in enumerate(tie_pairs):
            if i == x and block_of[y] == a:
                A[row, m + e] += -2.0 * W[i, y]
            elif i == y and block_of[x] == a:
                A[row, m + e] += 2.0 * W[i, x]
                const -= 2.0 * W[i, x]
        b[row] = -const

    if nvar:
        lo = np.concatenate([np.zeros(m), np.zeros(len(tie_pairs))])
        hi = np.concatenate([np.full(m, tau_cap), np.ones(len(tie_pairs))])
        if len(interior):
            sol = lsq_linear(A, b, bounds=(lo, hi), tol=1e-14)
            z = sol.x
            resid = float(np.max(np.abs(A @ z - b))) if b.size else 0.0
            if resid > max(tol, 1e-9) * max(1.0, float(np.max(np.abs(b))) if b.size else 1.0):
                return None
        else:
            z = lo.copy()
    else:
        z = np.zeros(0)
    tau = z[:m]
    if m and np.any(np.diff(tau) < -tol):
        return None

    phi_corner = _solve_corner(game, corner, corner_pairs, block_of, W, tau, tol)
    if phi_corner is None:
        return None

    profile = np.full(n, game.p0)
    for i, a in block_of.items():
        profile[i] = game.p0 + max(tau[a], 0.0)

    F = _assemble_witness(game, corner, blocks, block_of, tie_pairs, z[m:], corner_pairs, phi_corner)
    value = potential_value(game, profile, tol)
    return profile, value, F


def _solve_corner(game, corner, corner_pairs, block_of, W, tau, tol):
    """Feasibility of the corner inequalities over the corner tie parameters."""
    if not corner:
        return np.zeros(0)
    slack = {}
    for i in corner:
        s = game.d[i] + game.X0 * float(game.G[i].sum()) + game.K[i, i] - game.X0
        for j in block_of:
            s -= 2.0 * W[i, j]
            s += game.G[i, j] * game.mu[j] * tau[block_of[j]]
        slack[i] = s
    if not corner_pairs:
        return np.zeros(0) if all(v >= -tol for v in slack.values()) else None
    nphi = len(corner_pairs)
    A_rows, b_rows = [], []
    for i in corner:
        row = np.zeros(nphi)
        const = slack[i]
        for e, (x, y) in enumerate(corner_pairs):
            if i == x:
                row[e] += 2.0 * W[i, y]
            elif i == y:
                row[e] += -2.0 * W[i, x]
                const -= 2.0 * W[i, x]
        A_rows.append(row)
        b_rows.append(const + tol)
    res = linprog(
        np.zeros(nphi),
        A_ub=np.array(A_rows),
        b_ub=np.array(b_rows),
        bounds=[(0.0, 1.0)] * nphi,
        method="highs",
        options=_LP_OPTIONS,
    )
    return res.x if res.success else None


def _assemble_witness(game, corner, blocks, block_of, tie_pairs, phi_int, corner_pairs, phi_corner):
    n = game.n
    F = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            bi = block_of.get(i)
            bj = block_of.get(j)
            ii = i in block_of
            jj = j in block_of
            if ii and jj:
                if bi < bj:
                    F[i, j] = 1.0
                elif bi > bj:
                    F[i, j] = 0.0
            elif not ii and jj:
                F[i, j] = 1.0  # status-quo player follows every interior one
            elif ii and not jj:
                F[i, j] = 0.0
    for e, (x, y) in enumerate(tie_pairs):
        F[x, y] = phi_int[e]
        F[y, x] = 1.0 - phi_int[e]
    for e, (x, y) in enumerate(corner_pairs):
        F[x, y] = phi_corner[e]
        F[y, x] = 1.0 - phi_corner[e]
    return F


def _certificate(game, profile, F, tol, step: float = 1e-6) -> SlopeCertificate:
    n = game.n
    v0 = potential_value(game, profile, tol)
    right = np.zeros(n)
    left = np.full(n, np.nan)
    viol = 0.0
    for i in range(n):
        q = profile.copy()
        q[i] = profile[i] + step
        right[i] = (potential_value(game, q, tol) - v0) / step
        viol = max(viol, right[i])
        if profile[i] > game.p0 + step:
            q = profile.copy()
            q[i] = profile[i] - step
            left[i] = (v0 - potential_value(game, q, tol)) / step
            viol = max(viol, -left[i])

    # closed-form residual of the interior first-order system under F
    m = game.X0 + game.mu * (profile - game.p0)
    load = (game.G * game.K * F).sum(axis=1)
    target = game.d + game.G @ m + np.diag(game.K) - 2.0 * load
    resid = 0.0
    for i in range(n):
        if profile[i] > game.p0 + tol:
            resid = max(resid, abs(m[i] - target[i]))
        else:
            resid = max(resid, max(0.0, game.X0 - target[i]))
    slope_tol = max(1e-4, 10 * step * float(np.max(game.mu * game.mu)) * n)
    return SlopeCertificate(
        right_slopes=right,
        left_slopes=left,
        step=step,
        max_violation=float(viol),
        analytic_residual=float(resid),
        ok=bool(viol <= slope_tol and resid <= max(tol * 100, 1e-7)),
    )


def potential_grid_oracle(game: NetworkGame, step: float = 1e-3) -> np.ndarray:
    """Brute-force argmax of the potential on a policy grid (n <= 3).

    For one or two players the full tensor grid at the requested step is
    scanned.  For three players the scan is coarse-to-fine: strict concavity
    keeps the maximizer inside a few coarse cells of the coarse argmax, and
    each refinement shrinks the step until the requested resolution is
    reached.
    """
    _require_maximizable(game, DEFAULT_TOL)
    if game.n > 3:
        raise ValidationError("the potential grid oracle supports n <= 3")
    if step <= 0:
        raise ValidationError("grid step must be positive")
    hi = policy_upper_bound(game)
    if hi <= game.p0:
        return np.full(game.n, game.p0)
    if game.n <= 2:
        axes = [np.arange(game.p0, hi + 0.5 * step, step) for _ in range(game.n)]
        best, _ = _grid_argmax(game, axes)
        return best

    span = hi - game.p0
    cur = span / 48.0
    axes = [np.arange(game.p0, hi + 0.5 * cur, cur) for _ in range(game.n)]
    best, _ = _grid_argmax(game, axes)
    while cur > step:
        nxt = max(step, cur / 8.0)
        axes = []
        for i in range(game.n):
            lo = max(game.p0, best[i] - 3.0 * cur)
            up = min(hi, best[i] + 3.0 * cur)
            axes.append(np.arange(lo, up + 0.5 * nxt, nxt))
        best, _ = _grid_argmax(game, axes)
        cur = nxt
    return best


def _grid_argmax(game, axes) -> tuple[np.ndarray, float]:
    first = axes[0]
    rest = axes[1:]
    if rest:
        mesh = np.meshgrid(*rest, indexing="ij")
        rest_flat = np.stack([r.ravel() for r in mesh], axis=1)
    else:
        rest_flat = np.zeros((1, 0))
    block = rest_flat.shape[0]
    chunk = max(1, 2_000_000 // max(block, 1))
    best_val = -np.inf
    best = None
    for s in range(0, first.size, chunk):
        f = first[s : s + chunk]
        rows = np.empty((f.size * block, game.n))
        rows[:, 0] = np.repeat(f, block)
        if rest:
            rows[:, 1:] = np.tile(rest_flat, (f.size, 1))
        vals = potential_batch(game, rows)
        idx = int(np.argmax(vals))
        if vals[idx] > best_val:
            best_val = float(vals[idx])
            best = rows[idx].copy()
    return best, best_val
