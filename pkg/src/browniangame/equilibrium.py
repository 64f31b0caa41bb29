"""Equilibrium verification, extremal computation, and exact enumeration.

Verification applies the player-level optimality condition: at an interior
policy the expected outcome must equal the followership-shifted target for
some feasible followership row (strict orderings pin entries, ties leave a
boxed load free); at the status quo the inequality version must admit a
feasible row.

Extremal equilibria come from simultaneous best-response iteration, upward
from the all-status-quo profile and downward from the policy bound; the game
is one of strategic complements, so both sweeps converge monotonically.

Enumeration walks every "configuration" -- a set of players parked at the
status quo plus an ordered partition of the rest into tie blocks of equal
policy.  Within a configuration the equilibrium conditions are linear in the
block policies with box constraints from the free tie loads, so the solution
set is a polytope: a point, a one-parameter tie segment, or (rarely, when
several tie blocks carry slack simultaneously) a higher-dimensional family.
All three are reported, deduplicated, and cross-checked by verification.

The module also produces the benchmark profiles (no uncertainty,
player-independent noise, and the full game) and the conformity diagnostics
that compare equilibrium expected-outcome gaps to centrality gaps.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .best_response import best_response, policy_upper_bound, _fill_tie_row
from .errors import ConvergenceError, SolverError, ValidationError
from .game import DEFAULT_TOL, NetworkGame, validate_profile

MAX_ITERATIONS = 10_000

_LP_OPTIONS = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PlayerViolation:
    """One player's failed optimality condition.

    For ``kind == "corner"`` the status-quo outcome exceeded the best
    achievable target; for ``kind == "interior"`` the required tie load fell
    outside its feasible interval ``[0, cap]``.
    """

    player: int
    kind: str
    value: float
    lower: float
    upper: float


@dataclass(frozen=True)
class EquilibriumCheck:
    """Verdict of :func:`verify_equilibrium` with a witness or violations."""

    is_equilibrium: bool
    followership: np.ndarray | None
    violations: tuple[PlayerViolation, ...]


def verify_equilibrium(game: NetworkGame, p, tol: float = DEFAULT_TOL) -> EquilibriumCheck:
    """Check the player-level equilibrium conditions at profile ``p``.

    Returns a feasible followership witness on success; otherwise the list of
    violated player-level conditions (corner inequality or interior load
    interval)."""
    p = validate_profile(game, p, tol)
    m = game.X0 + game.mu * (p - game.p0)
    W = game.G * game.K
    F = np.zeros((game.n, game.n))
    violations: list[PlayerViolation] = []
    for i in range(game.n):
        others = np.arange(game.n) != i
        above = others & (p > p[i] + tol)
        tied = others & (np.abs(p - p[i]) <= tol)
        base = float(game.d[i] + game.G[i] @ m + game.K[i, i] - 2.0 * W[i, above].sum())
        F[i, above] = 1.0
        if p[i] <= game.p0 + tol:
            # status quo is optimal iff the most permissive target covers X0
            if game.X0 > base + tol:
                violations.append(
                    PlayerViolation(
                        player=i, kind="corner", value=float(game.X0), lower=-np.inf, upper=base
                    )
                )
        else:
            cap = float(W[i, tied].sum())
            required = 0.5 * (base - m[i])
            if required < -tol / 2 or required > cap + tol / 2:
                violations.append(
                    PlayerViolation(
                        player=i, kind="interior", value=required, lower=0.0, upper=cap
                    )
                )
            else:
                F[i] += _fill_tie_row(required, W[i], tied)
    if violations:
        return EquilibriumCheck(False, None, tuple(violations))
    F.setflags(write=False)
    return EquilibriumCheck(True, F, ())


# ---------------------------------------------------------------------------
# Extremal equilibria by monotone simultaneous best response
# ---------------------------------------------------------------------------


def _joint_best_response(game: NetworkGame, p: np.ndarray, tol: float) -> np.ndarray:
    return np.array([best_response(game, i, p, tol).policy for i in range(game.n)])


def extremal_equilibria(
    game: NetworkGame,
    tol: float = DEFAULT_TOL,
    max_iter: int = MAX_ITERATIONS,
) -> tuple[np.ndarray, np.ndarray]:
    """Least and greatest equilibrium in the policy order.

    Simultaneous best response from the all-status-quo profile climbs to the
    least equilibrium; from the policy bound it descends to the greatest.
    Because the drift is negative, the greatest policy profile carries the
    smallest expected outcomes.
    """
    least = _iterate_to_fixed_point(game, np.full(game.n, game.p0), tol, max_iter)
    start = np.full(game.n, policy_upper_bound(game))
    greatest = _iterate_to_fixed_point(game, start, tol, max_iter)
    for name, prof in (("least", least), ("greatest", greatest)):
        if not verify_equilibrium(game, prof, max(tol, 1e-7)).is_equilibrium:
            raise SolverError(f"{name} iterate failed equilibrium verification")
    return least, greatest


def _iterate_to_fixed_point(game, start, tol, max_iter) -> np.ndarray:
    p = np.asarray(start, dtype=float)
    for _ in range(max_iter):
        q = _joint_best_response(game, p, tol)
        if np.max(np.abs(q - p)) < tol:
            return q
        p = q
    raise ConvergenceError("best-response iteration did not converge; check tolerances")


# ---------------------------------------------------------------------------
# Exact enumeration over tie configurations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EquilibriumPoint:
    """An isolated equilibrium with its followership witness."""

    profile: np.ndarray
    outcomes: np.ndarray
    followership: np.ndarray
    corner: tuple[int, ...]
    blocks: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class TieSegment:
    """A one-parameter family of equilibria sharing a tie pattern.

    ``lower``/``upper`` are the extreme policy profiles; outcome bounds give
    the per-player expected-outcome range across the segment.
    """

    lower: np.ndarray
    upper: np.ndarray
    outcomes_at_lower: np.ndarray
    outcomes_at_upper: np.ndarray
    corner: tuple[int, ...]
    blocks: tuple[tuple[int, ...], ...]

    def sample(self, theta: float) -> np.ndarray:
        return self.lower + theta * (self.upper - self.lower)


@dataclass(frozen=True)
class EquilibriumFamily:
    """A tie family of dimension >= 2 (several tie blocks slack at once).

    Stored as the feasible polytope of its block policies; ``lower``/``upper``
    bound the profile coordinates.
    """

    corner: tuple[int, ...]
    blocks: tuple[tuple[int, ...], ...]
    dim: int
    lower: np.ndarray
    upper: np.ndarray
    profile_offset: np.ndarray = field(repr=False)
    profile_map: np.ndarray = field(repr=False)
    A_ub: np.ndarray = field(repr=False)
    b_ub: np.ndarray = field(repr=False)
    A_eq: np.ndarray | None = field(repr=False)
    b_eq: np.ndarray | None = field(repr=False)

    def feasible_profile(self) -> np.ndarray:
        res = linprog(
            np.zeros(self.profile_map.shape[1]),
            A_ub=self.A_ub,
            b_ub=self.b_ub,
            A_eq=self.A_eq,
            b_eq=self.b_eq,
            bounds=[(None, None)] * self.profile_map.shape[1],
            method="highs",
            options=_LP_OPTIONS,
        )
        if not res.success:
            raise SolverError("family polytope unexpectedly infeasible")
        return self.profile_offset + self.profile_map @ res.x

    def distance(self, profile: np.ndarray) -> float:
        """Chebyshev distance from ``profile`` to the family, via a small LP."""
        m = self.profile_map.shape[1]
        # variables (tau, t): minimize t subject to |profile - p(tau)| <= t
        c = np.zeros(m + 1)
        c[-1] = 1.0
        gap = np.asarray(profile, dtype=float) - self.profile_offset
        rows_a = np.hstack([self.profile_map, -np.ones((self.profile_map.shape[0], 1))])
        rows_b = np.hstack([-self.profile_map, -np.ones((self.profile_map.shape[0], 1))])
        A = np.vstack(
            [
                np.hstack([self.A_ub, np.zeros((self.A_ub.shape[0], 1))]),
                rows_a,
                rows_b,
            ]
        )
        b = np.concatenate([self.b_ub, gap, -gap])
        A_eq = None
        b_eq = None
        if self.A_eq is not None:
            A_eq = np.hstack([self.A_eq, np.zeros((self.A_eq.shape[0], 1))])
            b_eq = self.b_eq
        res = linprog(
            c,
            A_ub=A,
            b_ub=b,
            A_eq=A_eq,
            b_eq=b_eq,
            bounds=[(None, None)] * m + [(0, None)],
            method="highs",
            options=_LP_OPTIONS,
        )
        return float(res.fun) if res.success else np.inf


@dataclass(frozen=True)
class EquilibriumReport:
    """The enumerated equilibrium set plus its extremal profiles."""

    points: tuple[EquilibriumPoint, ...]
    segments: tuple[TieSegment, ...]
    families: tuple[EquilibriumFamily, ...]
    least: np.ndarray
    greatest: np.ndarray
    method: str

    def distance(self, profile) -> float:
        """Smallest sup-norm distance from ``profile`` to any reported object."""
        q = np.asarray(profile, dtype=float)
        best = np.inf
        for pt in self.points:
            best = min(best, float(np.max(np.abs(pt.profile - q))))
        for seg in self.segments:
            delta = seg.upper - seg.lower
            denom = float(delta @ delta)
            theta = 0.0 if denom == 0 else float(np.clip((q - seg.lower) @ delta / denom, 0, 1))
            best = min(best, float(np.max(np.abs(seg.sample(theta) - q))))
        for fam in self.families:
            best = min(best, fam.distance(q))
        return best

    def covers(self, profile, tol: float) -> bool:
        return self.distance(profile) <= tol


def _set_partitions(items: list[int]):
    if not items:
        yield []
        return
    head, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for idx in range(len(part)):
            yield part[:idx] + [[head] + part[idx]] + part[idx + 1 :]
        yield [[head]] + part


def _configurations(n: int):
    players = list(range(n))
    for size in range(n + 1):
        for corner in itertools.combinations(players, size):
            rest = [i for i in players if i not in corner]
            if not rest:
                yield corner, ()
                continue
            for part in _set_partitions(rest):
                blocks = [tuple(sorted(b)) for b in part]
                for order in itertools.permutations(blocks):
                    yield corner, tuple(order)


@dataclass
class _ConfigSystem:
    """Linear description of a configuration's equilibrium conditions.

    Residual ``r_i(tau) = target_i(tau) - E X_i(tau)`` must vanish for
    singleton interior players, lie in ``[0, 2 cap_i]`` for tie members, and
    be nonnegative for status-quo players.
    """

    corner: tuple[int, ...]
    blocks: tuple[tuple[int, ...], ...]
    coeffs: np.ndarray  # rows: players, columns: blocks
    consts: np.ndarray
    caps: np.ndarray
    block_of: dict[int, int]

    def profile_map(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        m = len(self.blocks)
        W = np.zeros((n, m))
        for a, block in enumerate(self.blocks):
            for i in block:
                W[i, a] = 1.0
        return W, np.zeros(n)


def _build_system(game: NetworkGame, corner, blocks, p0_policy: float) -> _ConfigSystem:
    n = game.n
    m = len(blocks)
    block_of = {i: a for a, block in enumerate(blocks) for i in block}
    interior = set(block_of)
    W = game.G * game.K
    coeffs = np.zeros((n, m))
    consts = np.zeros(n)
    caps = np.zeros(n)
    for i in range(n):
        fixed = 0.0
        if i in interior:
            a = block_of[i]
            for j in block_of:
                if block_of[j] > a:
                    fixed += W[i, j]
            caps[i] = sum(W[i, j] for j in blocks[a] if j != i)
        else:
            fixed = sum(W[i, j] for j in block_of)
        consts[i] = game.d[i] + game.X0 * float(game.G[i].sum()) + game.K[i, i] - 2.0 * fixed
        consts[i] -= game.X0  # subtract E X_i's constant part
        for j in block_of:
            coeffs[i, block_of[j]] += game.G[i, j] * game.mu[j]
        if i in interior:
            coeffs[i, block_of[i]] -= game.mu[i]
    return _ConfigSystem(
        corner=tuple(corner),
        blocks=tuple(blocks),
        coeffs=coeffs,
        consts=consts,
        caps=caps,
        block_of=block_of,
    )


def _witness_for_point(game: NetworkGame, sys: _ConfigSystem, tau: np.ndarray) -> np.ndarray:
    n = game.n
    W = game.G * game.K
    F = np.zeros((n, n))
    interior = sys.block_of
    for i in range(n):
        if i in interior:
            a = interior[i]
            for j in range(n):
                if j == i:
                    continue
                if j in interior and interior[j] > a:
                    F[i, j] = 1.0
            tied = np.zeros(n, dtype=bool)
            for j in sys.blocks[a]:
                if j != i:
                    tied[j] = True
            required = 0.5 * float(sys.consts[i] + sys.coeffs[i] @ tau)
            F[i] += _fill_tie_row(required, W[i], tied)
        else:
            for j in interior:
                F[i, j] = 1.0
    return F


def _nullspace(A: np.ndarray, rtol: float = 1e-11) -> tuple[np.ndarray, int]:
    if A.size == 0:
        return np.eye(A.shape[1]), 0
    u, s, vt = np.linalg.svd(A, full_matrices=True)
    rank = int(np.sum(s > rtol * max(A.shape) * (s[0] if s.size else 1.0)))
    return vt[rank:].T, rank


def enumerate_equilibria(
    game: NetworkGame,
    n_cap: int = 5,
    tol: float = DEFAULT_TOL,
) -> EquilibriumReport:
    """Enumerate the full equilibrium set for small games.

    Every reported object passes :func:`verify_equilibrium`; the extremal
    profiles are the componentwise bounds of the set (attained, by the
    lattice structure of games with strategic complements).
    """
    if game.n > n_cap:
        raise ValidationError(f"exact enumeration supports n <= {n_cap}")
    tau_cap = max(policy_upper_bound(game) - game.p0, 0.0) + 1.0

    points: list[EquilibriumPoint] = []
    segments: list[TieSegment] = []
    families: list[EquilibriumFamily] = []

    for corner, blocks in _configurations(game.n):
        sys = _build_system(game, corner, blocks, game.p0)
        m = len(blocks)
        interior_players = sorted(sys.block_of)
        singles = [i for i in interior_players if sys.caps[i] <= tol]
        ties = [i for i in interior_players if sys.caps[i] > tol]

        A_eq = sys.coeffs[singles] if singles else np.zeros((0, m))
        b_eq = -sys.consts[singles] if singles else np.zeros(0)

        # inequalities in tau: tie boxes, corner slack, ordering, policy cap
        A_rows: list[np.ndarray] = []
        b_rows: list[float] = []
        for i in ties:
            A_rows.append(-sys.coeffs[i])
            b_rows.append(sys.consts[i])  # r_i >= 0
            A_rows.append(sys.coeffs[i])
            b_rows.append(2.0 * sys.caps[i] - sys.consts[i])  # r_i <= 2 cap
        for i in corner:
            A_rows.append(-sys.coeffs[i])
            b_rows.append(sys.consts[i])  # corner slack r_i >= 0
        for a in range(m):
            e = np.zeros(m)
            if a == 0:
                e[0] = -1.0
                A_rows.append(e)
                b_rows.append(0.0)  # tau_1 >= 0
            else:
                e[a - 1] = 1.0
                e[a] = -1.0
                A_rows.append(e)
                b_rows.append(0.0)  # ordering
        if m:
            e = np.zeros(m)
            e[m - 1] = 1.0
            A_rows.append(e)
            b_rows.append(tau_cap)
        A_ub = np.array(A_rows) if A_rows else np.zeros((0, m))
        b_ub = np.array(b_rows) if b_rows else np.zeros(0)

        if m == 0:
            if np.all(b_ub >= -tol):
                _append_point(game, sys, np.zeros(0), points, tol)
            continue

        if singles:
            tau0, *_ = np.linalg.lstsq(A_eq, b_eq, rcond=None)
            if np.max(np.abs(A_eq @ tau0 - b_eq)) > 1e-8 * max(1.0, float(np.max(np.abs(b_eq)))):
                continue
            N, _ = _nullspace(A_eq)
        else:
            tau0 = np.zeros(m)
            N = np.eye(m)
        nu = N.shape[1]

        if nu == 0:
            if np.all(A_ub @ tau0 - b_ub <= tol):
                _append_point(game, sys, tau0, points, tol)
            continue

        A_theta = A_ub @ N
        b_theta = b_ub - A_ub @ tau0

        if nu == 1:
            lo, hi = -np.inf, np.inf
            feasible = True
            for a_row, b_val in zip(A_theta[:, 0], b_theta):
                if abs(a_row) <= 1e-13:
                    if b_val < -tol:
                        feasible = False
                        break
                elif a_row > 0:
                    hi = min(hi, b_val / a_row)
                else:
                    lo = max(lo, b_val / a_row)
            if not feasible or lo > hi + tol or not np.isfinite(lo) or not np.isfinite(hi):
                continue
            tau_lo = tau0 + min(lo, hi) * N[:, 0]
            tau_hi = tau0 + max(lo, hi) * N[:, 0]
            if np.max(np.abs(tau_hi - tau_lo)) <= tol:
                _append_point(game, sys, 0.5 * (tau_lo + tau_hi), points, tol)
            else:
                _append_segment(game, sys, tau_lo, tau_hi, segments)
            continue

        # dimension >= 2: keep the polytope itself
        fam = _build_family(game, sys, A_ub, b_ub, A_eq if singles else None,
                            b_eq if singles else None, tol)
        if fam is not None:
            families.append(fam)

    points, segments, families = _dedupe(points, segments, families, tol)
    least, greatest = _extremes_from_objects(game, points, segments, families, tol)
    return EquilibriumReport(
        points=tuple(points),
        segments=tuple(segments),
        families=tuple(families),
        least=least,
        greatest=greatest,
        method="enumeration",
    )


def _profile_from_tau(game: NetworkGame, sys: _ConfigSystem, tau: np.ndarray) -> np.ndarray:
    p = np.full(game.n, game.p0)
    for i, a in sys.block_of.items():
        p[i] = game.p0 + max(tau[a], 0.0)
    return p


def _append_point(game, sys, tau, points, tol) -> None:
    profile = _profile_from_tau(game, sys, tau)
    check = verify_equilibrium(game, profile, max(tol, 1e-8))
    if not check.is_equilibrium:
        return
    m = game.X0 + game.mu * (profile - game.p0)
    points.append(
        EquilibriumPoint(
            profile=profile,
            outcomes=m,
            followership=_witness_for_point(game, sys, tau),
            corner=sys.corner,
            blocks=sys.blocks,
        )
    )


def _append_segment(game, sys, tau_lo, tau_hi, segments) -> None:
    lower = _profile_from_tau(game, sys, tau_lo)
    upper = _profile_from_tau(game, sys, tau_hi)
    ok = True
    for theta in (0.0, 0.5, 1.0):
        prof = lower + theta * (upper - lower)
        if not verify_equilibrium(game, prof, 1e-8).is_equilibrium:
            ok = False
            break
    if not ok:
        return
    segments.append(
        TieSegment(
            lower=lower,
            upper=upper,
            outcomes_at_lower=game.X0 + game.mu * (lower - game.p0),
            outcomes_at_upper=game.X0 + game.mu * (upper - game.p0),
            corner=sys.corner,
            blocks=sys.blocks,
        )
    )


def _build_family(game, sys, A_ub, b_ub, A_eq, b_eq, tol) -> EquilibriumFamily | None:
    m = len(sys.blocks)
    bounds = [(None, None)] * m
    res = linprog(np.zeros(m), A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                  bounds=bounds, method="highs", options=_LP_OPTIONS)
    if not res.success:
        return None
    lo = np.zeros(m)
    hi = np.zeros(m)
    for a in range(m):
        c = np.zeros(m)
        c[a] = 1.0
        low = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                      bounds=bounds, method="highs", options=_LP_OPTIONS)
        high = linprog(-c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                       bounds=bounds, method="highs", options=_LP_OPTIONS)
        if not (low.success and high.success):
            return None
        lo[a], hi[a] = low.fun, -high.fun
    W, _ = sys.profile_map(game.n)
    profile_lo = game.p0 + W @ lo
    profile_hi = game.p0 + W @ hi
    for i in sys.corner:
        profile_lo[i] = profile_hi[i] = game.p0
    family = EquilibriumFamily(
        corner=sys.corner,
        blocks=sys.blocks,
        dim=m,
        lower=profile_lo,
        upper=profile_hi,
        profile_offset=np.full(game.n, game.p0),
        profile_map=W,
        A_ub=A_ub,
        b_ub=b_ub,
        A_eq=A_eq,
        b_eq=b_eq,
    )
    try:
        probe = family.feasible_profile()
    except SolverError:
        return None
    if not verify_equilibrium(game, probe, 1e-7).is_equilibrium:
        return None
    return family


def _dedupe(points, segments, families, tol):
    thr = max(tol, 1e-8) * 10
    kept_segments: list[TieSegment] = []
    for seg in sorted(segments, key=lambda s: -float(np.max(np.abs(s.upper - s.lower)))):
        covered = False
        for other in kept_segments:
            if _segment_in_segment(seg, other, thr):
                covered = True
                break
        if not covered:
            for fam in families:
                if fam.distance(seg.lower) <= thr and fam.distance(seg.upper) <= thr:
                    covered = True
                    break
        if not covered:
            kept_segments.append(seg)
    kept_points: list[EquilibriumPoint] = []
    for pt in points:
        if any(np.max(np.abs(pt.profile - q.profile)) <= thr for q in kept_points):
            continue
        if any(_point_on_segment(pt.profile, seg, thr) for seg in kept_segments):
            continue
        if any(fam.distance(pt.profile) <= thr for fam in families):
            continue
        kept_points.append(pt)
    return kept_points, kept_segments, list(families)


def _point_on_segment(q, seg: TieSegment, thr: float) -> bool:
    delta = seg.upper - seg.lower
    denom = float(delta @ delta)
    theta = 0.0 if denom == 0 else float(np.clip((q - seg.lower) @ delta / denom, 0, 1))
    return bool(np.max(np.abs(seg.lower + theta * delta - q)) <= thr)


def _segment_in_segment(inner: TieSegment, outer: TieSegment, thr: float) -> bool:
    return _point_on_segment(inner.lower, outer, thr) and _point_on_segment(inner.upper, outer, thr)


def _extremes_from_objects(game, points, segments, families, tol):
    los: list[np.ndarray] = []
    his: list[np.ndarray] = []
    for pt in points:
        los.append(pt.profile)
        his.append(pt.profile)
    for seg in segments:
        los.append(np.minimum(seg.lower, seg.upper))
        his.append(np.maximum(seg.lower, seg.upper))
    for fam in families:
        los.append(fam.lower)
        his.append(fam.upper)
    if not los:
        raise SolverError("enumeration found no equilibrium; existence is guaranteed, "
                          "so this indicates a numerical failure")
    least = np.min(np.vstack(los), axis=0)
    greatest = np.max(np.vstack(his), axis=0)
    for name, prof in (("least", least), ("greatest", greatest)):
        if not verify_equilibrium(game, prof, max(tol, 1e-7)).is_equilibrium:
            raise SolverError(f"enumerated {name} profile failed verification")
    return least, greatest


# ---------------------------------------------------------------------------
# Benchmarks and conformity diagnostics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BenchmarkPoint:
    policies: np.ndarray
    outcomes: np.ndarray


@dataclass(frozen=True)
class BenchmarkProfiles:
    """The no-uncertainty and independent-noise benchmarks next to the game.

    ``distance0``/``distance1``/``distance_star`` are the two-player
    leader-follower expected-outcome gaps (``None`` outside the two-player
    symmetric case, or when the game's equilibrium is not unique).
    """

    gamma0: BenchmarkPoint
    gamma1: BenchmarkPoint
    gamma_least: BenchmarkPoint
    gamma_greatest: BenchmarkPoint
    unique: bool
    D: float | None
    distance0: float | None
    distance1: float | None
    distance_star: float | None


def _clipped_linear_profile(game: NetworkGame, shift: np.ndarray, tol: float,
                            max_iter: int = MAX_ITERATIONS) -> BenchmarkPoint:
    """Fixed point of ``m = min(X0, d + G m + shift)``, exact when interior."""
    target = game.M @ (game.d + shift)
    if np.all(target <= game.X0 + tol):
        m = target
    else:
        m = np.full(game.n, game.X0)
        for _ in range(max_iter):
            nxt = np.minimum(game.X0, game.d + game.G @ m + shift)
            if np.max(np.abs(nxt - m)) < tol:
                m = nxt
                break
            m = nxt
        else:
            raise ConvergenceError("clipped benchmark iteration did not converge")
    policies = game.p0 + (game.X0 - m) / (-game.mu)
    return BenchmarkPoint(policies=policies, outcomes=m)


def benchmark_profiles(game: NetworkGame, tol: float = DEFAULT_TOL) -> BenchmarkProfiles:
    """No-uncertainty and independent-noise benchmarks plus the game itself."""
    gamma0 = _clipped_linear_profile(game, np.zeros(game.n), tol)
    gamma1 = _clipped_linear_profile(game, np.diag(game.K).copy(), tol)
    if game.n <= 5:
        report = enumerate_equilibria(game, tol=tol)
        least, greatest = report.least, report.greatest
    else:
        least, greatest = extremal_equilibria(game, tol)
    unique = bool(np.max(np.abs(greatest - least)) <= max(tol, 1e-8) * 10)
    m_least = game.X0 + game.mu * (least - game.p0)
    m_greatest = game.X0 + game.mu * (greatest - game.p0)
    D = distance0 = distance1 = distance_star = None
    if game.n == 2 and abs(game.G[0, 1] - game.G[1, 0]) <= tol:
        distance0 = float(gamma0.outcomes[0] - gamma0.outcomes[1])
        distance1 = float(gamma1.outcomes[0] - gamma1.outcomes[1])
        D = distance0
        if unique:
            distance_star = float(m_least[0] - m_least[1])
    return BenchmarkProfiles(
        gamma0=gamma0,
        gamma1=gamma1,
        gamma_least=BenchmarkPoint(policies=least, outcomes=m_least),
        gamma_greatest=BenchmarkPoint(policies=greatest, outcomes=m_greatest),
        unique=unique,
        D=D,
        distance0=distance0,
        distance1=distance1,
        distance_star=distance_star,
    )


@dataclass(frozen=True)
class PairGap:
    low_player: int
    high_player: int
    outcome_gap: float
    beta_gap: float
    strict: bool


@dataclass(frozen=True)
class ConsecutiveGap:
    low_player: int
    high_player: int
    outcome_gap: float
    predicted_gap: float
    identity_holds: bool


@dataclass(frozen=True)
class ConformityReport:
    """Pairwise equilibrium-outcome gaps against centrality gaps.

    Under a uniform network, complexity compresses adjacent expected-outcome
    gaps by exactly ``2 g k / (1 + g)`` relative to the centrality gaps.
    """

    pairs: tuple[PairGap, ...]
    consecutive: tuple[ConsecutiveGap, ...]
    conformity_shift: float
    all_strict: bool
    identity_holds: bool | None


def conformity_gaps(game: NetworkGame, p, tol: float = DEFAULT_TOL) -> ConformityReport:
    """Conformity diagnostics at an interior equilibrium of a uniform network."""
    off = game.G[~np.eye(game.n, dtype=bool)]
    if off.size and np.max(off) - np.min(off) > tol:
        raise ValidationError("conformity diagnostics require a uniform network")
    g = float(off[0]) if off.size else 0.0
    if game.k is None:
        raise ValidationError("conformity diagnostics require the main (scalar) model")
    p = validate_profile(game, p, tol)
    m = game.X0 + game.mu * (p - game.p0)
    beta = game.beta
    shift = 2.0 * g * game.k / (1.0 + g)

    pairs = []
    for i in range(game.n):
        for j in range(game.n):
            if p[i] < p[j] - tol:
                gap = float(m[i] - m[j])
                bgap = float(beta[i] - beta[j])
                pairs.append(
                    PairGap(
                        low_player=i,
                        high_player=j,
                        outcome_gap=gap,
                        beta_gap=bgap,
                        strict=gap < bgap - tol / 10,
                    )
                )

    order = np.argsort(p, kind="stable")
    strictly_ordered = bool(np.all(np.diff(p[order]) > tol))
    consecutive = []
    if strictly_ordered and game.n >= 2:
        for a in range(game.n - 1):
            i, j = int(order[a]), int(order[a + 1])
            gap = float(m[i] - m[j])
            pred = float(beta[i] - beta[j]) - shift
            consecutive.append(
                ConsecutiveGap(
                    low_player=i,
                    high_player=j,
                    outcome_gap=gap,
                    predicted_gap=pred,
                    identity_holds=abs(gap - pred) <= max(tol, 1e-8),
                )
            )
    return ConformityReport(
        pairs=tuple(pairs),
        consecutive=tuple(consecutive),
        conformity_shift=shift,
        all_strict=bool(pairs) and all(x.strict for x in pairs),
        identity_holds=all(c.identity_holds for c in consecutive) if consecutive else None,
    )


def multiplicity_diagnostics(game: NetworkGame, tol: float = DEFAULT_TOL) -> dict | None:
    """Comparative statics of the tie interval for zero-favorite uniform games.

    When every favorite outcome is zero and all unweighted centralities agree,
    the tie equilibria span expected outcomes ``[(2 - u) k, u k]``; the upper
    end always grows with complexity, the lower end grows iff ``u < 2``.
    Returns ``None`` when the structure does not apply.
    """
    if game.k is None:
        return None
    if np.max(np.abs(game.d)) > tol:
        return None
    u = game.u
    if np.max(u) - np.min(u) > tol:
        return None
    u0 = float(u[0])
    return {
        "u": u0,
        "outcome_upper": u0 * game.k,
        "outcome_lower": (2.0 - u0) * game.k,
        "upper_increasing_in_k": True,
        "lower_increasing_in_k": u0 < 2.0,
    }
