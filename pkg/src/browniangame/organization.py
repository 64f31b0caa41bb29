"""Two-division organization: induced game, profit maximizer, thresholds.

Each division faces a linear inverse demand and a cost reduced by the other
division's quantity; production policies reach quantities only through the
Brownian outcome function, so expected profits are exact functions of the
outcome moments.  The production game is best-response equivalent to a
two-player coordination game with favorites ``d_i = b (a_i - c_i) / 2`` and
coordination weight ``g_hat = b g / 2``; total profit is (up to the positive
factor ``2 / b``) the potential of the game with the cost externality
doubled.  The total-profit maximizer is therefore computed by potential
maximization on the doubled game, and decentralized implementability reduces
to membership of that maximizer in the base game's equilibrium set, which
flips at a complexity threshold computed here both in closed form and by
bisection against the equilibrium verifier.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .equilibrium import verify_equilibrium
from .errors import SolverError, ValidationError
from .game import DEFAULT_TOL, NetworkGame, build_game, outcome_moments
from .oracle import McEstimate, _estimate, sample_outcomes
from .potential import maximize_potential


@dataclass(frozen=True)
class OrgSpec:
    """Parameters of the two-division organization and its environment."""

    a1: float
    a2: float
    b: float
    c1: float
    c2: float
    g_org: float
    mu: float
    sigma2: float
    p0: float
    X0: float


def build_org(a1, a2, b, c1, c2, g_org, mu, sigma2, p0=0.0, X0=0.0) -> OrgSpec:
    """Validate organization parameters.

    The cost externality must satisfy ``g_org < 1 / b`` so that total profit
    is strictly concave in the quantity pair.
    """
    raw = dict(a1=a1, a2=a2, b=b, c1=c1, c2=c2, g_org=g_org, mu=mu, sigma2=sigma2, p0=p0, X0=X0)
    vals = {key: float(v) for key, v in raw.items()}
    if not all(np.isfinite(v) for v in vals.values()):
        raise ValidationError("organization parameters must be finite")
    if vals["b"] <= 0:
        raise ValidationError("price elasticity b must be positive")
    if vals["c1"] <= 0 or vals["c2"] <= 0:
        raise ValidationError("marginal-cost parameters must be positive")
    if vals["g_org"] < 0:
        raise ValidationError("cost-externality parameter must be nonnegative")
    if vals["b"] * vals["g_org"] >= 1:
        raise ValidationError("need g_org < 1/b for a concave total profit")
    if vals["mu"] >= 0:
        raise ValidationError("drift mu must be strictly negative")
    if vals["sigma2"] <= 0:
        raise ValidationError("sigma2 must be strictly positive")
    return OrgSpec(**vals)


def _g_hat(org: OrgSpec) -> float:
    return org.b * org.g_org / 2.0


def _favorites(org: OrgSpec) -> tuple[float, float]:
    return org.b * (org.a1 - org.c1) / 2.0, org.b * (org.a2 - org.c2) / 2.0


def org_to_game(org: OrgSpec, sigma2: float | None = None) -> tuple[NetworkGame, NetworkGame]:
    """The induced coordination game and its doubled-externality variant."""
    d1, d2 = _favorites(org)
    gh = _g_hat(org)
    s2 = org.sigma2 if sigma2 is None else float(sigma2)
    base = build_game(
        G=[[0.0, gh], [gh, 0.0]], d=[d1, d2], mu=org.mu, sigma2=s2, p0=org.p0, X0=org.X0
    )
    doubled = build_game(
        G=[[0.0, 2 * gh], [2 * gh, 0.0]], d=[d1, d2], mu=org.mu, sigma2=s2, p0=org.p0, X0=org.X0
    )
    return base, doubled


@dataclass(frozen=True)
class ProfitBreakdown:
    division1: float
    division2: float
    total: float


def expected_profit(org: OrgSpec, p, tol: float = DEFAULT_TOL) -> ProfitBreakdown:
    """Exact expected division profits and total profit at policy pair ``p``."""
    game, _ = org_to_game(org)
    moments = outcome_moments(game, p, tol)
    m, cov = moments.mean, moments.cov
    second = m * m + np.diag(cov)
    cross = m[0] * m[1] + cov[0, 1]
    pi1 = (org.a1 - org.c1) * m[0] - second[0] / org.b + org.g_org * cross
    pi2 = (org.a2 - org.c2) * m[1] - second[1] / org.b + org.g_org * cross
    return ProfitBreakdown(division1=float(pi1), division2=float(pi2), total=float(pi1 + pi2))


def mc_profit(org: OrgSpec, p, n_samples: int = 100_000, seed: int = 0) -> McEstimate:
    """Monte Carlo estimate of total expected profit (validation oracle)."""
    game, _ = org_to_game(org)
    q = sample_outcomes(game, p, n_samples, seed)
    w = (
        (org.a1 - org.c1) * q[:, 0]
        - q[:, 0] * q[:, 0] / org.b
        + (org.a2 - org.c2) * q[:, 1]
        - q[:, 1] * q[:, 1] / org.b
        + 2.0 * org.g_org * q[:, 0] * q[:, 1]
    )
    return _estimate(w, n_samples, seed)


def profit_maximizer(org: OrgSpec, tol: float = DEFAULT_TOL) -> np.ndarray:
    """The unique total-profit maximizing policy pair."""
    _, doubled = org_to_game(org)
    return maximize_potential(doubled, tol).profile


@dataclass(frozen=True)
class ThresholdResult:
    """Decentralization threshold in complexity and variance units.

    ``binding`` records whether the interval-membership condition or the
    multiplicity-onset condition pins the threshold.  ``bisection_k`` is the
    independent estimate from bisecting the equilibrium verifier applied to
    the profit maximizer.
    """

    threshold_k: float
    threshold_sigma2: float
    interval_k: float
    onset_k: float
    onset_sigma2: float
    binding: str
    bisection_k: float | None
    interior_at_threshold: bool
    x0_condition_value: float
    x0_condition_holds: bool


def _interval_threshold(org: OrgSpec) -> tuple[float, float, float]:
    """Closed-form threshold pieces: (interval_k, onset_k, A)."""
    gh = _g_hat(org)
    if gh <= 1e-12:
        raise SolverError("no finite decentralization threshold without cost externalities")
    d1, d2 = _favorites(org)
    d_hi, d_lo = max(d1, d2), min(d1, d2)
    A = (d1 + d2) / (2.0 * (1.0 - 2.0 * gh))
    c_hi = ((1.0 - gh) * A - d_lo) / gh
    c_lo = (d_hi - (1.0 - gh) * A) / gh
    onset = (d_hi - d_lo) / (2.0 * gh)
    return max(c_hi, c_lo, 0.0), onset, A


def _implementable(org: OrgSpec, k: float, tol: float) -> bool:
    sigma2 = 2.0 * abs(org.mu) * k
    base, _ = org_to_game(org, sigma2=sigma2)
    variant = dataclasses.replace(org, sigma2=sigma2)
    p_opt = profit_maximizer(variant, tol)
    return verify_equilibrium(base, p_opt, tol).is_equilibrium


def decentralization_threshold(
    org: OrgSpec,
    tol: float = DEFAULT_TOL,
    run_bisection: bool = True,
    bisect_tol: float = 1e-7,
) -> ThresholdResult:
    """Smallest complexity at which the profit maximizer is an equilibrium.

    The closed form places the doubled-game tie maximizer inside the base
    game's tie interval in expected-outcome space; the multiplicity-onset
    condition is checked alongside and the binding one is reported.  A
    bisection on the verifier cross-checks the value independently.
    """
    interval_k, onset_k, A = _interval_threshold(org)
    threshold_k = max(interval_k, onset_k)
    binding = "interval" if interval_k >= onset_k else "multiplicity"
    gh = _g_hat(org)
    d1, d2 = _favorites(org)
    d_hi, d_lo = max(d1, d2), min(d1, d2)

    k = threshold_k
    seg_hi = (d_lo + k) / (1.0 - gh)  # highest tie outcome = lowest tie policy
    seg_lo = (d_hi + (1.0 - 2.0 * gh) * k) / (1.0 - gh)
    policies = org.p0 + (org.X0 - np.array([A + k, seg_hi, seg_lo])) / (-org.mu)
    interior = bool(np.all(policies > org.p0 + tol))

    x0_min = (d_hi + 2.0 * gh * d_lo + k) / (1.0 - 2.0 * gh)

    bisection_k = None
    if run_bisection:
        lo = 1e-8
        hi = max(2.0 * threshold_k + 1.0, 1.0)
        if _implementable(org, lo, tol):
            bisection_k = 0.0
        else:
            for _ in range(200):
                if _implementable(org, hi, tol):
                    break
                hi *= 2.0
            else:
                raise SolverError("no finite decentralization threshold found by bisection")
            while hi - lo > bisect_tol:
                mid = 0.5 * (lo + hi)
                if _implementable(org, mid, tol):
                    hi = mid
                else:
                    lo = mid
            bisection_k = 0.5 * (lo + hi)

    return ThresholdResult(
        threshold_k=float(threshold_k),
        threshold_sigma2=float(2.0 * abs(org.mu) * threshold_k),
        interval_k=float(interval_k),
        onset_k=float(onset_k),
        onset_sigma2=float(2.0 * abs(org.mu) * onset_k),
        binding=binding,
        bisection_k=bisection_k,
        interior_at_threshold=interior,
        x0_condition_value=float(x0_min),
        x0_condition_holds=bool(org.X0 >= x0_min),
    )


@dataclass(frozen=True)
class OrgReport:
    """Everything the organization application reports for one parameter set."""

    game: NetworkGame
    doubled_game: NetworkGame
    p_opt: np.ndarray
    threshold: ThresholdResult
    k: float
    is_implementable: bool
    threshold_predicts: bool
    interiority_flags: dict


def build_org_report(org: OrgSpec, tol: float = DEFAULT_TOL) -> OrgReport:
    """Assemble the full organization report at the organization's own sigma2."""
    base, doubled = org_to_game(org)
    result = maximize_potential(doubled, tol)
    p_opt = result.profile
    threshold = decentralization_threshold(org, tol)
    k = org.sigma2 / (2.0 * abs(org.mu))
    check = verify_equilibrium(base, p_opt, tol)
    flags = {
        "p_opt_interior": bool(np.all(p_opt > org.p0 + tol)),
        "threshold_interior": threshold.interior_at_threshold,
        "x0_condition_holds": threshold.x0_condition_holds,
    }
    return OrgReport(
        game=base,
        doubled_game=doubled,
        p_opt=p_opt,
        threshold=threshold,
        k=float(k),
        is_implementable=check.is_equilibrium,
        threshold_predicts=bool(k >= threshold.threshold_k - tol),
        interiority_flags=flags,
    )


SWEEP_COLUMNS = (
    "sigma2",
    "k",
    "p1_star",
    "p2_star",
    "L",
    "U",
    "r1_star",
    "r2_star",
    "r_star",
    "branch",
    "interior",
)


@dataclass(frozen=True)
class SweepRow:
    """One row of the variance sweep; absent branch columns hold NaN."""

    sigma2: float
    k: float
    p1_star: float
    p2_star: float
    L: float
    U: float
    r1_star: float
    r2_star: float
    r_star: float
    branch: str
    interior: bool


def _unique_branch_policies(d1, d2, gh, k, mu, X0, p0) -> tuple[float, float]:
    """Strictly ordered equilibrium policies; valid when d_hi >= d_lo + 2 gh k."""
    hi_first = d1 >= d2
    d_hi, d_lo = (d1, d2) if hi_first else (d2, d1)
    m_hi = (d_hi + gh * d_lo) / (1.0 - gh * gh) + k / (1.0 + gh)
    m_lo = (d_lo + gh * d_hi) / (1.0 - gh * gh) + (1.0 + 2.0 * gh) * k / (1.0 + gh)
    p_hi = p0 + (X0 - m_hi) / (-mu)
    p_lo = p0 + (X0 - m_lo) / (-mu)
    return (p_hi, p_lo) if hi_first else (p_lo, p_hi)


def sweep_sigma(org: OrgSpec, sigma2_grid, tol: float = DEFAULT_TOL) -> list[SweepRow]:
    """Closed-form sweep of the equilibrium and maximizer policies over sigma2.

    Per row: the strictly ordered equilibrium policies (unique branch), the
    smallest/largest tie equilibrium policies ``L``/``U`` (multiple branch),
    the doubled-game analogues, and the tie maximizer policy ``r_star``.
    Branch labels switch from ``unique`` to ``multiple`` at the multiplicity
    onset and to ``implementable`` once ``r_star`` enters ``[L, U]``.
    """
    gh = _g_hat(org)
    d1, d2 = _favorites(org)
    d_hi, d_lo = max(d1, d2), min(d1, d2)
    mu, X0, p0 = org.mu, org.X0, org.p0
    A = (d1 + d2) / (2.0 * (1.0 - 2.0 * gh))
    rows: list[SweepRow] = []
    nan = float("nan")
    for s2 in np.asarray(sigma2_grid, dtype=float):
        k = s2 / (2.0 * abs(mu))
        spread = d_hi - d_lo
        p1s = p2s = L = U = r1s = r2s = rs = nan

        if spread >= 2.0 * gh * k - tol:
            p1s, p2s = _unique_branch_policies(d1, d2, gh, k, mu, X0, p0)
        if spread <= 2.0 * gh * k + tol:
            m_seg_hi = (d_lo + k) / (1.0 - gh)
            m_seg_lo = (d_hi + (1.0 - 2.0 * gh) * k) / (1.0 - gh)
            L = p0 + (X0 - m_seg_hi) / (-mu)
            U = p0 + (X0 - m_seg_lo) / (-mu)
        if spread >= 4.0 * gh * k - tol:
            r1s, r2s = _unique_branch_policies(d1, d2, 2.0 * gh, k, mu, X0, p0)
        if spread <= 4.0 * gh * k + tol:
            rs = p0 + (X0 - (A + k)) / (-mu)

        if spread > 2.0 * gh * k + tol:
            branch = "unique"
        else:
            m_star = A + k
            m_seg_hi = (d_lo + k) / (1.0 - gh)
            m_seg_lo = (d_hi + (1.0 - 2.0 * gh) * k) / (1.0 - gh)
            inside = m_seg_lo - tol <= m_star <= m_seg_hi + tol
            branch = "implementable" if inside else "multiple"

        populated = [v for v in (p1s, p2s, L, U, r1s, r2s, rs) if np.isfinite(v)]
        interior = bool(all(v > p0 + tol for v in populated))
        rows.append(
            SweepRow(
                sigma2=float(s2),
                k=float(k),
                p1_star=p1s,
                p2_star=p2s,
                L=L,
                U=U,
                r1_star=r1s,
                r2_star=r2s,
                r_star=rs,
                branch=branch,
                interior=interior,
            )
        )
    return rows
