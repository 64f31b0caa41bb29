"""Matplotlib rendering of solver output to image files.

Figure rendering is strictly opt-in from the CLI (``--plot``); every command
works without it and emits the same data either way.  The Agg backend is
forced so rendering works headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .best_response import best_response, policy_upper_bound
from .game import NetworkGame
from .payoff import own_policy_utilities, payoff_kinks


def render_sweep(rows, path, mu: float | None = None) -> str:
    """Plot the variance sweep: equilibrium and maximizer policies vs sigma2."""
    s2 = np.array([r.sigma2 for r in rows])

    def series(attr):
        return np.array([getattr(r, attr) for r in rows])

    fig, ax = plt.subplots(figsize=(7.0, 4.4))
    ax.plot(s2, series("p1_star"), color="tab:blue", lw=2, label=r"$p_1^*$")
    ax.plot(s2, series("p2_star"), color="tab:red", lw=2, label=r"$p_2^*$")
    ax.plot(s2, series("L"), color="black", ls="--", lw=1.5, label="L")
    ax.plot(s2, series("U"), color="black", ls="-.", lw=1.5, label="U")
    ax.plot(s2, series("r1_star"), color="tab:cyan", ls=":", lw=2, label=r"$r_1^*$")
    ax.plot(s2, series("r2_star"), color="tab:orange", ls=":", lw=2, label=r"$r_2^*$")
    ax.plot(s2, series("r_star"), color="tab:green", ls=":", lw=2.5, label=r"$r^*$")
    branches = [r.branch for r in rows]
    for name, color in (("multiple", "tab:blue"), ("implementable", "tab:green")):
        if name in branches:
            ax.axvline(s2[branches.index(name)], color=color, alpha=0.4, lw=1)
    ax.set_xlabel(r"$\sigma^2$")
    ax.set_ylabel("policy")
    ax.legend(loc="best", fontsize=8, ncol=2)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def render_payoff_slice(game: NetworkGame, i: int, profile, path, n_points: int = 600) -> str:
    """Plot player i's payoff in her own policy with kink markers."""
    hi = max(policy_upper_bound(game), float(np.max(profile)) * 1.2 + 0.1)
    grid = np.linspace(game.p0, hi, n_points)
    vals = own_policy_utilities(game, i, profile, grid)
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.plot(grid, vals, color="tab:blue", lw=2)
    for kink in payoff_kinks(game, profile, i):
        ax.axvline(kink.location, color="tab:red", ls="--", lw=1, alpha=0.7)
        ax.annotate(
            f"drop {kink.slope_drop:g}",
            (kink.location, float(np.interp(kink.location, grid, vals))),
            textcoords="offset points",
            xytext=(4, 4),
            fontsize=8,
        )
    ax.set_xlabel(f"policy of player {i}")
    ax.set_ylabel("expected utility")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def render_equilibrium_map(game: NetworkGame, report, path, n_points: int = 120) -> str:
    """For two players: best-response curves plus the equilibrium set."""
    if game.n != 2:
        raise ValueError("the equilibrium map is only drawn for two players")
    hi = policy_upper_bound(game) * 1.05 + 1e-6
    grid = np.linspace(game.p0, hi, n_points)
    br1 = np.array([best_response(game, 0, [0.0, t]).policy for t in grid])
    br2 = np.array([best_response(game, 1, [t, 0.0]).policy for t in grid])
    fig, ax = plt.subplots(figsize=(5.2, 5.2))
    ax.plot(grid, br1, color="tab:blue", lw=2, label="best response of 1")
    ax.plot(br2, grid, color="tab:red", lw=2, label="best response of 2")
    for pt in report.points:
        ax.plot(pt.profile[1], pt.profile[0], "ko", ms=6)
    for seg in report.segments:
        ax.plot(
            [seg.lower[1], seg.upper[1]],
            [seg.lower[0], seg.upper[0]],
            color="black",
            lw=3,
            alpha=0.7,
        )
    ax.set_xlabel("policy of player 2")
    ax.set_ylabel("policy of player 1")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)
