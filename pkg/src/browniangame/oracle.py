"""Seeded Monte Carlo validation of the closed-form payoff and potential.

The one-shot game only touches the outcome function through the joint normal
law of the outcomes at the chosen policies, so the oracle samples that
finite-dimensional distribution directly (no path simulation).  The
covariance is factorized with a symmetric eigenvalue square root; policy ties
make the matrix singular by construction, so small negative eigenvalues are
clipped at ``-1e-10`` and anything below that is rejected as a genuinely
invalid covariance (possible only in generalized mode).

Sampling uses the counter-based Philox generator, so estimates are
bit-reproducible given the seed, and block-parallel extensions can split
seeds deterministically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .game import DEFAULT_TOL, NetworkGame, outcome_moments
from .payoff import _require_symmetric

EIG_CLIP = -1e-10


@dataclass(frozen=True)
class McEstimate:
    """A seeded Monte Carlo estimate with its sampling standard error."""

    mean: float
    stderr: float
    n_samples: int
    seed: int


def sample_outcomes(game: NetworkGame, p, n_samples: int, seed: int) -> np.ndarray:
    """Draw ``n_samples`` joint-normal outcome vectors at profile ``p``."""
    if n_samples < 2:
        raise ValidationError("n_samples must be at least 2")
    moments = outcome_moments(game, p, DEFAULT_TOL)
    lam, vec = np.linalg.eigh(moments.cov)
    if np.min(lam) < EIG_CLIP * max(1.0, float(np.max(np.abs(moments.cov)))):
        raise ValidationError(
            "outcome covariance is not positive semidefinite; "
            "the supplied pairwise scales do not define a valid joint law"
        )
    root = vec * np.sqrt(np.clip(lam, 0.0, None))
    rng = np.random.Generator(np.random.Philox(seed))
    z = rng.standard_normal((int(n_samples), game.n))
    return moments.mean + z @ root.T


def _estimate(values: np.ndarray, n_samples: int, seed: int) -> McEstimate:
    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / np.sqrt(values.size))
    return McEstimate(mean=mean, stderr=stderr, n_samples=int(n_samples), seed=int(seed))


def mc_payoff(game: NetworkGame, p, i: int, n_samples: int = 100_000, seed: int = 0) -> McEstimate:
    """Monte Carlo estimate of player ``i``'s expected utility at ``p``."""
    x = sample_outcomes(game, p, n_samples, seed)
    gap = game.d[i] + x @ game.G[i] - x[:, i]
    return _estimate(-gap * gap, n_samples, seed)


def mc_potential(game: NetworkGame, p, n_samples: int = 100_000, seed: int = 0) -> McEstimate:
    """Monte Carlo estimate of the potential at ``p`` (symmetric ``G`` only)."""
    _require_symmetric(game, DEFAULT_TOL)
    x = sample_outcomes(game, p, n_samples, seed)
    vals = x @ game.d - 0.5 * np.sum(x * x, axis=1) + 0.5 * np.einsum("si,ij,sj->s", x, game.G, x)
    return _estimate(vals, n_samples, seed)
