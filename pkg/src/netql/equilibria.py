"""Equilibrium quality metrics: QRE residuals, epsilon-Nash and exploitability.

Any QRE with rates T is an epsilon-approximate Nash equilibrium with
epsilon = max_k T_k A_k(x_k), where A_k is the surprisal gap (largest
log-probability minus negative entropy). The gap's exact maximum over
the simplex has a closed form in the Lambert W function.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, StructureError
from .games import as_rates, reward_vector
from .dynamics import boltzmann


def qre_residual(game, x, T):
    """max |x_k - softmax(r_k / T_k)| over agents and actions; 0 iff QRE."""
    Tv = as_rates(T, game.num_agents)
    worst = 0.0
    for k in range(game.num_agents):
        r = reward_vector(game, k, x)
        worst = max(worst, float(np.max(np.abs(x.block(k) - boltzmann(r, Tv[k])))))
    return worst


def surprisal_gap(x_k):
    """A(x) = max_{i: x_i > 0} ln x_i - <x, ln x>, with 0 ln 0 = 0."""
    v = np.asarray(x_k, dtype=float)
    pos = v > 0
    if not pos.any():
        raise StructureError("strategy vector is all zero")
    neg_entropy = float(np.dot(v[pos], np.log(v[pos])))
    return float(np.max(np.log(v[pos]))) - neg_entropy


def epsilon_nash(game, x, T):
    """(epsilon, per-agent values) from the QRE-to-Nash bound.

    The bound is exact only when x is a QRE at rates T; for arbitrary x
    the formula is still evaluated but only exploitability is meaningful.
    """
    Tv = as_rates(T, game.num_agents)
    per_agent = np.array([Tv[k] * surprisal_gap(x.block(k))
                          for k in range(game.num_agents)])
    return float(per_agent.max()), per_agent


def exploitability(game, x):
    """Sum over agents of the best pure-deviation gain against x.

    The inner maximisation over mixed deviations is attained at a pure
    action because the objective is linear.
    """
    total = 0.0
    for k in range(game.num_agents):
        r = reward_vector(game, k, x)
        total += float(r.max() - np.dot(x.block(k), r))
    return total


_INV_E = math.exp(-1.0)


def _lambert_bisect(z, tol=1e-15):
    lo, hi = -1.0, max(1.0, math.log1p(abs(z)) + 1.0)
    while hi * math.exp(hi) < z:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid * math.exp(mid) < z:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol * max(1.0, abs(mid)):
            break
    return 0.5 * (lo + hi)


def lambert_w(z, tol=1e-12, max_iter=100):
    """Principal-branch Lambert W by Halley iteration.

    Valid for z >= -1/e; bisection fallback if Halley stalls.
    """
    z = float(z)
    if z < -_INV_E - 1e-15:
        raise DomainError(f"lambert_w domain is z >= -1/e, got {z}")
    if z < -_INV_E:
        z = -_INV_E
    if z == 0.0:
        return 0.0
    if z >= 0.0:
        w = math.log1p(z)
    else:
        # series about the branch point z = -1/e
        p = math.sqrt(2.0 * (math.e * z + 1.0))
        w = -1.0 + p - p * p / 3.0

    for _ in range(max_iter):
        ew = math.exp(w)
        f = w * ew - z
        if f == 0.0 or w == -1.0:      # exact root / branch point
            break
        denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0)
        if denom == 0.0:
            break
        step = f / denom
        w -= step
        if abs(step) <= tol * max(1.0, abs(w)):
            break
    if abs(w * math.exp(w) - z) > tol * max(1.0, abs(z)):
        w = _lambert_bisect(z)
    return w


def surprisal_gap_max(n_k):
    """Exact maximum of the surprisal gap over the (n_k - 1)-simplex.

    Returns (value, c): the maximiser puts mass c on one action and
    splits the remaining 1 - c evenly over the other n_k - 1.
    """
    n = int(n_k)
    if n < 2:
        raise StructureError("need at least 2 actions")
    w = lambert_w((n - 1) / math.e)
    value = (math.log(n - 1) - math.log(w)) / (1.0 + 1.0 / w)
    c = 1.0 / (w + 1.0)
    return value, c


def equilibrium_report(game, x, T):
    """Bundle of the quality metrics at a candidate equilibrium."""
    eps, per_agent = epsilon_nash(game, x, T)
    return {
        "qre_residual": qre_residual(game, x, T),
        "epsilon": eps,
        "per_agent_epsilon": per_agent,
        "exploitability": exploitability(game, x),
    }
