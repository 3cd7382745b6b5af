"""Discrete Q-learning iteration and the continuous-time dynamics.

The discrete update is the primary integrator:

    Q_ki <- (1 - alpha_k) Q_ki + alpha_k r_ki(x_{-k})
    x_k  <- softmax(Q_k / T_k)

Agents are swept sequentially within a step, each seeing the already
updated strategies of lower-indexed agents. The sequential sweep is a
better discretisation of the continuous dynamics than the simultaneous
one: the simultaneous map is locally unstable around the QRE of
pairwise zero-sum games at small exploration rates (rotation outruns
the (1 - alpha) contraction), while the in-place sweep converges there
for any positive rate, matching the continuous-time guarantee.
``q_step`` exposes the one-shot simultaneous update for single-step
analysis.

The continuous-time vector field (replicator dynamics plus an entropy
drift scaled by T_k) is used for fixed-point residual cross-checks and
an optional Euler integrator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericalError, StructureError
from .games import INTERIOR_FLOOR, JointStrategy, as_rates

try:
    from numba import njit
    _HAVE_NUMBA = True
except ImportError:          # pragma: no cover - numba is a hard dependency
    _HAVE_NUMBA = False


@dataclass(frozen=True)
class LearnerConfig:
    """Exploration/learning rates plus horizon, window and tolerance."""

    T: object                      # scalar or per-agent exploration rates
    alpha: object = 0.1            # scalar or per-agent learning rates
    horizon: int = 2500
    window: int = 2500
    tolerance: float = 1e-5
    seed: int = 0

    def __post_init__(self):
        if self.horizon < 1 or not 1 <= self.window <= self.horizon:
            raise StructureError("need 1 <= window <= horizon")
        if self.tolerance <= 0:
            raise StructureError("tolerance must be positive")

    def rates(self, num_agents):
        return as_rates(self.T, num_agents)

    def learning_rates(self, num_agents):
        a = np.atleast_1d(np.asarray(self.alpha, dtype=float))
        if a.size == 1:
            a = np.full(num_agents, float(a[0]))
        elif a.size != num_agents:
            raise StructureError("wrong number of learning rates")
        if np.any(a < 0) or np.any(a > 1):
            raise StructureError("learning rates must lie in [0, 1]")
        return a


@dataclass(frozen=True)
class QState:
    """Per-agent Q-value vectors, stored concatenated."""

    flat: np.ndarray
    action_counts: tuple

    def __post_init__(self):
        if not np.all(np.isfinite(self.flat)):
            raise StructureError("Q-values must be finite")

    def block(self, k):
        o = np.concatenate(([0], np.cumsum(self.action_counts)))
        return self.flat[o[k]:o[k + 1]]


class Trajectory:
    """Recorded strategy iterates of one Q-learning run.

    ``states`` has one row per iterate (the initial point excluded); the
    final Q-state is kept so annealing can warm-start the next phase.
    """

    def __init__(self, game, states, final_q):
        self.action_counts = game.action_counts
        self.states = states
        self.final_q = final_q

    def __len__(self):
        return self.states.shape[0]

    def strategy(self, t):
        return JointStrategy.from_flat(self.states[t], self.action_counts)

    def final(self):
        return self.strategy(-1)

    def window(self, h):
        if h < 1 or h > len(self):
            raise StructureError("window length out of range")
        return self.states[-h:]


def boltzmann(Q_k, T_k):
    """Softmax of Q_k / T_k with max-subtraction for overflow safety."""
    if T_k <= 0:
        raise StructureError("exploration rate must be positive")
    z = np.asarray(Q_k, dtype=float) / T_k
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


def _segment_softmax(z, offsets, counts):
    m = np.maximum.reduceat(z, offsets[:-1])
    e = np.exp(z - np.repeat(m, counts))
    s = np.add.reduceat(e, offsets[:-1])
    return e / np.repeat(s, counts)


def _sync_step(game, q_flat, x_flat, T_rep, alpha_rep):
    """Simultaneous update of all agents from the old joint strategy."""
    offsets = game.offsets
    counts = np.asarray(game.action_counts)
    r = game.rewards_flat(x_flat)
    q = (1.0 - alpha_rep) * q_flat + alpha_rep * r
    x = _segment_softmax(q / T_rep, offsets, counts)
    return q, x


if _HAVE_NUMBA:
    @njit(cache=True)
    def _sweep_kernel(R, offsets, T, alpha, q, x, steps, record):
        num_agents = offsets.shape[0] - 1
        do_record = record.shape[0] == steps
        for t in range(steps):
            for k in range(num_agents):
                a, b = offsets[k], offsets[k + 1]
                r = R[a:b] @ x
                m = -1e308
                for i in range(b - a):
                    q[a + i] = (1.0 - alpha[k]) * q[a + i] + alpha[k] * r[i]
                    if q[a + i] > m:
                        m = q[a + i]
                tot = 0.0
                for i in range(a, b):
                    e = np.exp((q[i] - m) / T[k])
                    x[i] = e
                    tot += e
                for i in range(a, b):
                    x[i] /= tot
            if do_record:
                record[t] = x
        return q, x


def _iterate(game, q_flat, x_flat, T, alpha, steps, record=None):
    """Sequential-sweep inner loop on raw flat arrays."""
    q = q_flat.copy()
    x = x_flat.copy()
    offsets = game.offsets.astype(np.int64)
    if _HAVE_NUMBA:
        rec = record if record is not None else np.empty((0, x.size))
        q, x = _sweep_kernel(np.ascontiguousarray(game._reward_op), offsets,
                             np.asarray(T, dtype=float),
                             np.asarray(alpha, dtype=float),
                             q, x, steps, rec)
    else:
        R = game._reward_op
        slices = [slice(int(offsets[k]), int(offsets[k + 1]))
                  for k in range(game.num_agents)]
        for t in range(steps):
            for k, s in enumerate(slices):
                qk = (1.0 - alpha[k]) * q[s] + alpha[k] * (R[s] @ x)
                q[s] = qk
                z = qk / T[k]
                e = np.exp(z - z.max())
                x[s] = e / e.sum()
            if record is not None:
                record[t] = x
    if not np.all(np.isfinite(q)):
        raise NumericalError("Q-values overflowed during iteration",
                             last_iterate=q)
    return q, x


def q_step(game, q, x, cfg):
    """One synchronous Q-update for all agents; returns (QState, JointStrategy)."""
    if q.action_counts != game.action_counts:
        raise StructureError("QState shape does not match game")
    T = cfg.rates(game.num_agents)
    alpha = cfg.learning_rates(game.num_agents)
    counts = np.asarray(game.action_counts)
    q_new, x_new = _sync_step(game, q.flat, x.flat,
                              np.repeat(T, counts), np.repeat(alpha, counts))
    return (QState(q_new, game.action_counts),
            JointStrategy.from_flat(x_new, game.action_counts))


def random_inits(game, count, seed):
    """Deterministic batch of uniform-on-simplex initial strategies."""
    rng = np.random.Generator(np.random.Philox(seed))
    return [JointStrategy.random(game.action_counts, rng)
            for _ in range(count)]


def run_q_learning(game, cfg, init="random", q0=None):
    """Run the discrete Q-learning iteration for cfg.horizon steps.

    ``init`` is a JointStrategy or the string "random" (drawn from
    cfg.seed). Q starts from the consistent warm start Q(0) = r(x(0))
    unless an explicit QState ``q0`` is given.
    """
    if init == "random":
        rng = np.random.Generator(np.random.Philox(cfg.seed))
        x0 = JointStrategy.random(game.action_counts, rng)
    elif isinstance(init, JointStrategy):
        x0 = init
    else:
        raise StructureError("init must be a JointStrategy or 'random'")
    if x0.action_counts != game.action_counts:
        raise StructureError("initial strategy does not match game")

    T = cfg.rates(game.num_agents)
    alpha = cfg.learning_rates(game.num_agents)
    q_flat = game.rewards_flat(x0.flat) if q0 is None else q0.flat
    record = np.empty((cfg.horizon, game.total_actions))
    q_final, _ = _iterate(game, q_flat, x0.flat, T, alpha,
                          cfg.horizon, record)
    return Trajectory(game, record, QState(q_final, game.action_counts))


def converged(window, tolerance):
    """Windowed relative-spread convergence test.

    True iff (max_t x_ki - min_t x_ki) / max_t x_ki < tolerance for every
    agent-action coordinate; a coordinate pinned at zero counts as
    converged.
    """
    w = np.asarray(window, dtype=float)
    if w.ndim != 2 or w.shape[0] < 1:
        raise StructureError("window must be a non-empty 2-d array")
    mx = w.max(axis=0)
    mn = w.min(axis=0)
    ratio = np.where(mx > 0, (mx - mn) / np.where(mx > 0, mx, 1.0), 0.0)
    return bool(np.all(ratio < tolerance))


def qld_vector_field(game, x, T):
    """Continuous-time Q-learning dynamics, evaluated per agent.

    xdot_ki = x_ki [ r_ki - <x_k, r_k> + T_k sum_j x_kj ln(x_kj / x_ki) ].
    """
    Tv = as_rates(T, game.num_agents)
    if np.any(x.flat <= INTERIOR_FLOOR):
        raise DomainError("vector field needs a strictly interior point")
    out = []
    r_all = game.rewards_flat(x.flat)
    for k in range(game.num_agents):
        xk = x.block(k)
        rk = game.block(r_all, k)
        lnx = np.log(xk)
        drift = float(np.dot(xk, lnx)) - lnx
        out.append(xk * (rk - float(np.dot(xk, rk)) + Tv[k] * drift))
    return out


def euler_qld(game, x0, T, steps, dt=0.01):
    """Explicit-Euler integration of the continuous dynamics (comparison only)."""
    counts = game.action_counts
    x = x0
    record = np.empty((steps, game.total_actions))
    for t in range(steps):
        field = np.concatenate(qld_vector_field(game, x, T))
        flat = np.clip(x.flat + dt * field, 1e-12, None)
        x = JointStrategy.from_flat(flat / np.repeat(
            np.add.reduceat(flat, game.offsets[:-1]), counts), counts)
        record[t] = x.flat
    return record
