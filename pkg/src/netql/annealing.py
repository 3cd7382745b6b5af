"""Iterative exploration-rate reduction along the stable QRE continuum.

Start all agents just above a convergence threshold, run Q-learning to a
QRE, then repeatedly lower the exploration rate of the agent currently
dominating the epsilon-Nash bound and re-run with the Q-state carried
over. Annealing stops when the dynamics fail the windowed convergence
test, hit the rate floor or exhaust the anneal budget; the last accepted
QRE is the result.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, StructureError
from .dynamics import (LearnerConfig, Trajectory, converged, random_inits,
                       run_q_learning)
from .equilibria import epsilon_nash, exploitability
from .games import ExplorationRates, JointStrategy
from .spectral import stability_report

CONDITIONS = ("C1", "C2", "C3")


@dataclass(frozen=True)
class AnnealParams:
    delta_t: float | None = None   # default: 2% of the initial max rate
    max_anneals: int = 50
    horizon: int | None = None     # default: max(500 * N, window)
    window: int = 500
    tol: float = 1e-5
    initial_condition: str = "C1"
    safety_margin: float = 1.05
    min_rate: float = 0.1          # floor when a threshold is exactly 0

    def __post_init__(self):
        if self.initial_condition not in CONDITIONS:
            raise StructureError(
                f"initial_condition must be one of {CONDITIONS}")
        if self.safety_margin < 1.0:
            raise StructureError("safety_margin must be >= 1")
        if self.max_anneals < 1 or self.window < 1 or self.tol <= 0:
            raise StructureError("invalid anneal parameters")


@dataclass(frozen=True)
class AnnealStep:
    rates: np.ndarray
    strategy: JointStrategy
    epsilon: float
    exploitability: float
    converged: bool
    annealed_agent: int | None


@dataclass(frozen=True)
class AnnealHistory:
    steps: tuple
    status: str        # max_anneals | instability | floor
    total_iterations: int

    def accepted(self):
        return [s for s in self.steps if s.converged]

    def final(self):
        """Last accepted step; its strategy is the learned QRE."""
        return self.accepted()[-1]


def initial_rates(game, params):
    """Per-agent starting rates: safety margin times the chosen threshold."""
    rep = stability_report(game)
    if params.initial_condition == "C1":
        thr = rep.c1.astype(float)
    elif params.initial_condition == "C2":
        thr = np.full(game.num_agents, rep.c2)
    else:
        if not rep.c3_applicable:
            raise StructureError(
                "C3 needs every edge to carry the same bimatrix game")
        thr = np.full(game.num_agents, rep.c3)
    T0 = params.safety_margin * thr
    return np.where(T0 > 0, T0, params.min_rate)


def anneal(game, params, alpha=0.1, seed=0):
    """Run the exploration update scheme; returns the step history."""
    T = initial_rates(game, params)
    horizon = params.horizon or max(500 * game.num_agents, params.window)
    delta_t = params.delta_t
    if delta_t is None:
        delta_t = 0.02 * float(T.max())
    if delta_t <= 0:
        raise StructureError("delta_t must be positive")

    def phase(rates, q_state, init):
        cfg = LearnerConfig(T=ExplorationRates(rates.copy()), alpha=alpha,
                            horizon=horizon, window=params.window,
                            tolerance=params.tol, seed=seed)
        traj = run_q_learning(game, cfg, init=init, q0=q_state)
        ok = converged(traj.window(params.window), params.tol)
        return traj, ok

    def record(rates, traj, ok, agent):
        x = traj.final()
        eps, _ = epsilon_nash(game, x, rates)
        return AnnealStep(rates=rates.copy(), strategy=x, epsilon=eps,
                          exploitability=exploitability(game, x),
                          converged=ok, annealed_agent=agent)

    traj, ok = phase(T, None, "random")
    total = horizon
    if not ok:
        raise NumericalError(
            "initial threshold did not converge; increase safety_margin")
    steps = [record(T, traj, True, None)]

    status = "max_anneals"
    for _ in range(params.max_anneals):
        x_bar = steps[-1].strategy
        _, per_agent = epsilon_nash(game, x_bar, T)
        target = int(np.argmax(per_agent))   # ties: lowest agent index
        if T[target] - delta_t <= 0:
            status = "floor"
            break
        T = T.copy()
        T[target] -= delta_t
        traj, ok = phase(T, traj.final_q, traj.final())
        total += horizon
        steps.append(record(T, traj, ok, target))
        if not ok:
            status = "instability"
            break

    return AnnealHistory(steps=tuple(steps), status=status,
                         total_iterations=total)
