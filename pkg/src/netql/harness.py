"""Experiment harness: stability sweeps, spread statistics, threshold
curves and annealed random-game batches.

All entry points are pure functions returning row dictionaries ready for
CSV serialisation; the CLI layer handles files. Sweep cells are
independent and can be fanned out over a process pool.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .annealing import AnnealParams, anneal
from .catalog import (RandomGameSpec, TopologySpec, chakraborty_game,
                      mismatching_game, random_game, sato_game, shapley_game)
from .dynamics import LearnerConfig, converged, random_inits, run_q_learning
from .errors import StructureError
from .games import ExplorationRates
from .spectral import stability_report

GAME_FAMILIES = ("shapley", "sato", "chakraborty", "mismatching", "random")


def build_game(family, params, topology_kind, num_agents):
    """Construct a catalogue game from a family name and parameter dict."""
    if family == "shapley":
        return shapley_game(params.get("beta", 0.2),
                            TopologySpec(topology_kind, num_agents))
    if family == "sato":
        return sato_game(params.get("eps_x", 0.01), params.get("eps_y", -0.05),
                         TopologySpec(topology_kind, num_agents))
    if family == "chakraborty":
        return chakraborty_game(params.get("alpha", 2.5),
                                params.get("beta", 1.5), num_agents)
    if family == "mismatching":
        return mismatching_game(params.get("m", 2.0), num_agents)
    if family == "random":
        spec = RandomGameSpec(
            num_agents=num_agents,
            actions_per_agent=int(params.get("actions", 2)),
            topology=TopologySpec(topology_kind, num_agents),
            payoff_low=params.get("payoff_low", 0.0),
            payoff_high=params.get("payoff_high", 5.0),
            seed=int(params.get("seed", 0)))
        return random_game(spec)
    raise StructureError(f"unknown game family {family!r}")


@dataclass(frozen=True)
class SweepSpec:
    game_family: str
    family_params: dict = field(default_factory=dict)
    topology: str = "ring"
    agent_counts: tuple = (3, 6, 9, 12, 15)
    t_grid: tuple | None = None          # (lo, hi, step)
    t_bisection: tuple | None = None     # (lo, hi, resolution)
    num_inits: int = 10
    horizon: int = 10000
    window: int = 2500
    tol: float = 1e-5
    alpha: float = 0.1
    seed: int = 0
    certify: bool = True

    def __post_init__(self):
        if self.game_family not in GAME_FAMILIES:
            raise StructureError(f"unknown family {self.game_family!r}")
        if (self.t_grid is None) == (self.t_bisection is None):
            raise StructureError("give exactly one of t_grid / t_bisection")
        for bounds in (self.t_grid, self.t_bisection):
            if bounds is not None:
                lo, hi, res = bounds
                if not (lo < hi and res > 0):
                    raise StructureError("need lo < hi and resolution > 0")
        if self.num_inits < 1:
            raise StructureError("num_inits must be >= 1")


def _run_one(game, T, cfg_dict, init):
    cfg = LearnerConfig(T=T, **cfg_dict)
    traj = run_q_learning(game, cfg, init=init)
    ok = converged(traj.window(cfg.window), cfg.tolerance)
    return ok, traj.final()


def all_inits_converge(game, T, horizon, window, tol, num_inits, seed,
                       alpha=0.1, agreement_tol=None):
    """Convergence of every random initial condition at exploration rate T.

    Returns (all_converged, cross_init_agreement) where agreement is the
    max pairwise l-inf distance between final points (None when not
    requested or not all converged).
    """
    inits = random_inits(game, num_inits, seed)
    cfg_dict = dict(alpha=alpha, horizon=horizon, window=window, tolerance=tol)
    finals = []
    for x0 in inits:
        ok, xf = _run_one(game, T, cfg_dict, x0)
        if not ok:
            return False, None
        finals.append(xf.flat)
    agreement = None
    if agreement_tol is not None:
        agreement = 0.0
        for i in range(len(finals)):
            for j in range(i + 1, len(finals)):
                agreement = max(agreement, float(
                    np.max(np.abs(finals[i] - finals[j]))))
    return True, agreement


def _sweep_cell(args):
    (family, params, topo, n, horizon, window, tol, alpha, num_inits, seed,
     mode, bounds) = args
    game = build_game(family, params, topo, n)
    rep = stability_report(game)

    def ok_at(T):
        ok, _ = all_inits_converge(game, T, horizon, window, tol,
                                   num_inits, seed, alpha=alpha)
        return ok

    t_star = None
    if mode == "grid":
        lo, hi, step = bounds
        for T in np.arange(lo, hi + 0.5 * step, step):
            if T <= 0:
                continue
            if ok_at(float(T)):
                t_star = float(T)
                break
    else:
        lo, hi, res = bounds
        if ok_at(hi):
            bad, good = lo, hi
            if lo > 0 and ok_at(lo):
                t_star = lo
            else:
                while good - bad > res:
                    mid = 0.5 * (bad + good)
                    if ok_at(mid):
                        good = mid
                    else:
                        bad = mid
                t_star = good
        # else: no converging T in range; row stays flagged

    row = {
        "N": n,
        "topology": topo,
        "T_star": t_star,
        "found": t_star is not None,
        "c1_max": float(np.max(rep.c1)),
        "c2": rep.c2,
        "c3": rep.c3,
    }
    return row


def stability_sweep(spec, workers=None):
    """Empirical stability boundary per agent count.

    For each N, finds the smallest T at which all initial conditions pass
    the windowed convergence test; rows carry the theoretical thresholds
    and, optionally, a bracketing certificate around T_star.
    """
    mode = "grid" if spec.t_grid is not None else "bisection"
    bounds = spec.t_grid if mode == "grid" else spec.t_bisection
    cells = [(spec.game_family, spec.family_params, spec.topology, n,
              spec.horizon, spec.window, spec.tol, spec.alpha, spec.num_inits,
              spec.seed, mode, bounds)
             for n in spec.agent_counts]
    rows = _map(_sweep_cell, cells, workers)

    if spec.certify:
        for row in rows:
            if not row["found"]:
                row["cert_upper_ok"] = row["cert_lower_fails"] = None
                continue
            game = build_game(spec.game_family, spec.family_params,
                              row["topology"], row["N"])
            up, _ = all_inits_converge(game, 1.02 * row["T_star"],
                                       spec.horizon, spec.window, spec.tol,
                                       spec.num_inits, spec.seed,
                                       alpha=spec.alpha)
            down, _ = all_inits_converge(game, 0.98 * row["T_star"],
                                         spec.horizon, spec.window, spec.tol,
                                         spec.num_inits, spec.seed,
                                         alpha=spec.alpha)
            row["cert_upper_ok"] = up
            row["cert_lower_fails"] = not down
    return rows


def _map(fn, items, workers):
    if workers is None:
        workers = min(len(items), os.cpu_count() or 1)
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def spread_report(game, t_values, num_inits, horizon, window, seed=0,
                  alpha=0.1, tol=1e-5):
    """Window quantiles of each action probability across exploration rates."""
    rows = []
    for T in t_values:
        inits = random_inits(game, num_inits, seed)
        for idx, x0 in enumerate(inits):
            cfg = LearnerConfig(T=T, alpha=alpha, horizon=horizon,
                                window=window, tolerance=tol)
            traj = run_q_learning(game, cfg, init=x0)
            w = traj.window(window)
            for k in range(game.num_agents):
                blk = w[:, game.offsets[k]:game.offsets[k + 1]]
                for a in range(game.action_counts[k]):
                    col = blk[:, a]
                    rows.append({
                        "T": float(T), "init": idx, "agent": k, "action": a,
                        "min": float(col.min()),
                        "q25": float(np.quantile(col, 0.25)),
                        "median": float(np.median(col)),
                        "q75": float(np.quantile(col, 0.75)),
                        "max": float(col.max()),
                    })
    return rows


def threshold_curves(family, params, topologies, agent_counts):
    """Theoretical thresholds per (topology, N); pure computation."""
    rows = []
    for topo in topologies:
        for n in agent_counts:
            game = build_game(family, params, topo, n)
            rep = stability_report(game)
            rows.append({
                "N": n, "topology": topo,
                "c1_max": float(np.max(rep.c1)),
                "c2": rep.c2,
                "c3": rep.c3,
            })
    return rows


def _batch_cell(args):
    game_id, seed, base_spec, anneal_params, alpha = args
    spec = RandomGameSpec(
        num_agents=base_spec.num_agents,
        actions_per_agent=base_spec.actions_per_agent,
        topology=base_spec.topology,
        payoff_low=base_spec.payoff_low,
        payoff_high=base_spec.payoff_high,
        seed=seed)
    row = {"game_id": game_id, "seed": seed}
    try:
        game = random_game(spec)
        hist = anneal(game, anneal_params, alpha=alpha, seed=seed)
        first, last = hist.accepted()[0], hist.final()
        row.update(
            initial_exploitability=first.exploitability,
            final_exploitability=last.exploitability,
            initial_epsilon=first.epsilon,
            final_epsilon=last.epsilon,
            steps_run=hist.total_iterations,
            status=hist.status)
    except Exception as exc:   # per-game failures never abort the batch
        row.update(initial_exploitability=None, final_exploitability=None,
                   initial_epsilon=None, final_epsilon=None,
                   steps_run=0, status=f"error: {exc}")
    return row


def random_batch(spec, count, anneal_params, alpha=0.1, workers=None):
    """Anneal a batch of independent random games; deterministic per master seed."""
    seeds = np.random.Generator(np.random.Philox(spec.seed)).integers(
        0, 2**63 - 1, size=count)
    cells = [(i, int(seeds[i]), spec, anneal_params, alpha)
             for i in range(count)]
    return _map(_batch_cell, cells, workers)
