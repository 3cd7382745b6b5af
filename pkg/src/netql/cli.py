"""Command-line front end.

Subcommands: simulate, bounds, report, sweep, spread, anneal, batch,
curves. Every run writes a CSV, a JSON summary and a manifest (resolved
options, seeds and output hashes) for reproducibility. Exit codes:
0 success, 2 validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys

import numpy as np

from .annealing import AnnealParams, anneal
from .dynamics import LearnerConfig, converged, run_q_learning
from .equilibria import equilibrium_report
from .errors import NumericalError
from .catalog import RandomGameSpec, TopologySpec
from .games import (JointStrategy, load_game, save_game)
from .harness import (GAME_FAMILIES, SweepSpec, build_game, random_batch,
                      spread_report, stability_sweep, threshold_curves)
from .spectral import stability_report


def _parse_params(pairs):
    out = {}
    for item in pairs or []:
        if "=" not in item:
            raise ValueError(f"--param expects key=value, got {item!r}")
        key, val = item.split("=", 1)
        try:
            out[key] = float(val) if "." in val or "e" in val.lower() else int(val)
        except ValueError:
            out[key] = val
    return out


def _game_from_args(args):
    if getattr(args, "game_file", None):
        return load_game(args.game_file)
    params = _parse_params(getattr(args, "param", None))
    return build_game(args.family, params, args.topology, args.agents)


def _add_game_flags(p):
    p.add_argument("--game-file", help="load a serialized game instead of "
                   "building one from a family")
    p.add_argument("--family", choices=GAME_FAMILIES, default="sato")
    p.add_argument("--topology", choices=("ring", "star", "full"),
                   default="ring")
    p.add_argument("--agents", type=int, default=3)
    p.add_argument("--param", action="append", metavar="KEY=VALUE",
                   help="family parameter, repeatable (e.g. beta=0.2)")


def _add_common_flags(p):
    p.add_argument("--config", help="JSON file whose entries override flags")
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--seed", type=int, default=0)


def _write_csv(path, rows, columns):
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=columns, extrasaction="ignore")
        w.writeheader()
        for row in rows:
            w.writerow(row)


def _finish(args, rows, columns, summary):
    _write_csv(args.out, rows, columns)
    with open(args.out) as f:
        digest = hashlib.sha256(f.read().encode()).hexdigest()
    summary = dict(summary)
    summary["rows"] = len(rows)
    summary["output"] = args.out
    with open(args.out + ".summary.json", "w") as f:
        json.dump(summary, f, indent=1, default=str)
    manifest = {
        "command": sys.argv[1:2],
        "options": {k: v for k, v in vars(args).items() if k != "func"},
        "output_sha256": digest,
    }
    with open(args.out + ".manifest.json", "w") as f:
        json.dump(manifest, f, indent=1, default=str)
    return summary


def cmd_simulate(args):
    game = _game_from_args(args)
    cfg = LearnerConfig(T=_t_list(args.T, game.num_agents), alpha=args.alpha,
                        horizon=args.horizon, window=args.window,
                        tolerance=args.tol, seed=args.seed)
    traj = run_q_learning(game, cfg)
    ok = converged(traj.window(cfg.window), cfg.tolerance)
    rows = []
    for t in range(0, len(traj), args.stride):
        state = traj.states[t]
        for k in range(game.num_agents):
            for a in range(game.action_counts[k]):
                rows.append({"step": t, "agent": k, "action": a,
                             "probability": state[game.offsets[k] + a]})
    summary = _finish(args, rows, ["step", "agent", "action", "probability"],
                      {"converged": ok,
                       "final": [b.tolist() for b in traj.final().blocks()]})
    print(f"converged={summary['converged']}")


def _t_list(value, num_agents):
    vals = [float(v) for v in str(value).split(",")]
    return vals[0] if len(vals) == 1 else np.asarray(vals)


def cmd_bounds(args):
    game = _game_from_args(args)
    rep = stability_report(game)
    rows = [{"agent": k,
             "delta": rep.influence_bounds[k],
             "neighbors": int(rep.neighbor_counts[k]),
             "c1": rep.c1[k], "c2": rep.c2, "c3": rep.c3}
            for k in range(game.num_agents)]
    print(f"{'agent':>5} {'delta':>10} {'nbrs':>5} {'c1':>10} "
          f"{'c2':>10} {'c3':>10}")
    for r in rows:
        c3 = f"{r['c3']:.4f}" if r["c3"] is not None else "n/a"
        print(f"{r['agent']:>5} {r['delta']:>10.4f} {r['neighbors']:>5} "
              f"{r['c1']:>10.4f} {r['c2']:>10.4f} {c3:>10}")
    _finish(args, rows, ["agent", "delta", "neighbors", "c1", "c2", "c3"],
            {"sigma_I": rep.sigma_I, "norm_inf": rep.norm_inf,
             "norm_two": rep.norm_two, "c3_applicable": rep.c3_applicable})


def cmd_report(args):
    game = _game_from_args(args)
    with open(args.strategy) as f:
        x = JointStrategy(json.load(f)["strategy"])
    T = _t_list(args.T, game.num_agents)
    rep = equilibrium_report(game, x, T)
    Tv = np.atleast_1d(np.asarray(T, dtype=float))
    if Tv.size == 1:
        Tv = np.full(game.num_agents, Tv[0])
    rows = []
    for k in range(game.num_agents):
        eps_k = rep["per_agent_epsilon"][k]
        rows.append({"agent": k, "T": Tv[k], "A_k": eps_k / Tv[k],
                     "eps_k": eps_k})
    rows.append({"agent": "summary", "T": "", "A_k": "",
                 "eps_k": rep["epsilon"]})
    print(f"qre_residual   {rep['qre_residual']:.3e}")
    print(f"epsilon        {rep['epsilon']:.6f}")
    print(f"exploitability {rep['exploitability']:.6f}")
    _finish(args, rows, ["agent", "T", "A_k", "eps_k"],
            {"qre_residual": rep["qre_residual"], "epsilon": rep["epsilon"],
             "exploitability": rep["exploitability"]})


def cmd_sweep(args):
    params = _parse_params(args.param)
    bounds = tuple(float(v) for v in args.t_range.split(","))
    spec = SweepSpec(
        game_family=args.family, family_params=params,
        topology=args.topology,
        agent_counts=tuple(int(n) for n in args.agents_list.split(",")),
        t_grid=bounds if args.mode == "grid" else None,
        t_bisection=bounds if args.mode == "bisection" else None,
        num_inits=args.inits, horizon=args.horizon, window=args.window,
        tol=args.tol, seed=args.seed, certify=not args.no_certify)
    rows = stability_sweep(spec, workers=args.workers)
    cols = ["N", "topology", "T_star", "found", "c1_max", "c2", "c3",
            "cert_upper_ok", "cert_lower_fails"]
    _finish(args, rows, cols, {"mode": args.mode, "bounds": bounds})
    for r in rows:
        print(f"N={r['N']:>3}  T_star={r['T_star']}")


def cmd_spread(args):
    game = _game_from_args(args)
    t_values = [float(v) for v in args.t_values.split(",")]
    rows = spread_report(game, t_values, args.inits, args.horizon,
                         args.window, seed=args.seed, alpha=args.alpha)
    cols = ["T", "init", "agent", "action", "min", "q25", "median",
            "q75", "max"]
    _finish(args, rows, cols, {"t_values": t_values})


def cmd_anneal(args):
    game = _game_from_args(args)
    params = AnnealParams(
        delta_t=args.delta_t, max_anneals=args.max_anneals,
        horizon=args.horizon, window=args.window, tol=args.tol,
        initial_condition=args.condition, safety_margin=args.margin)
    hist = anneal(game, params, alpha=args.alpha, seed=args.seed)
    rows = []
    for i, step in enumerate(hist.steps):
        row = {"step": i, "annealed_agent": step.annealed_agent,
               "epsilon": step.epsilon,
               "exploitability": step.exploitability,
               "converged": step.converged}
        for k in range(game.num_agents):
            row[f"T_{k}"] = step.rates[k]
        rows.append(row)
    cols = (["step", "annealed_agent"]
            + [f"T_{k}" for k in range(game.num_agents)]
            + ["epsilon", "exploitability", "converged"])
    _finish(args, rows, cols,
            {"status": hist.status,
             "total_iterations": hist.total_iterations,
             "final_epsilon": hist.final().epsilon,
             "final_exploitability": hist.final().exploitability})
    print(f"status={hist.status} steps={len(hist.steps)} "
          f"final_epsilon={hist.final().epsilon:.6f}")


def cmd_batch(args):
    spec = RandomGameSpec(
        num_agents=args.agents, actions_per_agent=args.actions,
        topology=TopologySpec(args.topology, args.agents),
        payoff_low=args.payoff_low, payoff_high=args.payoff_high,
        seed=args.seed)
    params = AnnealParams(
        delta_t=args.delta_t, max_anneals=args.max_anneals,
        horizon=args.horizon, window=args.window, tol=args.tol,
        initial_condition=args.condition, safety_margin=args.margin)
    rows = random_batch(spec, args.count, params, alpha=args.alpha,
                        workers=args.workers)
    cols = ["game_id", "seed", "initial_exploitability",
            "final_exploitability", "initial_epsilon", "final_epsilon",
            "steps_run", "status"]
    improved = sum(1 for r in rows
                   if r["final_exploitability"] is not None
                   and r["final_exploitability"] <= r["initial_exploitability"])
    _finish(args, rows, cols, {"count": args.count, "improved": improved})
    print(f"improved {improved}/{args.count}")


def cmd_curves(args):
    params = _parse_params(args.param)
    rows = threshold_curves(
        args.family, params, args.topologies.split(","),
        [int(n) for n in args.agents_list.split(",")])
    _finish(args, rows, ["N", "topology", "c1_max", "c2", "c3"], {})


def cmd_emit(args):
    game = _game_from_args(args)
    save_game(game, args.out)
    print(f"wrote {args.out}")


def build_parser():
    ap = argparse.ArgumentParser(prog="netql")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one Q-learning trajectory")
    _add_game_flags(p)
    _add_common_flags(p)
    p.add_argument("--T", default="1.0", help="scalar or comma list")
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--horizon", type=int, default=10000)
    p.add_argument("--window", type=int, default=2500)
    p.add_argument("--tol", type=float, default=1e-5)
    p.add_argument("--stride", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bounds", help="print the stability report")
    _add_game_flags(p)
    _add_common_flags(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("report", help="equilibrium quality of a strategy file")
    _add_game_flags(p)
    _add_common_flags(p)
    p.add_argument("--strategy", required=True,
                   help='JSON file {"strategy": [[...], ...]}')
    p.add_argument("--T", default="1.0")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("sweep", help="empirical stability boundary vs N")
    _add_common_flags(p)
    p.add_argument("--family", choices=GAME_FAMILIES, required=True)
    p.add_argument("--topology", choices=("ring", "star", "full"),
                   default="ring")
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    p.add_argument("--agents-list", default="3,6,9,12,15")
    p.add_argument("--mode", choices=("grid", "bisection"), default="grid")
    p.add_argument("--t-range", default="0.1,5.0,0.1",
                   help="lo,hi,step (grid) or lo,hi,resolution (bisection)")
    p.add_argument("--inits", type=int, default=10)
    p.add_argument("--horizon", type=int, default=10000)
    p.add_argument("--window", type=int, default=2500)
    p.add_argument("--tol", type=float, default=1e-5)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--no-certify", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("spread", help="window quantiles across T values")
    _add_game_flags(p)
    _add_common_flags(p)
    p.add_argument("--t-values", required=True, help="comma list of T")
    p.add_argument("--inits", type=int, default=1)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--horizon", type=int, default=10000)
    p.add_argument("--window", type=int, default=2500)
    p.set_defaults(func=cmd_spread)

    p = sub.add_parser("anneal", help="exploration update scheme")
    _add_game_flags(p)
    _add_common_flags(p)
    p.add_argument("--delta-t", type=float, default=None)
    p.add_argument("--max-anneals", type=int, default=50)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--window", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-5)
    p.add_argument("--condition", choices=("C1", "C2", "C3"), default="C1")
    p.add_argument("--margin", type=float, default=1.05)
    p.add_argument("--alpha", type=float, default=0.1)
    p.set_defaults(func=cmd_anneal)

    p = sub.add_parser("batch", help="anneal a batch of random games")
    _add_common_flags(p)
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--agents", type=int, default=15)
    p.add_argument("--actions", type=int, default=2)
    p.add_argument("--topology", choices=("ring", "star", "full"),
                   default="ring")
    p.add_argument("--payoff-low", type=float, default=0.0)
    p.add_argument("--payoff-high", type=float, default=5.0)
    p.add_argument("--delta-t", type=float, default=None)
    p.add_argument("--max-anneals", type=int, default=20)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--window", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-5)
    p.add_argument("--condition", choices=("C1", "C2", "C3"), default="C1")
    p.add_argument("--margin", type=float, default=1.05)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("curves", help="theoretical threshold curves vs N")
    _add_common_flags(p)
    p.add_argument("--family", choices=GAME_FAMILIES, required=True)
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    p.add_argument("--topologies", default="ring,star,full")
    p.add_argument("--agents-list", default="3,6,9,12,15")
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("emit", help="serialize a catalogue game to JSON")
    _add_game_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_emit)

    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    if getattr(args, "config", None):
        with open(args.config) as f:
            for key, value in json.load(f).items():
                setattr(args, key.replace("-", "_"), value)
    try:
        args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
