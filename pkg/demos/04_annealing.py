"""Exploration annealing: ride the stable QRE toward Nash.

Starts every agent just above its convergence certificate, learns a
QRE, then repeatedly lowers the exploration rate of whichever agent
currently dominates the epsilon bound, warm-starting each phase from
the previous Q-state. Stops on instability, the rate floor or the
anneal budget; the last accepted QRE is the answer.

Run:  python3 demos/04_annealing.py
"""

import numpy as np

import netql as nq

game = nq.chakraborty_game(2.5, 1.5, 5)
hist = nq.anneal(game, nq.AnnealParams(max_anneals=150), alpha=0.1, seed=0)

steps = hist.accepted()
print(f"chakraborty(2.5, 1.5) on 5 agents: {len(steps)} accepted steps, "
      f"status={hist.status}, {hist.total_iterations} iterations total")
print(f"{'step':>4} {'agent':>5} {'min T':>7} {'epsilon':>8} {'exploit':>8}")
for i, s in enumerate(steps):
    if i % 15 == 0 or i == len(steps) - 1:
        agent = "-" if s.annealed_agent is None else s.annealed_agent
        print(f"{i:>4} {agent:>5} {s.rates.min():>7.3f} "
              f"{s.epsilon:>8.4f} {s.exploitability:>8.4f}")

first, last = steps[0], steps[-1]
print(f"\nepsilon        {first.epsilon:.4f} -> {last.epsilon:.4f}")
print(f"exploitability {first.exploitability:.4f} -> {last.exploitability:.4f}")

print("\npairwise zero-sum games have zero thresholds: annealing walks")
print("the rate floor and the bound goes to ~0:")
rps = nq.sato_game(0.0, 0.0, nq.TopologySpec("ring", 3))
h = nq.anneal(rps, nq.AnnealParams(initial_condition="C2", min_rate=0.1,
                                   delta_t=0.02, max_anneals=10),
              alpha=0.1, seed=0)
print(f"status={h.status}  final epsilon={h.final().epsilon:.2e}  "
      f"final exploitability={h.final().exploitability:.2e}")

print("\nand across a small batch of random 8-agent games:")
spec = nq.RandomGameSpec(num_agents=8, actions_per_agent=2,
                         topology=nq.TopologySpec("ring", 8),
                         payoff_low=0.0, payoff_high=5.0, seed=7)
rows = nq.random_batch(spec, 5, nq.AnnealParams(max_anneals=20), workers=1)
for r in rows:
    print(f"  game {r['game_id']}: exploitability "
          f"{r['initial_exploitability']:.3f} -> "
          f"{r['final_exploitability']:.3f}  ({r['status']})")
