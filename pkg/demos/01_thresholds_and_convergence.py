"""Stability thresholds and what they predict.

Builds the benchmark games, prints their convergence certificates and
then watches Q-learning either settle or cycle on the two sides of the
predicted boundary.

Run:  python3 demos/01_thresholds_and_convergence.py
"""

import numpy as np

import netql as nq


def show_report(name, game):
    rep = nq.stability_report(game)
    c3 = f"{rep.c3:.3f}" if rep.c3_applicable else "n/a"
    print(f"{name:28s} sigma_I={rep.sigma_I:.3f}  "
          f"C1={np.max(rep.c1):.3f}  C2={rep.c2:.3f}  C3={c3}  "
          f"-> certify T > {rep.min_threshold():.3f}")
    return rep


def run(game, T, horizon=10000):
    cfg = nq.LearnerConfig(T=T, alpha=0.1, horizon=horizon, window=2500,
                           tolerance=1e-5, seed=0)
    traj = nq.run_q_learning(game, cfg)
    ok = nq.converged(traj.window(2500), 1e-5)
    # how much does each probability still move over the tail window?
    w = traj.window(2500)
    swing = float(np.max(w.max(axis=0) - w.min(axis=0)))
    return ok, swing, traj.final()


print("=== certificates for the benchmark games ===")
shapley = nq.shapley_game(0.2, nq.TopologySpec("ring", 3))
sato = nq.sato_game(0.01, -0.05, nq.TopologySpec("ring", 3))
rps = nq.sato_game(0.0, 0.0, nq.TopologySpec("ring", 3))
chak = nq.chakraborty_game(7.0, 8.5, 3)

rep = show_report("shapley(0.2) ring-3", shapley)
show_report("sato(0.01,-0.05) ring-3", sato)
show_report("rock-paper-scissors ring-3", rps)
show_report("chakraborty(7,8.5) ring-3", chak)

print()
print("=== pairwise zero-sum: every positive rate converges ===")
ok, swing, final = run(rps, T=0.1, horizon=20000)
print(f"T=0.10  converged={ok}  tail swing={swing:.2e}")
print(f"final strategies ~ uniform: "
      f"{np.round(final.flat.reshape(3, 3), 4).tolist()}")

print()
print("=== shapley: the certificate is honoured just above it ===")
for T in (1.05 * rep.min_threshold(), 0.3):
    ok, swing, _ = run(shapley, T)
    print(f"T={T:.3f}  converged={ok}  tail swing={swing:.2e}")

print()
print("=== chakraborty: cycling below, settling above ===")
for T in (0.7, 2.7):
    ok, swing, final = run(chak, T)
    eps, _ = nq.epsilon_nash(chak, final, T)
    print(f"T={T:.1f}  converged={ok}  tail swing={swing:.2e}  "
          f"(epsilon bound {eps:.3f} if settled)")
