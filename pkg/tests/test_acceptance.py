"""End-to-end acceptance suite.

Each test certifies one headline property of the package at a pinned
tolerance and prints a single PASS line with its runtime. QRE points
found by the simulation tests are collected in FOUND_QRES and re-used
by the equilibrium-identity test, so run the file as a whole.
"""

import math
import time

import numpy as np
import pytest

import netql as nq

from oracles import gap_line_search, jacobi_spectral_norm

# (game, rates, strategy) triples harvested from the simulation tests
FOUND_QRES = []


def _warm_kernel():
    g = nq.sato_game(0.0, 0.0, nq.TopologySpec("ring", 3))
    nq.run_q_learning(g, nq.LearnerConfig(T=1.0, horizon=2, window=1))


_warm_kernel()   # one-time compile of the iteration kernel, not timed


def test_1_zero_sum_network_converges_to_uniform():
    # pairwise zero-sum rock-paper-scissors ring: any positive
    # exploration rate converges, and the unique QRE is uniform play
    t0 = time.perf_counter()
    game = nq.sato_game(0.0, 0.0, nq.TopologySpec("ring", 3))
    inits = nq.random_inits(game, 10, seed=0)
    cfg = nq.LearnerConfig(T=0.1, alpha=0.1, horizon=20000, window=2500,
                           tolerance=1e-5)
    for x0 in inits:
        traj = nq.run_q_learning(game, cfg, init=x0)
        assert nq.converged(traj.window(2500), 1e-5)
        final = traj.final()
        assert np.max(np.abs(final.flat - 1.0 / 3.0)) < 1e-4
        FOUND_QRES.append((game, np.full(3, 0.1), final))
    elapsed = time.perf_counter() - t0
    assert elapsed < 5.0
    print(f"ACCEPTANCE 1 PASS: zero-sum ring converges to uniform "
          f"from 10 inits ({elapsed:.2f}s)")


# (family, alpha, horizon): the small-threshold rock-paper-scissors
# variant is stiff and needs a smaller step to resolve T ~ 0.03-0.3
_SUFFICIENCY_RUNS = {
    "shapley": (0.1, 20000),
    "sato": (0.02, 100000),
}


def test_2_thresholds_are_sufficient_everywhere():
    # just above the tightest applicable threshold, every initial
    # condition converges and all agree on one QRE
    t0 = time.perf_counter()
    cases = []
    for family, params in (("shapley", {"beta": 0.2}),
                           ("sato", {"eps_x": 0.01, "eps_y": -0.05})):
        for topo in ("ring", "star", "full"):
            for n in (3, 6, 9, 12, 15):
                cases.append((family, params, topo, n))
    for family, params, topo, n in cases:
        alpha, horizon = _SUFFICIENCY_RUNS[family]
        game = nq.build_game(family, params, topo, n)
        T = 1.05 * nq.stability_report(game).min_threshold()
        cfg = nq.LearnerConfig(T=T, alpha=alpha, horizon=horizon,
                               window=2500, tolerance=1e-5)
        finals = []
        for x0 in nq.random_inits(game, 10, seed=0):
            traj = nq.run_q_learning(game, cfg, init=x0)
            assert nq.converged(traj.window(2500), 1e-5), \
                (family, topo, n, T)
            finals.append(traj.final())
        stack = np.array([f.flat for f in finals])
        spread = float(np.max(stack.max(axis=0) - stack.min(axis=0)))
        assert spread < 1e-3, (family, topo, n, spread)
        FOUND_QRES.append((game, np.full(n, T), finals[0]))
    elapsed = time.perf_counter() - t0
    assert elapsed < 600.0
    print(f"ACCEPTANCE 2 PASS: 30 threshold cells, 10 inits each, "
          f"unique QRE everywhere ({elapsed:.1f}s)")


def test_3_boundary_scaling_ring_flat_full_growing():
    # the empirical stability boundary is nearly N-independent on the
    # ring but grows with N on the complete graph
    t0 = time.perf_counter()
    common = dict(game_family="shapley", family_params={"beta": 0.2},
                  t_bisection=(0.05, 3.0, 0.05), num_inits=5,
                  horizon=5000, window=2500, certify=False)
    ring = nq.stability_sweep(
        nq.SweepSpec(topology="ring", agent_counts=(3, 6, 9, 12, 15),
                     **common), workers=1)
    full = nq.stability_sweep(
        nq.SweepSpec(topology="full", agent_counts=(3, 15), **common),
        workers=1)
    ring_T = [r["T_star"] for r in ring]
    assert all(r["found"] for r in ring + full)
    variation = (max(ring_T) - min(ring_T)) / max(ring_T)
    assert variation < 0.25, ring_T
    ratio = full[1]["T_star"] / full[0]["T_star"]
    assert ratio > 2.0, (full[0]["T_star"], full[1]["T_star"])
    elapsed = time.perf_counter() - t0
    print(f"ACCEPTANCE 3 PASS: ring boundary varies {100*variation:.0f}%, "
          f"full-graph ratio {ratio:.1f} ({elapsed:.1f}s)")


def test_4_cycling_below_threshold_converging_above():
    t0 = time.perf_counter()
    game = nq.chakraborty_game(7.0, 8.5, 3)
    for T, expect in ((0.7, False), (2.7, True)):
        cfg = nq.LearnerConfig(T=T, alpha=0.1, horizon=10000, window=2500,
                               tolerance=1e-5)
        for x0 in nq.random_inits(game, 10, seed=0):
            traj = nq.run_q_learning(game, cfg, init=x0)
            assert nq.converged(traj.window(2500), 1e-5) is expect, (T, expect)
            if expect:
                FOUND_QRES.append((game, np.full(3, T), traj.final()))
    elapsed = time.perf_counter() - t0
    assert elapsed < 30.0
    print(f"ACCEPTANCE 4 PASS: cycles at T=0.7, converges at T=2.7 "
          f"({elapsed:.1f}s)")


def test_5_epsilon_and_exploitability_identities_at_qre():
    # at any QRE: exploitability = sum_k T_k A_k, and the surprisal-gap
    # epsilon equals the direct best-response gap
    assert FOUND_QRES, "run the full acceptance file, not this test alone"
    checked = 0
    for game, T, x in FOUND_QRES:
        if nq.qre_residual(game, x, T) >= 1e-5:
            continue
        eps, per_agent = nq.epsilon_nash(game, x, T)
        assert nq.exploitability(game, x) == pytest.approx(
            float(per_agent.sum()), abs=1e-5)
        direct = max(
            float(np.max(r) - np.dot(x.block(k), r))
            for k in range(game.num_agents)
            for r in [nq.reward_vector(game, k, x)])
        assert eps == pytest.approx(direct, abs=1e-5)
        checked += 1
    assert checked >= 30
    print(f"ACCEPTANCE 5 PASS: identities hold at {checked} learned QRE "
          f"points")


def test_6_surprisal_gap_maximum_and_lambert_w():
    for n in range(2, 11):
        value, c = nq.surprisal_gap_max(n)
        grid_value, grid_c = gap_line_search(n, 1e-6)
        assert value == pytest.approx(grid_value, abs=1e-5)
        maximiser = np.concatenate(([c], np.full(n - 1, (1 - c) / (n - 1))))
        assert value == pytest.approx(nq.surprisal_gap(maximiser), abs=1e-10)
        assert value < math.log(n)
    for z in np.linspace(-math.exp(-1) + 1e-6, 10.0, 1000):
        w = nq.lambert_w(z)
        assert abs(w * math.exp(w) - z) < 1e-12
    print("ACCEPTANCE 6 PASS: exact gap maximum for n=2..10, "
          "Lambert W identity on 1000-point grid")


def test_7_block_norm_bound_and_two_norm_oracle():
    rng = np.random.default_rng(20240823)
    kinds = ("ring", "star", "full")
    for trial in range(100):
        n_agents = int(rng.integers(3, 11))
        n_actions = int(rng.integers(1, 5))
        spec = nq.RandomGameSpec(
            num_agents=n_agents, actions_per_agent=n_actions,
            topology=nq.TopologySpec(kinds[trial % 3], n_agents),
            payoff_low=-5.0, payoff_high=5.0,
            seed=int(rng.integers(0, 2**31)))
        game = nq.random_game(spec)
        res = nq.verify_block_norm_bound(game)
        assert res["holds"], (trial, res)
        N = nq.interaction_block_matrix(game)
        assert nq.op_norm_two(N) == pytest.approx(
            jacobi_spectral_norm(N), rel=1e-8, abs=1e-8)
    print("ACCEPTANCE 7 PASS: block-norm bound holds on 100 random games, "
          "power iteration matches dense eigensolve")


def test_8_annealing_decreases_epsilon_and_exploitability():
    t0 = time.perf_counter()
    game = nq.chakraborty_game(2.5, 1.5, 5)
    hist = nq.anneal(game, nq.AnnealParams(max_anneals=200), alpha=0.1,
                     seed=0)
    steps = hist.accepted()
    assert len(steps) == 201
    for s in steps:
        assert nq.qre_residual(game, s.strategy, s.rates) < 1e-4  # 10 x tol
    eps = np.array([s.epsilon for s in steps])
    expl = np.array([s.exploitability for s in steps])
    # exploitability decreases at every accepted step
    assert np.all(np.diff(expl) <= 1e-12)
    assert expl[-1] < expl[0]
    # epsilon decreases at round granularity (one anneal per agent per
    # round); per-step, lowering the leading agent's rate sharpens its
    # strategy and lifts its neighbours' bounds by O(delta_T), so the
    # per-step max is allowed that structural wobble and nothing more
    assert np.all(np.diff(eps[::game.num_agents]) <= 1e-12)
    assert np.all(np.diff(eps) <= 0.02 * eps[0])
    assert eps[-1] < 0.5 * eps[0]

    spec = nq.RandomGameSpec(
        num_agents=15, actions_per_agent=2,
        topology=nq.TopologySpec("ring", 15),
        payoff_low=0.0, payoff_high=5.0, seed=2024)
    rows = nq.random_batch(spec, 50, nq.AnnealParams(max_anneals=20),
                           alpha=0.1, workers=1)
    improved = [r for r in rows
                if r["final_exploitability"] is not None
                and r["initial_exploitability"] - r["final_exploitability"] >= 0]
    assert len(improved) > 25, len(improved)
    elapsed = time.perf_counter() - t0
    print(f"ACCEPTANCE 8 PASS: epsilon {eps[0]:.3f}->{eps[-1]:.3f}, "
          f"exploitability monotone; batch improved {len(improved)}/50 "
          f"({elapsed:.1f}s)")


def test_9_dynamics_invariants():
    # (a) the continuous-time field is tangent to the simplex product
    rng = np.random.default_rng(3)
    games = [nq.sato_game(0.0, 0.0, nq.TopologySpec("ring", 3)),
             nq.shapley_game(0.2, nq.TopologySpec("star", 4)),
             nq.random_game(nq.RandomGameSpec(
                 num_agents=5, actions_per_agent=3,
                 topology=nq.TopologySpec("full", 5),
                 payoff_low=-2.0, payoff_high=2.0, seed=1))]
    points = 0
    while points < 1000:
        game = games[points % len(games)]
        x = nq.JointStrategy.random(game.action_counts, rng)
        for block in nq.qld_vector_field(game, x, 0.8):
            assert abs(block.sum()) < 1e-12
        points += 1

    # (b) the field vanishes at fixed points of the discrete iteration
    fixed_points = [
        (nq.shapley_game(0.2, nq.TopologySpec("ring", 3)), 2.5, 5000),
        (nq.chakraborty_game(7.0, 8.5, 3), 2.7, 10000),
        (nq.sato_game(0.01, -0.05, nq.TopologySpec("ring", 3)), 0.5, 20000),
    ]
    found = 0
    for game, T, horizon in fixed_points:
        traj = nq.run_q_learning(game, nq.LearnerConfig(
            T=T, alpha=0.1, horizon=horizon, window=1000, seed=0))
        x = traj.final()
        if nq.qre_residual(game, x, T) < 1e-10:   # actually settled
            field = np.concatenate(nq.qld_vector_field(game, x, T))
            assert np.max(np.abs(field)) < 1e-6
            found += 1
    assert found >= 2

    # (c) bitwise determinism per seed
    for game in games[:2]:
        cfg = nq.LearnerConfig(T=1.0, horizon=2000, window=500, seed=17)
        a = nq.run_q_learning(game, cfg)
        b = nq.run_q_learning(game, cfg)
        assert np.array_equal(a.states, b.states)
        assert np.array_equal(a.final_q.flat, b.final_q.flat)
    print(f"ACCEPTANCE 9 PASS: tangency at 1000 points, field < 1e-6 at "
          f"{found} fixed points, bitwise-deterministic replays")
