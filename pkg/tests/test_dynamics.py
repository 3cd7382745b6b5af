import math

import numpy as np
import pytest

import netql as nq
from netql import dynamics
from netql.errors import DomainError, StructureError


def rps3():
    return nq.sato_game(0.0, 0.0, nq.TopologySpec("ring", 3))


class TestBoltzmann:
    def test_two_action_closed_form(self):
        p = nq.boltzmann(np.array([1.0, 0.0]), 1.0)
        assert p[0] == pytest.approx(math.e / (math.e + 1.0))
        assert p.sum() == pytest.approx(1.0)

    def test_overflow_safe(self):
        p = nq.boltzmann(np.array([1e6, 0.0]), 0.01)
        assert np.all(np.isfinite(p)) and p[0] == pytest.approx(1.0)

    def test_temperature_scales_sharpness(self):
        q = np.array([1.0, 0.0, -1.0])
        sharp = nq.boltzmann(q, 0.1)
        soft = nq.boltzmann(q, 10.0)
        assert sharp[0] > soft[0]
        with pytest.raises(StructureError):
            nq.boltzmann(q, 0.0)


class TestLearnerConfig:
    def test_validation(self):
        with pytest.raises(StructureError):
            nq.LearnerConfig(T=1.0, horizon=10, window=11)
        with pytest.raises(StructureError):
            nq.LearnerConfig(T=1.0, horizon=10, window=5, tolerance=0.0)
        with pytest.raises(StructureError):
            nq.LearnerConfig(T=1.0, alpha=1.5, horizon=10, window=5
                             ).learning_rates(3)

    def test_rate_broadcasting(self):
        cfg = nq.LearnerConfig(T=[1.0, 2.0, 3.0], alpha=0.2,
                               horizon=10, window=5)
        assert np.array_equal(cfg.rates(3), [1.0, 2.0, 3.0])
        assert np.array_equal(cfg.learning_rates(3), [0.2, 0.2, 0.2])


class TestQStep:
    def test_simultaneous_semantics(self):
        # both agents must be updated from the same old joint strategy
        g = rps3()
        x = nq.JointStrategy.random(g.action_counts, np.random.default_rng(2))
        q = nq.QState(np.zeros(g.total_actions), g.action_counts)
        cfg = nq.LearnerConfig(T=0.5, alpha=0.3, horizon=10, window=5)
        q2, x2 = nq.q_step(g, q, x, cfg)
        for k in range(3):
            r = nq.reward_vector(g, k, x)   # old x for every agent
            expect_q = 0.7 * q.block(k) + 0.3 * r
            assert np.allclose(q2.block(k), expect_q)
            assert np.allclose(x2.block(k), nq.boltzmann(expect_q, 0.5))

    def test_shape_mismatch(self):
        g = rps3()
        q = nq.QState(np.zeros(4), (2, 2))
        x = nq.JointStrategy.uniform(g.action_counts)
        cfg = nq.LearnerConfig(T=1.0, horizon=10, window=5)
        with pytest.raises(StructureError):
            nq.q_step(g, q, x, cfg)


class TestRunQLearning:
    def test_bitwise_determinism(self):
        g = rps3()
        cfg = nq.LearnerConfig(T=0.5, horizon=500, window=100, seed=13)
        a = nq.run_q_learning(g, cfg)
        b = nq.run_q_learning(g, cfg)
        assert np.array_equal(a.states, b.states)
        assert np.array_equal(a.final_q.flat, b.final_q.flat)

    def test_seed_changes_trajectory(self):
        g = rps3()
        a = nq.run_q_learning(g, nq.LearnerConfig(T=0.5, horizon=50,
                                                  window=10, seed=0))
        b = nq.run_q_learning(g, nq.LearnerConfig(T=0.5, horizon=50,
                                                  window=10, seed=1))
        assert not np.array_equal(a.states, b.states)

    def test_python_fallback_matches_compiled_kernel(self, monkeypatch):
        g = rps3()
        cfg = nq.LearnerConfig(T=0.5, horizon=200, window=50, seed=3)
        fast = nq.run_q_learning(g, cfg)
        monkeypatch.setattr(dynamics, "_HAVE_NUMBA", False)
        slow = nq.run_q_learning(g, cfg)
        assert np.allclose(fast.states, slow.states, atol=1e-12)
        assert np.allclose(fast.final_q.flat, slow.final_q.flat, atol=1e-12)

    def test_explicit_init_and_warm_start(self):
        g = rps3()
        x0 = nq.JointStrategy.uniform(g.action_counts)
        cfg = nq.LearnerConfig(T=0.5, horizon=100, window=50)
        t1 = nq.run_q_learning(g, cfg, init=x0)
        t2 = nq.run_q_learning(g, cfg, init=t1.final(), q0=t1.final_q)
        # continuing from a settled state stays settled
        assert np.allclose(t2.states[-1], t1.states[-1], atol=1e-6)

    def test_bad_init_rejected(self):
        g = rps3()
        cfg = nq.LearnerConfig(T=0.5, horizon=10, window=5)
        with pytest.raises(StructureError):
            nq.run_q_learning(g, cfg, init="uniform-ish")
        with pytest.raises(StructureError):
            nq.run_q_learning(g, cfg,
                              init=nq.JointStrategy.uniform((2, 2)))

    def test_trajectory_window_bounds(self):
        g = rps3()
        traj = nq.run_q_learning(g, nq.LearnerConfig(T=0.5, horizon=20,
                                                     window=10))
        assert traj.window(20).shape == (20, g.total_actions)
        with pytest.raises(StructureError):
            traj.window(21)
        with pytest.raises(StructureError):
            traj.window(0)


class TestConverged:
    def test_relative_spread_criterion(self):
        flat = np.tile([0.5, 0.5, 0.25, 0.75], (10, 1))
        assert nq.converged(flat, 1e-5)
        wobble = flat.copy()
        wobble[0, 0] = 0.5001
        assert not nq.converged(wobble, 1e-5)
        assert nq.converged(wobble, 1e-2)

    def test_zero_coordinate_counts_as_converged(self):
        assert nq.converged(np.zeros((5, 3)), 1e-5)

    def test_shape_validation(self):
        with pytest.raises(StructureError):
            nq.converged(np.zeros(5), 1e-5)


class TestContinuousDynamics:
    def test_vector_field_boundary_raises(self):
        g = rps3()
        x = nq.JointStrategy([[1.0, 0.0, 0.0]] * 3)
        with pytest.raises(DomainError):
            nq.qld_vector_field(g, x, 1.0)

    def test_simplex_tangency(self):
        g = rps3()
        rng = np.random.default_rng(11)
        for _ in range(50):
            x = nq.JointStrategy.random(g.action_counts, rng)
            for block in nq.qld_vector_field(g, x, 0.7):
                assert abs(block.sum()) < 1e-12

    def test_euler_tracks_toward_uniform_on_zero_sum(self):
        g = rps3()
        x0 = nq.JointStrategy.random(g.action_counts, np.random.default_rng(1))
        rec = nq.euler_qld(g, x0, 1.0, steps=4000, dt=0.01)
        assert np.allclose(rec[-1], 1.0 / 3.0, atol=1e-3)

    def test_field_vanishes_at_discrete_fixed_point(self):
        g = nq.shapley_game(0.2, nq.TopologySpec("ring", 3))
        traj = nq.run_q_learning(g, nq.LearnerConfig(T=2.5, horizon=5000,
                                                     window=1000, seed=0))
        x = traj.final()
        field = np.concatenate(nq.qld_vector_field(g, x, 2.5))
        assert np.max(np.abs(field)) < 1e-6
