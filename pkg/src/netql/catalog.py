"""Constructors for the named benchmark games and network topologies."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StructureError
from .games import NetworkGame

TOPOLOGY_KINDS = ("ring", "star", "full")


@dataclass(frozen=True)
class TopologySpec:
    kind: str
    num_agents: int

    def __post_init__(self):
        if self.kind not in TOPOLOGY_KINDS:
            raise StructureError(f"unknown topology kind {self.kind!r}")
        n = self.num_agents
        if n < 2 or (self.kind == "ring" and n < 3):
            raise StructureError(
                f"{self.kind} topology needs more agents (got {n})")


def topology_edges(spec):
    """Undirected edge list (k, l) with k < l. Star hub is agent 0."""
    n = spec.num_agents
    if spec.kind == "ring":
        pairs = [tuple(sorted((k, (k + 1) % n))) for k in range(n)]
        return sorted(set(pairs))
    if spec.kind == "star":
        return [(0, l) for l in range(1, n)]
    return [(k, l) for k in range(n) for l in range(k + 1, n)]


def make_network(spec):
    """0/1 symmetric adjacency matrix for a TopologySpec."""
    n = spec.num_agents
    G = np.zeros((n, n))
    for k, l in topology_edges(spec):
        G[k, l] = G[l, k] = 1.0
    return G


def shapley_matrices(beta):
    if not 0.0 < beta < 1.0:
        raise StructureError("shapley beta must lie in (0, 1)")
    A = np.array([[1.0, 0.0, beta],
                  [beta, 1.0, 0.0],
                  [0.0, beta, 1.0]])
    B = np.array([[-beta, 1.0, 0.0],
                  [0.0, -beta, 1.0],
                  [1.0, 0.0, -beta]])
    return A, B


def sato_matrices(eps_x, eps_y):
    C = np.array([[0.0, -1.0, 1.0],
                  [1.0, 0.0, -1.0],
                  [-1.0, 1.0, 0.0]])
    return eps_x * np.eye(3) + C, eps_y * np.eye(3) + C


def _shared_bimatrix_game(A, B, topology):
    n_act = A.shape[0]
    counts = [n_act] * topology.num_agents
    edges = [(k, l, A, B) for k, l in topology_edges(topology)]
    return NetworkGame(counts, edges)


def shapley_game(beta, topology):
    """Every edge plays the Shapley bimatrix game (A, B); sigma_I = 2."""
    A, B = shapley_matrices(beta)
    return _shared_bimatrix_game(A, B, topology)


def sato_game(eps_x, eps_y, topology):
    """Perturbed rock-paper-scissors on every edge.

    eps_x = eps_y = 0 gives the pairwise zero-sum RPS network.
    """
    A, B = sato_matrices(eps_x, eps_y)
    return _shared_bimatrix_game(A, B, topology)


def _directed_ring_game(A, num_agents):
    # Agent k is rewarded by A against agent k-1 mod N; the reverse
    # direction carries the zero matrix, so the edge is one-way in payoff
    # but still present in the adjacency matrix.
    n = int(num_agents)
    if n < 3:
        raise StructureError("directed ring games need at least 3 agents")
    Z = np.zeros_like(A)
    counts = [A.shape[0]] * n
    edges = []
    for k in range(n):
        l = (k - 1) % n
        edges.append((k, l, A, Z))
    return NetworkGame(counts, edges)


def chakraborty_game(alpha, beta, num_agents):
    """Directed-ring 2x2 game A = [[1, alpha], [beta, 0]]."""
    A = np.array([[1.0, float(alpha)], [float(beta), 0.0]])
    return _directed_ring_game(A, num_agents)


def mismatching_game(m, num_agents):
    """Directed-ring 2x2 game A = [[0, 1], [M, 0]], M >= 1."""
    if m < 1:
        raise StructureError("mismatching parameter M must be >= 1")
    A = np.array([[0.0, 1.0], [float(m), 0.0]])
    return _directed_ring_game(A, num_agents)


@dataclass(frozen=True)
class RandomGameSpec:
    num_agents: int
    actions_per_agent: int
    topology: TopologySpec
    payoff_low: float
    payoff_high: float
    seed: int

    def __post_init__(self):
        if self.payoff_low >= self.payoff_high:
            raise StructureError("payoff_low must be below payoff_high")
        if self.actions_per_agent < 1:
            raise StructureError("actions_per_agent must be positive")
        if self.topology.num_agents != self.num_agents:
            raise StructureError("topology agent count disagrees with spec")


def random_game(spec):
    """Random payoffs, i.i.d. uniform per matrix entry and per direction.

    Uses the counter-based Philox generator so batches replay exactly
    across platforms.
    """
    rng = np.random.Generator(np.random.Philox(spec.seed))
    n = spec.actions_per_agent
    counts = [n] * spec.num_agents
    edges = []
    for k, l in topology_edges(spec.topology):
        A_kl = rng.uniform(spec.payoff_low, spec.payoff_high, size=(n, n))
        A_lk = rng.uniform(spec.payoff_low, spec.payoff_high, size=(n, n))
        edges.append((k, l, A_kl, A_lk))
    return NetworkGame(counts, edges)
