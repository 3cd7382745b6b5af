"""Network polymatrix games and their basic payoff operations.

A game lives on an undirected graph. Each edge (k, l) carries a pair of
payoff matrices (A_kl, A_lk): agent k's reward against neighbour l is
A_kl @ x_l and symmetrically for l. Directed interactions (one agent
indifferent to the other) are encoded with an all-zero matrix in the
silent direction; the adjacency matrix still records the edge.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, StructureError

SIMPLEX_RENORM_TOL = 1e-9
INTERIOR_FLOOR = 1e-300


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Edge:
    """One undirected edge; stored with k < l."""

    k: int
    l: int
    A_kl: np.ndarray  # reward matrix of agent k against l
    A_lk: np.ndarray  # reward matrix of agent l against k


class NetworkGame:
    """Immutable network polymatrix game.

    Parameters
    ----------
    action_counts : sequence of int
        Number of actions per agent; the number of agents is its length.
    edges : iterable
        ``Edge`` instances or ``(k, l, A_kl, A_lk)`` tuples. Edges are
        canonicalised to k < l on construction (matrices swapped
        accordingly).
    """

    def __init__(self, action_counts, edges):
        counts = [int(n) for n in action_counts]
        if len(counts) < 1 or any(n < 1 for n in counts):
            raise StructureError("action_counts must be positive integers")
        self.num_agents = len(counts)
        self.action_counts = tuple(counts)
        self.offsets = np.concatenate(([0], np.cumsum(counts)))
        self.total_actions = int(self.offsets[-1])

        canon = []
        seen = set()
        for e in edges:
            if isinstance(e, Edge):
                k, l, A_kl, A_lk = e.k, e.l, e.A_kl, e.A_lk
            else:
                k, l, A_kl, A_lk = e
            k, l = int(k), int(l)
            if not (0 <= k < self.num_agents and 0 <= l < self.num_agents):
                raise StructureError(f"edge ({k},{l}) references unknown agent")
            if k == l:
                raise StructureError(f"self-edge on agent {k}")
            if k > l:
                k, l, A_kl, A_lk = l, k, A_lk, A_kl
            if (k, l) in seen:
                raise StructureError(f"duplicate edge ({k},{l})")
            seen.add((k, l))
            A_kl = _frozen(A_kl)
            A_lk = _frozen(A_lk)
            if A_kl.shape != (counts[k], counts[l]):
                raise StructureError(
                    f"A_kl on edge ({k},{l}) has shape {A_kl.shape}, "
                    f"expected {(counts[k], counts[l])}"
                )
            if A_lk.shape != (counts[l], counts[k]):
                raise StructureError(
                    f"A_lk on edge ({k},{l}) has shape {A_lk.shape}, "
                    f"expected {(counts[l], counts[k])}"
                )
            canon.append(Edge(k, l, A_kl, A_lk))
        self.edges = tuple(sorted(canon, key=lambda e: (e.k, e.l)))

        G = np.zeros((self.num_agents, self.num_agents))
        for e in self.edges:
            G[e.k, e.l] = G[e.l, e.k] = 1.0
        self._adjacency = _frozen(G)

        # Dense block reward operator: r(x) = R @ x on concatenated strategies.
        R = np.zeros((self.total_actions, self.total_actions))
        o = self.offsets
        for e in self.edges:
            R[o[e.k]:o[e.k + 1], o[e.l]:o[e.l + 1]] += e.A_kl
            R[o[e.l]:o[e.l + 1], o[e.k]:o[e.k + 1]] += e.A_lk
        self._reward_op = _frozen(R)

    # -- structure accessors ------------------------------------------------

    def adjacency(self):
        return self._adjacency

    def neighbors(self, k):
        return tuple(np.flatnonzero(self._adjacency[k]))

    def incident_matrices(self, k):
        """List of (neighbour l, matrix M) with reward_k += M @ x_l."""
        out = []
        for e in self.edges:
            if e.k == k:
                out.append((e.l, e.A_kl))
            elif e.l == k:
                out.append((e.k, e.A_lk))
        return out

    def block(self, vec, k):
        return vec[self.offsets[k]:self.offsets[k + 1]]

    def rewards_flat(self, x_flat):
        """All agents' reward vectors, concatenated."""
        return self._reward_op @ x_flat

    def __repr__(self):
        return (f"NetworkGame(agents={self.num_agents}, "
                f"actions={self.action_counts}, edges={len(self.edges)})")


class JointStrategy:
    """One probability vector per agent, stored concatenated.

    Construction renormalises vectors whose sum deviates from 1 by at
    most 1e-9 and rejects anything worse; entries must be nonnegative
    up to a 1e-12 slack.
    """

    def __init__(self, blocks):
        parts = []
        for k, b in enumerate(blocks):
            v = np.array(b, dtype=float)
            if v.ndim != 1 or v.size < 1:
                raise StructureError(f"strategy block {k} is not a vector")
            if np.any(v < -1e-12) or not np.all(np.isfinite(v)):
                raise StructureError(f"strategy block {k} has invalid entries")
            v = np.clip(v, 0.0, None)
            s = v.sum()
            if abs(s - 1.0) > SIMPLEX_RENORM_TOL:
                raise StructureError(
                    f"strategy block {k} sums to {s}, too far from 1")
            parts.append(v / s)
        self.action_counts = tuple(len(p) for p in parts)
        self.offsets = np.concatenate(([0], np.cumsum(self.action_counts)))
        self.flat = _frozen(np.concatenate(parts))

    @classmethod
    def from_flat(cls, flat, action_counts):
        offsets = np.concatenate(([0], np.cumsum(action_counts)))
        return cls([flat[offsets[k]:offsets[k + 1]]
                    for k in range(len(action_counts))])

    @classmethod
    def uniform(cls, action_counts):
        return cls([np.full(n, 1.0 / n) for n in action_counts])

    @classmethod
    def random(cls, action_counts, rng):
        """Uniform sample from each simplex (flat Dirichlet)."""
        return cls([rng.dirichlet(np.ones(n)) for n in action_counts])

    def block(self, k):
        return self.flat[self.offsets[k]:self.offsets[k + 1]]

    def blocks(self):
        return [self.block(k) for k in range(len(self.action_counts))]

    def is_interior(self, floor=INTERIOR_FLOOR):
        return bool(np.all(self.flat > floor))

    def __len__(self):
        return len(self.action_counts)

    def __repr__(self):
        return f"JointStrategy({[b.round(4).tolist() for b in self.blocks()]})"


@dataclass(frozen=True)
class ExplorationRates:
    """Per-agent positive softmax temperatures."""

    values: np.ndarray

    def __post_init__(self):
        v = _frozen(np.atleast_1d(self.values))
        if np.any(v <= 0) or not np.all(np.isfinite(v)):
            raise StructureError("exploration rates must be positive finite")
        object.__setattr__(self, "values", v)

    @classmethod
    def broadcast(cls, value, num_agents):
        v = np.atleast_1d(np.asarray(value, dtype=float))
        if v.size == 1:
            v = np.full(num_agents, float(v[0]))
        elif v.size != num_agents:
            raise StructureError(
                f"got {v.size} exploration rates for {num_agents} agents")
        return cls(v)


def as_rates(T, num_agents):
    """Accept an ExplorationRates, scalar or per-agent sequence."""
    if isinstance(T, ExplorationRates):
        if T.values.size != num_agents:
            raise StructureError("exploration rates have wrong length")
        return T.values
    return ExplorationRates.broadcast(T, num_agents).values


def _check_agent(game, k):
    if not 0 <= k < game.num_agents:
        raise StructureError(f"agent index {k} out of range")


def _check_strategy(game, x):
    if x.action_counts != game.action_counts:
        raise StructureError(
            f"strategy shape {x.action_counts} does not match game "
            f"{game.action_counts}")


def payoff(game, k, x):
    """Payoff of agent k: sum of bilinear terms over incident edges."""
    _check_agent(game, k)
    _check_strategy(game, x)
    return float(np.dot(x.block(k), reward_vector(game, k, x)))


def reward_vector(game, k, x):
    """Reward of each of agent k's actions against the neighbours' play."""
    _check_agent(game, k)
    _check_strategy(game, x)
    r = np.zeros(game.action_counts[k])
    for l, M in game.incident_matrices(k):
        r += M @ x.block(l)
    return r


def _require_interior(x_k):
    if np.any(x_k <= INTERIOR_FLOOR):
        raise DomainError("strategy must be strictly interior (log of 0)")


def perturbed_payoff(game, k, x, T):
    """Payoff plus T_k times the entropy of agent k's own strategy."""
    Tv = as_rates(T, game.num_agents)
    xk = x.block(k)
    _require_interior(xk)
    return payoff(game, k, x) - Tv[k] * float(np.dot(xk, np.log(xk)))


def pseudo_gradient(game, x, T):
    """Concatenated pseudo-gradient of the entropy-perturbed game.

    Block k is T_k (ln x_k + 1) - r_k(x_{-k}). Monotonicity of this map
    on the simplex product certifies uniqueness of the QRE.
    """
    _check_strategy(game, x)
    Tv = as_rates(T, game.num_agents)
    _require_interior(x.flat)
    r = game.rewards_flat(x.flat)
    Trep = np.repeat(Tv, game.action_counts)
    return Trep * (np.log(x.flat) + 1.0) - r


# -- serialization ---------------------------------------------------------

def game_to_dict(game):
    return {
        "agents": game.num_agents,
        "action_counts": list(game.action_counts),
        "edges": [
            {"k": e.k, "l": e.l,
             "A_kl": e.A_kl.tolist(), "A_lk": e.A_lk.tolist()}
            for e in game.edges
        ],
    }


def game_from_dict(data):
    try:
        counts = data["action_counts"]
        if int(data["agents"]) != len(counts):
            raise StructureError("agents field disagrees with action_counts")
        edges = [(e["k"], e["l"], e["A_kl"], e["A_lk"])
                 for e in data["edges"]]
    except (KeyError, TypeError) as exc:
        raise StructureError(f"malformed game document: {exc}") from exc
    return NetworkGame(counts, edges)


def save_game(game, path):
    with open(path, "w") as f:
        json.dump(game_to_dict(game), f, indent=1)


def load_game(path):
    with open(path) as f:
        return game_from_dict(json.load(f))
