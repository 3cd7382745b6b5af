"""Structural game quantities and convergence thresholds.

The stability report collects, for a network game, the per-agent
influence bounds, the intensity of identical interests, the graph
operator norms and the three sufficient exploration thresholds: for
every agent k, Q-learning converges to the unique QRE whenever

    T_k > delta_k |N_k|            (C1)
    T_k > sigma_I ||G||_inf / 2    (C2)
    T_k > sigma_I ||G||_2 / 2      (C3, shared-bimatrix games only)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, StructureError

ZERO_SUM_TOL = 1e-12


def influence_bound(game, k):
    """Largest reward swing for agent k when one neighbour switches action.

    Closed form: max over incident matrices, rows and column pairs of the
    entry difference, i.e. the largest row range.
    """
    best = 0.0
    for _, M in game.incident_matrices(k):
        if M.shape[1] >= 1:
            ranges = M.max(axis=1) - M.min(axis=1)
            best = max(best, float(ranges.max()))
    return best


def op_norm_inf(M):
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(M).sum(axis=1)))


def op_norm_one(M):
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(M).sum(axis=0)))


def _power_iterate(B, v, tol, max_iter):
    """Power iteration on PSD B from start v; returns (eigval, converged).

    Stops on the eigen-residual ||Bv - rho v|| <= tol (B is pre-scaled to
    unit magnitude by the caller): the Rayleigh quotient rho is then
    within ~tol of the top eigenvalue even when the leading eigenvalues
    are nearly tied and the iterate itself aligns slowly.
    """
    est = 0.0
    for _ in range(max_iter):
        w = B @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0, True
        v = w / nw
        Bv = B @ v
        est = float(v @ Bv)
        if np.linalg.norm(Bv - est * v) <= tol:
            return est, True
    return est, False


_SQUARINGS = 20


def op_norm_two(M, tol=1e-8, max_iter=2000):
    """Largest singular value via power iteration on M^T M.

    The PSD matrix is repeatedly squared (with per-step normalisation,
    log-scales accumulated) before iterating; the final 2^k-th root
    divides any residual eigenvalue error by 2^k, so nearly-tied leading
    eigenvalues cost accuracy rather than convergence. Deterministic:
    one pass from the normalised all-ones start, one from a fixed
    perturbed start in case the first is orthogonal to the leading
    eigenspace. Raises NumericalError (carrying the last estimate) if
    neither pass meets the residual tolerance.
    """
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0.0
    if not np.all(np.isfinite(M)):
        raise StructureError("matrix has non-finite entries")
    n = M.shape[1]
    B = M.T @ M
    scale = float(np.abs(B).max())
    if scale == 0.0:
        return 0.0
    Bs = B / scale

    log_acc = 0.0                      # sum of log d_j / 2^(j+1)
    for j in range(_SQUARINGS):
        C = Bs @ Bs
        d = float(np.abs(C).max())
        if d == 0.0:
            return 0.0
        Bs = C / d
        log_acc += np.log(d) / 2.0 ** (j + 1)

    v0 = np.ones(n) / np.sqrt(n)
    lam1, ok1 = _power_iterate(Bs, v0, tol, max_iter)
    ramp = 1.0 + 0.01 * np.arange(1, n + 1)
    v1 = ramp / np.linalg.norm(ramp)
    lam2, ok2 = _power_iterate(Bs, v1, tol, max_iter)
    lam = max(lam1, lam2)

    def undo(lam_k):
        if lam_k <= 0.0:
            return 0.0
        log_lam0 = np.log(lam_k) / 2.0 ** _SQUARINGS + log_acc
        return float(np.sqrt(scale * np.exp(log_lam0)))

    if not (ok1 or ok2):
        raise NumericalError("power iteration did not converge",
                             last_iterate=undo(lam))
    return undo(lam)


def identical_interest_intensity(game):
    """sigma_I: max over edges of || A_kl + A_lk^T ||_2."""
    if not game.edges:
        raise StructureError("game has no edges")
    return max(op_norm_two(e.A_kl + e.A_lk.T) for e in game.edges)


def is_pairwise_zero_sum(game, tol=ZERO_SUM_TOL):
    return all(np.max(np.abs(e.A_kl + e.A_lk.T)) <= tol for e in game.edges)


def is_shared_bimatrix(game, tol=ZERO_SUM_TOL):
    """True iff every (k<l)-oriented edge carries the same (A, B) pair."""
    if not game.edges:
        return False
    e0 = game.edges[0]
    for e in game.edges[1:]:
        if e.A_kl.shape != e0.A_kl.shape or e.A_lk.shape != e0.A_lk.shape:
            return False
        if (np.max(np.abs(e.A_kl - e0.A_kl)) > tol
                or np.max(np.abs(e.A_lk - e0.A_lk)) > tol):
            return False
    return True


@dataclass(frozen=True)
class StabilityReport:
    influence_bounds: np.ndarray   # delta_k
    neighbor_counts: np.ndarray    # |N_k|
    sigma_I: float
    norm_inf: float                # ||G||_inf
    norm_two: float                # ||G||_2
    c1: np.ndarray                 # delta_k |N_k|, per agent
    c2: float                      # sigma_I ||G||_inf / 2
    c3: float | None               # sigma_I ||G||_2 / 2 when applicable
    c3_applicable: bool

    def min_threshold(self):
        """Tightest applicable uniform threshold (max over agents for C1)."""
        cands = [float(np.max(self.c1)), self.c2]
        if self.c3_applicable:
            cands.append(self.c3)
        return min(cands)


def stability_report(game):
    G = game.adjacency()
    deltas = np.array([influence_bound(game, k)
                       for k in range(game.num_agents)])
    nbrs = G.sum(axis=1)
    sigma = identical_interest_intensity(game)
    ninf = op_norm_inf(G)
    ntwo = op_norm_two(G)
    shared = is_shared_bimatrix(game)
    return StabilityReport(
        influence_bounds=deltas,
        neighbor_counts=nbrs.astype(int),
        sigma_I=sigma,
        norm_inf=ninf,
        norm_two=ntwo,
        c1=deltas * nbrs,
        c2=0.5 * sigma * ninf,
        c3=0.5 * sigma * ntwo if shared else None,
        c3_applicable=shared,
    )


def interaction_block_matrix(game):
    """Symmetrised off-diagonal interaction matrix from the Theorem 1 proof.

    Block (k, l) is (A_kl + A_lk^T) / 2 on edges and zero elsewhere; the
    result is symmetric and shares its block sparsity with the adjacency
    matrix. (Signs are dropped: only the 2-norm is consumed.)
    """
    o = game.offsets
    N = np.zeros((game.total_actions, game.total_actions))
    for e in game.edges:
        blk = 0.5 * (e.A_kl + e.A_lk.T)
        N[o[e.k]:o[e.k + 1], o[e.l]:o[e.l + 1]] = blk
        N[o[e.l]:o[e.l + 1], o[e.k]:o[e.k + 1]] = blk.T
    return N


def verify_block_norm_bound(game):
    """Check ||N||_2 <= sqrt(||G||_1 ||G||_inf) * max edge block 2-norm."""
    G = game.adjacency()
    Nmat = interaction_block_matrix(game)
    lhs = op_norm_two(Nmat)
    if game.edges:
        max_block = max(op_norm_two(0.5 * (e.A_kl + e.A_lk.T))
                        for e in game.edges)
    else:
        max_block = 0.0
    rhs = np.sqrt(op_norm_one(G) * op_norm_inf(G)) * max_block
    return {"lhs": lhs, "rhs": float(rhs), "holds": lhs <= rhs + 1e-9}
