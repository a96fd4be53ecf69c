"""Finite MDPs and exact policy-level quantities.

A ``TabularMdp`` plus a ``Policy`` induce a Markov chain on states.  This
module computes that chain's transition matrix, expected rewards,
stationary distribution, average reward, and both notions of value
(discounted and differential), all with dense linear algebra.  Sizes are
small by design, so everything is solved exactly rather than iterated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotAperiodic, NotIrreducible, SingularSystem

ROW_SUM_TOL = 1e-12
STATIONARY_TOL = 1e-10


def _readonly(a) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class TabularMdp:
    """Finite MDP: transition tensor p[s, a, s'], reward table r[s, a],
    and an initial state distribution."""

    transition: np.ndarray
    reward: np.ndarray
    initial_dist: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "transition", _readonly(self.transition))
        object.__setattr__(self, "reward", _readonly(self.reward))
        object.__setattr__(self, "initial_dist", _readonly(self.initial_dist))
        p, r, p0 = self.transition, self.reward, self.initial_dist
        if p.ndim != 3 or p.shape[0] != p.shape[2]:
            raise ValueError(f"transition must be (S, A, S), got {p.shape}")
        if r.shape != p.shape[:2]:
            raise ValueError(f"reward must be (S, A), got {r.shape}")
        if p0.shape != (p.shape[0],):
            raise ValueError(f"initial_dist must be (S,), got {p0.shape}")
        if (p < 0).any():
            raise ValueError("transition probabilities must be nonnegative")
        row_err = np.abs(p.sum(axis=2) - 1.0).max()
        if row_err > ROW_SUM_TOL:
            raise ValueError(f"transition rows must sum to 1 (err {row_err:.2e})")
        if (p0 < 0).any() or abs(p0.sum() - 1.0) > ROW_SUM_TOL:
            raise ValueError("initial_dist must be a probability vector")

    @property
    def num_states(self) -> int:
        return self.transition.shape[0]

    @property
    def num_actions(self) -> int:
        return self.transition.shape[1]


@dataclass(frozen=True, eq=False)
class Policy:
    """Row-stochastic matrix pi(a | s)."""

    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "probs", _readonly(self.probs))
        p = self.probs
        if p.ndim != 2:
            raise ValueError("policy must be a (S, A) matrix")
        if (p < 0).any() or np.abs(p.sum(axis=1) - 1.0).max() > ROW_SUM_TOL:
            raise ValueError("policy rows must be probability vectors")

    @property
    def num_states(self) -> int:
        return self.probs.shape[0]


@dataclass(frozen=True, eq=False)
class PolicyChain:
    """The Markov chain induced by a policy.

    Holds the state transition matrix, the expected one-step reward per
    state, the stationary distribution, and the average reward.
    """

    P_pi: np.ndarray
    r_pi: np.ndarray
    d_pi: np.ndarray
    J_pi: float

    def __post_init__(self):
        object.__setattr__(self, "P_pi", _readonly(self.P_pi))
        object.__setattr__(self, "r_pi", _readonly(self.r_pi))
        object.__setattr__(self, "d_pi", _readonly(self.d_pi))
        d, P = self.d_pi, self.P_pi
        if (d <= 0).any():
            raise NotIrreducible("stationary distribution has non-positive entries")
        if abs(d.sum() - 1.0) > 1e-10:
            raise ValueError("stationary distribution must sum to 1")
        if np.abs(d @ P - d).max() > STATIONARY_TOL:
            raise ValueError("d_pi is not stationary for P_pi")
        if abs(self.J_pi - float(d @ self.r_pi)) > 1e-12:
            raise ValueError("J_pi must equal d_pi . r_pi")

    @property
    def num_states(self) -> int:
        return self.P_pi.shape[0]

    @property
    def D_pi(self) -> np.ndarray:
        return np.diag(self.d_pi)


def _reachable(adj: list[list[int]], start: int) -> np.ndarray:
    n = len(adj)
    seen = np.zeros(n, dtype=bool)
    stack = [start]
    seen[start] = True
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                stack.append(v)
    return seen


def _strongly_connected(P: np.ndarray) -> bool:
    n = P.shape[0]
    fwd = [list(np.nonzero(P[s] > 0.0)[0]) for s in range(n)]
    bwd = [list(np.nonzero(P[:, s] > 0.0)[0]) for s in range(n)]
    return bool(_reachable(fwd, 0).all() and _reachable(bwd, 0).all())


def _graph_period(P: np.ndarray) -> int:
    # gcd of cycle lengths in a strongly connected graph, via BFS levels:
    # every edge (u, v) contributes |level[u] + 1 - level[v]| to the gcd.
    n = P.shape[0]
    level = np.full(n, -1, dtype=int)
    level[0] = 0
    queue = [0]
    order = []
    while queue:
        u = queue.pop(0)
        order.append(u)
        for v in np.nonzero(P[u] > 0.0)[0]:
            if level[v] < 0:
                level[v] = level[u] + 1
                queue.append(int(v))
    g = 0
    for u in range(n):
        for v in np.nonzero(P[u] > 0.0)[0]:
            g = math.gcd(g, abs(int(level[u]) + 1 - int(level[v])))
    return g if g > 0 else 1


def stationary_distribution(P: np.ndarray, tol: float = 1e-13,
                            max_iter: int = 1_000_000) -> np.ndarray:
    """Dominant left eigenvector of a row-stochastic matrix, normalized to
    sum 1.  Falls back to power iteration if the eigen routine misbehaves."""
    P = np.asarray(P, dtype=float)
    try:
        evals, evecs = np.linalg.eig(P.T)
        idx = int(np.argmin(np.abs(evals - 1.0)))
        d = np.real(evecs[:, idx])
        d = d / d.sum()
        if np.isfinite(d).all() and np.abs(d @ P - d).max() < STATIONARY_TOL:
            return d
    except np.linalg.LinAlgError:
        pass
    d = np.full(P.shape[0], 1.0 / P.shape[0])
    for _ in range(max_iter):
        d_next = d @ P
        if np.abs(d_next - d).max() < tol:
            return d_next / d_next.sum()
        d = d_next
    raise SingularSystem("power iteration for the stationary distribution did not converge")


def induce_chain(mdp: TabularMdp, policy: Policy) -> PolicyChain:
    """Build the policy-induced chain and its exact stationary quantities.

    Raises NotIrreducible / NotAperiodic when the usual ergodicity
    assumption fails; both checks are exact graph computations.
    """
    if policy.probs.shape != (mdp.num_states, mdp.num_actions):
        raise ValueError("policy shape does not match the MDP")
    P_pi = np.einsum("sa,sat->st", policy.probs, mdp.transition)
    r_pi = (policy.probs * mdp.reward).sum(axis=1)
    if not _strongly_connected(P_pi):
        raise NotIrreducible("induced chain is not strongly connected")
    period = _graph_period(P_pi)
    if period > 1:
        raise NotAperiodic(f"induced chain has period {period}")
    d_pi = stationary_distribution(P_pi)
    return PolicyChain(P_pi=P_pi, r_pi=r_pi, d_pi=d_pi, J_pi=float(d_pi @ r_pi))


def discounted_value(chain: PolicyChain, gamma: float) -> np.ndarray:
    """v = (I - gamma P)^{-1} r, the unique discounted fixed point."""
    if not 0.0 <= gamma < 1.0:
        raise ValueError(f"gamma must lie in [0, 1), got {gamma}")
    n = chain.num_states
    try:
        v = np.linalg.solve(np.eye(n) - gamma * chain.P_pi, chain.r_pi)
    except np.linalg.LinAlgError as exc:  # cannot happen for gamma < 1
        raise SingularSystem("discounted Bellman solve failed") from exc
    residual = np.abs(v - (chain.r_pi + gamma * chain.P_pi @ v)).max()
    if residual > 1e-10:
        raise SingularSystem(f"discounted fixed-point residual {residual:.2e}")
    return v


def differential_value(chain: PolicyChain) -> np.ndarray:
    """Differential value: (I - P) v = r - J 1 with d_pi . v = 0.

    Solved through the standard rank-repair trick: (I - P + 1 d_pi^T) is
    invertible and its solution satisfies both the shifted Bellman
    equation and the normalization.
    """
    n = chain.num_states
    rhs = chain.r_pi - chain.J_pi
    M = np.eye(n) - chain.P_pi + np.outer(np.ones(n), chain.d_pi)
    try:
        v = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem("differential value solve failed") from exc
    residual = np.abs(v - (rhs + chain.P_pi @ v)).max()
    if residual > 1e-10 or abs(chain.d_pi @ v) > 1e-10:
        raise SingularSystem(f"differential fixed-point residual {residual:.2e}")
    return v
