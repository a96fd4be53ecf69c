"""Compiled inner loops for long trajectory simulations.

The recursions here mirror learners.step_discounted / step_average
operation for operation; a test pins the two paths together.  Chains are
sampled from pre-drawn uniforms of a seeded generator, so runs are
deterministic given (seed, config).
"""

from __future__ import annotations

import numba
import numpy as np


@numba.njit(cache=True)
def _walk_into(cum_P, cum_pi, s0, u, states, actions, offset):
    n = u.shape[0]
    num_s = cum_P.shape[2]
    num_a = cum_pi.shape[1]
    s = s0
    for t in range(n):
        a = np.searchsorted(cum_pi[s], u[t, 0], side="right")
        if a >= num_a:
            a = num_a - 1
        s2 = np.searchsorted(cum_P[s, a], u[t, 1], side="right")
        if s2 >= num_s:
            s2 = num_s - 1
        actions[offset + t] = a
        states[offset + t + 1] = s2
        s = s2
    return s


def sample_path(transition, policy_probs, initial_dist, horizon, seed,
                chunk=1 << 20):
    """Seeded (state, action) trajectory of the policy-induced chain."""
    rng = np.random.default_rng(seed)
    cum_P = np.cumsum(np.asarray(transition, dtype=float), axis=2)
    cum_pi = np.cumsum(np.asarray(policy_probs, dtype=float), axis=1)
    cum_p0 = np.cumsum(np.asarray(initial_dist, dtype=float))
    states = np.empty(horizon + 1, dtype=np.int32)
    actions = np.empty(max(horizon, 1), dtype=np.int32)
    s = int(min(np.searchsorted(cum_p0, rng.random(), side="right"),
                len(cum_p0) - 1))
    states[0] = s
    pos = 0
    while pos < horizon:
        n = min(chunk, horizon - pos)
        u = rng.random((n, 2))
        s = _walk_into(cum_P, cum_pi, s, u, states, actions, pos)
        pos += n
    return states, actions[:horizon]


@numba.njit(cache=True)
def discounted_trajectory(states, actions, reward, X, gamma, lam, alpha, t0,
                          xi, checkpoints, wp, kern):
    """Distance-squared to the solution set at each checkpoint.

    Returns (d2 series, final w, fail_step); fail_step is -1 on success,
    else the first checkpoint time where the iterate was non-finite.
    """
    horizon = actions.shape[0]
    d = X.shape[1]
    nk = kern.shape[1]
    w = np.zeros(d)
    e = np.zeros(d)
    d2 = np.full(checkpoints.shape[0], np.nan)
    ci = 0
    for t in range(horizon + 1):
        if ci < checkpoints.shape[0] and checkpoints[ci] == t:
            diff = w - wp
            if nk > 0:
                resid = diff - kern @ (kern.T @ diff)
            else:
                resid = diff
            val = resid @ resid
            if not np.isfinite(val):
                return d2, w, t
            d2[ci] = val
            ci += 1
        if t == horizon:
            break
        s = states[t]
        s2 = states[t + 1]
        r = reward[s, actions[t]]
        e = gamma * lam * e + X[s]
        delta = r + gamma * (X[s2] @ w) - X[s] @ w
        w = w + (alpha / (t + t0) ** xi) * (delta * e)
    return d2, w, -1


@numba.njit(cache=True)
def average_reward_trajectory(states, actions, reward, X, lam, alpha, t0, xi,
                              c_beta, J_pi, checkpoints, wp, kern, Pi, Pi_wbar):
    """Average-reward run recording three series at each checkpoint:

    d2    -- squared distance to the weight solution set (kernel route),
    j2    -- squared error of the average-reward estimate,
    comb2 -- squared distance of the stacked iterate [J_hat; Pi w] to its
             singleton target (projector route).

    The two distance routes are computed independently so their
    agreement can be asserted by the caller.
    """
    horizon = actions.shape[0]
    d = X.shape[1]
    nk = kern.shape[1]
    w = np.zeros(d)
    e = np.zeros(d)
    J_hat = 0.0
    n_cp = checkpoints.shape[0]
    d2 = np.full(n_cp, np.nan)
    j2 = np.full(n_cp, np.nan)
    comb2 = np.full(n_cp, np.nan)
    ci = 0
    for t in range(horizon + 1):
        if ci < n_cp and checkpoints[ci] == t:
            diff = w - wp
            if nk > 0:
                resid = diff - kern @ (kern.T @ diff)
            else:
                resid = diff
            dval = resid @ resid
            jval = (J_hat - J_pi) ** 2
            pw = Pi @ w - Pi_wbar
            cval = jval + pw @ pw
            if not (np.isfinite(dval) and np.isfinite(cval)):
                return d2, j2, comb2, w, J_hat, t
            d2[ci] = dval
            j2[ci] = jval
            comb2[ci] = cval
            ci += 1
        if t == horizon:
            break
        s = states[t]
        s2 = states[t + 1]
        r = reward[s, actions[t]]
        a_t = alpha / (t + t0) ** xi
        e = lam * e + X[s]
        delta = r - J_hat + X[s2] @ w - X[s] @ w
        w = w + a_t * (delta * e)
        J_hat = J_hat + c_beta * a_t * (r - J_hat)
    return d2, j2, comb2, w, J_hat, -1
