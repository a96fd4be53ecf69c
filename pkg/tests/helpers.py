"""Shared generators and independent oracles used across the test suite."""

import numpy as np
import scipy.linalg

from tdlab import (
    FeatureMatrix,
    Policy,
    TabularMdp,
    ar_matrices,
    feature_decomposition,
    induce_chain,
    lambda_operators,
    pinv,
    solution_set,
)


def random_mdp(rng, n_states=None, n_actions=None, smooth=0.1):
    """Dense random MDP; smoothing keeps the induced chain ergodic."""
    S = int(n_states if n_states is not None else rng.integers(2, 9))
    A = int(n_actions if n_actions is not None else rng.integers(1, 5))
    p = rng.random((S, A, S)) ** 2 + 1e-3
    p /= p.sum(axis=2, keepdims=True)
    p = (1 - smooth) * p + smooth / S
    reward = rng.uniform(-1.0, 1.0, size=(S, A))
    mdp = TabularMdp(transition=p, reward=reward,
                     initial_dist=np.full(S, 1.0 / S))
    probs = rng.random((S, A)) + 0.1
    probs /= probs.sum(axis=1, keepdims=True)
    return mdp, Policy(probs=probs)


FEATURE_KINDS = ("generic", "rank_deficient", "duplicated_cols",
                 "with_ones_col", "ones_in_span", "deficient_with_ones")


def random_features(rng, n_states, d=None, kind="generic"):
    """Feature matrices covering the shapes the theory cares about:
    full rank, exactly rank-deficient, and containing the all-ones
    direction either as a column or inside the span."""
    d = int(d if d is not None else rng.integers(1, 7))
    X = rng.normal(size=(n_states, d))
    if kind == "generic":
        pass
    elif kind == "rank_deficient":
        r = int(rng.integers(1, max(min(n_states, d), 2)))
        X = rng.normal(size=(n_states, r)) @ rng.normal(size=(r, d))
    elif kind == "duplicated_cols":
        if d >= 2:
            X[:, -1] = X[:, 0]
    elif kind == "with_ones_col":
        X[:, int(rng.integers(0, d))] = 1.0
    elif kind == "ones_in_span":
        if d >= 2:
            X[:, -1] = 2.0 - X[:, 0]  # x_last + x_0 = 2 * ones
        else:
            X[:, 0] = 1.0
    elif kind == "deficient_with_ones":
        if d >= 3:
            X[:, -1] = X[:, 0]
            X[:, -2] = 1.0
        else:
            X[:, 0] = 1.0
    else:
        raise ValueError(kind)
    return FeatureMatrix(X)


def power_iteration_stationary(P, tol=1e-12, max_iter=1_000_000):
    """Independent stationary-distribution oracle."""
    d = np.full(P.shape[0], 1.0 / P.shape[0])
    for _ in range(max_iter):
        nxt = d @ P
        if np.abs(nxt - d).max() < tol:
            return nxt / nxt.sum()
        d = nxt
    raise RuntimeError("power iteration did not converge")


def truncated_series_value(P, r, gamma, max_terms=1_000_000, tol=1e-16):
    """Discounted value by direct series summation."""
    v = np.zeros(P.shape[0])
    term = r.copy()
    for _ in range(max_terms):
        v = v + term
        term = gamma * (P @ term)
        if np.abs(term).max() < tol:
            break
    return v


def truncated_lambda_operators(P, r, gamma, lam, terms=200):
    """Series oracle for the trace-weighted operators."""
    S = P.shape[0]
    P_lam = np.zeros((S, S))
    r_lam = np.zeros(S)
    Pk = np.eye(S)
    for k in range(terms):
        r_lam += (lam * gamma) ** k * (Pk @ r)
        P_lam += (1 - lam) * (lam * gamma) ** k * (Pk @ P)
        Pk = Pk @ P
    return P_lam, r_lam


def ar_lemma_suite(mdp, policy, X, lam):
    """Assert the average-reward facts on one instance:

    - the feature split reconstructs X, obeys the rank identity, and
      keeps the all-ones vector out of col(X1);
    - Abar built from X equals Abar built from X1 alone;
    - Abar w = -bbar is solvable at tolerance;
    - ker(Abar) coincides with ker(X1) (principal angles).
    """
    chain = induce_chain(mdp, policy)
    Xm = X.matrix
    n = chain.num_states

    decomp = feature_decomposition(X)
    assert np.abs(decomp.reconstruction() - Xm).max() <= 1e-10
    assert decomp.rank_X1 == decomp.rank_X - int(decomp.one_in_col_X)
    ones = np.ones(n)
    if decomp.rank_X1 > 0:
        coef = pinv(decomp.X1, scale=decomp.scale) @ ones
        residual = np.linalg.norm(decomp.X1 @ coef - ones)
    else:
        residual = np.linalg.norm(ones)
    assert residual > 1e-6 * np.sqrt(n)

    ops = lambda_operators(chain, 1.0, lam)
    sys = ar_matrices(ops, chain, X, lam)
    core = chain.D_pi @ (ops.P_lambda - np.eye(n))
    direct = decomp.X1.T @ core @ decomp.X1
    assert np.abs(sys.A - direct).max() <= 1e-10

    target = solution_set(sys)
    assert np.linalg.norm(sys.A @ target.particular + sys.b) <= 1e-8

    ker_a = target.basis
    ker_x1 = decomp.kernel_basis_X1()
    assert ker_a.shape[1] == ker_x1.shape[1]
    if ker_a.shape[1] > 0:
        angles = scipy.linalg.subspace_angles(ker_a, ker_x1)
        assert angles.max() <= 1e-8
    return decomp, sys, target
