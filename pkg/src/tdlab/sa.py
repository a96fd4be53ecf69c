"""Generic stochastic-approximation runner with Markov noise.

The iteration is w_{t+1} = w_t + alpha_t H(w_t, Y_{t+1}) where Y is a
time-homogeneous Markov chain.  The runner tracks the Lyapunov value
L(w) = d(w, target_set)^2 / 2 along the way.  Alongside it live the
assumption probes: an empirical Lipschitz constant for H, the drift
margin of the mean field against L, and a total-variation mixing time
that stands in for the geometric-mixing constants (those are analysis
devices; here we only report a measurable surrogate).
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Protocol

import numpy as np

from .errors import NonFiniteUpdate, NotIrreducible
from .mdp import Policy, TabularMdp, stationary_distribution
from .oracle import AffineSet, as_feature_matrix


class ChainDriver(Protocol):
    def reset(self, seed: int) -> None: ...
    def step(self): ...


@dataclass
class MeanField:
    """Affine mean update h(w) = M w + c."""

    M: np.ndarray
    c: np.ndarray

    def __call__(self, w: np.ndarray) -> np.ndarray:
        return self.M @ w + self.c


@dataclass
class SaProblem:
    update_map: Callable[[np.ndarray, object], np.ndarray]
    chain_driver: ChainDriver
    target_set: AffineSet
    w0: np.ndarray
    mean_field: MeanField | None = None


@dataclass(frozen=True)
class SaTrajectory:
    """Thinned (t, L(w_t)) series plus the final iterate."""

    times: np.ndarray
    lyapunov: np.ndarray
    final_w: np.ndarray
    seed: int
    config_hash: str

    def __post_init__(self):
        if not (np.diff(self.times) > 0).all():
            raise ValueError("checkpoint times must increase strictly")
        if (self.lyapunov < 0).any():
            raise ValueError("Lyapunov values must be nonnegative")


def config_digest(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def run_sa(problem: SaProblem, schedule, horizon: int, seed: int,
           thinning: int = 1) -> SaTrajectory:
    """Run the iteration and record L(w_t) every `thinning` steps plus at
    t = 0 and t = horizon.  Aborts with the last finite state attached
    when an update goes non-finite."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if thinning < 1:
        raise ValueError("thinning must be >= 1")
    problem.chain_driver.reset(seed)
    w = np.array(problem.w0, dtype=float)
    target = problem.target_set
    times = [0]
    values = [float(target.distance_sq(w)) / 2.0]
    for t in range(horizon):
        y = problem.chain_driver.step()
        w_next = w + schedule.alpha_at(t) * problem.update_map(w, y)
        if not np.isfinite(w_next).all():
            raise NonFiniteUpdate(f"iterate diverged at step {t}", step=t, state=w)
        w = w_next
        if (t + 1) % thinning == 0 or t + 1 == horizon:
            times.append(t + 1)
            values.append(float(target.distance_sq(w)) / 2.0)
    digest = config_digest({
        "schedule": repr(schedule), "horizon": horizon, "seed": seed,
        "thinning": thinning, "w0": problem.w0.tolist(),
    })
    return SaTrajectory(times=np.asarray(times), lyapunov=np.asarray(values),
                        final_w=w, seed=seed, config_hash=digest)


# ---------------------------------------------------------------------------
# TD instantiations of the driver and update map


class TdTraceDriver:
    """Markov driver whose emitted sample carries the eligibility trace.

    Each step yields y = (s, a, r, s_next, e) where e has already been
    decayed and bumped with x(s); that is exactly the trace the weight
    update must use.
    """

    def __init__(self, mdp: TabularMdp, policy: Policy, features, decay: float,
                 start_dist: np.ndarray | None = None):
        self.mdp = mdp
        self.policy = policy
        self.X = as_feature_matrix(features)
        self.decay = decay
        self.start_dist = mdp.initial_dist if start_dist is None else np.asarray(start_dist)
        self._rng: np.random.Generator | None = None
        self._s = 0
        self._e = np.zeros(self.X.num_features)

    def reset(self, seed: int) -> None:
        self._rng = np.random.default_rng(seed)
        self._s = int(self._rng.choice(self.mdp.num_states, p=self.start_dist))
        self._e = np.zeros(self.X.num_features)

    def step(self):
        if self._rng is None:
            raise RuntimeError("driver used before reset(seed)")
        s = self._s
        a = int(self._rng.choice(self.mdp.num_actions, p=self.policy.probs[s]))
        s_next = int(self._rng.choice(self.mdp.num_states, p=self.mdp.transition[s, a]))
        r = float(self.mdp.reward[s, a])
        self._e = self.decay * self._e + self.X.row(s)
        y = (s, a, r, s_next, self._e.copy())
        self._s = s_next
        return y


def discounted_update_map(features, gamma: float):
    X = as_feature_matrix(features).matrix

    def H(w, y):
        s, _, r, s_next, e = y
        delta = r + gamma * float(X[s_next] @ w) - float(X[s] @ w)
        return delta * e

    return H


def average_update_map(features, c_beta: float = 1.0):
    """Average-reward increment on the stacked iterate (J_hat, w).

    The leading coordinate carries the reward-rate estimate, scaled by
    the gain ratio so that one shared step size reproduces the coupled
    two-rate recursion; the rest is the weight update.
    """
    X = as_feature_matrix(features).matrix

    def H(wj, y):
        s, _, r, s_next, e = y
        J_hat, w = wj[0], wj[1:]
        delta = r - J_hat + float(X[s_next] @ w) - float(X[s] @ w)
        out = np.empty_like(wj)
        out[0] = c_beta * (r - J_hat)
        out[1:] = delta * e
        return out

    return H


# ---------------------------------------------------------------------------
# assumption probes


def lipschitz_probe(H, num_pairs: int, y_samples, dim: int, seed: int = 0,
                    scale: float = 1.0) -> float:
    """Largest observed ||H(w1, y) - H(w2, y)|| / ||w1 - w2||."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(num_pairs):
        w1 = rng.normal(scale=scale, size=dim)
        w2 = rng.normal(scale=scale, size=dim)
        denom = float(np.linalg.norm(w1 - w2))
        if denom == 0.0:
            continue
        for y in y_samples:
            ratio = float(np.linalg.norm(H(w1, y) - H(w2, y))) / denom
            worst = max(worst, ratio)
    return worst


def drift_probe(problem: SaProblem, num_points: int, seed: int = 0,
                scale: float = 1.0) -> tuple[float, np.ndarray]:
    """Empirical drift margin: min over sampled w of
    -<w - proj(w), h(w)> / L(w), over points with L(w) > 0."""
    if problem.mean_field is None:
        raise ValueError("drift probe needs the problem's mean field")
    rng = np.random.default_rng(seed)
    target = problem.target_set
    margin = np.inf
    worst = problem.w0
    for _ in range(num_points):
        w = target.particular + rng.normal(scale=scale, size=target.dim)
        grad = w - target.project(w)
        L = 0.5 * float(grad @ grad)
        if L <= 1e-15:
            continue
        value = -float(grad @ problem.mean_field(w)) / L
        if value < margin:
            margin, worst = value, w
    return float(margin), worst


def mixing_time(P_pi: np.ndarray, accuracy: float, max_steps: int = 100_000) -> int:
    """Smallest n with max_s TV(P^n(s, .), d_pi) <= accuracy.

    Total variation here is a measurable surrogate for the geometric
    mixing constants of the analysis; it is reported, never fed back
    into any run.
    """
    if not 0.0 < accuracy < 1.0:
        raise ValueError("accuracy must lie in (0, 1)")
    P = np.asarray(P_pi, dtype=float)
    from .mdp import _strongly_connected  # graph test, exact

    if not _strongly_connected(P):
        raise NotIrreducible("mixing time undefined: chain not strongly connected")
    d_pi = stationary_distribution(P)
    Pn = P.copy()
    for n in range(1, max_steps + 1):
        tv = 0.5 * np.abs(Pn - d_pi).sum(axis=1).max()
        if tv <= accuracy:
            return n
        Pn = Pn @ P
    raise RuntimeError(f"chain did not mix to {accuracy} within {max_steps} steps")


# ---------------------------------------------------------------------------
# Monte-Carlo mean-update estimate


def monte_carlo_mean_update(driver: ChainDriver, H, w: np.ndarray,
                            num_steps: int, seed: int, burn_in: int = 5_000,
                            batch_size: int = 1_000) -> tuple[np.ndarray, np.ndarray]:
    """Empirical mean of H(w, Y_t) over a long (near-)stationary run.

    Returns (mean, stderr) per coordinate.  The standard error comes
    from batch means so Markov autocorrelation is accounted for; the
    batch length must dominate the chain's mixing time.
    """
    driver.reset(seed)
    for _ in range(burn_in):
        driver.step()
    num_batches = num_steps // batch_size
    if num_batches < 2:
        raise ValueError("need at least two batches for a standard error")
    w = np.asarray(w, dtype=float)
    dim = np.asarray(H(w, driver.step())).shape[0]
    batch_means = np.empty((num_batches, dim))
    for bi in range(num_batches):
        acc = np.zeros(dim)
        for _ in range(batch_size):
            acc += H(w, driver.step())
        batch_means[bi] = acc / batch_size
    mean = batch_means.mean(axis=0)
    stderr = batch_means.std(axis=0, ddof=1) / np.sqrt(num_batches)
    return mean, stderr


def parallel_map(fn, items, workers: int = 1) -> list:
    """Map preserving input order; optional process pool for seed fans."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
