"""Benchmark instance, experiment runner, and rate fitting.

The built-in instance is a 15-state, 5-action variant of Boyan's chain
with deterministic descent toward state 0, a uniform restart out of
state 0, reward 1 only in state 0, a uniform policy, and a 15 x 5
feature matrix of rank 3.  Experiments simulate multiple seeded
trajectories, record squared distances to the analytic solution set on a
geometric checkpoint grid, and aggregate mean and standard error across
seeds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.signal

from .errors import NonFiniteUpdate
from .kernels import average_reward_trajectory, discounted_trajectory, sample_path
from .learners import LrSchedule
from .mdp import PolicyChain, Policy, TabularMdp, induce_chain
from .oracle import (
    AffineSet,
    FeatureMatrix,
    TdSystem,
    ar_matrices,
    as_feature_matrix,
    lambda_operators,
    oracle_report,
    pinv,
    solution_set,
    td_matrices,
    tilde_system,
)
from .sa import config_digest

BOYAN_FEATURES = np.array([
    [0.07, 0.11, 0.18, 0.14, 0.61],
    [0.13, 0.19, 0.32, 0.26, 0.45],
    [0.11, 0.17, 0.28, 0.22, 0.39],
    [0.24, 0.36, 0.60, 0.48, 0.84],
    [0.18, 0.28, 0.46, 0.36, 1.00],
    [0.20, 0.30, 0.50, 0.40, 1.06],
    [0.31, 0.47, 0.78, 0.62, 1.45],
    [0.29, 0.45, 0.74, 0.58, 1.39],
    [0.42, 0.64, 1.06, 0.84, 1.84],
    [0.40, 0.62, 1.02, 0.80, 1.78],
    [0.47, 0.73, 1.20, 0.94, 2.39],
    [0.53, 0.81, 1.34, 1.06, 2.23],
    [0.58, 0.90, 1.48, 1.16, 2.78],
    [0.60, 0.92, 1.52, 1.20, 2.84],
    [0.67, 1.03, 1.70, 1.34, 3.45],
])


def boyan_chain() -> tuple[TabularMdp, Policy, FeatureMatrix]:
    """The built-in 15-state benchmark (key: "boyan15").

    States s2..s14: action 0 steps down by one, actions 1-4 step down by
    two.  State s1 always moves to s0.  State s0 restarts uniformly over
    all 15 states (so the chain is irreducible and aperiodic).  Reward is
    1 exactly when the transition leaves state 0.
    """
    n_states, n_actions = 15, 5
    p = np.zeros((n_states, n_actions, n_states))
    for a in range(n_actions):
        p[0, a, :] = 1.0 / n_states
        p[1, a, 0] = 1.0
    for s in range(2, n_states):
        p[s, 0, s - 1] = 1.0
        for a in range(1, n_actions):
            p[s, a, s - 2] = 1.0
    reward = np.zeros((n_states, n_actions))
    reward[0, :] = 1.0
    mdp = TabularMdp(transition=p, reward=reward,
                     initial_dist=np.full(n_states, 1.0 / n_states))
    policy = Policy(probs=np.full((n_states, n_actions), 1.0 / n_actions))
    return mdp, policy, FeatureMatrix(BOYAN_FEATURES)


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """Everything needed to reproduce one experiment byte for byte."""

    schedule: LrSchedule
    horizon: int
    seeds: tuple[int, ...]
    mdp: object = "boyan15"  # builtin key or instance dict
    setting: str = "discounted"
    gamma: float = 0.9
    lam: float = 0.0
    checkpoints: int = 200
    name: str = "experiment"

    def __post_init__(self):
        if self.horizon < 0:
            raise ValueError("horizon must be nonnegative")
        if len(self.seeds) < 1:
            raise ValueError("need at least one seed")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds must be distinct")
        if self.setting not in ("discounted", "average_reward"):
            raise ValueError(f"unknown setting {self.setting!r}")

    @property
    def num_runs(self) -> int:
        return len(self.seeds)


@dataclass(eq=False)
class RunRecord:
    """Aggregated convergence curves for one experiment."""

    t: np.ndarray
    mean_d2: np.ndarray
    stderr_d2: np.ndarray
    mean_j2: np.ndarray | None = None
    stderr_j2: np.ndarray | None = None
    mean_combined: np.ndarray | None = None
    final_weights: np.ndarray | None = None
    final_J: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def is_average_reward(self) -> bool:
        return self.mean_j2 is not None

    def columns(self) -> dict[str, np.ndarray]:
        cols = {"t": self.t, "mean_d2": self.mean_d2, "stderr_d2": self.stderr_d2}
        if self.is_average_reward:
            cols.update(mean_j2=self.mean_j2, stderr_j2=self.stderr_j2,
                        mean_combined=self.mean_combined)
        return cols


def checkpoint_grid(horizon: int, n: int = 200) -> np.ndarray:
    """Geometric grid of distinct integer checkpoints, always containing
    0 and the horizon."""
    if horizon <= 0:
        return np.array([0], dtype=np.int64)
    pts = np.geomspace(1, horizon, num=min(n, horizon)).astype(np.int64)
    return np.unique(np.concatenate([[0], pts, [horizon]]))


def build_instance(spec) -> tuple[TabularMdp, Policy, FeatureMatrix]:
    """Resolve an instance spec: builtin key or a dict of arrays."""
    if isinstance(spec, str):
        if spec == "boyan15":
            return boyan_chain()
        raise ValueError(f"unknown builtin instance {spec!r}")
    mdp = TabularMdp(transition=np.asarray(spec["transition"], dtype=float),
                     reward=np.asarray(spec["reward"], dtype=float),
                     initial_dist=np.asarray(spec["initial_dist"], dtype=float))
    policy = Policy(probs=np.asarray(spec["policy"], dtype=float))
    features = FeatureMatrix(np.asarray(spec["features"], dtype=float))
    return mdp, policy, features


@dataclass(frozen=True, eq=False)
class OracleBundle:
    """Solved systems and sets for one experiment instance."""

    chain: PolicyChain
    system: TdSystem
    target: AffineSet
    features: FeatureMatrix
    Pi: np.ndarray | None = None
    wbar_projected: np.ndarray | None = None
    combined_target: AffineSet | None = None


def solve_instance(chain: PolicyChain, features: FeatureMatrix, setting: str,
                   gamma: float, lam: float, c_beta: float = 1.0) -> OracleBundle:
    if setting == "discounted":
        ops = lambda_operators(chain, gamma, lam)
        sys = td_matrices(ops, chain, features, gamma)
        return OracleBundle(chain=chain, system=sys,
                            target=solution_set(sys), features=features)
    ops = lambda_operators(chain, 1.0, lam)
    sys = ar_matrices(ops, chain, features, lam)
    target = solution_set(sys)
    decomp = sys.decomposition
    ts = tilde_system(sys, decomp, chain, features, lam, c_beta)
    wbar = -pinv(sys.A, scale=sys.scale) @ sys.b
    return OracleBundle(chain=chain, system=sys, target=target,
                        features=features, Pi=ts.Pi,
                        wbar_projected=ts.Pi @ wbar,
                        combined_target=ts.solution_point_set())


E5_IDENTITY_TOL = 1e-10


def _simulate_seed(task):
    """One seeded trajectory; module-level so seed fans can cross process
    boundaries."""
    (seed, transition, policy_probs, initial_dist, reward, X, setting, gamma,
     lam, alpha, t0, xi, c_beta, J_pi, cps, wp, kern, Pi, Pi_wbar, horizon) = task
    states, actions = sample_path(transition, policy_probs, initial_dist,
                                  horizon, seed)
    if setting == "discounted":
        d2, w_fin, fail = discounted_trajectory(
            states, actions, reward, X, gamma, lam, alpha, t0, xi, cps, wp, kern)
        return seed, fail, d2, None, None, w_fin, None
    d2, j2, comb2, w_fin, j_fin, fail = average_reward_trajectory(
        states, actions, reward, X, lam, alpha, t0, xi, c_beta, J_pi, cps,
        wp, kern, Pi, Pi_wbar)
    return seed, fail, d2, j2, comb2, w_fin, j_fin


def run_experiment(config: ExperimentConfig, workers: int = 1) -> RunRecord:
    """Simulate every seed from w0 = 0 (and J_hat = 0) and aggregate.

    The oracle solve happens first so an inconsistent system aborts
    before any simulation.  In the average-reward setting the squared
    distance of the stacked iterate to its singleton target is checked
    against the sum identity (J-error^2 plus weight distance^2) at every
    checkpoint of every seed.  Seeds fan out over `workers` processes;
    results merge in seed order either way.
    """
    from .sa import parallel_map

    mdp, policy, features = build_instance(config.mdp)
    chain = induce_chain(mdp, policy)
    bundle = solve_instance(chain, features, config.setting, config.gamma,
                            config.lam, config.schedule.c_beta)
    cps = checkpoint_grid(config.horizon, config.checkpoints)
    sched = config.schedule
    X = features.matrix
    wp = bundle.target.particular
    kern = bundle.target.basis

    tasks = [(seed, mdp.transition, policy.probs, mdp.initial_dist, mdp.reward,
              X, config.setting, config.gamma, config.lam, sched.alpha,
              sched.t0, sched.xi, sched.c_beta, chain.J_pi, cps, wp, kern,
              bundle.Pi, bundle.wbar_projected, config.horizon)
             for seed in config.seeds]
    results = parallel_map(_simulate_seed, tasks, workers=workers)

    d2_rows, j2_rows, comb_rows, final_ws, final_js = [], [], [], [], []
    failures = []
    for seed, fail, d2, j2, comb2, w_fin, j_fin in results:
        if fail >= 0:
            failures.append((seed, fail))
            continue
        if config.setting == "average_reward":
            gap = np.abs(comb2 - (j2 + d2)).max()
            if gap > E5_IDENTITY_TOL:
                raise AssertionError(
                    f"distance-sum identity violated (gap {gap:.2e}, seed {seed})")
            j2_rows.append(j2)
            comb_rows.append(comb2)
            final_js.append(j_fin)
        d2_rows.append(d2)
        final_ws.append(w_fin)
    if failures:
        raise NonFiniteUpdate(
            "divergence in seeds " + ", ".join(f"{s} (step {t})" for s, t in failures),
            step=failures[0][1])

    def aggregate(rows):
        arr = np.asarray(rows)
        mean = arr.mean(axis=0)
        if arr.shape[0] > 1:
            stderr = arr.std(axis=0, ddof=1) / np.sqrt(arr.shape[0])
        else:
            stderr = np.zeros_like(mean)
        return mean, stderr

    mean_d2, stderr_d2 = aggregate(d2_rows)
    record = RunRecord(t=cps, mean_d2=mean_d2, stderr_d2=stderr_d2,
                       final_weights=np.asarray(final_ws))
    if config.setting == "average_reward":
        record.mean_j2, record.stderr_j2 = aggregate(j2_rows)
        record.mean_combined = np.asarray(comb_rows).mean(axis=0)
        record.final_J = np.asarray(final_js)
    resolved = {
        "mdp": config.mdp if isinstance(config.mdp, str) else "inline",
        "setting": config.setting,
        "gamma": config.gamma,
        "lambda": config.lam,
        "schedule": {"alpha": sched.alpha, "t0": sched.t0, "xi": sched.xi,
                     "c_beta": sched.c_beta},
        "horizon": config.horizon,
        "seeds": list(config.seeds),
        "checkpoints": config.checkpoints,
        "name": config.name,
    }
    record.metadata = {
        "config": resolved,
        "config_hash": config_digest(resolved),
        "oracle": oracle_report(chain, features, config.setting, config.gamma,
                                config.lam, sched.c_beta),
    }
    return record


# ---------------------------------------------------------------------------
# CSV interface (the one consumed by external plotting tools)


def write_csv(record: RunRecord, path) -> None:
    """Schema: t,mean_d2,stderr_d2[,mean_j2,stderr_j2,mean_combined];
    full double precision, comma separators, LF line endings."""
    cols = record.columns()
    names = list(cols)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(names) + "\n")
        for i in range(len(record.t)):
            fh.write(",".join(_fmt(cols[c][i]) for c in names) + "\n")


def _fmt(x) -> str:
    if float(x) == int(x) and abs(float(x)) < 1e15:
        return str(int(x))
    return repr(float(x))


def write_metadata(record: RunRecord, path) -> None:
    import json

    with open(path, "w", newline="\n") as fh:
        json.dump(record.metadata, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_csv(path) -> dict[str, np.ndarray]:
    with open(path) as fh:
        header = fh.readline().strip()
    if not header.startswith("t,"):
        raise ValueError(f"not a run CSV (header {header!r})")
    names = header.split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != len(names):
        raise ValueError("column count does not match header")
    return {name: data[:, i] for i, name in enumerate(names)}


# ---------------------------------------------------------------------------
# rate fitting


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    residual: float
    n_points: int


def rate_fit(t: np.ndarray, mean_d2: np.ndarray, window: tuple[float, float]) -> RateFit:
    """Least-squares slope of log mean-d2 against log t over a window."""
    from .errors import EmptyWindow

    t = np.asarray(t, dtype=float)
    y = np.asarray(mean_d2, dtype=float)
    lo, hi = window
    mask = (t >= lo) & (t <= hi) & (t > 0)
    if mask.sum() < 2:
        raise EmptyWindow(f"window [{lo}, {hi}] selects {int(mask.sum())} checkpoints")
    if (y[mask] <= 0).any():
        raise ValueError("mean d2 must be positive on the fit window")
    lt, ly = np.log(t[mask]), np.log(y[mask])
    slope, intercept = np.polyfit(lt, ly, 1)
    resid = float(np.sqrt(np.mean((ly - (slope * lt + intercept)) ** 2)))
    return RateFit(slope=float(slope), intercept=float(intercept),
                   residual=resid, n_points=int(mask.sum()))


# ---------------------------------------------------------------------------
# vectorized stationary mean-update estimates (Monte-Carlo side of the
# closed-form mean field)


def empirical_mean_update(mdp: TabularMdp, policy: Policy, chain: PolicyChain,
                          features, setting: str, w: np.ndarray, *,
                          gamma: float = 1.0, lam: float = 0.0,
                          J_hat: float = 0.0, num_steps: int = 1_000_000,
                          seed: int = 0, burn_in: int = 10_000,
                          batch_size: int = 1_000, post=None):
    """Empirical average of the per-step update at a frozen iterate.

    Simulates one stationary trajectory (the start state is drawn from
    the stationary distribution and the trace warms up over the burn-in),
    evaluates the update H at every step by vectorized gathers, and
    returns (mean, stderr) per coordinate with batch-means errors.

    Discounted: H = (r + gamma x(s')^T w - x(s)^T w) e, trace decay
    gamma * lam.  Average-reward: the stacked update
    [r - J_hat; (r - J_hat + x(s')^T w - x(s)^T w) e], trace decay lam.

    `post`, when given, maps the (N, dim) sample matrix to transformed
    samples before batching, so statistics of projected or rescaled
    updates come out with their own exact standard errors.
    """
    X = as_feature_matrix(features).matrix
    total = burn_in + num_steps
    states, actions = sample_path(mdp.transition, policy.probs, chain.d_pi,
                                  total, seed)
    rewards = mdp.reward[states[:-1], actions]
    x_now = X[states[:-1]]
    x_next = X[states[1:]]
    decay = gamma * lam if setting == "discounted" else lam
    # e_t = decay e_{t-1} + x_t, zero initial trace
    traces = scipy.signal.lfilter([1.0], [1.0, -decay], x_now, axis=0)
    w = np.asarray(w, dtype=float)
    if setting == "discounted":
        delta = rewards + gamma * (x_next @ w) - x_now @ w
        samples = delta[:, None] * traces
    elif setting == "average_reward":
        delta = rewards - J_hat + x_next @ w - x_now @ w
        samples = np.concatenate([(rewards - J_hat)[:, None],
                                  delta[:, None] * traces], axis=1)
    else:
        raise ValueError(f"unknown setting {setting!r}")
    samples = samples[burn_in:]
    if post is not None:
        samples = post(samples)
    num_batches = num_steps // batch_size
    batches = samples[: num_batches * batch_size].reshape(
        num_batches, batch_size, -1).mean(axis=1)
    mean = batches.mean(axis=0)
    stderr = batches.std(axis=0, ddof=1) / np.sqrt(num_batches)
    return mean, stderr


def empirical_trace_mean(mdp: TabularMdp, policy: Policy, chain: PolicyChain,
                         features, decay: float, num_steps: int = 1_000_000,
                         seed: int = 0, burn_in: int = 10_000,
                         batch_size: int = 1_000):
    """Monte-Carlo estimate of the stationary trace mean, with stderr."""
    X = as_feature_matrix(features).matrix
    total = burn_in + num_steps
    states, _ = sample_path(mdp.transition, policy.probs, chain.d_pi, total, seed)
    traces = scipy.signal.lfilter([1.0], [1.0, -decay], X[states[:-1]], axis=0)
    traces = traces[burn_in:]
    num_batches = num_steps // batch_size
    batches = traces[: num_batches * batch_size].reshape(
        num_batches, batch_size, -1).mean(axis=1)
    return batches.mean(axis=0), batches.std(axis=0, ddof=1) / np.sqrt(num_batches)
