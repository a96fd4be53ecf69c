"""The two linear TD(lambda) update rules and learning-rate schedules.

Single-step, allocation-light reference implementations.  The trace is
updated first and already contains the current state's features when the
weight update fires; the average-reward estimate always uses the
pre-update value of itself.  No projection, clipping, or averaging is
applied anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import NonFiniteUpdate
from .oracle import as_feature_matrix


@dataclass(frozen=True)
class LrSchedule:
    """alpha_t = alpha / (t + t0)^xi and beta_t = c_beta * alpha_t."""

    alpha: float
    t0: float
    xi: float = 1.0
    c_beta: float = 1.0

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.t0 <= 0:
            raise ValueError("t0 must be positive")
        if not 0.5 < self.xi <= 1.0:
            raise ValueError("xi must lie in (0.5, 1]")
        if self.c_beta <= 0:
            raise ValueError("c_beta must be positive")

    @classmethod
    def from_effective(cls, initial_step: float, t0: float, xi: float = 1.0,
                       c_beta: float = 1.0) -> "LrSchedule":
        """Build from the step size actually applied at t = 0."""
        return cls(alpha=initial_step * t0 ** xi, t0=t0, xi=xi, c_beta=c_beta)

    @property
    def effective_initial_step(self) -> float:
        return self.alpha / self.t0 ** self.xi

    def alpha_at(self, t: int) -> float:
        return self.alpha / (t + self.t0) ** self.xi

    def beta_at(self, t: int) -> float:
        return self.c_beta * self.alpha_at(t)


def schedule_at(schedule: LrSchedule, t: int) -> tuple[float, float]:
    if t < 0:
        raise ValueError("t must be nonnegative")
    return schedule.alpha_at(t), schedule.beta_at(t)


@dataclass(frozen=True)
class LearnerState:
    """Weights, eligibility trace, average-reward estimate, step counter."""

    w: np.ndarray
    e: np.ndarray
    J_hat: float = 0.0
    t: int = 0

    @classmethod
    def zeros(cls, d: int) -> "LearnerState":
        return cls(w=np.zeros(d), e=np.zeros(d))


def trace_bound(features, decay: float) -> float:
    """Worst-case trace norm: max_s ||x(s)|| / (1 - decay)."""
    return as_feature_matrix(features).max_row_norm / (1.0 - decay)


def _check_finite(w: np.ndarray, extra: float, t: int, state: LearnerState) -> None:
    if not (np.isfinite(w).all() and np.isfinite(extra)):
        raise NonFiniteUpdate(f"non-finite update at step {t}", step=t, state=state)


def step_discounted(state: LearnerState, transition, features, gamma: float,
                    lam: float, schedule: LrSchedule,
                    validate: bool = False) -> LearnerState:
    """One discounted TD(lambda) update.

    transition is (s, a, r, s_next).  Trace first:
    e_t = gamma lam e_{t-1} + x(s); then
    w += alpha_t (r + gamma x(s')^T w - x(s)^T w) e_t.
    """
    s, _, r, s_next = transition
    X = as_feature_matrix(features)
    x_s = X.row(s)
    x_next = X.row(s_next)
    e = gamma * lam * state.e + x_s
    delta = r + gamma * float(x_next @ state.w) - float(x_s @ state.w)
    # grouped as alpha * (delta * e): matches the generic SA form w + alpha H
    w = state.w + schedule.alpha_at(state.t) * (delta * e)
    _check_finite(w, float(np.abs(e).max(initial=0.0)), state.t, state)
    if validate:
        assert np.linalg.norm(e) <= trace_bound(X, gamma * lam) + 1e-9
    return replace(state, w=w, e=e, t=state.t + 1)


def step_average(state: LearnerState, transition, features, lam: float,
                 schedule: LrSchedule, validate: bool = False) -> LearnerState:
    """One average-reward TD(lambda) update.

    transition is (s, a, r, s_next).  e_t = lam e_{t-1} + x(s);
    w += alpha_t (r - J_hat + x(s')^T w - x(s)^T w) e_t;
    J_hat += beta_t (r - J_hat), with J_hat read before its own update.
    """
    s, _, r, s_next = transition
    X = as_feature_matrix(features)
    x_s = X.row(s)
    x_next = X.row(s_next)
    e = lam * state.e + x_s
    delta = r - state.J_hat + float(x_next @ state.w) - float(x_s @ state.w)
    w = state.w + schedule.alpha_at(state.t) * (delta * e)
    J_hat = state.J_hat + schedule.beta_at(state.t) * (r - state.J_hat)
    _check_finite(w, J_hat, state.t, state)
    if validate:
        assert np.linalg.norm(e) <= trace_bound(X, lam) + 1e-9
    return LearnerState(w=w, e=e, J_hat=J_hat, t=state.t + 1)
