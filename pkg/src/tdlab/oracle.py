"""Exact constructions for linear TD with arbitrary features.

Everything the theory promises about the two TD systems is computed here
in closed form: the trace-weighted transition operators, the system
matrices (A, b) for the discounted setting and (Abar, bbar) for the
average-reward setting, the feature split X = X1 + 1 theta^T that
isolates the all-ones direction, the affine solution sets with their
projections, negative-definiteness margins on the relevant subspaces,
and the combined-parameter system that couples the average-reward
estimate with the projected weights.

Rank decisions are shared: every rank, kernel, and pseudoinverse in this
module uses the same relative singular-value cutoff (``RANK_RTOL`` times
the largest matrix dimension), so the decomposition, the solution sets,
and the projectors cannot disagree about what counts as zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import InconsistentSystem, InvalidLambda, ZeroFeatureMatrix
from .mdp import PolicyChain

# Shared relative cutoff for numerical rank: sigma_max * max(shape) * RANK_RTOL.
RANK_RTOL = 1e-12
# Residual threshold (relative to ||1|| = sqrt(S)) below which the all-ones
# vector counts as a member of a column space.
ONE_MEMBERSHIP_RTOL = 1e-8
# Residual threshold above which non-membership is certified.
ONE_NONMEMBERSHIP_RTOL = 1e-6
# Consistency threshold for A w = -b.
CONSISTENCY_TOL = 1e-6


# ---------------------------------------------------------------------------
# shared rank machinery


def rank_cutoff(singular_values: np.ndarray, shape: tuple[int, ...],
                rtol: float = RANK_RTOL, scale: float | None = None) -> float:
    """Singular values at or below the cutoff count as zero.

    `scale` overrides the matrix's own largest singular value as the
    reference magnitude; pass it for matrices that are themselves
    differences or products of larger quantities, where "zero" must be
    judged against the inputs' scale rather than against leftover
    floating-point noise.
    """
    if scale is None:
        scale = float(singular_values[0]) if singular_values.size else 0.0
    return scale * max(shape) * rtol


def numerical_rank(M: np.ndarray, rtol: float = RANK_RTOL,
                   scale: float | None = None) -> int:
    s = np.linalg.svd(M, compute_uv=False)
    return int((s > rank_cutoff(s, M.shape, rtol, scale)).sum())


def pinv(M: np.ndarray, rtol: float = RANK_RTOL,
         scale: float | None = None) -> np.ndarray:
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    cut = rank_cutoff(s, M.shape, rtol, scale)
    inv = np.where(s > cut, np.divide(1.0, s, out=np.ones_like(s), where=s > cut), 0.0)
    return (Vt.T * inv) @ U.T


def kernel_basis(M: np.ndarray, rtol: float = RANK_RTOL,
                 scale: float | None = None) -> np.ndarray:
    """Orthonormal basis of ker(M) as columns; shape (cols, dim_kernel)."""
    _, s, Vt = np.linalg.svd(M)
    cut = rank_cutoff(s, M.shape, rtol, scale)
    r = int((s > cut).sum())
    return Vt[r:].T.copy()


def row_space_basis(M: np.ndarray, rtol: float = RANK_RTOL,
                    scale: float | None = None) -> np.ndarray:
    """Orthonormal basis of ker(M)^perp (the row space) as columns."""
    _, s, Vt = np.linalg.svd(M)
    cut = rank_cutoff(s, M.shape, rtol, scale)
    r = int((s > cut).sum())
    return Vt[:r].T.copy()


# ---------------------------------------------------------------------------
# features


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """State-feature matrix with its numerically determined rank."""

    matrix: np.ndarray
    rank: int = field(init=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2:
            raise ValueError("feature matrix must be 2-D (states x features)")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "rank", numerical_rank(m))

    @property
    def num_states(self) -> int:
        return self.matrix.shape[0]

    @property
    def num_features(self) -> int:
        return self.matrix.shape[1]

    @property
    def max_row_norm(self) -> float:
        return float(np.linalg.norm(self.matrix, axis=1).max())

    def row(self, s: int) -> np.ndarray:
        return self.matrix[s]


def as_feature_matrix(X) -> FeatureMatrix:
    return X if isinstance(X, FeatureMatrix) else FeatureMatrix(np.asarray(X, dtype=float))


def ones_in_col_space(M: np.ndarray, rtol: float = ONE_MEMBERSHIP_RTOL) -> bool:
    """Does the all-ones vector lie in col(M), at the membership tolerance?"""
    n = M.shape[0]
    ones = np.ones(n)
    if M.shape[1] == 0:
        return False
    coef = pinv(M) @ ones
    return float(np.linalg.norm(M @ coef - ones)) <= rtol * np.sqrt(n)


# ---------------------------------------------------------------------------
# lambda-weighted operators


@dataclass(frozen=True, eq=False)
class LambdaOperators:
    """Closed forms of the trace-weighted transition operator and reward.

    P_lam = (1 - lam) (I - gamma lam P)^{-1} P and
    r_lam = (I - gamma lam P)^{-1} r.  Rows of P_lam are nonnegative and
    sum to (1 - lam) / (1 - gamma lam), which is 1 exactly when gamma = 1
    or lam = 0.
    """

    P_lambda: np.ndarray
    r_lambda: np.ndarray
    gamma: float
    lam: float

    def __post_init__(self):
        P = np.array(self.P_lambda, dtype=float)
        r = np.array(self.r_lambda, dtype=float)
        P.flags.writeable = False
        r.flags.writeable = False
        object.__setattr__(self, "P_lambda", P)
        object.__setattr__(self, "r_lambda", r)
        if (P < -1e-12).any():
            raise ValueError("P_lambda has negative entries")
        expected = (1.0 - self.lam) / (1.0 - self.gamma * self.lam)
        if np.abs(P.sum(axis=1) - expected).max() > 1e-10:
            raise ValueError("P_lambda row sums deviate from the closed form")


def lambda_operators(chain: PolicyChain, gamma: float, lam: float) -> LambdaOperators:
    """Closed-form trace-weighted operators for a chain.

    Use gamma = 1 for the average-reward setting (then lam < 1 is
    required).  lam = 1 with gamma < 1 is fine: the (1 - lam) factor
    annihilates P_lambda while (I - gamma P) stays invertible.
    """
    if gamma * lam >= 1.0:
        raise InvalidLambda(f"gamma * lambda must be < 1, got {gamma} * {lam}")
    if lam == 0.0:
        return LambdaOperators(chain.P_pi, chain.r_pi, gamma, lam)
    n = chain.num_states
    M = np.eye(n) - gamma * lam * chain.P_pi
    P_lam = (1.0 - lam) * np.linalg.solve(M, chain.P_pi)
    r_lam = np.linalg.solve(M, chain.r_pi)
    return LambdaOperators(P_lam, r_lam, gamma, lam)


# ---------------------------------------------------------------------------
# TD systems


@dataclass(frozen=True, eq=False)
class TdSystem:
    """Linear system A w + b = 0 whose solution set the learner targets.

    `scale` is the natural magnitude of A's construction (feature scale
    squared times the weighting operator's norm); rank decisions about A
    are made relative to it.
    """

    A: np.ndarray
    b: np.ndarray
    setting: str  # "discounted" | "average_reward"
    decomposition: "FeatureDecomposition | None" = None
    scale: float | None = None

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        b = np.array(self.b, dtype=float)
        A.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        top = float(np.linalg.eigvalsh((A + A.T) / 2.0).max()) if A.size else 0.0
        if top > 1e-10:
            raise ValueError(f"system matrix is not negative semidefinite (top {top:.2e})")

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    def row_space(self) -> np.ndarray:
        """Orthonormal basis of ker(A)^perp."""
        return row_space_basis(self.A, scale=self.scale)


def _system_scale(Xm: np.ndarray, core: np.ndarray) -> float:
    x_norm = float(np.linalg.norm(Xm, 2))
    return x_norm * x_norm * float(np.linalg.norm(core, 2))


def td_matrices(ops: LambdaOperators, chain: PolicyChain, X, gamma: float) -> TdSystem:
    """Discounted system: A = X^T D (gamma P_lam - I) X, b = X^T D r_lam."""
    Xm = as_feature_matrix(X).matrix
    D = chain.D_pi
    n = chain.num_states
    core = D @ (gamma * ops.P_lambda - np.eye(n))
    A = Xm.T @ core @ Xm
    b = Xm.T @ D @ ops.r_lambda
    return TdSystem(A=A, b=b, setting="discounted", scale=_system_scale(Xm, core))


def ar_matrices(ops: LambdaOperators, chain: PolicyChain, X, lam: float) -> TdSystem:
    """Average-reward system:

        Abar = X^T D (P_lam - I) X,
        bbar = X^T D (r_lam - J / (1 - lam) 1).

    The feature split is attached to the returned system and two facts
    are verified on the spot: Abar equals the same form built from X1
    alone (the rank-one part cancels), and the system is consistent.
    """
    if lam >= 1.0:
        raise InvalidLambda(f"average-reward setting requires lambda < 1, got {lam}")
    Xf = as_feature_matrix(X)
    Xm = Xf.matrix
    D = chain.D_pi
    n = chain.num_states
    core = D @ (ops.P_lambda - np.eye(n))
    A = Xm.T @ core @ Xm
    b = Xm.T @ D @ (ops.r_lambda - chain.J_pi / (1.0 - lam) * np.ones(n))
    decomp = feature_decomposition(Xf)
    A_from_x1 = decomp.X1.T @ core @ decomp.X1
    err = np.abs(A - A_from_x1).max()
    if err > 1e-10:
        raise InconsistentSystem(
            f"projected-system identity violated: max deviation {err:.2e}")
    sys = TdSystem(A=A, b=b, setting="average_reward", decomposition=decomp,
                   scale=_system_scale(Xm, core))
    wp = -pinv(A, scale=sys.scale) @ b
    res = float(np.linalg.norm(A @ wp + b))
    if res > CONSISTENCY_TOL:
        raise InconsistentSystem(f"average-reward system inconsistent (residual {res:.2e})")
    return sys


# ---------------------------------------------------------------------------
# feature decomposition X = X1 + 1 theta^T


@dataclass(frozen=True, eq=False)
class FeatureDecomposition:
    """Split X = X1 + 1 theta^T with 1 excluded from col(X1).

    rank(X1) is rank(X) minus one exactly when the all-ones vector lies
    in col(X); otherwise X1 = X and theta = 0.  ker(X1) is the set of
    weight vectors whose value estimate X w is a constant vector, i.e.
    the "duplication" directions of the average-reward setting.
    """

    X1: np.ndarray
    theta: np.ndarray
    rank_X: int
    one_in_col_X: bool
    scale: float = 1.0  # largest singular value of the original X

    def __post_init__(self):
        X1 = np.array(self.X1, dtype=float)
        th = np.array(self.theta, dtype=float)
        X1.flags.writeable = False
        th.flags.writeable = False
        object.__setattr__(self, "X1", X1)
        object.__setattr__(self, "theta", th)

    @property
    def X2(self) -> np.ndarray:
        return np.outer(np.ones(self.X1.shape[0]), self.theta)

    @property
    def rank_X1(self) -> int:
        return numerical_rank(self.X1, scale=self.scale)

    def reconstruction(self) -> np.ndarray:
        return self.X1 + self.X2

    def kernel_basis_X1(self) -> np.ndarray:
        return kernel_basis(self.X1, scale=self.scale)

    def row_space_basis_X1(self) -> np.ndarray:
        return row_space_basis(self.X1, scale=self.scale)

    def projector(self) -> np.ndarray:
        """Projector onto ker(X1)^perp (the row space of X1)."""
        return pinv(self.X1, scale=self.scale) @ self.X1


def feature_decomposition(X, rank_rtol: float = RANK_RTOL) -> FeatureDecomposition:
    """Constructive split of the features along the all-ones direction.

    When the all-ones vector is not in col(X) the split is trivial.
    Otherwise: pick a maximal independent column set (column-pivoted QR),
    write 1 as their combination, absorb the combination's largest-weight
    column into the rank-one part, and re-express every remaining column
    over the kept independent columns plus the all-ones direction.
    """
    Xf = as_feature_matrix(X)
    Xm = Xf.matrix
    n_states, d = Xm.shape
    m = numerical_rank(Xm, rank_rtol)
    if m == 0:
        raise ZeroFeatureMatrix("feature matrix has numerical rank 0")
    ones = np.ones(n_states)
    scale = float(np.linalg.norm(Xm, 2))

    if not ones_in_col_space(Xm):
        return FeatureDecomposition(X1=Xm, theta=np.zeros(d), rank_X=m,
                                    one_in_col_X=False, scale=scale)

    _, _, perm = scipy.linalg.qr(Xm, pivoting=True, mode="economic")
    ind = np.sort(perm[:m])
    X_ind = Xm[:, ind]
    c = pinv(X_ind) @ ones  # solves X_ind c = 1 (membership holds)
    p_local = int(np.argmax(np.abs(c)))
    c_p = float(c[p_local])
    p = int(ind[p_local])

    theta = np.zeros(d)
    theta[p] = 1.0 / c_p
    dependent = [j for j in range(d) if j not in set(ind.tolist())]
    if dependent:
        beta = pinv(X_ind) @ Xm[:, dependent]  # (m, n_dep)
        theta[dependent] = beta[p_local, :] / c_p
    X1 = Xm - np.outer(ones, theta)

    decomp = FeatureDecomposition(X1=X1, theta=theta, rank_X=m,
                                  one_in_col_X=True, scale=scale)
    _validate_decomposition(decomp, Xm)
    return decomp


def _validate_decomposition(decomp: FeatureDecomposition, Xm: np.ndarray) -> None:
    n_states = Xm.shape[0]
    recon_err = np.abs(decomp.reconstruction() - Xm).max()
    if recon_err > 1e-10:
        raise InconsistentSystem(f"feature split reconstruction error {recon_err:.2e}")
    expected = decomp.rank_X - int(decomp.one_in_col_X)
    if decomp.rank_X1 != expected:
        raise InconsistentSystem(
            f"feature split rank {decomp.rank_X1}, expected {expected}")
    if decomp.rank_X1 > 0:
        coef = pinv(decomp.X1, scale=decomp.scale) @ np.ones(n_states)
        res = float(np.linalg.norm(decomp.X1 @ coef - np.ones(n_states)))
    else:
        res = float(np.sqrt(n_states))
    if res <= ONE_NONMEMBERSHIP_RTOL * np.sqrt(n_states):
        raise InconsistentSystem("all-ones vector still inside col(X1)")


# ---------------------------------------------------------------------------
# affine solution sets


@dataclass(frozen=True, eq=False)
class AffineSet:
    """Affine set {particular + basis z} with an orthonormal direction basis."""

    particular: np.ndarray
    basis: np.ndarray  # (k, n), orthonormal columns; n may be 0

    def __post_init__(self):
        p = np.array(self.particular, dtype=float)
        B = np.array(self.basis, dtype=float)
        if B.ndim != 2 or B.shape[0] != p.shape[0]:
            raise ValueError("basis must be (dim, n_directions)")
        if B.shape[1] > 0:
            gram_err = np.abs(B.T @ B - np.eye(B.shape[1])).max()
            if gram_err > 1e-10:
                raise ValueError(f"basis columns not orthonormal (err {gram_err:.2e})")
        p.flags.writeable = False
        B.flags.writeable = False
        object.__setattr__(self, "particular", p)
        object.__setattr__(self, "basis", B)

    @property
    def dim(self) -> int:
        return self.particular.shape[0]

    @property
    def dim_directions(self) -> int:
        return self.basis.shape[1]

    def project(self, w: np.ndarray) -> np.ndarray:
        """Orthogonal projection onto the set; accepts batches of points
        in the leading axes."""
        w = np.asarray(w, dtype=float)
        diff = w - self.particular
        if self.dim_directions == 0:
            return np.broadcast_to(self.particular, w.shape).copy()
        coef = diff @ self.basis
        return self.particular + coef @ self.basis.T

    def distance_sq(self, w: np.ndarray) -> np.ndarray | float:
        w = np.asarray(w, dtype=float)
        resid = w - self.project(w)
        out = (resid * resid).sum(axis=-1)
        return float(out) if out.ndim == 0 else out

    def contains(self, w: np.ndarray, tol: float = 1e-8) -> bool:
        return bool(np.sqrt(self.distance_sq(w)) <= tol)


def project_affine(aff: AffineSet, w: np.ndarray) -> np.ndarray:
    return aff.project(w)


def distance_sq(aff: AffineSet, w: np.ndarray):
    return aff.distance_sq(w)


def solution_set(sys: TdSystem, rank_rtol: float = RANK_RTOL) -> AffineSet:
    """All solutions of A w + b = 0 as an affine set.

    The particular point is the minimal-norm pseudoinverse solution; the
    direction subspace is ker(A).  Raises InconsistentSystem when the
    residual betrays either a violated model assumption or a rank
    misjudgment.  For the average-reward system the direction subspace
    is additionally checked to coincide with ker(X1).
    """
    wp = -pinv(sys.A, rank_rtol, scale=sys.scale) @ sys.b
    res = float(np.linalg.norm(sys.A @ wp + sys.b))
    if res > CONSISTENCY_TOL:
        raise InconsistentSystem(f"A w = -b inconsistent (residual {res:.2e})")
    basis = kernel_basis(sys.A, rank_rtol, scale=sys.scale)
    aff = AffineSet(particular=wp, basis=basis)
    if sys.setting == "average_reward" and sys.decomposition is not None:
        k_x1 = sys.decomposition.kernel_basis_X1()
        if k_x1.shape[1] != basis.shape[1]:
            raise InconsistentSystem(
                f"kernel dimensions differ: system {basis.shape[1]}, features {k_x1.shape[1]}")
        if basis.shape[1] > 0:
            angles = scipy.linalg.subspace_angles(basis, k_x1)
            if angles.max() > 1e-8:
                raise InconsistentSystem(
                    f"solution-set directions deviate from ker(X1) "
                    f"(max principal angle {angles.max():.2e})")
    return aff


def lyapunov(aff: AffineSet, w: np.ndarray):
    """L(w) = half the squared distance to the set."""
    return 0.5 * aff.distance_sq(w)


# ---------------------------------------------------------------------------
# negative definiteness on a subspace


def neg_def_margin(M: np.ndarray, basis: np.ndarray) -> float:
    """Margin xi such that x^T M x <= -xi ||x||^2 on span(basis).

    Returns +inf for a zero-dimensional subspace (vacuously negative
    definite), and a nonpositive value when the symmetric part fails to
    be negative definite there.
    """
    B = np.asarray(basis, dtype=float)
    if B.ndim != 2:
        raise ValueError("basis must be a 2-D array of columns")
    if B.shape[1] == 0:
        return float("inf")
    sym = (M + M.T) / 2.0
    return float(-np.linalg.eigvalsh(B.T @ sym @ B).max())


# ---------------------------------------------------------------------------
# combined-parameter (average-reward) system


@dataclass(frozen=True, eq=False)
class TildeSystem:
    """Mean dynamics of the stacked iterate [J_hat; Pi w].

    A_tilde is block lower-triangular: the first row is exactly
    [-c_beta, 0, ..., 0]; the w-block couples through the projected
    stationary trace mean.
    """

    A_tilde: np.ndarray
    b_tilde: np.ndarray
    c_beta: float
    Pi: np.ndarray
    trace_mean: np.ndarray
    w_tilde_star: np.ndarray

    @property
    def dim(self) -> int:
        return self.A_tilde.shape[0]

    def solution_point_set(self) -> AffineSet:
        """The singleton target set of the combined iterate."""
        return AffineSet(particular=self.w_tilde_star,
                         basis=np.zeros((self.dim, 0)))


def stationary_trace_mean(X, d_pi: np.ndarray, decay: float) -> np.ndarray:
    """Stationary mean of the eligibility trace: X^T d_pi / (1 - decay).

    decay is lambda in the average-reward setting and gamma * lambda in
    discounted diagnostics.
    """
    if not 0.0 <= decay < 1.0:
        raise InvalidLambda(f"trace decay must lie in [0, 1), got {decay}")
    Xm = as_feature_matrix(X).matrix
    return Xm.T @ d_pi / (1.0 - decay)


def tilde_system(ar: TdSystem, decomp: FeatureDecomposition, chain: PolicyChain,
                 X, lam: float, c_beta: float) -> TildeSystem:
    if lam >= 1.0:
        raise InvalidLambda(f"average-reward setting requires lambda < 1, got {lam}")
    if c_beta <= 0.0:
        raise ValueError(f"c_beta must be positive, got {c_beta}")
    Xm = as_feature_matrix(X).matrix
    d = Xm.shape[1]
    Pi = decomp.projector()
    trace_mean = stationary_trace_mean(Xm, chain.d_pi, lam)

    A_tilde = np.zeros((1 + d, 1 + d))
    A_tilde[0, 0] = -c_beta
    A_tilde[1:, 0] = -Pi @ trace_mean
    A_tilde[1:, 1:] = Pi @ ar.A
    b_tilde = np.concatenate(
        [[c_beta * chain.J_pi], Pi @ trace_mean * chain.J_pi + Pi @ ar.b])

    wbar = -pinv(ar.A, scale=ar.scale) @ ar.b
    w_tilde_star = np.concatenate([[chain.J_pi], Pi @ wbar])
    res = float(np.linalg.norm(A_tilde @ w_tilde_star + b_tilde))
    if res > 1e-8:
        raise InconsistentSystem(
            f"combined system does not vanish at its target ({res:.2e})")
    return TildeSystem(A_tilde=A_tilde, b_tilde=b_tilde, c_beta=c_beta, Pi=Pi,
                       trace_mean=trace_mean, w_tilde_star=w_tilde_star)


def combined_subspace_basis(decomp: FeatureDecomposition) -> np.ndarray:
    """Orthonormal basis of R x ker(X1)^perp inside R^{1+d}."""
    perp = decomp.row_space_basis_X1()
    d = decomp.X1.shape[1]
    B = np.zeros((1 + d, 1 + perp.shape[1]))
    B[0, 0] = 1.0
    B[1:, 1:] = perp
    return B


def tilde_margin_sweep(ar: TdSystem, decomp: FeatureDecomposition,
                       chain: PolicyChain, X, lam: float,
                       c_betas) -> list[tuple[float, float]]:
    """Negative-definiteness margin of the combined system for each
    candidate c_beta, on R x ker(X1)^perp."""
    B = combined_subspace_basis(decomp)
    out = []
    for cb in c_betas:
        ts = tilde_system(ar, decomp, chain, X, lam, cb)
        out.append((float(cb), neg_def_margin(ts.A_tilde, B)))
    return out


# ---------------------------------------------------------------------------
# report


def oracle_report(chain: PolicyChain, X, setting: str, gamma: float,
                  lam: float, c_beta: float = 1.0) -> dict:
    """Machine-readable summary of every oracle quantity for one instance."""
    Xf = as_feature_matrix(X)
    decomp = feature_decomposition(Xf)
    report: dict = {
        "setting": setting,
        "gamma": gamma,
        "lambda": lam,
        "num_states": chain.num_states,
        "num_features": Xf.num_features,
        "J_pi": chain.J_pi,
        "rank_X": Xf.rank,
        "rank_X1": decomp.rank_X1,
        "one_in_col_X": decomp.one_in_col_X,
    }
    if setting == "discounted":
        ops = lambda_operators(chain, gamma, lam)
        sys = td_matrices(ops, chain, Xf, gamma)
    elif setting == "average_reward":
        ops = lambda_operators(chain, 1.0, lam)
        sys = ar_matrices(ops, chain, Xf, lam)
    else:
        raise ValueError(f"unknown setting {setting!r}")
    aff = solution_set(sys)
    perp = sys.row_space()
    report.update({
        "rank_A": numerical_rank(sys.A, scale=sys.scale),
        "dim_ker_A": aff.dim_directions,
        "solution_residual": float(np.linalg.norm(sys.A @ aff.particular + sys.b)),
        "particular_solution": aff.particular.tolist(),
        "value_estimate": (Xf.matrix @ aff.particular).tolist(),
        "neg_def_margin_kerperp": neg_def_margin(sys.A, perp),
    })
    if setting == "average_reward":
        ts = tilde_system(sys, decomp, chain, Xf, lam, c_beta)
        B = combined_subspace_basis(decomp)
        report["c_beta"] = c_beta
        report["neg_def_margin_combined"] = neg_def_margin(ts.A_tilde, B)
        report["c_beta_sweep"] = [
            {"c_beta": cb, "margin": m}
            for cb, m in tilde_margin_sweep(sys, decomp, chain, Xf, lam,
                                            [0.01, 0.1, 1.0, 10.0, 100.0])
        ]
    return report
