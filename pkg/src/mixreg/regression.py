"""OLS fitting, population best linear maps, excess risk, the whitened noise
walk, and the Gaussian quartic machinery for misspecified AR cross terms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import qr, solve_triangular

from .linalg import EIG_FLOOR, inv_sqrt_psd, min_eig, sqrt_psd, symmetrize
from .processes import (
    BlockConstant,
    FiniteMarkov,
    GaussianAR,
    IIDGaussian,
    ProcessSpec,
    Trajectory,
    autocovariances,
    companion,
    simulate,
)

ANALYTIC = "analytic"
MONTE_CARLO = "monte_carlo"


class DegenerateDesignError(ValueError):
    """Raised when the sample Gram matrix is numerically singular."""

    def __init__(self, min_eigenvalue: float):
        self.min_eigenvalue = float(min_eigenvalue)
        super().__init__(f"degenerate design: min eigenvalue {min_eigenvalue:.3e}")


@dataclass(frozen=True, eq=False)
class RegressionProblem:
    """Population description of the regression: averaged covariate covariance
    and the best linear map."""

    sigma_x: np.ndarray
    m_star: np.ndarray
    source: str = ANALYTIC
    stderr: np.ndarray | None = None  # Monte Carlo path only

    def __post_init__(self):
        sx = symmetrize(np.atleast_2d(np.asarray(self.sigma_x, dtype=float)))
        ms = np.atleast_2d(np.asarray(self.m_star, dtype=float))
        if sx.shape[0] != sx.shape[1]:
            raise ValueError("sigma_x must be square")
        if ms.shape[1] != sx.shape[0]:
            raise ValueError("m_star columns must match sigma_x dimension")
        if min_eig(sx) <= EIG_FLOOR:
            raise ValueError("sigma_x must be strictly positive definite")
        object.__setattr__(self, "sigma_x", sx)
        object.__setattr__(self, "m_star", ms)

    @property
    def d_x(self) -> int:
        return self.sigma_x.shape[0]

    @property
    def d_y(self) -> int:
        return self.m_star.shape[0]


@dataclass(frozen=True, eq=False)
class FitResult:
    """One OLS fit against a known population problem."""

    m_hat: np.ndarray
    emp_cov_whitened: np.ndarray
    s_n: np.ndarray
    excess_risk: float

    def csv_row(self, n: int, seed: int) -> str:
        return ",".join([
            str(n), str(seed),
            f"{self.excess_risk:.17g}",
            f"{min_eig(self.emp_cov_whitened):.17g}",
            f"{np.linalg.norm(self.s_n):.17g}",
        ])

    CSV_HEADER = "n,seed,excess_risk,min_eig_whitened,s_n_norm"


def _check_gram(gram: np.ndarray) -> None:
    d = gram.shape[0]
    floor = EIG_FLOOR * np.trace(gram) / d
    smallest = min_eig(gram)
    if smallest <= floor:
        raise DegenerateDesignError(smallest)


def fit_ols(traj: Trajectory) -> np.ndarray:
    """Least-squares map (sum Y X') (sum X X')^{-1}, solved through a QR
    factorization of the Gram matrix."""
    xs, ys = traj.xs, traj.ys
    gram = xs.T @ xs
    _check_gram(gram)
    cross = ys.T @ xs
    q, r = qr(gram)
    return solve_triangular(r, q.T @ cross.T).T


def excess_risk(m: np.ndarray, prob: RegressionProblem) -> float:
    """Squared Frobenius distance to the best map, weighted by sqrt(Sigma_X)."""
    m = np.atleast_2d(np.asarray(m, dtype=float))
    if m.shape != prob.m_star.shape:
        raise ValueError(f"expected shape {prob.m_star.shape}, got {m.shape}")
    diff = (m - prob.m_star) @ sqrt_psd(prob.sigma_x)
    return float(np.sum(diff * diff))


def noise_walk(traj: Trajectory, prob: RegressionProblem) -> tuple[np.ndarray, np.ndarray]:
    """Whitened noise-covariate interactions V_i = W_i X_i' Sigma_X^{-1/2}
    (W_i the residual against the best map) and their average S_n."""
    w = traj.ys - traj.xs @ prob.m_star.T
    xw = traj.xs @ inv_sqrt_psd(prob.sigma_x)
    v = np.einsum("ni,nj->nij", w, xw)
    return v, v.mean(axis=0)


def whitened_empirical_covariance(traj: Trajectory, prob: RegressionProblem) -> np.ndarray:
    root = inv_sqrt_psd(prob.sigma_x)
    xw = traj.xs @ root
    return (xw.T @ xw) / len(traj)


def evaluate_fit(traj: Trajectory, prob: RegressionProblem) -> FitResult:
    m_hat = fit_ols(traj)
    _, s_n = noise_walk(traj, prob)
    return FitResult(
        m_hat=m_hat,
        emp_cov_whitened=whitened_empirical_covariance(traj, prob),
        s_n=s_n,
        excess_risk=excess_risk(m_hat, prob),
    )


def error_identity_check(traj: Trajectory, prob: RegressionProblem) -> float:
    """Relative Frobenius residual of the error identity

        (M_hat - M_star) sqrt(Sigma_X) = S_n (whitened empirical cov)^{-1},

    which holds algebraically for any nonsingular design.
    """
    m_hat = fit_ols(traj)
    lhs = (m_hat - prob.m_star) @ sqrt_psd(prob.sigma_x)
    _, s_n = noise_walk(traj, prob)
    emp = whitened_empirical_covariance(traj, prob)
    rhs = s_n @ np.linalg.inv(emp)
    return float(np.linalg.norm(lhs - rhs) / max(1.0, np.linalg.norm(lhs)))


# ---------------------------------------------------------------------------
# Population optimum
# ---------------------------------------------------------------------------

def _zero_init_mixture_optimum(spec: GaussianAR, window: int, horizon: int) -> RegressionProblem:
    """Best linear map for the uniform mixture of the sample times of a
    zero-initialized trajectory, via the exact state-covariance recursion.

    The covariate at time t is the leading window of the state one step
    back, so the mixture moments follow from Cov(x_j) and Cov(x_{j+1}, x_j)
    = A Cov(x_j)."""
    ss = companion(spec.ar_coeffs)
    a, b = ss.transition, ss.input_vec
    q = spec.noise_std**2 * np.outer(b, b)
    state_cov = np.zeros_like(q)
    sum_cov = np.zeros_like(q)
    sum_cross = np.zeros_like(q)
    # state indices warmup .. warmup + horizon - 1 feed samples 1 .. horizon
    for j in range(spec.warmup + horizon):
        prev = state_cov
        state_cov = a @ state_cov @ a.T + q
        if j >= spec.warmup:
            sum_cov += prev
            sum_cross += a @ prev
    sel = np.zeros((window, a.shape[0]))
    sel[:, :window] = np.eye(window)
    sigma_x = sel @ (sum_cov / horizon) @ sel.T
    if min_eig(sigma_x) <= EIG_FLOOR:
        raise ValueError("mixture covariance is not positive definite")
    cross = (sum_cross / horizon)[0] @ sel.T
    alpha = np.linalg.solve(symmetrize(sigma_x), cross)
    return RegressionProblem(sigma_x=sigma_x, m_star=alpha[None, :], source=ANALYTIC)


def _analytic_optimum(spec: ProcessSpec, window: int) -> RegressionProblem:
    if isinstance(spec, GaussianAR):
        gamma = autocovariances(spec, window)
        idx = np.abs(np.subtract.outer(np.arange(window), np.arange(window)))
        sigma_x = gamma[idx]
        if min_eig(sigma_x) <= EIG_FLOOR:
            raise ValueError("autocovariance matrix is not positive definite")
        alpha = np.linalg.solve(sigma_x, gamma[1 : window + 1])
        return RegressionProblem(sigma_x=sigma_x, m_star=alpha[None, :], source=ANALYTIC)
    if isinstance(spec, IIDGaussian):
        return RegressionProblem(np.eye(spec.covariate_dim), spec.coef, source=ANALYTIC)
    if isinstance(spec, BlockConstant):
        sigma_x = spec.x_std**2 * np.eye(spec.covariate_dim)
        return RegressionProblem(sigma_x, np.zeros((spec.target_dim, spec.covariate_dim)),
                                 source=ANALYTIC)
    if isinstance(spec, FiniteMarkov):
        pi = spec.stationary
        sigma_x = spec.emit_x.T @ (pi[:, None] * spec.emit_x)
        cross = spec.emit_y.T @ (pi[:, None] * spec.emit_x)
        m_star = np.linalg.solve(symmetrize(sigma_x), cross.T).T
        return RegressionProblem(sigma_x, m_star, source=ANALYTIC)
    raise TypeError(f"no analytic optimum for {type(spec).__name__}")


def _monte_carlo_optimum(spec: ProcessSpec, n_mc: int, seed: int,
                         batches: int = 100) -> RegressionProblem:
    traj = simulate(spec, n_mc, seed)
    sigma_x = traj.xs.T @ traj.xs / n_mc
    m_hat = fit_ols(traj)
    # Batch-means standard error: refit on consecutive segments.  Valid for
    # mixing data as long as segments are much longer than the mixing time.
    edges = np.linspace(0, n_mc, batches + 1).astype(int)
    fits = []
    for a, b in zip(edges[:-1], edges[1:]):
        seg = Trajectory(xs=traj.xs[a:b], ys=traj.ys[a:b], seed=traj.seed, spec=spec)
        try:
            fits.append(fit_ols(seg))
        except DegenerateDesignError:
            continue
    fits = np.asarray(fits)
    stderr = fits.std(axis=0, ddof=1) / np.sqrt(len(fits))
    return RegressionProblem(sigma_x=sigma_x, m_star=m_hat, source=MONTE_CARLO, stderr=stderr)


def population_optimum(spec: ProcessSpec, window: int | None = None,
                       method: str = ANALYTIC, n_mc: int = 10**6,
                       seed: int = 0, horizon: int | None = None) -> RegressionProblem:
    """Best linear predictor of the target from the covariate window, plus the
    averaged covariate covariance.

    The analytic path solves the stationary normal equations (Yule-Walker for
    AR specs, exact enumeration for Markov chains); the Monte Carlo path fits
    one long simulated trajectory and reports batch-means standard errors.
    For an AR spec of order p fit with window < p the problem is
    misspecified by construction.  For AR specs a horizon selects the exact
    uniform mixture over that many sample times of the (possibly
    zero-initialized) trajectory instead of the stationary law.
    """
    if window is not None:
        if isinstance(spec, GaussianAR):
            if window != spec.covariate_dim:
                spec = GaussianAR(spec.ar_coeffs, spec.noise_std,
                                  covariate_dim=window, warmup=spec.warmup)
        elif window != spec.covariate_dim:
            raise ValueError("window is only adjustable for AR specs")
    window = spec.covariate_dim
    if method == ANALYTIC:
        if horizon is not None:
            if not isinstance(spec, GaussianAR):
                raise ValueError("finite-horizon averaging applies to AR specs")
            return _zero_init_mixture_optimum(spec, window, horizon)
        return _analytic_optimum(spec, window)
    if method == MONTE_CARLO:
        return _monte_carlo_optimum(spec, n_mc, seed)
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# Gaussian quartic forms
# ---------------------------------------------------------------------------

def gaussian_quartic(a: np.ndarray, b: np.ndarray) -> float:
    """E[g'Ag * g'Bg] for isotropic Gaussian g:
    2 <A, sym(B)> + tr(A) tr(B)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("A and B must be square matrices of equal shape")
    sym_b = 0.5 * (b + b.T)
    return float(2.0 * np.sum(a * sym_b) + np.trace(a) * np.trace(b))


def _noise_map(ss_transition: np.ndarray, input_vec: np.ndarray, j: int,
               n_eps: int, noise_std: float) -> np.ndarray:
    """Matrix mapping the innovation vector (eps_0..eps_{n_eps-1}) to the
    state at time j; zero for j < 0."""
    dim = ss_transition.shape[0]
    mat = np.zeros((dim, n_eps))
    if j < 0:
        return mat
    col = input_vec.copy()
    for jj in range(j, -1, -1):
        mat[:, jj] = col
        col = ss_transition @ col
    return noise_std * mat


def cross_term_expectation(spec: GaussianAR, window: int, s: int, t: int,
                           sigma_inv: np.ndarray) -> float:
    """Exact cross correlation E[u_s' Sigma^{-1} u_t w_s w_t] of the noise
    walk increments of a misspecified AR fit, for sample times s < t.

    Writes the states as linear images of the innovation vector and reduces
    both terms (the squared misspecification part and the innovation cross
    part) to Gaussian quartic forms.
    """
    if not 0 <= s < t:
        raise ValueError("need 0 <= s < t")
    if window < 1 or window > spec.order:
        raise ValueError("window must be in [1, order]")
    theta = np.asarray(spec.ar_coeffs)
    tail = theta[window:]
    if tail.size == 0:
        return 0.0  # realizable fit: the noise is a martingale difference
    ss = companion(spec.ar_coeffs)
    p = spec.order
    n_eps = t + 1
    sel_u = np.zeros((window, p + 1))
    sel_u[:, 1 : window + 1] = np.eye(window)
    sel_v = np.zeros((tail.size, p + 1))
    sel_v[:, 1 : tail.size + 1] = np.eye(tail.size)

    def noise_map(j: int) -> np.ndarray:
        return _noise_map(ss.transition, ss.input_vec, j, n_eps, spec.noise_std)

    m_s, m_t = noise_map(s), noise_map(t)
    m_sm, m_tm = noise_map(s - window), noise_map(t - window)
    quad = m_s.T @ sel_u.T @ np.asarray(sigma_inv, dtype=float) @ sel_u @ m_t
    beta_outer = np.outer(tail, tail)
    misspec = m_sm.T @ sel_v.T @ beta_outer @ sel_v @ m_tm
    e_s = np.zeros(n_eps)
    e_s[s] = 1.0
    innov_cross = spec.noise_std * np.outer(e_s, m_tm.T @ sel_v.T @ tail)
    return gaussian_quartic(quad, misspec) + gaussian_quartic(quad, innov_cross)
