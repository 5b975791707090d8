"""Data-generating processes: Gaussian AR, finite Markov chains, block-constant
worst cases, and iid Gaussian designs.

Every simulator is a pure function of (spec, n, seed): rerunning with the same
arguments reproduces the trajectory bit for bit.  Seeds are split with
numpy's SeedSequence, so derived streams (per block, per trial) never collide.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.signal import lfilter

ROW_SUM_TOL = 1e-12
LYAPUNOV_TOL = 1e-12
LYAPUNOV_MAX_ITER = 10**6


def derive_seed(seed: int, *keys: int) -> int:
    """Deterministic child seed for (seed, keys); used for per-block and
    per-trial streams."""
    return int(np.random.SeedSequence([int(seed), *[int(k) for k in keys]]).generate_state(1)[0])


# ---------------------------------------------------------------------------
# Companion-form state space
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class StateSpace:
    """Companion realization of an AR(p) recursion on the stacked state
    (current value, previous p values).

    transition has first row (coeffs, 0) and an identity on the sub-diagonal
    block; input is the first standard basis vector, output its transpose.
    """

    transition: np.ndarray
    input_vec: np.ndarray
    output_vec: np.ndarray

    @property
    def dim(self) -> int:
        return self.transition.shape[0]


def companion(coeffs) -> StateSpace:
    """Build the (p+1)-dimensional companion state space for AR coefficients."""
    theta = np.atleast_1d(np.asarray(coeffs, dtype=float))
    p = theta.size
    if p < 1:
        raise ValueError("need at least one AR coefficient")
    a = np.zeros((p + 1, p + 1))
    a[0, :p] = theta
    a[1:, :p] = np.eye(p)
    b = np.zeros(p + 1)
    b[0] = 1.0
    return StateSpace(transition=a, input_vec=b, output_vec=b.copy())


def spectral_radius(coeffs) -> float:
    return float(np.abs(np.linalg.eigvals(companion(coeffs).transition)).max())


def gramian(ss: StateSpace, k: int) -> np.ndarray:
    """k-step controllability Gramian sum_{j<k} A^j b b' (A^j)'.

    k = 0 returns the zero matrix.  Unit innovation variance; scale by the
    noise variance for a non-unit process.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    g = np.zeros((ss.dim, ss.dim))
    col = ss.input_vec.copy()
    for _ in range(k):
        g += np.outer(col, col)
        col = ss.transition @ col
    return g


def conditional_gaussian(ss: StateSpace, state, k: int) -> tuple[float, float]:
    """Mean and variance of the output k steps ahead given the current state
    (unit innovation variance)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    x = np.asarray(state, dtype=float)
    if x.shape != (ss.dim,):
        raise ValueError(f"state must have dimension {ss.dim}, got {x.shape}")
    ak_x = np.linalg.matrix_power(ss.transition, k) @ x
    var = gramian(ss, k)[0, 0]
    return float(ak_x[0]), float(var)


# ---------------------------------------------------------------------------
# Process specs
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GaussianAR:
    """Scalar AR(p) with iid Gaussian innovations and zero initial condition.

    The regression view exposes the last `covariate_dim` lags as covariates,
    so covariate_dim < p is a deliberately misspecified fit.  `warmup` steps
    are simulated and discarded to approximate stationarity (0 keeps the raw
    zero-initialized process).
    """

    ar_coeffs: tuple[float, ...]
    noise_std: float = 1.0
    covariate_dim: int = 0  # 0 means "use the full order p"
    warmup: int = 0

    def __post_init__(self):
        object.__setattr__(self, "ar_coeffs", tuple(float(c) for c in np.atleast_1d(self.ar_coeffs)))
        if len(self.ar_coeffs) < 1:
            raise ValueError("ar_coeffs must be non-empty")
        if self.noise_std <= 0:
            raise ValueError("noise_std must be positive")
        if self.covariate_dim == 0:
            object.__setattr__(self, "covariate_dim", len(self.ar_coeffs))
        if self.covariate_dim < 1:
            raise ValueError("covariate_dim must be >= 1")
        if self.warmup < 0:
            raise ValueError("warmup must be >= 0")
        rho = spectral_radius(self.ar_coeffs)
        if rho >= 1.0:
            raise ValueError(f"AR coefficients are not Schur stable (spectral radius {rho:.4f})")

    @property
    def order(self) -> int:
        return len(self.ar_coeffs)

    @property
    def target_dim(self) -> int:
        return 1

    def simulate(self, n: int, seed: int) -> "Trajectory":
        return simulate_ar(self, n, seed)


def default_warmup(coeffs) -> int:
    """Discard count approximating stationarity: 10 p / (1 - spectral radius)."""
    p = len(np.atleast_1d(coeffs))
    rho = spectral_radius(coeffs)
    return int(math.ceil(10.0 * p / (1.0 - rho)))


@dataclass(frozen=True, eq=False)
class FiniteMarkov:
    """Stationary finite-state Markov chain with per-state emissions."""

    transition: np.ndarray
    emit_x: np.ndarray
    emit_y: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.transition, dtype=float)
        object.__setattr__(self, "transition", p)
        object.__setattr__(self, "emit_x", np.atleast_2d(np.asarray(self.emit_x, dtype=float)))
        object.__setattr__(self, "emit_y", np.atleast_2d(np.asarray(self.emit_y, dtype=float)))
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ValueError("transition must be a square matrix")
        if (p < 0).any():
            raise ValueError("transition entries must be nonnegative")
        if np.abs(p.sum(axis=1) - 1.0).max() > ROW_SUM_TOL:
            raise ValueError("transition rows must sum to 1 within 1e-12")
        k = p.shape[0]
        if self.emit_x.shape[0] != k or self.emit_y.shape[0] != k:
            raise ValueError("emissions must have one row per state")
        # Existence of a unique stationary law; computed once, cached.
        object.__setattr__(self, "_stationary", stationary_distribution(p))

    @property
    def n_states(self) -> int:
        return self.transition.shape[0]

    @property
    def covariate_dim(self) -> int:
        return self.emit_x.shape[1]

    @property
    def target_dim(self) -> int:
        return self.emit_y.shape[1]

    @property
    def stationary(self) -> np.ndarray:
        return self._stationary

    def simulate(self, n: int, seed: int) -> "Trajectory":
        return simulate_markov(self, n, seed)


def two_state_flip(q: float, emissions=((-1.0, -1.0), (1.0, 1.0))) -> FiniteMarkov:
    """Symmetric two-state chain flipping with probability q; default emits
    the state sign as both covariate and target."""
    if not 0.0 <= q <= 1.0:
        raise ValueError("flip probability must lie in [0, 1]")
    p = np.array([[1.0 - q, q], [q, 1.0 - q]])
    em = np.asarray(emissions, dtype=float)
    return FiniteMarkov(transition=p, emit_x=em[:, :1], emit_y=em[:, 1:])


def stationary_distribution(p: np.ndarray) -> np.ndarray:
    """Stationary law of a row-stochastic matrix via the eigenproblem.

    Raises ValueError when the eigenvalue 1 is not simple (no unique
    stationary law).
    """
    w, v = np.linalg.eig(p.T)
    close = np.abs(w - 1.0) < 1e-8
    if close.sum() != 1:
        raise ValueError("chain has no unique stationary law (eigenvalue 1 not simple)")
    pi = np.real(v[:, close.argmax()])
    pi = np.abs(pi)
    return pi / pi.sum()


@dataclass(frozen=True, eq=False)
class BlockConstant:
    """Worst-case process: one Gaussian draw repeated over each length-k
    block, blocks iid.  Covariates and targets are drawn independently, so
    the best linear predictor is zero."""

    block_len: int
    covariate_dim: int = 1
    target_dim: int = 1
    x_std: float = 1.0
    y_std: float = 1.0

    def __post_init__(self):
        if self.block_len < 1:
            raise ValueError("block_len must be >= 1")
        if self.covariate_dim < 1 or self.target_dim < 1:
            raise ValueError("dimensions must be >= 1")
        if self.x_std <= 0 or self.y_std <= 0:
            raise ValueError("standard deviations must be positive")

    def simulate(self, n: int, seed: int) -> "Trajectory":
        return simulate_block_constant(self, n, seed)


@dataclass(frozen=True, eq=False)
class IIDGaussian:
    """iid isotropic Gaussian design with linear targets plus independent
    Gaussian noise.  `coef` is the true d_Y x d_X map (zeros when omitted)."""

    covariate_dim: int
    target_dim: int = 1
    noise_std: float = 1.0
    coef: np.ndarray | None = None

    def __post_init__(self):
        if self.covariate_dim < 1 or self.target_dim < 1:
            raise ValueError("dimensions must be >= 1")
        if self.noise_std < 0:
            raise ValueError("noise_std must be nonnegative")
        m = np.zeros((self.target_dim, self.covariate_dim)) if self.coef is None \
            else np.asarray(self.coef, dtype=float).reshape(self.target_dim, self.covariate_dim)
        object.__setattr__(self, "coef", m)

    def simulate(self, n: int, seed: int) -> "Trajectory":
        rng = np.random.default_rng(seed)
        xs = rng.standard_normal((n, self.covariate_dim))
        noise = self.noise_std * rng.standard_normal((n, self.target_dim))
        ys = xs @ self.coef.T + noise
        return Trajectory(xs=xs, ys=ys, seed=seed, spec=self)


ProcessSpec = Union[GaussianAR, FiniteMarkov, BlockConstant, IIDGaussian]


# ---------------------------------------------------------------------------
# Trajectories
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Trajectory:
    """A simulated (covariate, target) sequence plus its provenance."""

    xs: np.ndarray
    ys: np.ndarray
    seed: int
    spec: ProcessSpec = field(repr=False)

    def __post_init__(self):
        xs = np.atleast_2d(np.asarray(self.xs, dtype=float))
        ys = np.atleast_2d(np.asarray(self.ys, dtype=float))
        if xs.shape[0] != ys.shape[0]:
            raise ValueError("xs and ys must have the same length")
        if xs.shape[0] < 1:
            raise ValueError("trajectory must contain at least one sample")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    def __len__(self) -> int:
        return self.xs.shape[0]

    def to_csv(self, path) -> None:
        """Write columns t, x_1..x_dX, y_1..y_dY."""
        d_x, d_y = self.xs.shape[1], self.ys.shape[1]
        header = ["t"] + [f"x_{j+1}" for j in range(d_x)] + [f"y_{j+1}" for j in range(d_y)]
        with open(path, "w", newline="") as fh:
            fh.write(",".join(header) + "\n")
            for t in range(len(self)):
                row = [str(t + 1)] + [f"{v:.17g}" for v in self.xs[t]] + [f"{v:.17g}" for v in self.ys[t]]
                fh.write(",".join(row) + "\n")


# ---------------------------------------------------------------------------
# Simulators
# ---------------------------------------------------------------------------

def _lagged_design(values: np.ndarray, window: int) -> np.ndarray:
    """Row t holds (values[t-1], ..., values[t-window]), zero-padded at the
    start (zero initial condition)."""
    n = values.shape[0]
    cols = []
    for lag in range(1, window + 1):
        col = np.zeros(n)
        col[lag:] = values[:-lag]
        cols.append(col)
    return np.column_stack(cols)


def simulate_ar(spec: GaussianAR, n: int, seed: int) -> Trajectory:
    """Run the AR recursion from zero initial values, discarding warmup steps.

    The covariate at time t is the window of the previous covariate_dim
    values of the series.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    total = spec.warmup + n
    rng = np.random.default_rng(seed)
    eps = spec.noise_std * rng.standard_normal(total)
    # y_t = sum_k theta_k y_{t-k} + eps_t with zero initial conditions.
    y = lfilter([1.0], np.r_[1.0, -np.asarray(spec.ar_coeffs)], eps)
    xs = _lagged_design(y, spec.covariate_dim)[spec.warmup:]
    ys = y[spec.warmup:, None]
    return Trajectory(xs=xs, ys=ys, seed=seed, spec=spec)


def simulate_markov(spec: FiniteMarkov, n: int, seed: int) -> Trajectory:
    """Stationary chain: the initial state is drawn from the stationary law."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    cum_rows = np.cumsum(spec.transition, axis=1)
    u = rng.random(n)
    states = np.empty(n, dtype=np.intp)
    states[0] = np.searchsorted(np.cumsum(spec.stationary), u[0])
    for t in range(1, n):
        states[t] = np.searchsorted(cum_rows[states[t - 1]], u[t])
    return Trajectory(xs=spec.emit_x[states], ys=spec.emit_y[states], seed=seed, spec=spec)


def simulate_block_constant(spec: BlockConstant, n: int, seed: int) -> Trajectory:
    """Each length-k block repeats a single iid draw; a final partial block
    is allowed when k does not divide n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    n_blocks = -(-n // spec.block_len)
    bx = spec.x_std * rng.standard_normal((n_blocks, spec.covariate_dim))
    by = spec.y_std * rng.standard_normal((n_blocks, spec.target_dim))
    xs = np.repeat(bx, spec.block_len, axis=0)[:n]
    ys = np.repeat(by, spec.block_len, axis=0)[:n]
    return Trajectory(xs=xs, ys=ys, seed=seed, spec=spec)


def simulate(spec: ProcessSpec, n: int, seed: int) -> Trajectory:
    return spec.simulate(n, seed)


# ---------------------------------------------------------------------------
# Stationary second moments
# ---------------------------------------------------------------------------

def solve_lyapunov(a: np.ndarray, q: np.ndarray,
                   tol: float = LYAPUNOV_TOL, max_iter: int = LYAPUNOV_MAX_ITER) -> np.ndarray:
    """Fixed point of S = A S A' + Q by iteration; matrices here are small."""
    if np.abs(np.linalg.eigvals(a)).max() >= 1.0:
        raise ValueError("Lyapunov iteration requires a Schur-stable matrix")
    s = q.copy()
    for _ in range(max_iter):
        s_next = a @ s @ a.T + q
        if np.abs(s_next - s).max() < tol:
            return 0.5 * (s_next + s_next.T)
        s = s_next
    raise RuntimeError("Lyapunov iteration did not converge")


def stationary_state_covariance(spec: GaussianAR) -> np.ndarray:
    """Stationary covariance of the stacked state; entry (i, j) is the
    autocovariance at lag |i - j|."""
    ss = companion(spec.ar_coeffs)
    q = spec.noise_std**2 * np.outer(ss.input_vec, ss.input_vec)
    return solve_lyapunov(ss.transition, q)


def autocovariances(spec: GaussianAR, max_lag: int) -> np.ndarray:
    """Stationary autocovariances gamma(0..max_lag), extended past the order
    by the AR recursion."""
    cov = stationary_state_covariance(spec)
    gamma = list(cov[0, : min(max_lag, spec.order) + 1])
    theta = np.asarray(spec.ar_coeffs)
    while len(gamma) <= max_lag:
        k = len(gamma)
        gamma.append(float(sum(theta[j] * gamma[k - 1 - j] for j in range(spec.order))))
    return np.asarray(gamma[: max_lag + 1])


def stationary_covariance(spec: GaussianAR) -> np.ndarray:
    """Covariance of the covariate window under the stationary law: the
    Toeplitz matrix of autocovariances up to covariate_dim - 1."""
    m = spec.covariate_dim
    gamma = autocovariances(spec, m - 1)
    idx = np.abs(np.subtract.outer(np.arange(m), np.arange(m)))
    return gamma[idx]
