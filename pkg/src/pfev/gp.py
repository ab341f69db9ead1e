"""Independent Gaussian-process regression per objective.

Each objective gets its own zero-mean GP with an isotropic squared-exponential
kernel ``k(x, x') = s * exp(-||x - x'||^2 / (2 l^2))``. The signal variance
``s`` is held at 1; the noise variance is fixed (not fitted); the length scale
is chosen by marginal-likelihood maximization over a bounded interval.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import solve_triangular
from scipy.spatial.distance import cdist

from .domain import Box
from .errors import NumericalError
from .util import golden_section_maximize

DEFAULT_NOISE_VARIANCE = 1e-4
VARIANCE_FLOOR = 1e-12
LENGTH_SCALE_BOUNDS = (1e-2, 1.0)
LENGTH_SCALE_GRID_SIZE = 25
# Escalation ladder applied when the Gram factorization fails outright.
JITTER_LADDER = (1e-10, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4)


@dataclass(frozen=True)
class KernelParams:
    """Hyper-parameters of the squared-exponential kernel."""

    length_scale: float
    signal_variance: float = 1.0
    noise_variance: float = DEFAULT_NOISE_VARIANCE

    def __post_init__(self):
        if not self.length_scale > 0:
            raise ValueError("length_scale must be positive")
        if not self.signal_variance > 0:
            raise ValueError("signal_variance must be positive")
        if not self.noise_variance > 0:
            raise ValueError("noise_variance must be positive")


@dataclass(frozen=True)
class Dataset:
    """Aligned observations: ``inputs`` (n, d) and ``outputs`` (n, L)."""

    inputs: np.ndarray
    outputs: np.ndarray

    def __post_init__(self):
        inputs = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        outputs = np.atleast_2d(np.asarray(self.outputs, dtype=float))
        if inputs.shape[0] != outputs.shape[0]:
            raise ValueError("inputs and outputs must have equal length")
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "outputs", outputs)

    @property
    def n(self) -> int:
        return self.inputs.shape[0]

    @property
    def dim(self) -> int:
        return self.inputs.shape[1]

    @property
    def n_objectives(self) -> int:
        return self.outputs.shape[1]


def kernel_eval(params: KernelParams, x: np.ndarray, x2: np.ndarray) -> float:
    """Kernel value between two points; equals ``signal_variance`` at x == x2."""
    x = np.asarray(x, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if x.shape != x2.shape or x.ndim != 1:
        raise ValueError(f"dimension mismatch: {x.shape} vs {x2.shape}")
    sq = float(np.sum((x - x2) ** 2))
    return params.signal_variance * np.exp(-sq / (2.0 * params.length_scale**2))


def kernel_matrix(params: KernelParams, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cross-kernel matrix of shape ``(len(a), len(b))``."""
    sq = cdist(np.atleast_2d(a), np.atleast_2d(b), "sqeuclidean")
    return params.signal_variance * np.exp(-sq / (2.0 * params.length_scale**2))


def _cholesky_with_jitter(mat: np.ndarray) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor of ``mat``, escalating diagonal jitter on failure."""
    attempted = []
    for jitter in (0.0,) + JITTER_LADDER:
        attempted.append(jitter)
        try:
            chol = np.linalg.cholesky(
                mat if jitter == 0.0 else mat + jitter * np.eye(mat.shape[0])
            )
            return chol, jitter
        except np.linalg.LinAlgError:
            continue
    raise NumericalError(
        "Gram factorization failed at every jitter level",
        attempted_jitters=tuple(attempted),
    )


@dataclass(frozen=True)
class GpPosterior:
    """Fitted single-objective GP: training data, kernel, cached factorization."""

    x_train: np.ndarray
    y_train: np.ndarray
    params: KernelParams
    chol: np.ndarray
    alpha: np.ndarray
    jitter: float
    log_marginal_likelihood: float

    @property
    def n(self) -> int:
        return self.x_train.shape[0]

    def predict(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Posterior mean and variance at ``x`` of shape (m, d) or (d,)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.x_train.shape[1]:
            raise ValueError("query dimension does not match training inputs")
        k_star = kernel_matrix(self.params, x, self.x_train)
        mean = k_star @ self.alpha
        v = solve_triangular(self.chol, k_star.T, lower=True)
        var = self.params.signal_variance - np.sum(v * v, axis=0)
        var = np.clip(var, VARIANCE_FLOOR, self.params.signal_variance)
        return mean, var

    def condition_on(self, x_new: np.ndarray, y_new: np.ndarray) -> "GpPosterior":
        """Posterior with extra observations appended (kernel unchanged)."""
        x_new = np.atleast_2d(np.asarray(x_new, dtype=float))
        y_new = np.asarray(y_new, dtype=float).ravel()
        x_all = np.vstack([self.x_train, x_new])
        y_all = np.concatenate([self.y_train, y_new])
        return _build_posterior(x_all, y_all, self.params)


def _build_posterior(
    x: np.ndarray, y: np.ndarray, params: KernelParams
) -> GpPosterior:
    gram = kernel_matrix(params, x, x)
    chol, jitter = _cholesky_with_jitter(
        gram + params.noise_variance * np.eye(x.shape[0])
    )
    alpha = solve_triangular(
        chol.T, solve_triangular(chol, y, lower=True), lower=False
    )
    lml = (
        -0.5 * float(y @ alpha)
        - float(np.sum(np.log(np.diag(chol))))
        - 0.5 * x.shape[0] * np.log(2.0 * np.pi)
    )
    return GpPosterior(x, y, params, chol, alpha, jitter, lml)


def log_marginal_likelihood(
    x: np.ndarray, y: np.ndarray, params: KernelParams
) -> float:
    return _build_posterior(x, y, params).log_marginal_likelihood


def fit(
    dataset: Dataset,
    domain: Box | None = None,
    noise_variance: float = DEFAULT_NOISE_VARIANCE,
    length_scale_bounds: tuple[float, float] = LENGTH_SCALE_BOUNDS,
    grid_size: int = LENGTH_SCALE_GRID_SIZE,
    refine: bool = True,
) -> list[GpPosterior]:
    """Fit one GP per objective, selecting each length scale by evidence.

    The search evaluates a log-spaced grid over ``length_scale_bounds`` and
    then polishes the best bracket by golden section.
    """
    if dataset.n < 1:
        raise ValueError("fit requires at least one observation")
    if not noise_variance > 0:
        raise ValueError("noise_variance must be positive")
    if domain is not None and not domain.contains(dataset.inputs):
        raise ValueError("dataset inputs fall outside the declared domain")

    grid = np.geomspace(length_scale_bounds[0], length_scale_bounds[1], grid_size)
    posteriors = []
    for l in range(dataset.n_objectives):
        y = dataset.outputs[:, l]

        def evidence(length_scale: float) -> float:
            params = KernelParams(length_scale, 1.0, noise_variance)
            return log_marginal_likelihood(dataset.inputs, y, params)

        values = np.array([evidence(ls) for ls in grid])
        best = int(np.argmax(values))
        best_ls = float(grid[best])
        if refine:
            lo = grid[max(best - 1, 0)]
            hi = grid[min(best + 1, grid.size - 1)]
            if hi > lo:
                best_ls, _ = golden_section_maximize(
                    evidence, float(lo), float(hi), tol=1e-4 * (hi - lo)
                )
        params = KernelParams(float(best_ls), 1.0, noise_variance)
        posteriors.append(_build_posterior(dataset.inputs, y, params))
    return posteriors


def predict(
    gps: Sequence[GpPosterior], x: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Stacked per-objective prediction: means and variances, shape (m, L)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    means = np.empty((x.shape[0], len(gps)))
    variances = np.empty_like(means)
    for l, gp in enumerate(gps):
        means[:, l], variances[:, l] = gp.predict(x)
    return means, variances
