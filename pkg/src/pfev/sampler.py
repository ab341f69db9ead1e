"""Joint posterior sample paths for all objectives via random feature maps.

A path is a random trigonometric prior draw corrected through the exact
kernel at the training inputs (pathwise conditioning): the prior part comes
from the feature expansion, and an added canonical-basis term makes the path
agree with the data up to noise level. Paths are deterministic functions once
drawn, so they can be handed to evolutionary solvers and evaluated millions
of times cheaply; their values at observed inputs stay consistent with the
exact posterior, which the acquisition's mass ratios rely on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import cho_solve
from scipy.spatial.distance import cdist

from .gp import GpPosterior

DEFAULT_BASES = 500


@dataclass(frozen=True)
class SampledPath:
    """One joint draw of all L objectives, evaluable anywhere in the domain.

    frequencies: (L, D, d), rows drawn from N(0, I / length_scale^2)
    phases:      (L, D), uniform on [0, 2*pi)
    weights:     (L, D), the prior-part weights of each objective

    For posterior paths, ``corrections`` holds per-objective coefficients of
    the exact-kernel update anchored at ``anchor_inputs``; prior paths carry
    neither.
    """

    frequencies: np.ndarray
    phases: np.ndarray
    weights: np.ndarray
    anchor_inputs: np.ndarray | None = None
    corrections: np.ndarray | None = None
    length_scales: np.ndarray | None = None

    @property
    def n_objectives(self) -> int:
        return self.weights.shape[0]

    @property
    def n_features(self) -> int:
        return self.weights.shape[1]

    @property
    def dim(self) -> int:
        return self.frequencies.shape[2]

    @property
    def feature_scale(self) -> float:
        return float(np.sqrt(2.0 / self.n_features))

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return evaluate_path(self, x)


def _features(
    x: np.ndarray, frequencies: np.ndarray, phases: np.ndarray
) -> np.ndarray:
    """Feature matrix sqrt(2/D) * cos(x W^T + b), shape (m, D)."""
    scale = np.sqrt(2.0 / frequencies.shape[0])
    return scale * np.cos(x @ frequencies.T + phases)


def draw_path(
    gps: Sequence[GpPosterior],
    n_features: int = DEFAULT_BASES,
    seed: int | np.random.Generator = 0,
) -> SampledPath:
    """Draw one joint posterior sample path of all objectives.

    Per objective: sample prior weights w0 and noise e0, then add the
    exact-kernel correction k(x)' (K + s I)^-1 (y + e0 - Phi w0), which turns
    the approximate prior draw into a posterior draw that reproduces the
    training data up to noise level.
    """
    if n_features < 1:
        raise ValueError("n_features must be at least 1")
    rng = np.random.default_rng(seed)
    x_train = gps[0].x_train
    n, dim = x_train.shape
    n_obj = len(gps)
    frequencies = np.empty((n_obj, n_features, dim))
    phases = np.empty((n_obj, n_features))
    weights = np.empty((n_obj, n_features))
    corrections = np.empty((n_obj, n))
    length_scales = np.empty(n_obj)
    for l, gp_l in enumerate(gps):
        length_scales[l] = gp_l.params.length_scale
        frequencies[l] = rng.standard_normal((n_features, dim)) / length_scales[l]
        phases[l] = rng.uniform(0.0, 2.0 * np.pi, size=n_features)
        weights[l] = rng.standard_normal(n_features)
        if n == 0:
            continue
        noise = rng.normal(0.0, np.sqrt(gp_l.params.noise_variance), size=n)
        prior_at_data = _features(x_train, frequencies[l], phases[l]) @ weights[l]
        resid = gp_l.y_train + noise - prior_at_data
        corrections[l] = cho_solve((gp_l.chol, True), resid)
    if n == 0:
        return SampledPath(frequencies, phases, weights)
    return SampledPath(
        frequencies, phases, weights, x_train, corrections, length_scales
    )


def draw_prior_path(
    dim: int,
    n_objectives: int,
    length_scale: float,
    n_features: int = DEFAULT_BASES,
    seed: int | np.random.Generator = 0,
) -> SampledPath:
    """Draw a path from the prior (no data): weights are standard normal."""
    if n_features < 1:
        raise ValueError("n_features must be at least 1")
    rng = np.random.default_rng(seed)
    frequencies = (
        rng.standard_normal((n_objectives, n_features, dim)) / length_scale
    )
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(n_objectives, n_features))
    weights = rng.standard_normal((n_objectives, n_features))
    return SampledPath(frequencies, phases, weights)


def evaluate_path(path: SampledPath, x: np.ndarray) -> np.ndarray:
    """Evaluate all objectives at ``x``: (d,) -> (L,) or (m, d) -> (m, L)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[1] != path.dim:
        raise ValueError(
            f"dimension mismatch: query has {x.shape[1]}, path has {path.dim}"
        )
    n_obj, n_feat = path.n_objectives, path.n_features
    # fuse the per-objective feature maps into one (m, L*D) evaluation;
    # einsum keeps a shape-independent reduction order, so batch rows match
    # single-point evaluations bit for bit
    freq_flat = path.frequencies.reshape(n_obj * n_feat, path.dim)
    angles = np.einsum("md,fd->mf", x, freq_flat)
    angles += path.phases.reshape(1, n_obj * n_feat)
    np.cos(angles, out=angles)
    phi = angles.reshape(x.shape[0], n_obj, n_feat)
    out = path.feature_scale * np.einsum("mlD,lD->ml", phi, path.weights)
    if path.corrections is not None:
        sq = cdist(x, path.anchor_inputs, "sqeuclidean")
        for l in range(n_obj):
            k_row = np.exp(-sq / (2.0 * path.length_scales[l] ** 2))
            out[:, l] += np.einsum("mn,n->m", k_row, path.corrections[l])
    return out[0] if single else out
