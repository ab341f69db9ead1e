"""Acquisition functions built on sampled frontiers and truncation masses.

The main criterion scores a candidate by a Monte-Carlo lower bound on the
information its observation carries about the Pareto frontier. Each of the K
samples pairs a frontier (solved from one posterior path) with that same
path's value at the candidate; the bound blends the masses of the tight and
conservative truncations through a mixture weight that is optimized per
candidate over a small grid. Two estimators are provided: the plain indicator
form and a posterior-mode smoothing of the indicator that trades a small bias
for lower variance. Batch selection and noisy-observation variants reuse the
same machinery, as do the ParEGO and random-search baselines.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.special import ndtr

from .domain import Box, unit_box
from .geometry import (
    CellDecomposition,
    cell_probability,
    decompose_dominated,
    flipped_decomposition,
    region_membership,
    truncation_masses,
)
from .gp import GpPosterior, predict
from .moo import Nsga2Config, ParetoSet, non_dominated_filter, nsga2_solve
from .sampler import SampledPath, draw_path, evaluate_path
from .util import golden_section_maximize

LOG_FLOOR = 1e-300
DEFAULT_LAMBDA_GRID = (1e-3, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)


@dataclass(frozen=True)
class LambdaPolicy:
    """Mixture-weight search: fixed grid plus optional bracket refinement."""

    grid: tuple[float, ...] = DEFAULT_LAMBDA_GRID
    refine: bool = False

    def __post_init__(self):
        if len(self.grid) == 0:
            raise ValueError("lambda grid must be nonempty")
        if any(not 0.0 < g <= 1.0 for g in self.grid):
            raise ValueError("lambda grid values must lie in (0, 1]")
        object.__setattr__(self, "grid", tuple(sorted(self.grid)))


@dataclass(frozen=True)
class SampleEntry:
    """One frontier sample with its generating path and cached decompositions."""

    frontier: ParetoSet
    path: SampledPath
    over_cells: CellDecomposition
    flipped_cells: CellDecomposition


@dataclass(frozen=True)
class AcquisitionSampleSet:
    entries: tuple[SampleEntry, ...]

    def __post_init__(self):
        if len(self.entries) < 1:
            raise ValueError("sample set requires at least one entry")

    def __len__(self) -> int:
        return len(self.entries)


def make_entry(
    frontier: ParetoSet, path: SampledPath, max_cells: int | None = None
) -> SampleEntry:
    kwargs = {} if max_cells is None else {"max_cells": max_cells}
    return SampleEntry(
        frontier,
        path,
        decompose_dominated(frontier, **kwargs),
        flipped_decomposition(frontier, **kwargs),
    )


def _thin_frontier(frontier: ParetoSet, cap: int) -> ParetoSet:
    """Greedy max-min diversity subset in objective space (deterministic)."""
    if len(frontier) <= cap:
        return frontier
    points = frontier.points
    chosen = [int(np.argmax(points[:, 0]))]
    dist = np.linalg.norm(points - points[chosen[0]], axis=1)
    for _ in range(cap - 1):
        nxt = int(np.argmax(dist))
        chosen.append(nxt)
        dist = np.minimum(dist, np.linalg.norm(points - points[nxt], axis=1))
    chosen = sorted(chosen)
    inputs = frontier.inputs[chosen] if frontier.inputs is not None else None
    return ParetoSet(points[chosen], inputs)


def prepare_samples(
    gps: Sequence[GpPosterior],
    k_samples: int,
    nsga2_cfg: Nsga2Config,
    rng_seed: int,
    domain: Box | None = None,
    n_features: int = 500,
    warm_start: np.ndarray | None = None,
    n_probes: int = 512,
    max_frontier: int | None = None,
    timings: dict | None = None,
) -> AcquisitionSampleSet:
    """Draw K paths, solve each for its frontier, and cache decompositions.

    Each frontier is the non-dominated set of the solver output merged with
    the path's values at probe inputs (uniform over the domain plus jittered
    copies of the ``warm_start`` inputs) and at the warm-start inputs
    themselves. The merge costs one batched path call and keeps a sampled
    frontier from being dominated anywhere the path has actually been looked
    at, which the mass ratios downstream rely on. ``max_frontier`` caps the
    frontier size by greedy diversity thinning; the warm-start incumbents are
    re-merged afterwards so the domination guarantee survives the cap. When
    ``timings`` is given, per-phase wall-clock seconds are accumulated under
    the keys "sampling", "nsga2", and "qhv".
    """
    if k_samples < 1:
        raise ValueError("k_samples must be at least 1")
    if domain is None:
        domain = unit_box(gps[0].x_train.shape[1])
    clock = time.perf_counter
    entries = []
    for child in np.random.SeedSequence(rng_seed).spawn(k_samples):
        path_seq, solver_seq, probe_seq = child.spawn(3)
        t0 = clock()
        path = draw_path(gps, n_features, np.random.default_rng(path_seq))
        t1 = clock()
        probe_rng = np.random.default_rng(probe_seq)
        if warm_start is not None and warm_start.size > 0:
            anchors = np.atleast_2d(warm_start)
            picks = anchors[probe_rng.integers(anchors.shape[0], size=n_probes // 2)]
            local = domain.clip(
                picks + probe_rng.normal(0.0, 0.05, size=picks.shape)
            )
            support = np.vstack(
                [domain.sample(probe_rng, n_probes - n_probes // 2), local]
            )
            incumbent = non_dominated_filter(
                np.atleast_2d(evaluate_path(path, anchors)), anchors
            )
        else:
            support = domain.sample(probe_rng, n_probes)
            incumbent = None
        probed = non_dominated_filter(
            np.atleast_2d(evaluate_path(path, support)), support
        )
        solver_seed = int(solver_seq.generate_state(1)[0])
        cfg = replace(nsga2_cfg, rng_seed=solver_seed)
        seeds = probed.inputs if incumbent is None else np.vstack(
            [probed.inputs, incumbent.inputs]
        )
        frontier = nsga2_solve(path, domain, cfg, initial_points=seeds)
        frontier = non_dominated_filter(
            np.vstack([frontier.points, probed.points]),
            np.vstack([frontier.inputs, probed.inputs]),
        )
        if max_frontier is not None:
            frontier = _thin_frontier(frontier, max_frontier)
        if incumbent is not None:
            frontier = non_dominated_filter(
                np.vstack([frontier.points, incumbent.points]),
                np.vstack([frontier.inputs, incumbent.inputs]),
            )
        t2 = clock()
        entries.append(make_entry(frontier, path))
        t3 = clock()
        if timings is not None:
            timings["sampling"] = timings.get("sampling", 0.0) + (t1 - t0)
            timings["nsga2"] = timings.get("nsga2", 0.0) + (t2 - t1)
            timings["qhv"] = timings.get("qhv", 0.0) + (t3 - t2)
    return AcquisitionSampleSet(tuple(entries))


@dataclass(frozen=True)
class EntryStats:
    """Per-entry, per-candidate quantities every estimator consumes.

    All arrays have shape (K, m): truncation masses under the candidate's
    predictive Gaussian and path-value membership indicators.
    """

    z_over: np.ndarray
    z_under: np.ndarray
    in_over: np.ndarray
    in_under: np.ndarray

    @property
    def p_hat(self) -> np.ndarray:
        return self.z_over / self.z_under


def compute_entry_stats(
    x: np.ndarray,
    samples: AcquisitionSampleSet,
    gps: Sequence[GpPosterior] | None = None,
    gps_per_entry: Sequence[Sequence[GpPosterior]] | None = None,
) -> EntryStats:
    """Truncation masses and memberships at candidates ``x`` of shape (m, d).

    Either one shared GP list or one list per entry (for conditioned
    posteriors in batch selection) must be given.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    k = len(samples)
    m = x.shape[0]
    if gps_per_entry is None:
        if gps is None:
            raise ValueError("either gps or gps_per_entry is required")
        mean, var = predict(gps, x)
        shared_moments = (mean, np.sqrt(var))
    z_over = np.empty((k, m))
    z_under = np.empty((k, m))
    in_over = np.empty((k, m), dtype=bool)
    in_under = np.empty((k, m), dtype=bool)
    for i, entry in enumerate(samples.entries):
        if gps_per_entry is not None:
            mean, var = predict(gps_per_entry[i], x)
            moments = (mean, np.sqrt(var))
        else:
            moments = shared_moments
        z_over[i], z_under[i] = truncation_masses(
            entry.over_cells, entry.flipped_cells, *moments
        )
        values = evaluate_path(entry.path, x)
        in_over[i], in_under[i] = region_membership(entry.frontier.points, values)
    return EntryStats(z_over, z_under, in_over, in_under)


def lb_from_stats(
    stats: EntryStats,
    lambdas: np.ndarray,
    estimator: str = "map",
    r: float = 1.0,
) -> np.ndarray:
    """Lower-bound values, shape (n_lambdas, m), averaged over the K entries."""
    lambdas = np.asarray(lambdas, dtype=float)
    if np.any((lambdas <= 0.0) | (lambdas > 1.0)):
        raise ValueError("lambda must lie in (0, 1]")
    lam = lambdas[:, None, None]
    zeta = lam / stats.z_under + (1.0 - lam) / stats.z_over
    eta = lam / stats.z_under
    ind_over = stats.in_over.astype(float)
    if estimator == "mc":
        mid = (stats.in_under & ~stats.in_over).astype(float)
        # a sample outside both regions would hit log 0; floor it instead so
        # one unlucky draw penalizes rather than destroys the average
        mixture = np.maximum(zeta * ind_over + eta * mid, LOG_FLOOR)
        terms = np.log(mixture)
    elif estimator == "map":
        theta = (r * stats.p_hat + ind_over) / (r + 1.0)
        terms = theta * np.log(zeta) + (1.0 - theta) * np.log(eta)
    else:
        raise ValueError(f"unknown estimator: {estimator!r}")
    return terms.mean(axis=1)


def _check_lambda(lam: float) -> float:
    if not 0.0 < lam <= 1.0:
        raise ValueError("lambda must lie in (0, 1]")
    return float(lam)


def lb_naive_mc(
    x: np.ndarray,
    lam: float,
    samples: AcquisitionSampleSet,
    gps: Sequence[GpPosterior],
) -> float:
    """Indicator-form lower bound at one candidate and mixture weight."""
    lam = _check_lambda(lam)
    stats = compute_entry_stats(np.atleast_2d(x), samples, gps)
    return float(lb_from_stats(stats, np.array([lam]), "mc")[0, 0])


def theta_map(p_hat: float, indicator: float, r: float = 1.0) -> float:
    """Posterior-mode estimate blending the mass ratio with the indicator."""
    if not 0.0 < p_hat <= 1.0:
        raise ValueError("p_hat must lie in (0, 1]")
    return (r * p_hat + indicator) / (r + 1.0)


def lb_map(
    x: np.ndarray,
    lam: float,
    samples: AcquisitionSampleSet,
    gps: Sequence[GpPosterior],
    r: float = 1.0,
) -> float:
    """Mode-smoothed lower bound at one candidate and mixture weight."""
    lam = _check_lambda(lam)
    stats = compute_entry_stats(np.atleast_2d(x), samples, gps)
    return float(lb_from_stats(stats, np.array([lam]), "map", r)[0, 0])


def optimize_lambda(
    x: np.ndarray,
    samples: AcquisitionSampleSet,
    gps: Sequence[GpPosterior],
    policy: LambdaPolicy = LambdaPolicy(),
    estimator: str = "map",
    r: float = 1.0,
) -> tuple[float, float]:
    """Maximize the lower bound over the mixture weight at one candidate."""
    stats = compute_entry_stats(np.atleast_2d(x), samples, gps)
    grid = np.asarray(policy.grid)
    values = lb_from_stats(stats, grid, estimator, r)[:, 0]
    best = int(np.argmax(values))
    best_lam, best_val = float(grid[best]), float(values[best])
    if policy.refine and grid.size > 1:
        lo = float(grid[max(best - 1, 0)])
        hi = float(grid[min(best + 1, grid.size - 1)])

        def value_at(lam: float) -> float:
            return float(lb_from_stats(stats, np.array([lam]), estimator, r)[0, 0])

        lam_ref, val_ref = golden_section_maximize(value_at, lo, hi)
        if val_ref > best_val:
            best_lam, best_val = float(lam_ref), float(val_ref)
    return best_lam, best_val


def pi_lower_bound(
    x: np.ndarray, samples: AcquisitionSampleSet, gps: Sequence[GpPosterior]
) -> float:
    """Average improvement probability: mean over entries of 1 - z_under."""
    stats = compute_entry_stats(np.atleast_2d(x), samples, gps)
    return float(np.mean(1.0 - stats.z_under))


# ----------------------------------------------------------------------------
# batch (greedy parallel) selection
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class FantasySet:
    """Pending inputs with per-entry fantasized outputs and conditioned GPs.

    Outputs are read from each entry's own path, then appended to the base
    posterior as ordinary observations (the module's fixed noise acts as
    jitter), one conditioned GP list per entry.
    """

    pending_inputs: np.ndarray
    fantasy_outputs: tuple[np.ndarray, ...]
    conditioned_gps: tuple[tuple[GpPosterior, ...], ...]

    @property
    def n_pending(self) -> int:
        return self.pending_inputs.shape[0]


def make_fantasies(
    samples: AcquisitionSampleSet,
    gps: Sequence[GpPosterior],
    pending_inputs: np.ndarray,
) -> FantasySet:
    pending = np.atleast_2d(np.asarray(pending_inputs, dtype=float))
    if pending.size == 0:
        pending = pending.reshape(0, gps[0].x_train.shape[1])
    outputs = []
    conditioned = []
    for entry in samples.entries:
        if pending.shape[0] == 0:
            outputs.append(np.empty((0, len(gps))))
            conditioned.append(tuple(gps))
            continue
        h = np.atleast_2d(evaluate_path(entry.path, pending))
        outputs.append(h)
        conditioned.append(
            tuple(gp.condition_on(pending, h[:, l]) for l, gp in enumerate(gps))
        )
    return FantasySet(pending, tuple(outputs), tuple(conditioned))


def cmi_parallel(
    x: np.ndarray,
    pending: FantasySet,
    samples: AcquisitionSampleSet,
    base_gps: Sequence[GpPosterior],
    lambda_policy: LambdaPolicy = LambdaPolicy(),
    estimator: str = "map",
    r: float = 1.0,
) -> float:
    """Greedy batch criterion: the lower bound under fantasy-conditioned GPs.

    With no pending points this is exactly the single-query criterion.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if pending.n_pending == 0:
        stats = compute_entry_stats(x, samples, base_gps)
    else:
        stats = compute_entry_stats(
            x, samples, gps_per_entry=pending.conditioned_gps
        )
    values = lb_from_stats(stats, np.asarray(lambda_policy.grid), estimator, r)
    return float(values[:, 0].max())


# ----------------------------------------------------------------------------
# noisy observations
# ----------------------------------------------------------------------------


def noisy_conditional_moments(
    mean: np.ndarray, var: np.ndarray, y: np.ndarray, noise_var: float
) -> tuple[np.ndarray, np.ndarray]:
    """Moments of the latent value given one noisy observation of it."""
    mean = np.asarray(mean, dtype=float)
    var = np.asarray(var, dtype=float)
    gain = var / (var + noise_var)
    nu = mean + gain * (np.asarray(y, dtype=float) - mean)
    s = var - var * gain
    return nu, s


def conditional_region_probabilities(
    entry: SampleEntry, nu: np.ndarray, s: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(p_over, p_middle, p_outside) under diagonal N(nu, s).

    The first and last come from the two cached decompositions; the middle is
    the complement, so the triple partitions the output space.
    """
    nu = np.atleast_2d(nu)
    std = np.sqrt(np.atleast_2d(s))
    p_over = np.atleast_1d(cell_probability(entry.over_cells, nu, std))
    p_out = np.atleast_1d(cell_probability(entry.flipped_cells, -nu, std))
    p_mid = 1.0 - p_over - p_out
    return p_over, p_mid, p_out


def lb_noisy(
    x: np.ndarray,
    lam: float,
    samples: AcquisitionSampleSet,
    gps: Sequence[GpPosterior],
    noise_var: float,
    noise_draws: int = 4,
    seed: int | np.random.Generator = 0,
) -> float:
    """Lower bound for noisy observations: indicators soften to probabilities.

    Each entry's path value is perturbed by ``noise_draws`` Gaussian draws;
    region memberships are replaced by their conditional probabilities given
    the perturbed observation.
    """
    lam = _check_lambda(lam)
    if noise_var <= 0:
        raise ValueError("noise_var must be positive")
    if noise_draws < 1:
        raise ValueError("noise_draws must be at least 1")
    rng = np.random.default_rng(seed)
    x = np.atleast_2d(np.asarray(x, dtype=float))
    mean, var = predict(gps, x)
    mean, var = mean[0], var[0]
    stats = compute_entry_stats(x, samples, gps)
    total = 0.0
    for i, entry in enumerate(samples.entries):
        f_val = evaluate_path(entry.path, x[0])
        eps = rng.normal(0.0, np.sqrt(noise_var), size=(noise_draws, mean.size))
        nu, s = noisy_conditional_moments(mean, var, f_val + eps, noise_var)
        p_over, p_mid, _ = conditional_region_probabilities(entry, nu, s)
        zeta = lam / stats.z_under[i, 0] + (1.0 - lam) / stats.z_over[i, 0]
        eta = lam / stats.z_under[i, 0]
        mixture = np.maximum(zeta * p_over + eta * np.maximum(p_mid, 0.0), LOG_FLOOR)
        total += float(np.sum(np.log(mixture)))
    return total / (len(samples) * noise_draws)


# ----------------------------------------------------------------------------
# baselines
# ----------------------------------------------------------------------------


def augmented_tchebycheff(
    values: np.ndarray, weights: np.ndarray, rho: float = 0.05
) -> np.ndarray:
    """Scalarize objective vectors for maximization: min_l w_l f_l + rho sum."""
    values = np.atleast_2d(np.asarray(values, dtype=float))
    weights = np.asarray(weights, dtype=float)
    weighted = values * weights
    return weighted.min(axis=1) + rho * weighted.sum(axis=1)


def expected_improvement(
    mean: np.ndarray, std: np.ndarray, best: float
) -> np.ndarray:
    """Closed-form EI for maximization; degenerates to max(mean - best, 0)."""
    mean = np.asarray(mean, dtype=float)
    std = np.asarray(std, dtype=float)
    improvement = mean - best
    out = np.maximum(improvement, 0.0)
    positive = std > 0
    z = np.where(positive, improvement / np.where(positive, std, 1.0), 0.0)
    pdf = np.exp(-0.5 * z * z) / np.sqrt(2.0 * np.pi)
    ei = improvement * ndtr(z) + std * pdf
    return np.where(positive, ei, out)


def parego_acquisition(x: np.ndarray, gp: GpPosterior, best: float) -> np.ndarray:
    """EI of the single GP fit to the scalarized observations."""
    mean, var = gp.predict(np.atleast_2d(x))
    return expected_improvement(mean, np.sqrt(var), best)


def random_acquisition(x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Uniform scores, so the induced argmax is a uniform draw."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    return rng.uniform(size=x.shape[0])
