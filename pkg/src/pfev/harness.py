"""Optimization-loop orchestration, metrics, and the two numerical studies.

One run is a sequential state machine: fit surrogates on everything observed,
draw frontier samples, maximize the configured acquisition over the box, query
the true problem (optionally with observation noise), and append. Histories
record, per iteration, the picks, the mixture weight, acquisition value,
observed-frontier hypervolume, the relative hypervolume against a long
reference run, and per-phase wall-clock.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import gp
from .acquisition import (
    AcquisitionSampleSet,
    LambdaPolicy,
    augmented_tchebycheff,
    compute_entry_stats,
    conditional_region_probabilities,
    lb_from_stats,
    make_entry,
    make_fantasies,
    noisy_conditional_moments,
    parego_acquisition,
    prepare_samples,
)
from .benchmarks import (
    Problem,
    make_combined,
    make_named,
    make_synthetic_gp,
    reference_frontier,
)
from .direct import DirectConfig, direct_maximize
from .domain import unit_box
from .errors import ConfigError
from .geometry import (
    decompose_dominated,
    flipped_decomposition,
    hypervolume,
    region_membership,
    truncation_masses,
)
from .moo import Nsga2Config, ParetoSet, non_dominated_filter
from .sampler import draw_path, evaluate_path

STRATEGIES = (
    "pfev-map",
    "pfev-mc",
    "pfev-lambda1",
    "pfev-lambda-min",
    "parego",
    "random",
)

PARETO_STRATEGIES = ("pfev-map", "pfev-mc", "pfev-lambda1", "pfev-lambda-min")

LAMBDA_MIN = 1e-3
PAREGO_RHO = 0.05
RHV_REFERENCE_MARGIN = 1e-6


# ----------------------------------------------------------------------------
# configuration
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class ProblemSpec:
    """Declarative problem description, buildable from a config file."""

    kind: str = "synthetic"  # synthetic | named | combined
    name: str = ""
    components: tuple[str, ...] = ()
    dim: int | None = None
    n_objectives: int = 2
    length_scale: float = 0.1
    n_features: int = 1000
    seed: int = 0

    def build(self) -> Problem:
        if self.kind == "synthetic":
            return make_synthetic_gp(
                self.dim or 2,
                self.n_objectives,
                self.length_scale,
                self.n_features,
                self.seed,
            )
        if self.kind == "named":
            return make_named(self.name, self.dim)
        if self.kind == "combined":
            if len(self.components) < 2:
                raise ConfigError("combined problems need at least two components")
            parts = [make_named(c, self.dim) for c in self.components]
            problem = parts[0]
            for part in parts[1:]:
                problem = make_combined(problem, part)
            return problem
        raise ConfigError(f"unknown problem kind: {self.kind!r}")


@dataclass(frozen=True)
class ReferenceSpec:
    generations: int = 10_000
    population: int = 100
    seed: int = 0


@dataclass(frozen=True)
class RunConfig:
    problem: ProblemSpec = ProblemSpec()
    strategy: str = "pfev-map"
    iterations: int = 50
    initial_points: int = 5
    k_samples: int = 10
    nsga2: Nsga2Config = Nsga2Config()
    direct: DirectConfig | None = None  # None selects a 200*(d+1) budget
    lambda_policy: LambdaPolicy = LambdaPolicy()
    map_r: float = 1.0
    batch_size: int = 1
    n_features: int = 500
    n_probes: int = 512
    max_frontier_points: int | None = 96
    gp_noise_variance: float = gp.DEFAULT_NOISE_VARIANCE
    observation_noise_sigma: float = 0.0
    noisy_acquisition: bool = False
    noise_draws: int = 4
    reference: ReferenceSpec = ReferenceSpec()
    seed: int = 0

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy: {self.strategy!r}")
        if self.iterations < 1:
            raise ConfigError("iterations must be at least 1")
        if self.initial_points < 1:
            raise ConfigError("initial_points must be at least 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be at least 1")

    def direct_config(self, dim: int) -> DirectConfig:
        if self.direct is not None:
            return self.direct
        return DirectConfig(max_evaluations=200 * (dim + 1))


def config_to_dict(cfg: RunConfig) -> dict:
    return asdict(cfg)


_NESTED_FIELDS = {
    "problem": ProblemSpec,
    "nsga2": Nsga2Config,
    "direct": DirectConfig,
    "lambda_policy": LambdaPolicy,
    "reference": ReferenceSpec,
}


def _spec_from_dict(cls, payload: dict):
    allowed = {f.name for f in cls.__dataclass_fields__.values()}
    unknown = set(payload) - allowed
    if unknown:
        raise ConfigError(f"unknown {cls.__name__} fields: {sorted(unknown)}")
    coerced = dict(payload)
    for key in ("components", "grid"):
        if key in coerced and coerced[key] is not None:
            coerced[key] = tuple(coerced[key])
    try:
        return cls(**coerced)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {cls.__name__}: {exc}") from exc


def config_from_dict(payload: dict) -> RunConfig:
    if not isinstance(payload, dict):
        raise ConfigError("run config must be a mapping")
    allowed = {f.name for f in RunConfig.__dataclass_fields__.values()}
    unknown = set(payload) - allowed
    if unknown:
        raise ConfigError(f"unknown RunConfig fields: {sorted(unknown)}")
    kwargs = dict(payload)
    for key, cls in _NESTED_FIELDS.items():
        if key in kwargs and kwargs[key] is not None:
            kwargs[key] = _spec_from_dict(cls, kwargs[key])
    try:
        return RunConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid RunConfig: {exc}") from exc


# ----------------------------------------------------------------------------
# history
# ----------------------------------------------------------------------------


@dataclass
class IterationRecord:
    iteration: int
    chosen_x: list
    observed_y: list
    chosen_lambda: list
    acquisition_value: list
    observed_hypervolume: float
    rhv: float
    timings: dict = field(default_factory=dict)


@dataclass
class RunHistory:
    config: RunConfig
    reference_point: list
    reference_hypervolume: float
    initial_inputs: list
    initial_outputs: list
    initial_hypervolume: float
    initial_rhv: float
    records: list
    aborted: bool = False
    error: str | None = None

    @property
    def n_observations(self) -> int:
        return len(self.initial_inputs) + sum(len(r.chosen_x) for r in self.records)

    def all_outputs(self) -> np.ndarray:
        rows = list(self.initial_outputs)
        for record in self.records:
            rows.extend(record.observed_y)
        return np.asarray(rows)

    def final_rhv(self) -> float:
        return self.records[-1].rhv if self.records else self.initial_rhv


# ----------------------------------------------------------------------------
# metrics
# ----------------------------------------------------------------------------


def rhv(
    observed: np.ndarray,
    reference: ParetoSet,
    reference_point: np.ndarray | None = None,
) -> float:
    """Observed-frontier hypervolume normalized by the reference frontier's."""
    if len(reference) == 0:
        raise ValueError("reference frontier must be nonempty")
    if reference_point is None:
        reference_point = reference.points.min(axis=0) - RHV_REFERENCE_MARGIN
    observed = np.asarray(observed, dtype=float)
    if observed.size == 0:
        return 0.0
    num = hypervolume(non_dominated_filter(observed), reference_point)
    den = hypervolume(reference, reference_point)
    return num / den


# ----------------------------------------------------------------------------
# the optimization loop
# ----------------------------------------------------------------------------


def _standardized_fit(
    x: np.ndarray, y: np.ndarray, noise_variance: float
) -> tuple[list, np.ndarray, np.ndarray]:
    """Fit per-objective GPs on z-scored outputs; returns (gps, mean, std)."""
    y_mean = y.mean(axis=0)
    y_std = np.maximum(y.std(axis=0), 1e-8)
    z = (y - y_mean) / y_std
    gps = gp.fit(gp.Dataset(x, z), noise_variance=noise_variance)
    return gps, y_mean, y_std


def _pfev_score_fn(samples, gps, grid, estimator, r, fantasies=None):
    def score(points: np.ndarray) -> np.ndarray:
        if fantasies is None or fantasies.n_pending == 0:
            stats = compute_entry_stats(points, samples, gps)
        else:
            stats = compute_entry_stats(
                points, samples, gps_per_entry=fantasies.conditioned_gps
            )
        return lb_from_stats(stats, grid, estimator, r).max(axis=0)

    return score


def _noisy_score_fn(samples, gps, grid, noise_var, noise_draws, seed):
    """Score with indicators softened by noise-conditioned probabilities.

    The noise draws are fixed once per iteration (common random numbers), so
    the acquisition surface stays deterministic for the optimizer.
    """
    n_obj = samples.entries[0].frontier.n_objectives
    eps = np.random.default_rng(seed).normal(
        0.0, np.sqrt(noise_var), size=(noise_draws, n_obj)
    )

    def score(points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        mean, var = gp.predict(gps, points)
        stats = compute_entry_stats(points, samples, gps)
        out = np.empty(points.shape[0])
        for j in range(points.shape[0]):
            per_lambda = np.zeros(grid.size)
            for i, entry in enumerate(samples.entries):
                f_val = evaluate_path(entry.path, points[j])
                nu, s = noisy_conditional_moments(
                    mean[j], var[j], f_val + eps, noise_var
                )
                p_over, p_mid, _ = conditional_region_probabilities(entry, nu, s)
                p_mid = np.maximum(p_mid, 0.0)
                zeta = grid[:, None] / stats.z_under[i, j] + (
                    1.0 - grid[:, None]
                ) / stats.z_over[i, j]
                eta = grid[:, None] / stats.z_under[i, j]
                mix = np.maximum(zeta * p_over[None, :] + eta * p_mid[None, :], 1e-300)
                per_lambda += np.log(mix).sum(axis=1)
            out[j] = per_lambda.max() / (len(samples) * eps.shape[0])
        return out

    return score


def _estimator_for(strategy: str) -> tuple[str, tuple[float, ...] | None]:
    """Map a strategy name to (estimator, fixed lambda grid override)."""
    if strategy == "pfev-map":
        return "map", None
    if strategy == "pfev-mc":
        return "mc", None
    if strategy == "pfev-lambda1":
        return "map", (1.0,)
    if strategy == "pfev-lambda-min":
        return "map", (LAMBDA_MIN,)
    raise ValueError(f"not a frontier-sampling strategy: {strategy}")


def run_bo(
    cfg: RunConfig,
    out_dir: str | Path | None = None,
    reference: ParetoSet | None = None,
    cache_dir: str | Path | None = None,
) -> RunHistory:
    """Execute the full loop and return (and optionally persist) its history."""
    problem = cfg.problem.build()
    domain = problem.domain
    if reference is None:
        reference = reference_frontier(
            problem,
            cfg.reference.generations,
            cfg.reference.population,
            cfg.reference.seed,
            cache_dir,
        )
    ref_point = reference.points.min(axis=0) - RHV_REFERENCE_MARGIN
    ref_volume = hypervolume(reference, ref_point)

    root = np.random.SeedSequence(cfg.seed)
    init_seq, noise_seq, *iter_seqs = root.spawn(2 + cfg.iterations)
    noise_rng = np.random.default_rng(noise_seq)

    x_obs = domain.sample(np.random.default_rng(init_seq), cfg.initial_points)
    y_obs = np.atleast_2d(problem.evaluate(x_obs))
    if cfg.observation_noise_sigma > 0:
        y_obs = y_obs + noise_rng.normal(
            0.0, cfg.observation_noise_sigma, size=y_obs.shape
        )

    def observed_metrics() -> tuple[float, float]:
        volume = hypervolume(non_dominated_filter(y_obs), ref_point)
        return volume, volume / ref_volume

    init_volume, init_rhv = observed_metrics()
    history = RunHistory(
        config=cfg,
        reference_point=[float(v) for v in ref_point],
        reference_hypervolume=float(ref_volume),
        initial_inputs=x_obs.tolist(),
        initial_outputs=y_obs.tolist(),
        initial_hypervolume=float(init_volume),
        initial_rhv=float(init_rhv),
        records=[],
    )

    direct_cfg = cfg.direct_config(domain.dim)
    try:
        for t, iter_seq in enumerate(iter_seqs, start=1):
            timings: dict[str, float] = {}
            clock = time.perf_counter
            iter_start = clock()
            sampling_seq, strategy_seq = iter_seq.spawn(2)
            strategy_rng = np.random.default_rng(strategy_seq)

            picks, lams, acq_vals = _select_points(
                cfg,
                problem,
                x_obs,
                y_obs,
                domain,
                direct_cfg,
                sampling_seq,
                strategy_rng,
                timings,
            )

            t_eval = clock()
            y_new = np.atleast_2d(problem.evaluate(picks))
            if cfg.observation_noise_sigma > 0:
                y_new = y_new + noise_rng.normal(
                    0.0, cfg.observation_noise_sigma, size=y_new.shape
                )
            timings["evaluate"] = clock() - t_eval

            x_obs = np.vstack([x_obs, picks])
            y_obs = np.vstack([y_obs, y_new])
            t_metrics = clock()
            volume, rel = observed_metrics()
            timings["metrics"] = clock() - t_metrics
            timings["total"] = clock() - iter_start
            history.records.append(
                IterationRecord(
                    iteration=t,
                    chosen_x=picks.tolist(),
                    observed_y=y_new.tolist(),
                    chosen_lambda=lams,
                    acquisition_value=acq_vals,
                    observed_hypervolume=float(volume),
                    rhv=float(rel),
                    timings=timings,
                )
            )
    except Exception as exc:
        history.aborted = True
        history.error = f"{type(exc).__name__}: {exc}"
        if out_dir is not None:
            from .reporting import emit_history

            emit_history(history, out_dir)
        raise

    if out_dir is not None:
        from .reporting import emit_history

        emit_history(history, out_dir)
    return history


def _select_points(
    cfg: RunConfig,
    problem: Problem,
    x_obs: np.ndarray,
    y_obs: np.ndarray,
    domain,
    direct_cfg: DirectConfig,
    sampling_seq: np.random.SeedSequence,
    strategy_rng: np.random.Generator,
    timings: dict,
) -> tuple[np.ndarray, list, list]:
    """One iteration's pick(s): returns (points (Q, d), lambdas, acq values)."""
    clock = time.perf_counter
    q_total = cfg.batch_size

    if cfg.strategy == "random":
        picks = domain.sample(strategy_rng, q_total)
        return picks, [None] * q_total, [None] * q_total

    t_fit = clock()
    gps, _, _ = _standardized_fit(x_obs, y_obs, cfg.gp_noise_variance)
    timings["fit"] = clock() - t_fit

    if cfg.strategy == "parego":
        picks = []
        for _ in range(q_total):
            weights = strategy_rng.dirichlet(np.ones(problem.n_objectives))
            span = np.maximum(y_obs.max(axis=0) - y_obs.min(axis=0), 1e-12)
            y_norm = (y_obs - y_obs.min(axis=0)) / span
            scalar = augmented_tchebycheff(y_norm, weights, PAREGO_RHO)
            s_mean, s_std = scalar.mean(), max(scalar.std(), 1e-8)
            scalar_z = (scalar - s_mean) / s_std
            t_fit = clock()
            scalar_gp = gp.fit(
                gp.Dataset(x_obs, scalar_z[:, None]),
                noise_variance=cfg.gp_noise_variance,
            )[0]
            timings["fit"] = timings.get("fit", 0.0) + clock() - t_fit
            best = float(scalar_z.max())
            t_acq = clock()
            x_best, value = direct_maximize(
                lambda pts: parego_acquisition(pts, scalar_gp, best),
                domain,
                direct_cfg,
            )
            timings["acquisition"] = timings.get("acquisition", 0.0) + clock() - t_acq
            picks.append(x_best)
        return np.asarray(picks), [None] * q_total, [None] * q_total

    estimator, grid_override = _estimator_for(cfg.strategy)
    policy = cfg.lambda_policy
    if grid_override is not None:
        policy = LambdaPolicy(grid=grid_override, refine=False)
    grid = np.asarray(policy.grid)

    sampling_seed = int(sampling_seq.generate_state(1)[0])
    samples = prepare_samples(
        gps,
        cfg.k_samples,
        cfg.nsga2,
        sampling_seed,
        domain,
        cfg.n_features,
        warm_start=x_obs,
        n_probes=cfg.n_probes,
        max_frontier=cfg.max_frontier_points,
        timings=timings,
    )

    picks: list[np.ndarray] = []
    lams: list = []
    acq_vals: list = []
    fantasies = None
    for q in range(q_total):
        if cfg.noisy_acquisition and cfg.observation_noise_sigma > 0 and q == 0:
            score = _noisy_score_fn(
                samples,
                gps,
                grid,
                cfg.gp_noise_variance,
                cfg.noise_draws,
                sampling_seed + 1,
            )
        else:
            score = _pfev_score_fn(samples, gps, grid, estimator, cfg.map_r, fantasies)
        t_acq = clock()
        x_best, value = direct_maximize(score, domain, direct_cfg)
        timings["acquisition"] = timings.get("acquisition", 0.0) + clock() - t_acq

        if fantasies is None or fantasies.n_pending == 0:
            stats = compute_entry_stats(x_best[None, :], samples, gps)
        else:
            stats = compute_entry_stats(
                x_best[None, :], samples, gps_per_entry=fantasies.conditioned_gps
            )
        lam_values = lb_from_stats(stats, grid, estimator, cfg.map_r)[:, 0]
        best_lam = float(grid[int(np.argmax(lam_values))])
        if policy.refine and grid.size > 1:
            from .util import golden_section_maximize

            idx = int(np.argmax(lam_values))
            lo = float(grid[max(idx - 1, 0)])
            hi = float(grid[min(idx + 1, grid.size - 1)])
            lam_ref, val_ref = golden_section_maximize(
                lambda lam: float(
                    lb_from_stats(stats, np.array([lam]), estimator, cfg.map_r)[0, 0]
                ),
                lo,
                hi,
            )
            if val_ref > float(lam_values.max()):
                best_lam, value = float(lam_ref), float(val_ref)

        picks.append(x_best)
        lams.append(best_lam)
        acq_vals.append(float(value))
        if q + 1 < q_total:
            fantasies = make_fantasies(samples, gps, np.asarray(picks))
    return np.asarray(picks), lams, acq_vals


# ----------------------------------------------------------------------------
# truncation-gap study
# ----------------------------------------------------------------------------


def gap_study(
    n_objectives: int,
    sample_sizes: Sequence[int] = (10, 50, 100, 500, 1000),
    seeds: Sequence[int] = range(5),
) -> list[dict]:
    """Volume ratios of the two truncations against the exact simplex volume.

    Frontier subsets are sampled uniformly on the probability simplex; the
    region below it inside the unit cube has volume 1/L!, approached from
    below by the tight truncation and from above by the conservative one.
    """
    if n_objectives < 2:
        raise ValueError("n_objectives must be at least 2")
    true_volume = 1.0 / math.factorial(n_objectives)
    origin = np.zeros(n_objectives)
    flipped_ref = -np.ones(n_objectives)
    rows = []
    for size in sample_sizes:
        for seed in seeds:
            rng = np.random.default_rng(
                np.random.SeedSequence([n_objectives, size, seed])
            )
            points = rng.dirichlet(np.ones(n_objectives), size=size)
            frontier = non_dominated_filter(points)
            over_volume = hypervolume(frontier, origin)
            dominating_volume = hypervolume(
                ParetoSet(-frontier.points), flipped_ref
            )
            under_volume = 1.0 - dominating_volume
            rows.append(
                {
                    "n_objectives": n_objectives,
                    "frontier_size": size,
                    "seed": seed,
                    "true_volume": true_volume,
                    "over_volume": over_volume,
                    "under_volume": under_volume,
                    "over_ratio": over_volume / true_volume,
                    "under_ratio": under_volume / true_volume,
                }
            )
    return rows


# ----------------------------------------------------------------------------
# estimator-accuracy study
# ----------------------------------------------------------------------------


def _subsample_frontier(frontier: ParetoSet, size: int) -> ParetoSet:
    """Evenly spaced subset along the sorted frontier (solver-typical size)."""
    if len(frontier) <= size:
        return frontier
    order = np.argsort(frontier.points[:, 0])
    idx = np.unique(np.round(np.linspace(0, len(frontier) - 1, size)).astype(int))
    return ParetoSet(frontier.points[order][idx])


def _study_draw(
    gps, grid_points, candidates, cand_mean, cand_std, frontier_size, n_features, rng
):
    """One sampling draw for the 1-d toy, summarized at the candidate points.

    The frontier is the non-dominated set of the path over a dense grid,
    thinned to a solver-typical size so the conservative-minus-tight gap is
    realistic. Returns per-candidate arrays (z_over, z_under, in_over).
    """
    path = draw_path(gps, n_features, rng)
    all_points = np.vstack([grid_points, candidates])
    values = np.atleast_2d(evaluate_path(path, all_points))
    frontier = _subsample_frontier(
        non_dominated_filter(values[: grid_points.shape[0]]), frontier_size
    )
    over = decompose_dominated(frontier)
    flipped = flipped_decomposition(frontier)
    z_over, z_under = truncation_masses(over, flipped, cand_mean, cand_std)
    in_over, _ = region_membership(frontier.points, values[grid_points.shape[0] :])
    return z_over, z_under, in_over


def _naive_terms(grid, z_over, z_under, in_over):
    """Indicator-form log terms, shape (n_lambda, S, m)."""
    lam = grid[:, None, None]
    zeta = lam / z_under + (1.0 - lam) / z_over
    eta = lam / z_under
    ind = in_over.astype(float)
    return np.log(np.maximum(zeta * ind + eta * (1.0 - ind), 1e-300))


def _map_terms(grid, z_over, z_under, in_over, r):
    """Mode-smoothed log terms, shape (n_lambda, S, m)."""
    lam = grid[:, None, None]
    zeta = lam / z_under + (1.0 - lam) / z_over
    eta = lam / z_under
    theta = (r * (z_over / z_under) + in_over.astype(float)) / (r + 1.0)
    return theta * np.log(zeta) + (1.0 - theta) * np.log(eta)


def estimator_study(
    n_seeds: int = 50,
    k_values: Sequence[int] = (10, 100, 1000),
    gt_samples: int = 100_000,
    n_candidates: int = 100,
    n_train: int = 5,
    length_scale: float = 0.1,
    n_features: int = 100,
    frontier_grid: int = 256,
    frontier_size: int = 10,
    problem_seed: int = 0,
    study_seed: int = 0,
    lambda_grid: Sequence[float] | None = None,
) -> list[dict]:
    """Accuracy of the two estimators on a 1-d, 2-objective toy.

    A single large indicator-form run is the pseudo ground truth. Per seed,
    both estimators are evaluated from one shared sample stream at each K
    (nested prefixes) and scored by mean squared error over the candidates.
    The smoothed estimator runs with fixed r = 1 and with r = sqrt(10/K).
    """
    grid = np.asarray(lambda_grid if lambda_grid is not None else LambdaPolicy().grid)
    problem = make_synthetic_gp(1, 2, length_scale, seed=problem_seed)
    root = np.random.SeedSequence(study_seed)
    data_seq, gt_seq, *seed_seqs = root.spawn(2 + n_seeds)

    x_train = problem.domain.sample(np.random.default_rng(data_seq), n_train)
    y_train = np.atleast_2d(problem.evaluate(x_train))
    gps, _, _ = _standardized_fit(x_train, y_train, gp.DEFAULT_NOISE_VARIANCE)

    grid_points = np.linspace(0.0, 1.0, frontier_grid)[:, None]
    candidates = np.linspace(0.0, 1.0, n_candidates)[:, None]
    cand_mean, cand_var = gp.predict(gps, candidates)
    cand_std = np.sqrt(cand_var)

    def draw(rng):
        return _study_draw(
            gps,
            grid_points,
            candidates,
            cand_mean,
            cand_std,
            frontier_size,
            n_features,
            rng,
        )

    # pseudo ground truth: running sums of the indicator-form terms
    gt_rng = np.random.default_rng(gt_seq)
    gt_sum = np.zeros((grid.size, n_candidates))
    for _ in range(gt_samples):
        z_o, z_u, ind = draw(gt_rng)
        gt_sum += _naive_terms(grid, z_o[None], z_u[None], ind[None])[:, 0, :]
    gt_value = (gt_sum / gt_samples).max(axis=0)

    k_values = sorted(k_values)
    k_max = k_values[-1]
    mse: dict[tuple[str, int], list[float]] = {}
    for seed_seq in seed_seqs:
        rng = np.random.default_rng(seed_seq)
        z_o = np.empty((k_max, n_candidates))
        z_u = np.empty((k_max, n_candidates))
        ind = np.empty((k_max, n_candidates), dtype=bool)
        for s in range(k_max):
            z_o[s], z_u[s], ind[s] = draw(rng)
        naive_cum = np.cumsum(_naive_terms(grid, z_o, z_u, ind), axis=1)
        map1_cum = np.cumsum(_map_terms(grid, z_o, z_u, ind, 1.0), axis=1)
        for k in k_values:
            est_naive = (naive_cum[:, k - 1, :] / k).max(axis=0)
            est_map1 = (map1_cum[:, k - 1, :] / k).max(axis=0)
            r_k = float(np.sqrt(10.0 / k))
            est_mapk = (
                _map_terms(grid, z_o[:k], z_u[:k], ind[:k], r_k).mean(axis=1)
            ).max(axis=0)
            for label, est in (
                ("naive-mc", est_naive),
                ("map-r1", est_map1),
                ("map-rk", est_mapk),
            ):
                mse.setdefault((label, k), []).append(
                    float(np.mean((est - gt_value) ** 2))
                )

    rows = []
    for (label, k), errs in sorted(mse.items()):
        errs_arr = np.asarray(errs)
        rows.append(
            {
                "estimator": label,
                "k": k,
                "mse_mean": float(errs_arr.mean()),
                "mse_se": float(errs_arr.std(ddof=1) / np.sqrt(errs_arr.size))
                if errs_arr.size > 1
                else 0.0,
                "n_seeds": int(errs_arr.size),
                "gt_samples": gt_samples,
            }
        )
    return rows
