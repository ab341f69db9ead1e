"""Evolutionary multi-objective maximization and Pareto-set utilities.

The solver is a standard real-coded NSGA-II: fast non-dominated sorting,
crowding distance, binary tournament, simulated binary crossover, and
polynomial mutation. Objectives are maximized and must accept a batch of
points, ``(m, d) -> (m, L)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .domain import Box

Objective = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ParetoSet:
    """Mutually non-dominated objective vectors, optionally with their inputs."""

    points: np.ndarray
    inputs: np.ndarray | None = None

    def __post_init__(self):
        points = np.atleast_2d(np.asarray(self.points, dtype=float))
        if points.shape[0] == 0:
            points = points.reshape(0, points.shape[1] if points.ndim == 2 else 0)
        object.__setattr__(self, "points", points)
        if self.inputs is not None:
            inputs = np.atleast_2d(np.asarray(self.inputs, dtype=float))
            if inputs.shape[0] != points.shape[0]:
                raise ValueError("inputs must align with points")
            object.__setattr__(self, "inputs", inputs)
        if points.shape[0] > 1:
            if _has_duplicates(points):
                raise ValueError("ParetoSet points must not contain duplicates")
            if points.shape[1] == 2:
                mutually_nd = bool(_non_dominated_mask_2d(points).all())
            else:
                mutually_nd = not _dominance_matrix(points).any()
            if not mutually_nd:
                raise ValueError("ParetoSet points must be mutually non-dominated")

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def n_objectives(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class Nsga2Config:
    population: int = 50
    generations: int = 1000
    crossover_prob: float = 0.9
    crossover_eta: float = 15.0
    mutation_prob: float | None = None  # None selects 1/d
    mutation_eta: float = 20.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.population < 4 or self.population % 2 != 0:
            raise ValueError("population must be even and at least 4")
        if self.generations < 1:
            raise ValueError("generations must be at least 1")


def _dominance_matrix(points: np.ndarray) -> np.ndarray:
    """Boolean (n, n) matrix: entry (i, j) true iff point i dominates point j."""
    a = points[:, None, :]
    b = points[None, :, :]
    return np.all(a >= b, axis=2) & np.any(a > b, axis=2)


def _has_duplicates(points: np.ndarray) -> bool:
    return np.unique(points, axis=0).shape[0] != points.shape[0]


def _non_dominated_mask_2d(points: np.ndarray) -> np.ndarray:
    """Sweep-based mask of non-dominated rows; requires unique rows."""
    order = np.lexsort((-points[:, 1], -points[:, 0]))
    sorted_f2 = points[order, 1]
    keep_sorted = np.empty(points.shape[0], dtype=bool)
    keep_sorted[0] = True
    keep_sorted[1:] = sorted_f2[1:] > np.maximum.accumulate(sorted_f2)[:-1]
    keep = np.zeros(points.shape[0], dtype=bool)
    keep[order] = keep_sorted
    return keep


def non_dominated_filter(
    points: np.ndarray | Sequence[Sequence[float]],
    inputs: np.ndarray | None = None,
) -> ParetoSet:
    """Extract the non-dominated subset, collapsing exact duplicates."""
    points = np.asarray(points, dtype=float)
    if points.size == 0:
        n_obj = points.shape[1] if points.ndim == 2 else 0
        return ParetoSet(np.empty((0, n_obj)))
    points = np.atleast_2d(points)
    # first occurrence wins for duplicates so aligned inputs stay consistent
    _, first = np.unique(points, axis=0, return_index=True)
    keep = np.sort(first)
    points = points[keep]
    if inputs is not None:
        inputs = np.atleast_2d(np.asarray(inputs, dtype=float))[keep]
    if points.shape[1] == 2 and points.shape[0] > 1:
        non_dominated = _non_dominated_mask_2d(points)
    else:
        non_dominated = ~_dominance_matrix(points).any(axis=0)
    if inputs is not None:
        return ParetoSet(points[non_dominated], inputs[non_dominated])
    return ParetoSet(points[non_dominated])


def _fast_non_dominated_ranks(points: np.ndarray) -> np.ndarray:
    """Front index (0 = best) per point via iterative front peeling."""
    n = points.shape[0]
    dom = _dominance_matrix(points)
    dominator_count = dom.sum(axis=0).astype(int)
    ranks = np.full(n, -1, dtype=int)
    active = np.ones(n, dtype=bool)
    level = 0
    while active.any():
        front = active & (dominator_count == 0)
        if not front.any():  # degenerate ties; close out remaining points
            front = active
        ranks[front] = level
        active &= ~front
        dominator_count -= dom[front].sum(axis=0)
        level += 1
    return ranks


def _crowding_distance(points: np.ndarray, ranks: np.ndarray) -> np.ndarray:
    """Per-point crowding distance computed within each front."""
    n, n_obj = points.shape
    crowd = np.zeros(n)
    for level in np.unique(ranks):
        idx = np.flatnonzero(ranks == level)
        if idx.size <= 2:
            crowd[idx] = np.inf
            continue
        for l in range(n_obj):
            order = idx[np.argsort(points[idx, l], kind="stable")]
            span = points[order[-1], l] - points[order[0], l]
            crowd[order[0]] = np.inf
            crowd[order[-1]] = np.inf
            if span > 0:
                gaps = (points[order[2:], l] - points[order[:-2], l]) / span
                crowd[order[1:-1]] += gaps
    return crowd


def _tournament(
    ranks: np.ndarray,
    crowd: np.ndarray,
    rng: np.random.Generator,
    n_winners: int,
) -> np.ndarray:
    """Binary tournament on (rank, crowding); returns winner indices."""
    n = ranks.size
    a = rng.integers(0, n, size=n_winners)
    b = rng.integers(0, n, size=n_winners)
    better = (ranks[a] < ranks[b]) | ((ranks[a] == ranks[b]) & (crowd[a] > crowd[b]))
    return np.where(better, a, b)


def _sbx_crossover(
    parents: np.ndarray,
    domain: Box,
    prob: float,
    eta: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Simulated binary crossover on consecutive parent pairs (vectorized)."""
    n_pairs, dim = parents.shape[0] // 2, parents.shape[1]
    p1, p2 = parents[0::2], parents[1::2]
    pair_on = rng.random(n_pairs) <= prob
    var_on = rng.random((n_pairs, dim)) <= 0.5
    u = rng.random((n_pairs, dim))
    beta = np.where(
        u <= 0.5,
        (2.0 * u) ** (1.0 / (eta + 1.0)),
        (1.0 / (2.0 * (1.0 - u))) ** (1.0 / (eta + 1.0)),
    )
    c1 = 0.5 * ((1.0 + beta) * p1 + (1.0 - beta) * p2)
    c2 = 0.5 * ((1.0 - beta) * p1 + (1.0 + beta) * p2)
    apply = pair_on[:, None] & var_on
    children = np.empty_like(parents)
    children[0::2] = np.where(apply, c1, p1)
    children[1::2] = np.where(apply, c2, p2)
    return domain.clip(children)


def _polynomial_mutation(
    pop: np.ndarray,
    domain: Box,
    prob: float,
    eta: float,
    rng: np.random.Generator,
) -> np.ndarray:
    mutate = rng.random(pop.shape) < prob
    u = rng.random(pop.shape)
    delta = np.where(
        u < 0.5,
        (2.0 * u) ** (1.0 / (eta + 1.0)) - 1.0,
        1.0 - (2.0 * (1.0 - u)) ** (1.0 / (eta + 1.0)),
    )
    out = pop + np.where(mutate, delta * domain.widths, 0.0)
    return domain.clip(out)


def _environmental_selection(
    points: np.ndarray, size: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pick ``size`` survivors by (rank asc, crowding desc, index asc)."""
    ranks = _fast_non_dominated_ranks(points)
    crowd = _crowding_distance(points, ranks)
    order = np.lexsort((np.arange(points.shape[0]), -crowd, ranks))
    chosen = order[:size]
    return chosen, ranks[chosen], crowd[chosen]


def nsga2_solve(
    objective: Objective,
    domain: Box,
    cfg: Nsga2Config,
    initial_points: np.ndarray | None = None,
) -> ParetoSet:
    """Maximize a vector objective; returns the final non-dominated subset.

    ``initial_points`` seeds part of the starting population (elitism then
    guarantees the result is never dominated at those inputs); the remainder
    is sampled uniformly.
    """
    rng = np.random.default_rng(cfg.rng_seed)
    mutation_prob = (
        cfg.mutation_prob if cfg.mutation_prob is not None else 1.0 / domain.dim
    )
    pop = domain.sample(rng, cfg.population)
    if initial_points is not None and initial_points.size > 0:
        seeds = domain.clip(np.atleast_2d(initial_points))[-cfg.population :]
        pop[: seeds.shape[0]] = seeds
    values = np.atleast_2d(np.asarray(objective(pop), dtype=float))
    ranks = _fast_non_dominated_ranks(values)
    crowd = _crowding_distance(values, ranks)

    for _ in range(cfg.generations):
        parent_idx = _tournament(ranks, crowd, rng, cfg.population)
        offspring = _sbx_crossover(
            pop[parent_idx], domain, cfg.crossover_prob, cfg.crossover_eta, rng
        )
        offspring = _polynomial_mutation(
            offspring, domain, mutation_prob, cfg.mutation_eta, rng
        )
        off_values = np.atleast_2d(np.asarray(objective(offspring), dtype=float))
        all_pop = np.vstack([pop, offspring])
        all_values = np.vstack([values, off_values])
        chosen, ranks, crowd = _environmental_selection(all_values, cfg.population)
        pop = all_pop[chosen]
        values = all_values[chosen]

    return non_dominated_filter(values, pop)
