"""Ground-truth objective functions and reference frontiers.

All problems expose a maximization-oriented batch ``evaluate`` over the unit
box: classical minimization benchmarks are negated and their native domains
affinely mapped to [0, 1]^d. Synthetic problems are prior draws of the same
feature-map family the sampler uses, so their smoothness matches the
surrogate model family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .domain import Box, unit_box
from .moo import Nsga2Config, ParetoSet, non_dominated_filter, nsga2_solve
from .sampler import draw_prior_path

REFERENCE_GENERATIONS = 10_000
REFERENCE_POPULATION = 100
CACHE_FORMAT_VERSION = 1


@dataclass(frozen=True)
class Problem:
    """A deterministic vector objective on the unit box (maximization)."""

    name: str
    dim: int
    n_objectives: int
    evaluate: Callable[[np.ndarray], np.ndarray]
    metadata: dict = field(default_factory=dict)

    @property
    def domain(self) -> Box:
        return unit_box(self.dim)

    @property
    def problem_id(self) -> str:
        return self.metadata.get("problem_id", self.name)


# ----------------------------------------------------------------------------
# raw benchmark definitions on their native domains (minimization unless noted)
# ----------------------------------------------------------------------------


def fonseca(x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    shift = 1.0 / np.sqrt(x.shape[1])
    f1 = 1.0 - np.exp(-np.sum((x - shift) ** 2, axis=1))
    f2 = 1.0 - np.exp(-np.sum((x + shift) ** 2, axis=1))
    return np.column_stack([f1, f2])


def kursawe(x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != 3:
        raise ValueError("kursawe is defined for 3 inputs")
    f1 = np.sum(
        -10.0 * np.exp(-0.2 * np.sqrt(x[:, :2] ** 2 + x[:, 1:3] ** 2)), axis=1
    )
    f2 = np.sum(np.abs(x) ** 0.8 + 5.0 * np.sin(x**3), axis=1)
    return np.column_stack([f1, f2])


def viennet(x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != 2:
        raise ValueError("viennet is defined for 2 inputs")
    a, b = x[:, 0], x[:, 1]
    sq = a**2 + b**2
    f1 = 0.5 * sq + np.sin(sq)
    f2 = (3.0 * a - 2.0 * b + 4.0) ** 2 / 8.0 + (a - b + 1.0) ** 2 / 27.0 + 15.0
    f3 = 1.0 / (sq + 1.0) - 1.1 * np.exp(-sq)
    return np.column_stack([f1, f2, f3])


def fes1(x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    d = x.shape[1]
    i = np.arange(1, d + 1)
    f1 = np.sum(np.abs(x - np.exp((i / d) ** 2 / 3.0)) ** 0.5, axis=1)
    f2 = np.sum((x - 0.5 * np.cos(10.0 * np.pi * i / d) - 0.5) ** 2, axis=1)
    return np.column_stack([f1, f2])


def fes2(x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    d = x.shape[1]
    i = np.arange(1, d + 1)
    f1 = np.sum((x - 0.5 * np.cos(10.0 * np.pi * i / d) - 0.5) ** 2, axis=1)
    f2 = np.sum(np.abs(x - np.sin(i - 1.0) ** 2 * np.cos(i - 1.0) ** 2) ** 0.5, axis=1)
    f3 = np.sum(
        np.abs(x - 0.25 * np.cos(i - 1.0) * np.cos(2.0 * i - 2.0) - 0.5) ** 0.5, axis=1
    )
    return np.column_stack([f1, f2, f3])


def fes3(x: np.ndarray) -> np.ndarray:
    """Already maximization-oriented: the listing carries leading minus signs."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    d = x.shape[1]
    i = np.arange(1, d + 1)
    f1 = -np.sum(np.abs(x - np.exp((i / d) ** 2) / 3.0) ** 0.5, axis=1)
    f2 = -np.sum(np.abs(x - np.sin(i - 1.0) ** 2 * np.cos(i - 1.0) ** 2) ** 0.5, axis=1)
    f3 = -np.sum(
        np.abs(x - (0.25 * np.cos(i - 1.0) * np.cos(2.0 * i - 1.0) - 0.5)) ** 0.5,
        axis=1,
    )
    f4 = -np.sum(
        (x - 0.5 * np.sin(1000.0 * np.pi * i / d) - 0.5) ** 2, axis=1
    )
    return np.column_stack([f1, f2, f3, f4])


# name -> (raw fn, default d, L, native bounds per coordinate, minimizes?)
_NAMED = {
    "fonseca": (fonseca, 2, 2, (-4.0, 4.0), True),
    "kursawe": (kursawe, 3, 2, (-5.0, 5.0), True),
    "viennet": (viennet, 2, 3, (-3.0, 3.0), True),
    "fes1": (fes1, 3, 2, (0.0, 1.0), True),
    "fes2": (fes2, 3, 3, (0.0, 1.0), True),
    "fes3": (fes3, 3, 4, (0.0, 1.0), False),
}

_FIXED_DIM = {"kursawe", "viennet"}


def make_named(name: str, dim: int | None = None) -> Problem:
    """Named benchmark on the unit box, negated when the original minimizes."""
    key = name.lower()
    if key not in _NAMED:
        raise ValueError(f"unknown benchmark name: {name!r}")
    raw_fn, default_dim, n_obj, (lo, hi), minimizes = _NAMED[key]
    if dim is None:
        dim = default_dim
    elif key in _FIXED_DIM and dim != default_dim:
        raise ValueError(f"{name} has a fixed input dimension of {default_dim}")
    raw_box = Box(np.full(dim, lo), np.full(dim, hi))
    sign = -1.0 if minimizes else 1.0

    def evaluate(u: np.ndarray) -> np.ndarray:
        return sign * raw_fn(raw_box.from_unit(np.atleast_2d(u)))

    return Problem(
        name=key,
        dim=dim,
        n_objectives=n_obj,
        evaluate=evaluate,
        metadata={
            "problem_id": f"{key}-d{dim}",
            "raw_lower": lo,
            "raw_upper": hi,
            "negated": minimizes,
        },
    )


def make_synthetic_gp(
    dim: int,
    n_objectives: int,
    length_scale: float,
    n_features: int = 1000,
    seed: int = 0,
) -> Problem:
    """Independent smooth random objectives drawn from the prior feature family."""
    if dim < 1 or n_objectives < 2:
        raise ValueError("synthetic problems need dim >= 1 and at least 2 objectives")
    path = draw_prior_path(dim, n_objectives, length_scale, n_features, seed)
    return Problem(
        name="synthetic-gp",
        dim=dim,
        n_objectives=n_objectives,
        evaluate=path,
        metadata={
            "problem_id": f"syn-d{dim}-L{n_objectives}-ls{length_scale:g}-s{seed}",
            "length_scale": length_scale,
            "n_features": n_features,
            "seed": seed,
        },
    )


def make_combined(a: Problem, b: Problem) -> Problem:
    """Stack two problems with the same input dimension into one."""
    if a.dim != b.dim:
        raise ValueError("combined problems must share the input dimension")

    def evaluate(u: np.ndarray) -> np.ndarray:
        return np.hstack([a.evaluate(u), b.evaluate(u)])

    return Problem(
        name=f"{a.name}+{b.name}",
        dim=a.dim,
        n_objectives=a.n_objectives + b.n_objectives,
        evaluate=evaluate,
        metadata={
            "problem_id": f"{a.problem_id}+{b.problem_id}",
            "components": [a.problem_id, b.problem_id],
        },
    )


# ----------------------------------------------------------------------------
# reference frontiers
# ----------------------------------------------------------------------------


def _cache_path(cache_dir: Path, problem_id: str, seed: int, generations: int) -> Path:
    safe = problem_id.replace("/", "_").replace("+", "_plus_")
    return cache_dir / f"ref_{safe}_seed{seed}_gen{generations}.txt"


def _write_frontier(path: Path, frontier: ParetoSet, header: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# pfev-reference-frontier v{CACHE_FORMAT_VERSION}"]
    for key, value in header.items():
        lines.append(f"# {key}: {value}")
    for row in frontier.points:
        lines.append(" ".join(f"{v:.17g}" for v in row))
    path.write_text("\n".join(lines) + "\n")


def _read_frontier(path: Path) -> ParetoSet:
    rows = []
    for line in path.read_text().splitlines():
        if line.startswith("#") or not line.strip():
            continue
        rows.append([float(tok) for tok in line.split()])
    return non_dominated_filter(np.asarray(rows))


def reference_frontier(
    problem: Problem,
    budget_generations: int = REFERENCE_GENERATIONS,
    population: int = REFERENCE_POPULATION,
    seed: int = 0,
    cache_dir: str | Path | None = None,
) -> ParetoSet:
    """Long evolutionary run on the true problem; disk-cached when a dir is given."""
    cache_file = None
    if cache_dir is not None:
        cache_file = _cache_path(
            Path(cache_dir), problem.problem_id, seed, budget_generations
        )
        if cache_file.exists():
            return _read_frontier(cache_file)
    cfg = Nsga2Config(
        population=population, generations=budget_generations, rng_seed=seed
    )
    frontier = nsga2_solve(problem.evaluate, problem.domain, cfg)
    if cache_file is not None:
        _write_frontier(
            cache_file,
            frontier,
            {
                "problem": problem.problem_id,
                "seed": seed,
                "generations": budget_generations,
                "population": population,
                "tool_version": "pfev-0.1.0",
            },
        )
        return _read_frontier(cache_file)
    return frontier
