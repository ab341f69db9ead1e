"""Dominated-region geometry shared by the acquisition estimators.

A sampled frontier induces two axis-aligned regions in objective space: the
set dominated by the frontier (used for the tight truncation) and the
complement of the set dominating it (used for the conservative truncation).
Both are decomposed once per frontier into disjoint hyper-rectangles by a
quick-hypervolume-style recursion, after which Gaussian mass and Lebesgue
volume reduce to sums of per-cell products.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import CellLimitError
from .moo import ParetoSet

DEFAULT_MAX_CELLS = 5_000_000
PROB_FLOOR = 1e-300
PROB_CEIL = 1.0 - 1e-16


def dominates(a: np.ndarray, b: np.ndarray) -> bool:
    """Strict Pareto dominance: a >= b everywhere and a > b somewhere."""
    a, b = _check_pair(a, b)
    return bool(np.all(a >= b) and np.any(a > b))


def dominated_or_equal(a: np.ndarray, b: np.ndarray) -> bool:
    """Weak componentwise order: a is dominated by b or equal to it."""
    a, b = _check_pair(a, b)
    return bool(np.all(a <= b))


def _check_pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a, b


def region_membership(
    frontier_points: np.ndarray, values: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Classify rows of ``values`` against a frontier.

    Returns boolean arrays ``(in_over, in_under)``: membership in the region
    dominated by the frontier, and in the complement of the region dominating
    it. Following the set definitions literally, a value that equals a
    frontier point dominates-or-equals it and therefore falls outside the
    conservative region (and is excluded from the tight one too, so the two
    regions stay nested); such exact ties only arise at inputs whose path
    value is itself a frontier member, where the sample carries no
    information.
    """
    values = np.atleast_2d(values)
    le = np.all(values[:, None, :] <= frontier_points[None, :, :], axis=2)
    ge = np.all(values[:, None, :] >= frontier_points[None, :, :], axis=2)
    in_under = ~ge.any(axis=1)
    in_over = le.any(axis=1) & in_under
    return in_over, in_under


@dataclass(frozen=True)
class Cell:
    """Half-open box (lower, upper]; lower entries may be -inf."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        if not np.all(lower < upper):
            raise ValueError("cell requires lower < upper in every coordinate")
        if not np.all(np.isfinite(upper)):
            raise ValueError("cell upper corner must be finite")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)


@dataclass(frozen=True)
class CellDecomposition:
    """Disjoint cells covering the dominated region of ``source``.

    ``orientation`` records whether the source was used as-is ("over") or
    sign-flipped ("flipped", covering the region dominating the original
    frontier after negation).
    """

    lowers: np.ndarray  # (C, L)
    uppers: np.ndarray  # (C, L)
    source: ParetoSet
    orientation: str = "over"

    @property
    def n_cells(self) -> int:
        return self.lowers.shape[0]

    @property
    def n_objectives(self) -> int:
        return self.lowers.shape[1]

    def cells(self) -> list[Cell]:
        return [Cell(lo, up) for lo, up in zip(self.lowers, self.uppers)]


def _decompose_region(
    points: np.ndarray, lo: np.ndarray, hi: np.ndarray, max_cells: int
) -> tuple[np.ndarray, np.ndarray]:
    """Disjoint boxes covering {f in (lo, hi] : f <= y for some y in points}.

    Recursion: emit the box below the pivot (the point with the largest
    bounding-volume contribution), partition the remainder of the ambient box
    by the sign pattern relative to the pivot, and recurse into each part
    with the surviving points. Duplicate and dominated points are filtered at
    every level.
    """
    n_obj = lo.size
    if n_obj == 2:
        return _decompose_staircase(points, lo, hi, max_cells)
    masks = ((np.arange(1, 2**n_obj)[:, None] >> np.arange(n_obj)) & 1).astype(bool)
    lowers: list[np.ndarray] = []
    uppers: list[np.ndarray] = []
    stack: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = [(points, lo, hi)]
    while stack:
        pts, lo_i, hi_i = stack.pop()
        pts = np.minimum(pts, hi_i)
        pts = pts[np.all(pts > lo_i, axis=1)]
        if pts.shape[0] == 0:
            continue
        pts = np.unique(pts, axis=0)
        if pts.shape[0] > 1:
            le = np.all(pts[:, None, :] <= pts[None, :, :], axis=2)
            np.fill_diagonal(le, False)
            pts = pts[~le.any(axis=1)]
        if len(lowers) >= max_cells:
            raise CellLimitError(
                f"cell decomposition exceeded the budget of {max_cells} cells"
            )
        if pts.shape[0] == 1:
            lowers.append(lo_i)
            uppers.append(pts[0])
            continue
        base = np.where(np.isfinite(lo_i), lo_i, pts.min(axis=0) - 1.0)
        pivot = pts[int(np.argmax(np.prod(pts - base, axis=1)))]
        lowers.append(lo_i)
        uppers.append(pivot)
        for mask in masks:
            if np.any(mask & (pivot >= hi_i)):
                continue
            sub_lo = np.where(mask, pivot, lo_i)
            sub_hi = np.where(mask, hi_i, pivot)
            stack.append((pts, sub_lo, sub_hi))
    if not lowers:
        return np.empty((0, n_obj)), np.empty((0, n_obj))
    return np.asarray(lowers), np.asarray(uppers)


def _decompose_staircase(
    points: np.ndarray, lo: np.ndarray, hi: np.ndarray, max_cells: int
) -> tuple[np.ndarray, np.ndarray]:
    """Two-objective special case: one vertical strip per maximal point.

    Equivalent to the generic recursion's output region (the pivot split in
    two dimensions degenerates to a staircase), computed in one sweep.
    """
    pts = np.minimum(points, hi)
    pts = pts[np.all(pts > lo, axis=1)]
    if pts.shape[0] == 0:
        return np.empty((0, 2)), np.empty((0, 2))
    pts = np.unique(pts, axis=0)  # sorted ascending by (f1, f2)
    # per f1 value keep the largest f2, then keep the strictly decreasing
    # envelope: a point survives only if its f2 beats every larger-f1 point's
    group_last = np.concatenate([pts[1:, 0] != pts[:-1, 0], [True]])
    pts = pts[group_last]
    suffix_max = np.concatenate(
        [np.maximum.accumulate(pts[::-1, 1])[::-1][1:], [-np.inf]]
    )
    pts = pts[pts[:, 1] > suffix_max]
    if pts.shape[0] > max_cells:
        raise CellLimitError(
            f"cell decomposition exceeded the budget of {max_cells} cells"
        )
    uppers = pts
    lowers = np.column_stack(
        [np.concatenate([[lo[0]], pts[:-1, 0]]), np.full(pts.shape[0], lo[1])]
    )
    return lowers, uppers


def decompose_dominated(
    frontier: ParetoSet, max_cells: int = DEFAULT_MAX_CELLS
) -> CellDecomposition:
    """Cells covering the region dominated by (or equal to) the frontier."""
    if len(frontier) == 0:
        raise ValueError("cannot decompose an empty frontier")
    pts = frontier.points
    lo = np.full(pts.shape[1], -np.inf)
    hi = pts.max(axis=0)
    lowers, uppers = _decompose_region(pts, lo, hi, max_cells)
    return CellDecomposition(lowers, uppers, frontier, orientation="over")


def flipped_decomposition(
    frontier: ParetoSet, max_cells: int = DEFAULT_MAX_CELLS
) -> CellDecomposition:
    """Cells covering the sign-flipped image of the region dominating the frontier.

    A point f dominates-or-equals some frontier point exactly when -f lies in
    the region dominated by the negated frontier, so this decomposition turns
    the "dominating region" into a dominated one that the same recursion covers.
    """
    flipped = ParetoSet(-frontier.points)
    dec = decompose_dominated(flipped, max_cells)
    return CellDecomposition(dec.lowers, dec.uppers, frontier, orientation="flipped")


def cell_probability(
    cells: CellDecomposition, mean: np.ndarray, std: np.ndarray
) -> float | np.ndarray:
    """Gaussian mass of the decomposed region for diagonal N(mean, std^2).

    Accepts a single (L,) moment pair or batches of shape (m, L); returns a
    scalar or an (m,) array accordingly.
    """
    mean = np.asarray(mean, dtype=float)
    single = mean.ndim == 1
    mean = np.atleast_2d(mean)
    std = np.atleast_2d(np.asarray(std, dtype=float))
    if np.any(std <= 0):
        raise ValueError("std must be strictly positive")
    if cells.n_cells == 0:
        return 0.0 if single else np.zeros(mean.shape[0])
    out = np.empty(mean.shape[0])
    # chunk the (m, C, L) broadcast to bound peak memory
    chunk = max(1, int(2e7 // max(1, cells.n_cells * cells.n_objectives)))
    for start in range(0, mean.shape[0], chunk):
        mu = mean[start : start + chunk, None, :]
        sig = std[start : start + chunk, None, :]
        hi = ndtr((cells.uppers[None, :, :] - mu) / sig)
        lo = ndtr((cells.lowers[None, :, :] - mu) / sig)
        out[start : start + chunk] = np.sum(np.prod(hi - lo, axis=2), axis=1)
    out = np.clip(out, 0.0, 1.0)
    return float(out[0]) if single else out


@dataclass(frozen=True)
class TruncationQuantities:
    """Normalization masses of the two truncations and their ratio."""

    z_over: float
    z_under: float

    @property
    def p_hat(self) -> float:
        return self.z_over / self.z_under


def truncation_masses(
    over_cells: CellDecomposition,
    flipped_cells: CellDecomposition,
    mean: np.ndarray,
    std: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Batched (z_over, z_under) under diagonal N(mean, std^2).

    z_under is one minus the mass of the dominating region, computed on the
    sign-flipped Gaussian through the flipped decomposition. Values are
    floored away from 0 and 1 so downstream logs stay finite, and z_over is
    capped at z_under (the exact quantities are nested).
    """
    mean = np.atleast_2d(np.asarray(mean, dtype=float))
    std = np.atleast_2d(np.asarray(std, dtype=float))
    z_over = np.atleast_1d(cell_probability(over_cells, mean, std))
    z_out = np.atleast_1d(cell_probability(flipped_cells, -mean, std))
    z_under = 1.0 - z_out
    z_under = np.clip(z_under, PROB_FLOOR, PROB_CEIL)
    z_over = np.clip(z_over, PROB_FLOOR, PROB_CEIL)
    z_over = np.minimum(z_over, z_under)
    return z_over, z_under


def truncation_quantities(
    frontier: ParetoSet,
    mean: np.ndarray,
    std: np.ndarray,
    over_cells: CellDecomposition | None = None,
    flipped_cells: CellDecomposition | None = None,
) -> TruncationQuantities:
    """Truncation masses for one Gaussian; decompositions are built if absent."""
    if over_cells is None:
        over_cells = decompose_dominated(frontier)
    if flipped_cells is None:
        flipped_cells = flipped_decomposition(frontier)
    if over_cells.source is not flipped_cells.source and not np.array_equal(
        over_cells.source.points, flipped_cells.source.points
    ):
        raise ValueError("decompositions must come from the same frontier")
    z_over, z_under = truncation_masses(over_cells, flipped_cells, mean, std)
    return TruncationQuantities(float(z_over[0]), float(z_under[0]))


def hypervolume(
    frontier: ParetoSet,
    reference: np.ndarray,
    max_cells: int = DEFAULT_MAX_CELLS,
) -> float:
    """Lebesgue volume dominated by the frontier above ``reference``.

    Frontier points that do not strictly exceed the reference in every
    coordinate contribute nothing and are dropped.
    """
    reference = np.asarray(reference, dtype=float)
    if len(frontier) == 0:
        return 0.0
    pts = frontier.points
    if pts.shape[1] != reference.size:
        raise ValueError("reference dimension does not match frontier")
    pts = pts[np.all(pts > reference, axis=1)]
    if pts.shape[0] == 0:
        return 0.0
    lowers, uppers = _decompose_region(pts, reference, pts.max(axis=0), max_cells)
    return float(np.sum(np.prod(uppers - lowers, axis=1)))
