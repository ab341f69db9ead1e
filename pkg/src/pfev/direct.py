"""Deterministic dividing-rectangles maximization over a box domain.

The search trisects the domain, always keeping rectangle centers as the only
evaluation points. Each round selects the potentially optimal rectangles
(those on the upper convex hull of value versus half-diagonal, with a
non-trivial-improvement slack) and subdivides them along their longest sides.
Candidate centers of one round are evaluated in a single batched call.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .domain import Box

BatchFunction = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class DirectConfig:
    max_evaluations: int = 2000
    max_iterations: int = 10_000
    epsilon: float = 1e-4

    def __post_init__(self):
        if self.max_evaluations < 1:
            raise ValueError("max_evaluations must be at least 1")
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")


class _Rect:
    __slots__ = ("center", "splits", "value", "half_diag", "group")

    def __init__(self, center: np.ndarray, splits: np.ndarray, value: float):
        self.center = center
        self.splits = splits
        self.value = value
        sides = 3.0 ** (-splits.astype(float))
        self.half_diag = 0.5 * float(np.linalg.norm(sides))
        self.group = tuple(np.sort(splits).tolist())


def _potentially_optimal(rects: list[_Rect], f_best: float, eps: float) -> list[_Rect]:
    """Best rectangle per size group that admits a slope making it the argmax."""
    groups: dict[tuple, _Rect] = {}
    for r in rects:
        cur = groups.get(r.group)
        if cur is None or r.value > cur.value:
            groups[r.group] = r
    cands = sorted(groups.values(), key=lambda r: r.half_diag)
    diag = np.array([r.half_diag for r in cands])
    vals = np.array([r.value for r in cands])
    chosen = []
    for j, r in enumerate(cands):
        smaller = diag < diag[j] - 1e-15
        larger = diag > diag[j] + 1e-15
        k_lo = 0.0
        if smaller.any():
            k_lo = float(np.max((vals[smaller] - vals[j]) / (diag[j] - diag[smaller])))
        k_hi = np.inf
        if larger.any():
            k_hi = float(np.min((vals[larger] - vals[j]) / (diag[larger] - diag[j])))
        if k_lo > k_hi:
            continue
        if larger.any():
            # require that the optimistic bound beats the incumbent by a slack
            improvement = vals[j] + k_hi * diag[j] - (f_best + eps * abs(f_best))
            if improvement < 0:
                continue
        chosen.append(r)
    return chosen


def direct_maximize(
    f: BatchFunction, domain: Box, cfg: DirectConfig
) -> tuple[np.ndarray, float]:
    """Maximize ``f`` over ``domain``; returns the best evaluated point.

    ``f`` must accept a batch ``(m, d)`` and return ``(m,)`` values; it is
    always called with points inside the domain.
    """
    dim = domain.dim

    def evaluate(unit_points: np.ndarray) -> np.ndarray:
        return np.asarray(
            f(domain.from_unit(np.atleast_2d(unit_points))), dtype=float
        ).ravel()

    center = np.full(dim, 0.5)
    value = float(evaluate(center[None, :])[0])
    rects = [_Rect(center, np.zeros(dim, dtype=int), value)]
    evals = 1
    best_x, best_v = center.copy(), value

    for _ in range(cfg.max_iterations):
        if evals >= cfg.max_evaluations:
            break
        selected = _potentially_optimal(rects, best_v, cfg.epsilon)
        progressed = False
        for rect in selected:
            long_dims = np.flatnonzero(rect.splits == rect.splits.min())
            n_new = 2 * long_dims.size
            if evals + n_new > cfg.max_evaluations:
                continue
            delta = 3.0 ** (-(rect.splits[long_dims[0]] + 1.0))
            probes = np.repeat(rect.center[None, :], n_new, axis=0)
            for k, d_idx in enumerate(long_dims):
                probes[2 * k, d_idx] += delta
                probes[2 * k + 1, d_idx] -= delta
            probe_vals = evaluate(probes)
            evals += n_new
            progressed = True

            best_probe = int(np.argmax(probe_vals))
            if probe_vals[best_probe] > best_v:
                best_v = float(probe_vals[best_probe])
                best_x = probes[best_probe].copy()

            # split along the most promising dimensions first so the better
            # probe centers land in the larger child rectangles
            per_dim_best = np.maximum(probe_vals[0::2], probe_vals[1::2])
            order = np.argsort(-per_dim_best, kind="stable")
            splits = rect.splits.copy()
            for k in order:
                d_idx = long_dims[k]
                splits[d_idx] += 1
                child_splits = splits.copy()
                rects.append(
                    _Rect(probes[2 * k], child_splits, float(probe_vals[2 * k]))
                )
                rects.append(
                    _Rect(probes[2 * k + 1], child_splits, float(probe_vals[2 * k + 1]))
                )
            rect.splits = splits
            rect.half_diag = _Rect(rect.center, splits, rect.value).half_diag
            rect.group = tuple(np.sort(splits).tolist())
        if not progressed:
            break

    return domain.from_unit(best_x), best_v
