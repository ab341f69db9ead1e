"""Small shared numerics helpers."""

from __future__ import annotations

from typing import Callable

import numpy as np

_INV_PHI = (np.sqrt(5.0) - 1.0) / 2.0


def golden_section_maximize(
    fn: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-5,
    max_iter: int = 100,
) -> tuple[float, float]:
    """Maximize a unimodal scalar function on ``[lo, hi]``.

    Returns ``(argmax, value)``. Interval endpoints are included in the
    candidate set so the result never falls below ``max(fn(lo), fn(hi))``.
    """
    a, b = float(lo), float(hi)
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(max_iter):
        if b - a < tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = fn(d)
    candidates = [(lo, fn(lo)), (hi, fn(hi)), (c, fc), (d, fd)]
    return max(candidates, key=lambda t: t[1])


def spawn_rngs(seed: int, n: int) -> list[np.random.Generator]:
    """Derive ``n`` independent generators from one master seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]
