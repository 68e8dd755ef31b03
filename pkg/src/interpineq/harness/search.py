"""Local search for fields that push an inequality's ratio towards 1.

Coordinate ascent: each pass visits every parameter in turn and maximizes
the ratio along that coordinate with a golden-section search over a window
around the current value (the window end points are always tried too, since
the ratio is often maximal there).  A pass whose relative gain falls below
the tolerance halves the window; the search stops when the window is
exhausted or the evaluation budget runs out.  The result is the best point
seen; nothing is claimed about global optima.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..corpus import _radii
from ..lattice import Box, PiecewiseConstantField
from ..norms import GRID_ALIGNED, CubeFamily
from .checks import (
    INTERPOLATION,
    TheoremId,
    VerificationReport,
    check_interpolation,
)

INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
MAX_DIMENSION = 64
FAMILIES = ("cells", "radial_log")


@dataclass(frozen=True)
class SearchSpec:
    """What to search.

    ``family="cells"``: the parameters are the values of a function constant
    on ``dimension`` equal sub-intervals of the box (n = 1), each in
    ``bounds``; the default start is uniform random from ``seed``.
    ``family="radial_log"``: ``f`` is a decreasing radial profile, with knots
    at ``dimension`` radii spaced geometrically from one grid cell to the box
    half-side; parameter ``i`` is the drop of ``log f`` between knots ``i-1``
    and ``i`` (the first one only rescales), ``log f`` is linear in
    ``log |x|`` between knots, and the default start is the constant field.
    """

    theorem: TheoremId
    family: str = "cells"
    dimension: int = 8
    budget: int = 2000
    tolerance: float = 1e-6
    p: float = 1.0
    q: float = 2.0
    kappa: float | None = None
    level: int = 8
    half_side: float = 1.0
    bounds: tuple[float, float] = (0.0, 1.0)
    seed: int = 0
    start: tuple[float, ...] | None = None
    golden_iterations: int = 24

    def __post_init__(self):
        if TheoremId(self.theorem) not in INTERPOLATION:
            raise ValueError(f"cannot search {self.theorem}")
        if self.family not in FAMILIES:
            raise ValueError(f"unknown search family {self.family!r}")
        if not 1 <= self.dimension <= MAX_DIMENSION:
            raise ValueError(f"dimension must lie in [1, {MAX_DIMENSION}]")
        if self.budget < 1:
            raise ValueError("budget must be at least 1")
        if self.family == "cells" and (1 << self.level) % self.dimension:
            raise ValueError("cells family needs dimension dividing the cell count")


@dataclass
class SearchResult:
    report: VerificationReport
    params: np.ndarray
    evaluations: int
    history: list[float] = field(default_factory=list)


class _FieldMap:
    def __init__(self, spec: SearchSpec):
        self.spec = spec
        self.box = Box.centered(1, spec.half_side)
        if spec.family == "radial_log":
            r = _radii(self.box, spec.level, "outer")
            cell = float(self.box.side) / (1 << spec.level)
            self.log_r = np.log(r)
            self.log_knots = np.linspace(math.log(cell), math.log(spec.half_side), spec.dimension)

    def __call__(self, x: np.ndarray) -> PiecewiseConstantField:
        s = self.spec
        if s.family == "cells":
            vals = np.repeat(x, (1 << s.level) // s.dimension)
        else:
            vals = np.exp(np.interp(self.log_r, self.log_knots, -np.cumsum(x)))
        return PiecewiseConstantField(s.level, self.box, vals)


def _golden_max(g, lo: float, hi: float, iterations: int):
    """Golden-section maximization of ``g`` on ``[lo, hi]``; returns (x, g(x)) of the best probe."""
    a, b = lo, hi
    c = b - INVPHI * (b - a)
    d = a + INVPHI * (b - a)
    gc, gd = g(c), g(d)
    best = (c, gc) if gc >= gd else (d, gd)
    for _ in range(iterations):
        if gc >= gd:
            b, d, gd = d, c, gc
            c = b - INVPHI * (b - a)
            gc = g(c)
        else:
            a, c, gc = c, d, gd
            d = a + INVPHI * (b - a)
            gd = g(d)
        for x, v in ((c, gc), (d, gd)):
            if v > best[1]:
                best = (x, v)
    return best


class _Budget(Exception):
    pass


def sharpness_search(spec: SearchSpec, family: CubeFamily = GRID_ALIGNED) -> SearchResult:
    theorem = TheoremId(spec.theorem)
    to_field = _FieldMap(spec)
    lo, hi = spec.bounds
    if spec.start is not None:
        x = np.array(spec.start, dtype=float)
    else:
        x = np.random.default_rng(spec.seed).uniform(lo, hi, spec.dimension)
    if spec.family == "radial_log" and spec.start is None:
        x = np.full(spec.dimension, min(max(0.0, lo), hi))

    evals = 0
    best_ratio = -math.inf
    best_x = x.copy()
    best_report: VerificationReport | None = None
    history: list[float] = []

    def evaluate(point: np.ndarray) -> float:
        nonlocal evals, best_ratio, best_x, best_report
        if evals >= spec.budget:
            raise _Budget
        evals += 1
        rep = check_interpolation(to_field(point), theorem, spec.p, spec.q, spec.kappa, family,
                                  function=f"search:{spec.family}")
        ratio = 0.0 if rep.vacuous else rep.ratio
        if ratio > best_ratio or best_report is None:
            best_ratio, best_x, best_report = ratio, point.copy(), rep
        history.append(best_ratio)
        return ratio

    window = (hi - lo) / 4.0
    min_window = max(spec.tolerance, 1e-12) * (hi - lo)
    try:
        current = evaluate(x)
        while window >= min_window:
            start_ratio = current
            for i in range(spec.dimension):
                def along(t, i=i):
                    y = x.copy()
                    y[i] = t
                    return evaluate(y)

                a, b = max(lo, x[i] - window), min(hi, x[i] + window)
                t, v = _golden_max(along, a, b, spec.golden_iterations)
                for t_end in (a, b):
                    v_end = along(t_end)
                    if v_end > v:
                        t, v = t_end, v_end
                if v > current:
                    x[i], current = t, v
            if current - start_ratio <= spec.tolerance * abs(start_ratio):
                window /= 2.0
    except _Budget:
        pass
    return SearchResult(best_report, best_x, evals, history)
